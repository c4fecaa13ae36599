# Copyright 2026 rekey authors
#
# Licensed under the Apache License, Version 2.0. You may obtain a copy at
# http://www.apache.org/licenses/LICENSE-2.0

"""Random password generation and the entropy arithmetic behind it."""

import dataclasses
import math
import secrets
from typing import Protocol

import numpy as np
from scipy import stats

from rekey import config

# Printable ASCII without the space character.
PRINTABLE_NO_SPACE = ''.join(chr(c) for c in range(0x21, 0x7f))


class EntropySourceUnavailable(Exception):
    """The operating system could not supply random bits."""


class RandomBits(Protocol):

    def getrandbits(self, k: int, /) -> int:
        ...


@dataclasses.dataclass(frozen=True, slots=True)
class CharsetSpec:
    characters: str

    def __post_init__(self):
        if len(set(self.characters)) != len(self.characters):
            raise ValueError('Charset contains duplicate characters.')

    def __len__(self) -> int:
        return len(self.characters)


@dataclasses.dataclass(frozen=True, slots=True)
class GeneratedPassword:
    value: str

    @property
    def length(self) -> int:
        return len(self.value)

    def __str__(self) -> str:
        return self.value


def default_charset() -> CharsetSpec:
    return CharsetSpec(PRINTABLE_NO_SPACE)


def _uniform_index(rng: RandomBits, n: int) -> int:
    """Draws uniformly from range(n) by rejection, avoiding modulo bias."""
    if n == 1:
        return 0
    bits = (n - 1).bit_length()
    while True:
        candidate = rng.getrandbits(bits)
        if candidate < n:
            return candidate


def generate_password(
    charset: CharsetSpec | None = None,
    length: int | None = None,
    rng: RandomBits | None = None,
) -> GeneratedPassword:
    """Generates a password with each character i.i.d. uniform over `charset`.

    Args:
      charset: Allowed characters; defaults to the 94 printable non-space
        ASCII characters.
      length: Number of characters; defaults to `config.password_length`.
      rng: Source of random bits; defaults to the OS CSPRNG.

    Returns:
      The generated password.

    Raises:
      ValueError: If `length` < 1 or the charset is empty.
      EntropySourceUnavailable: If the random source fails.
    """
    if charset is None:
        charset = default_charset()
    length = config.password_length if length is None else length
    if length < 1:
        raise ValueError(f'length must be >= 1, got {length}')
    if not charset.characters:
        raise ValueError('charset is empty')
    if rng is None:
        rng = secrets.SystemRandom()
    chars = charset.characters
    try:
        value = ''.join(
            chars[_uniform_index(rng, len(chars))] for _ in range(length))
    except (NotImplementedError, OSError) as e:
        raise EntropySourceUnavailable(str(e)) from e
    return GeneratedPassword(value)


def entropy_per_char(charset: CharsetSpec) -> float:
    """Shannon entropy, in bits, of one uniformly drawn character."""
    if not charset.characters:
        raise ValueError('charset is empty')
    return math.log2(len(charset))


def encoding_bits(charset: CharsetSpec, length: int) -> int:
    """Whole bits needed to encode a password: ceil(bits/char) * length."""
    return math.ceil(entropy_per_char(charset)) * length


def guessing_entropy_bits(charset: CharsetSpec, length: int) -> float:
    return length * entropy_per_char(charset)


def uniformity_test(
    sample: str, charset: CharsetSpec | None = None
) -> tuple[float, float]:
    """Chi-square goodness of fit of `sample` against a uniform charset.

    Returns:
      (statistic, p_value).

    Raises:
      ValueError: If `sample` contains characters outside the charset.
    """
    if charset is None:
        charset = default_charset()
    index = {c: i for i, c in enumerate(charset.characters)}
    try:
        indices = np.fromiter((index[c] for c in sample), dtype=np.int64,
                              count=len(sample))
    except KeyError as e:
        raise ValueError(f'Character outside the charset: {e}') from None
    counts = np.bincount(indices, minlength=len(index))
    result = stats.chisquare(counts)
    return float(result.statistic), float(result.pvalue)
