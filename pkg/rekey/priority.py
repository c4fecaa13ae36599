# Copyright 2026 rekey authors
#
# Licensed under the Apache License, Version 2.0. You may obtain a copy at
# http://www.apache.org/licenses/LICENSE-2.0

"""Anchor-text priority scoring and link ranking."""

from collections.abc import Iterable, Sequence, Set
import dataclasses
import os
import pathlib
from typing import Self

from rekey import page_model
from rekey.constants import patterns


class PriorityTableError(Exception):
    """Malformed priority table."""


@dataclasses.dataclass(frozen=True, slots=True)
class PriorityTable:
    """Ordered (pattern, priority) pairs; patterns are unique and lowercase."""

    entries: tuple[tuple[str, int], ...]

    def __post_init__(self):
        seen = set()
        for pattern, _ in self.entries:
            if not pattern or pattern != pattern.lower():
                raise PriorityTableError(
                    f'Patterns must be non-empty and lowercase: {pattern!r}')
            if pattern in seen:
                raise PriorityTableError(f'Duplicate pattern: {pattern!r}')
            seen.add(pattern)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, int]]) -> Self:
        return cls(entries=tuple((p, int(v)) for p, v in pairs))

    def lookup(self, pattern: str) -> int | None:
        for entry, value in self.entries:
            if entry == pattern:
                return value
        return None


@dataclasses.dataclass(frozen=True, slots=True)
class ScoredLink:
    link: page_model.LinkRef
    priority: int
    # Position of the link among the page's links.
    doc_index: int


def default_table() -> PriorityTable:
    return PriorityTable.from_pairs(patterns.DEFAULT_PRIORITY_PATTERNS)


def load_table(path: os.PathLike[str] | str) -> PriorityTable:
    """Reads a `pattern<TAB>priority` file; `#` starts a comment line."""
    pairs = []
    text = pathlib.Path(path).read_text(encoding='utf-8')
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith('#'):
            continue
        pattern, sep, value = line.partition('\t')
        if not sep:
            raise PriorityTableError(f'{path}:{lineno}: expected a tab')
        try:
            priority = int(value.strip())
        except ValueError:
            raise PriorityTableError(
                f'{path}:{lineno}: bad priority {value.strip()!r}') from None
        pairs.append((pattern.strip().lower(), priority))
    return PriorityTable.from_pairs(pairs)


def dump_table(table: PriorityTable) -> str:
    return ''.join(f'{pattern}\t{value}\n' for pattern, value in table.entries)


def score_link(
    link: page_model.LinkRef,
    table: PriorityTable,
    doc_index: int = 0,
) -> ScoredLink | None:
    """Scores a link by its anchor text.

    Patterns match as case-insensitive substrings; the highest matching
    priority wins. Links matching no pattern are not candidates.
    """
    text = link.text.lower()
    matched = [value for pattern, value in table.entries if pattern in text]
    if not matched:
        return None
    return ScoredLink(link=link, priority=max(matched), doc_index=doc_index)


def rank_links(
    links: Sequence[page_model.LinkRef],
    table: PriorityTable,
    visited: Set[str] = frozenset(),
) -> list[ScoredLink]:
    """Orders candidate links by priority, then by document position."""
    scored = []
    for i, link in enumerate(links):
        if link.href in visited:
            continue
        candidate = score_link(link, table, doc_index=i)
        if candidate is not None:
            scored.append(candidate)
    scored.sort(key=lambda s: (-s.priority, s.doc_index))
    return scored
