# Copyright 2026 rekey authors
#
# Licensed under the Apache License, Version 2.0. You may obtain a copy at
# http://www.apache.org/licenses/LICENSE-2.0

"""Credential vault and the recovery journal.

WARNING: the vault file stores passwords in plain text. Protect it with file
system permissions; encryption at rest is not provided.
"""

import dataclasses
import datetime
import json
import os
import pathlib
from typing import Any, Self

from absl import logging

from rekey import fileio
from rekey import urls


class VaultError(Exception):
    """Base class for vault failures."""


class CorruptVault(VaultError):
    """The vault file exists but cannot be parsed. It is left untouched."""


class IOFailure(VaultError):
    """Reading or writing a store file failed."""


def _utcnow() -> datetime.datetime:
    return datetime.datetime.now(datetime.timezone.utc)


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class CredentialRecord:
    origin: str
    username: str
    password: str
    updated_at: datetime.datetime = dataclasses.field(default_factory=_utcnow)

    def __post_init__(self):
        if not self.password:
            raise ValueError('password must be non-empty')
        if self.updated_at.tzinfo is None:
            raise ValueError('updated_at must be timezone-aware')

    @property
    def key(self) -> tuple[str, str]:
        return (self.origin, self.username)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> Self:
        return cls(
            origin=urls.normalize_origin(d['origin']),
            username=str(d['username']),
            password=str(d['password']),
            updated_at=datetime.datetime.fromisoformat(d['updated_at']),
        )

    def as_dict(self) -> dict[str, str]:
        return {
            'origin': self.origin,
            'username': self.username,
            'password': self.password,
            'updated_at': self.updated_at.isoformat(),
        }


@dataclasses.dataclass
class Vault:
    """Credential records keyed by (origin, username), in insertion order."""

    records: dict[tuple[str, str], CredentialRecord] = dataclasses.field(
        default_factory=dict)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records.values())


def load(path: os.PathLike[str] | str) -> Vault:
    """Loads a vault; a missing or empty file is an empty vault.

    Raises:
      CorruptVault: If the file cannot be parsed.
      IOFailure: If the file cannot be read.
    """
    path = pathlib.Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except FileNotFoundError:
        return Vault()
    except (OSError, UnicodeDecodeError) as e:
        raise IOFailure(f'Cannot read vault {path}: {e}') from e
    if not text.strip():
        return Vault()
    try:
        raw = json.loads(text)
        if not isinstance(raw, list):
            raise TypeError('top level must be an array')
        vault = Vault()
        for item in raw:
            record = CredentialRecord.from_dict(item)
            if record.key in vault.records:
                raise ValueError(f'duplicate record for {record.key}')
            vault.records[record.key] = record
    except (ValueError, TypeError, KeyError) as e:
        raise CorruptVault(f'Cannot parse vault {path}: {e}') from e
    return vault


def dumps(vault: Vault) -> str:
    return json.dumps([r.as_dict() for r in vault], indent=2) + '\n'


def save(vault: Vault, path: os.PathLike[str] | str) -> None:
    """Atomically replaces the vault file.

    Raises:
      IOFailure: If the file cannot be written; the old file stays intact.
    """
    try:
        fileio.atomic_write_text(path, dumps(vault))
    except OSError as e:
        raise IOFailure(f'Cannot write vault {path}: {e}') from e
    logging.debug('Saved %d vault records to %s', len(vault), path)


def upsert(vault: Vault, record: CredentialRecord) -> CredentialRecord:
    """Inserts or replaces the record for (origin, username), stamped now."""
    stamped = dataclasses.replace(
        record, origin=urls.normalize_origin(record.origin),
        updated_at=_utcnow())
    vault.records[stamped.key] = stamped
    return stamped


def remove(vault: Vault, origin: str, username: str) -> bool:
    return vault.records.pop(
        (urls.normalize_origin(origin), username), None) is not None


def find(
    vault: Vault, origin: str, username: str | None = None
) -> CredentialRecord | None:
    """Returns the record for `origin`; the first one if `username` is None."""
    origin = urls.normalize_origin(origin)
    if username is not None:
        return vault.records.get((origin, username))
    for record in vault:
        if record.origin == origin:
            return record
    return None


@dataclasses.dataclass(frozen=True, slots=True)
class JournalEntry:
    when: datetime.datetime
    origin: str
    candidate_password: str


def append_journal(
    path: os.PathLike[str] | str,
    origin: str,
    candidate_password: str,
    when: datetime.datetime | None = None,
) -> JournalEntry:
    """Records a password that a site may have accepted without confirming.

    Raises:
      IOFailure: If the journal cannot be appended to.
    """
    entry = JournalEntry(when=when or _utcnow(),
                         origin=urls.normalize_origin(origin),
                         candidate_password=candidate_password)
    line = (f'{entry.when.isoformat()}\t{entry.origin}\t'
            f'{entry.candidate_password}')
    try:
        fileio.append_line(path, line)
    except OSError as e:
        raise IOFailure(f'Cannot append to journal {path}: {e}') from e
    logging.warning('Unconfirmed reset for %s journaled to %s', entry.origin,
                    path)
    return entry


def read_journal(path: os.PathLike[str] | str) -> list[JournalEntry]:
    entries = []
    path = pathlib.Path(path)
    if not path.exists():
        return entries
    for line in path.read_text(encoding='utf-8').splitlines():
        # The candidate is the last field.
        when, origin, candidate = line.split('\t', 2)
        entries.append(JournalEntry(
            when=datetime.datetime.fromisoformat(when), origin=origin,
            candidate_password=candidate))
    return entries
