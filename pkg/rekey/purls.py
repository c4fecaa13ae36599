# Copyright 2026 rekey authors
#
# Licensed under the Apache License, Version 2.0. You may obtain a copy at
# http://www.apache.org/licenses/LICENSE-2.0

"""The origin -> reset-page URL cache (`purls.txt`).

File format: UTF-8 lines `origin<TAB>reset_url`; blank lines and lines
starting with `#` are ignored. Files are meant to be shared and merged.
"""

from collections.abc import Iterator, Mapping
import dataclasses
import os
import pathlib

from absl import logging

from rekey import fileio
from rekey import urls
from rekey.vault import IOFailure

_HEADER = '# origin\treset_url\n'


class CorruptPurls(Exception):
    """A purls file line is malformed."""


@dataclasses.dataclass
class PurlsMap:
    """Normalized origin -> absolute same-origin reset URL."""

    entries: dict[str, str] = dataclasses.field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[str]:
        return iter(self.entries)

    def __contains__(self, origin: str) -> bool:
        return get(self, origin) is not None


def _checked(origin: str, url: str) -> tuple[str, str]:
    key = urls.normalize_origin(origin)
    if not urls.same_origin(key, url):
        raise ValueError(f'{url!r} is not on origin {key!r}')
    return key, url.strip()


def get(purls: PurlsMap, origin: str) -> str | None:
    try:
        return purls.entries.get(urls.normalize_origin(origin))
    except ValueError:
        return None


def put(purls: PurlsMap, origin: str, url: str) -> None:
    """Maps `origin` to its reset URL.

    Raises:
      ValueError: If `url` is not an absolute URL on `origin`.
    """
    key, url = _checked(origin, url)
    purls.entries[key] = url


def merge(local: PurlsMap, remote: Mapping[str, str] | PurlsMap) -> PurlsMap:
    """Union of two maps; local entries win on conflict.

    Remote entries that are not valid same-origin mappings are dropped. The
    result does not depend on the iteration order of `remote`.
    """
    remote_entries = remote.entries if isinstance(remote, PurlsMap) else remote
    merged = dict(local.entries)
    for origin in sorted(remote_entries):
        try:
            key, url = _checked(origin, remote_entries[origin])
        except ValueError as e:
            logging.warning('Dropping remote purls entry %r: %s', origin, e)
            continue
        merged.setdefault(key, url)
    return PurlsMap(entries=merged)


def parse(text: str, source: str = '<string>') -> PurlsMap:
    purls = PurlsMap()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith('#'):
            continue
        origin, sep, url = line.partition('\t')
        if not sep:
            raise CorruptPurls(f'{source}:{lineno}: expected origin<TAB>url')
        try:
            put(purls, origin, url)
        except ValueError as e:
            raise CorruptPurls(f'{source}:{lineno}: {e}') from e
    return purls


def dumps(purls: PurlsMap) -> str:
    lines = [f'{origin}\t{purls.entries[origin]}\n'
             for origin in sorted(purls.entries)]
    return _HEADER + ''.join(lines)


def load(path: os.PathLike[str] | str) -> PurlsMap:
    """Loads a purls file; a missing file is an empty map.

    Raises:
      CorruptPurls: If a line is malformed.
      IOFailure: If the file cannot be read.
    """
    path = pathlib.Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except FileNotFoundError:
        return PurlsMap()
    except (OSError, UnicodeDecodeError) as e:
        raise IOFailure(f'Cannot read purls {path}: {e}') from e
    return parse(text, source=str(path))


def save(purls: PurlsMap, path: os.PathLike[str] | str) -> None:
    try:
        fileio.atomic_write_text(path, dumps(purls))
    except OSError as e:
        raise IOFailure(f'Cannot write purls {path}: {e}') from e
