# Copyright 2026 rekey authors
#
# Licensed under the Apache License, Version 2.0. You may obtain a copy at
# http://www.apache.org/licenses/LICENSE-2.0

"""Origin helpers shared by the client, the navigator and the stores."""

from urllib import parse

_DEFAULT_PORTS = {'http': 80, 'https': 443}


def normalize_origin(url: str) -> str:
    """Returns `scheme://host[:port]` with default ports elided.

    Scheme and host are lowercased; path, query and fragment are dropped.

    Raises:
      ValueError: If `url` is not an absolute http(s) URL.
    """
    parts = parse.urlsplit(url.strip())
    scheme = parts.scheme.lower()
    if scheme not in _DEFAULT_PORTS or not parts.hostname:
        raise ValueError(f'Not an absolute http(s) URL: {url!r}')
    host = parts.hostname.lower()
    if ':' in host:
        host = f'[{host}]'
    port = parts.port
    if port is None or port == _DEFAULT_PORTS[scheme]:
        return f'{scheme}://{host}'
    return f'{scheme}://{host}:{port}'


def is_absolute(url: str) -> bool:
    try:
        normalize_origin(url)
    except ValueError:
        return False
    return True


def same_origin(a: str, b: str) -> bool:
    try:
        return normalize_origin(a) == normalize_origin(b)
    except ValueError:
        return False


def path_of(url: str) -> str:
    return parse.urlsplit(url).path or '/'
