"""Package version."""

import re

VERSION = "0.1.0"

_RELEASE_RE = re.compile(r"\d+\.\d+\.\d+")


def is_release_version(version: str = VERSION) -> bool:
    return _RELEASE_RE.fullmatch(version) is not None


def version_string() -> str:
    suffix = "" if is_release_version() else " (development build)"
    return f"rekey {VERSION}{suffix}"
