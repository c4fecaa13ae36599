# Copyright 2026 rekey authors
#
# Licensed under the Apache License, Version 2.0. You may obtain a copy at
# http://www.apache.org/licenses/LICENSE-2.0

"""Anchor-text patterns and page strings the navigator looks for."""

from collections.abc import Sequence
from typing import Final

# Anchor-text pattern -> priority. Links further from the reset page in
# typical sites get lower values.
# pyformat: disable
DEFAULT_PRIORITY_PATTERNS: Final[Sequence[tuple[str, int]]] = (
    ('privacy', 0),
    ('setting', 1),
    ('profile', 2),
    ('account', 3),
    ('security', 4),
    ('preference', 5),
    ('my login', 6),
    ('edit profile', 7),
    ('password', 8),
    ('change password', 100),
)
# pyformat: enable

# Visible-text markers of a rejected login.
LOGIN_ERROR_STRINGS: Final[Sequence[str]] = (
    'invalid password',
    'incorrect username',
)

# Visible-text markers of a rejected reset submission.
RESET_ERROR_STRINGS: Final[Sequence[str]] = (
    *LOGIN_ERROR_STRINGS,
    'error',
)
