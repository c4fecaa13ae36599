# Copyright 2026 rekey authors
#
# Licensed under the Apache License, Version 2.0. You may obtain a copy at
# http://www.apache.org/licenses/LICENSE-2.0

"""Headless password rotation."""

from rekey.version import VERSION

__version__ = VERSION
