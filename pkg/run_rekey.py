# Copyright 2026 rekey authors
#
# Licensed under the Apache License, Version 2.0. You may obtain a copy at
# http://www.apache.org/licenses/LICENSE-2.0

"""Headless password rotation script.

Logs in to a site, finds its password reset page, sets a fresh random
password and records it in the vault only once the site confirms it. See
`rekey.cli` for the commands.
"""

from rekey import cli


if __name__ == '__main__':
    cli.main()
