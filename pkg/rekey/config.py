# Copyright 2026 rekey authors
#
# Licensed under the Apache License, Version 2.0. You may obtain a copy at
# http://www.apache.org/licenses/LICENSE-2.0

from rekey import version

# Hard cap on documents opened while searching for the reset page.
max_pages = 20

# Redirect hops followed per request before giving up.
redirect_limit = 10

# seconds
request_timeout = 10.0

# Length of generated passwords.
password_length = 12

user_agent = f"rekey/{version.VERSION}"
