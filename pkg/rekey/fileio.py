# Copyright 2026 rekey authors
#
# Licensed under the Apache License, Version 2.0. You may obtain a copy at
# http://www.apache.org/licenses/LICENSE-2.0

"""Crash-safe file replacement."""

import contextlib
import os
import pathlib
import tempfile


def atomic_write_text(path: os.PathLike[str] | str, text: str) -> None:
    """Replaces `path` with `text` so readers see the old or the new file.

    The data goes to a temporary sibling which is fsynced and then renamed
    over `path`. On any failure the temporary file is removed and `path` is
    left as it was.
    """
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(
        prefix=f'.{path.name}.', suffix='.tmp', dir=path.parent)
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp_name, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp_name)
        raise


def append_line(path: os.PathLike[str] | str, line: str) -> None:
    """Appends one line and fsyncs it."""
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('a', encoding='utf-8', newline='') as f:
        f.write(line.rstrip('\n') + '\n')
        f.flush()
        os.fsync(f.fileno())
