"""Atomic, self-describing file output."""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path


def write_atomic(files: dict) -> None:
    """Write ``{path: text}`` so that either every target is updated or none is.

    Everything is staged to temp files beside its target first.  If a rename
    fails part way, targets already replaced are put back as they were.
    """
    staged, done = [], []
    try:
        for path, text in files.items():
            path = Path(path)
            fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
            staged.append((tmp, path))
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
        for tmp, path in staged:
            backup = None
            if path.is_file():
                fd, backup = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".bak")
                os.close(fd)
                os.replace(path, backup)
            try:
                os.replace(tmp, path)
            except OSError:
                if backup is not None:
                    os.replace(backup, path)
                raise
            done.append((path, backup))
        for _, backup in done:
            if backup is not None:
                os.unlink(backup)
        staged, done = [], []
    finally:
        for path, backup in reversed(done):
            if backup is None:
                path.unlink(missing_ok=True)
            else:
                os.replace(backup, path)
        for tmp, _ in staged:
            try:
                os.unlink(tmp)
            except FileNotFoundError:
                pass


def meta_path(path) -> Path:
    return Path(str(path) + ".meta.json")


def dump_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
