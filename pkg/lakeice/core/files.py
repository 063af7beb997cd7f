"""
Atomic file output and input fingerprints
"""

import hashlib
import os
import tempfile
from pathlib import Path

from lakeice.core.exceptions import MissingInputError


def atomic_write_text(path: Path, content: str) -> Path:
    """Write to a temp file next to the target, then rename over it"""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(content)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    return path


def require_file(path: Path | None, what: str) -> Path:
    """Return the path if the file exists, otherwise raise MissingInputError"""
    if path is None:
        raise MissingInputError(f"Missing input: no {what} file given")
    if not path.is_file():
        raise MissingInputError(f"Missing input: {what} file not found: {path}")
    return path


def sha256_of(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()
