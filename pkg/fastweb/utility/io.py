"""Output directories and file writers.

Every subcommand writes into a staging directory next to the requested
output directory and renames it into place only when all files are
complete, so a failed run never leaves partial output behind.
"""

from __future__ import annotations

import contextlib
import json
import logging
import math
import shutil
import tempfile
from collections.abc import Iterator
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from fastweb.extmag import ExtReal
from fastweb.types import FilePath

logger = logging.getLogger(__name__)


@contextlib.contextmanager
def staged_directory(out: FilePath) -> Iterator[Path]:
    """Yield a fresh staging directory that replaces ``out`` on success.

    An existing ``out`` is only removed after the staged copy has been
    renamed into place.
    """
    target = Path(out)
    target.parent.mkdir(parents=True, exist_ok=True)
    stage = Path(tempfile.mkdtemp(prefix=f".{target.name}.", suffix=".partial", dir=target.parent))
    try:
        yield stage
    except BaseException:
        shutil.rmtree(stage, ignore_errors=True)
        raise
    backup = None
    if target.exists():
        backup = target.with_name(f".{target.name}.previous")
        if backup.exists():
            shutil.rmtree(backup)
        target.rename(backup)
    stage.rename(target)
    if backup is not None:
        shutil.rmtree(backup, ignore_errors=True)
    logger.info("wrote %s", target)


def to_jsonable(value: Any) -> Any:
    """Recursively convert numpy scalars, ExtReal and non-finite floats.

    Non-finite floats become the strings ``"inf"``, ``"-inf"`` and
    ``"nan"``; ExtReal uses its ``E(level,mantissa)`` text form.
    """
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, ExtReal):
        return str(value)
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        x = float(value)
        return x if math.isfinite(x) else str(x)
    if isinstance(value, Path):
        return str(value)
    return value


def dump_json(data: Any) -> str:
    """Canonical JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(to_jsonable(data), indent=2, sort_keys=True) + "\n"


def write_json(data: Any, file_path: FilePath) -> Path:
    path = Path(file_path)
    path.write_text(dump_json(data), encoding="utf-8")
    return path


def write_csv(frame: pd.DataFrame, file_path: FilePath) -> Path:
    """RFC-4180 CSV with ``\\r\\n`` line endings and full float precision."""
    path = Path(file_path)
    frame.to_csv(path, index=False, lineterminator="\r\n", float_format="%.17g")
    return path


def write_text(text: str, file_path: FilePath) -> Path:
    path = Path(file_path)
    path.write_text(text, encoding="utf-8")
    return path


__all__ = [
    "dump_json",
    "staged_directory",
    "to_jsonable",
    "write_csv",
    "write_json",
    "write_text",
]
