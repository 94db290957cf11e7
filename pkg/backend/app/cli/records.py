"""
Output files: one JSON record per instance, CSV tables, a JSON summary.

Every file is written to a temporary sibling and moved into place, so a
killed run never leaves a truncated record behind.
"""

import json
import logging
import os
import re
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Sequence, Union

import pandas as pd
from pydantic import BaseModel, ValidationError

from backend.app.analytics.models import ExplanationRecord
from backend.app.core.exceptions import DatasetFormatError

logger = logging.getLogger(__name__)

RECORDS_DIR = "records"


def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def record_path(out_dir: Union[str, Path], instance_id: str) -> Path:
    safe = re.sub(r"[^A-Za-z0-9_.-]", "_", instance_id)
    return Path(out_dir) / RECORDS_DIR / f"{safe}.json"


def write_record(record: ExplanationRecord, out_dir: Union[str, Path]) -> Path:
    path = record_path(out_dir, record.instance_id)
    _atomic_write(path, record.model_dump_json(indent=2, exclude_none=True) + "\n")
    return path


def read_record(path: Union[str, Path]) -> ExplanationRecord:
    try:
        return ExplanationRecord.model_validate_json(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValidationError) as e:
        raise DatasetFormatError(f"invalid explanation record: {e}", {"path": str(path)}) from e


def _natural_key(path: Path):
    return [int(part) if part.isdigit() else part for part in re.split(r"(\d+)", path.stem)]


def load_records(out_dir: Union[str, Path]) -> List[ExplanationRecord]:
    """All records under out_dir, in instance order"""
    directory = Path(out_dir) / RECORDS_DIR
    if not directory.is_dir():
        raise DatasetFormatError("no explanation records found", {"path": str(directory)})
    paths = sorted(directory.glob("*.json"), key=_natural_key)
    return [read_record(p) for p in paths]


def write_table(rows: Sequence[Union[BaseModel, Dict[str, Any]]], path: Union[str, Path]) -> Path:
    """CSV with a header row"""
    records = [r.model_dump() if isinstance(r, BaseModel) else dict(r) for r in rows]
    path = Path(path)
    _atomic_write(path, pd.DataFrame.from_records(records).to_csv(index=False))
    return path


def write_summary(summary: Dict[str, Any], path: Union[str, Path]) -> Path:
    path = Path(path)
    _atomic_write(path, json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return path
