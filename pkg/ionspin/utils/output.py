"""Input hashing and deterministic output files for the command routers."""

import hashlib
import json
import logging
import math
import time
from pathlib import Path
from typing import Any, List, Tuple

import numpy as np
import pandas as pd

from ionspin.models.report import RunReport
from ionspin.utils.config import settings
from ionspin.utils.errors import ConfigError, FormatError, NumericError

logger = logging.getLogger(__name__)

UNITS_NOTE = "frequencies in Hz unless suffixed rad_per_s; angles in rad; other quantities SI"


def _plain(value: Any):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"cannot serialise {type(value).__name__}")


def dumps(data: Any) -> str:
    """Sorted keys and shortest round-trip floats, so equal data gives equal bytes."""
    try:
        return json.dumps(data, sort_keys=True, indent=2, default=_plain, allow_nan=False) + "\n"
    except ValueError as exc:
        raise NumericError("refusing to write a non-finite value", detail=str(exc))


def finite_or_none(value: Any) -> Any:
    """Replace NaN and infinities, at any depth, by None."""
    if isinstance(value, dict):
        return {k: finite_or_none(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return type(value)(finite_or_none(v) for v in value)
    if isinstance(value, (float, np.floating)) and not math.isfinite(value):
        return None
    return value


def read_json(path: str) -> Tuple[Any, str]:
    """Parsed content and sha256 of a JSON input file."""
    file = Path(path)
    try:
        raw = file.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}", detail=str(exc))
    try:
        data = json.loads(raw.decode("utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}", detail=exc.msg)
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path}: not UTF-8 text", detail=str(exc))
    return data, hashlib.sha256(raw).hexdigest()


class OutputWriter:
    """Collects output files of one command; nothing touches disk before the first write."""

    def __init__(self, out_dir: str):
        self.out_dir = Path(out_dir)
        self.written: List[str] = []

    def _path(self, name: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / name
        self.written.append(str(path))
        return path

    def json(self, name: str, data: Any) -> Path:
        if isinstance(data, dict):
            data = {"units": UNITS_NOTE, **data}
        text = dumps(data)
        path = self._path(name)
        path.write_text(text)
        logger.debug("wrote %s", path)
        return path

    def csv(self, name: str, frame: pd.DataFrame, index: bool = False) -> Path:
        path = self._path(name)
        frame.to_csv(path, index=index)
        logger.debug("wrote %s", path)
        return path


def write_run_report(writer: OutputWriter, command: List[str], input_hashes: dict, metrics: dict, started: float) -> None:
    """run_report.json lists every other output; the wall clock is its only run-dependent value.

    Non-finite metrics are recorded as null. With ``IONSPIN_RECORD_WALL_CLOCK=false``
    the wall clock is only logged and the report is byte-identical across reruns.
    """
    elapsed = time.perf_counter() - started
    logger.info("%s finished in %.3f s", " ".join(command[:3]), elapsed)
    cleaned = finite_or_none(metrics)
    if cleaned != metrics:
        logger.warning("non-finite metrics recorded as null in run_report.json")
    report = RunReport(
        command=command,
        input_hashes=input_hashes,
        outputs=list(writer.written) + [str(writer.out_dir / "run_report.json")],
        metrics=cleaned,
        wall_clock=elapsed if settings.record_wall_clock else None,
        units=UNITS_NOTE,
    )
    writer.json("run_report.json", report.model_dump())
