"""Canonical JSON report emission.

Reports are pure functions of (command, parameters, seed, constants):
keys are sorted, separators fixed, no timestamps, NaN rejected, and
numpy scalars reduced to built-ins, so identical runs produce identical
bytes.  Every record carries the tool version, the fully resolved
parameter set, the seed, and a hash of the calibration constants in
effect; that tuple is sufficient to reproduce the record bit-for-bit.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__

__all__ = ["canonical_json", "report_envelope", "write_report", "write_csv"]


def _to_builtin(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def canonical_json(record: dict) -> str:
    """Deterministic JSON text: sorted keys, tight separators, finite numbers only."""
    return json.dumps(
        record,
        sort_keys=True,
        separators=(",", ":"),
        allow_nan=False,
        default=_to_builtin,
    ) + "\n"


def report_envelope(
    command: str,
    params: dict,
    seed: int | None,
    constants_hash: str | None,
    results,
) -> dict:
    return {
        "tool": "walklab",
        "version": __version__,
        "spec": {"command": command, **params},
        "seed": seed,
        "constants_hash": constants_hash,
        "results": results,
    }


def write_report(path: Path | str, record: dict) -> Path:
    path = Path(path)
    path.write_text(canonical_json(record))
    return path


def write_csv(path: Path | str, rows: Sequence[dict], fields: Iterable[str]) -> Path:
    path = Path(path)
    fields = list(fields)
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, extrasaction="raise")
        writer.writeheader()
        writer.writerows(rows)
    return path
