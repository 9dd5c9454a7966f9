"""Deterministic CSV and JSON emission for simulation artifacts.

All CSVs are UTF-8 with LF line endings, '#'-prefixed comment lines ahead
of the header, and floats printed with 12 significant digits so identical
configurations produce bit-identical files (the optional timestamp
comment is the single wall-clock element).
"""

from __future__ import annotations

import datetime
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


def format_value(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def _timestamp() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


def write_csv(
    path,
    header: Sequence[str],
    rows: Iterable[Sequence],
    comments: Sequence[str] = (),
    timestamp: bool = True,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if timestamp:
            fh.write(f"# generated {_timestamp()}\n")
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(format_value(v) for v in row) + "\n")
    return path


def write_density_matrix_json(path, rho) -> Path:
    """{"dim": M, "re": [[...]], "im": [[...]]} with full float precision."""
    rho = np.asarray(rho, dtype=complex)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "dim": rho.shape[0],
        "re": rho.real.tolist(),
        "im": rho.imag.tolist(),
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh)
        fh.write("\n")
    return path


def read_density_matrix_json(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    return np.asarray(payload["re"], dtype=float) + 1j * np.asarray(payload["im"], dtype=float)
