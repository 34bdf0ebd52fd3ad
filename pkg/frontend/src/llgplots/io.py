"""Readers for the simulation CSV schemas.

Only the documented file formats are consumed here: profile CSVs
(x,theta,dtheta,m1,m2,m3,lambda), run series (t,E,EZ,Etot,Diss,min_m1,
max_m1,orbdist) and field snapshots (x,m1,m2,m3).  Parse errors carry the
file name and 1-based line number.
"""

from __future__ import annotations

import math
import re
from pathlib import Path

import numpy as np

PROFILE_COLUMNS = ["x", "theta", "dtheta", "m1", "m2", "m3", "lambda"]
SERIES_COLUMNS = ["t", "E", "EZ", "Etot", "Diss", "min_m1", "max_m1", "orbdist"]
SNAPSHOT_COLUMNS = ["x", "m1", "m2", "m3"]

_H0_PATTERN = re.compile(r"h0_(-?[0-9.]+)")
_SNAP_PATTERN = re.compile(r"snap_t(-?[0-9.e+]+)\.csv$")


def read_csv_table(path, expected_columns) -> dict[str, np.ndarray]:
    """Strict reader: exact header, rectangular numeric body."""
    path = Path(path)
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if header != expected_columns:
            raise ValueError(
                f"{path}: expected columns {','.join(expected_columns)}, "
                f"got {','.join(header)}"
            )
        rows = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(expected_columns):
                raise ValueError(
                    f"{path}:{lineno}: expected {len(expected_columns)} fields, "
                    f"got {len(parts)}"
                )
            try:
                rows.append([float(p) for p in parts])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    data = np.array(rows)
    return {name: data[:, k] for k, name in enumerate(expected_columns)}


def read_profile(path) -> dict:
    table = read_csv_table(path, PROFILE_COLUMNS)
    label = None
    match = _H0_PATTERN.search(Path(path).stem)
    if match:
        label = f"h0 = {match.group(1)}"
    table["label"] = label or Path(path).stem
    return table


def read_series(path) -> dict[str, np.ndarray]:
    return read_csv_table(path, SERIES_COLUMNS)


def snapshot_time(path) -> float:
    match = _SNAP_PATTERN.search(str(path))
    if not match:
        raise ValueError(f"{path}: not a snapshot file name (snap_t<t>.csv)")
    return float(match.group(1))


def find_snapshots(run_dir) -> list[tuple[float, Path]]:
    run_dir = Path(run_dir)
    snaps = []
    for path in run_dir.glob("snap_t*.csv"):
        t = snapshot_time(path.name)
        if math.isfinite(t):
            snaps.append((t, path))
    snaps.sort(key=lambda item: item[0])
    return snaps
