"""Figure builders: profile overlays, m1 waterfalls and energy curves.

All figures use fixed sizes and carry no timestamps, so rendering the same
inputs twice produces byte-identical PNGs.  Inputs are opened read-only and
never modified.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .io import find_snapshots, read_csv_table, read_profile, read_series, \
    SNAPSHOT_COLUMNS

FIGSIZE = (10.0, 4.0)
DPI = 110
_METADATA = {"Software": "llgplots"}


@dataclass
class PlotSpec:
    """One figure request."""

    inputs: list
    kind: str                      # profiles | waterfall | energy
    output: Path
    max_curves: int = 16           # time subsampling bound for waterfalls

    def __post_init__(self):
        if self.kind not in ("profiles", "waterfall", "energy"):
            raise ValueError(f"unknown figure kind {self.kind!r}")
        self.inputs = [Path(p) for p in self.inputs]
        self.output = Path(self.output)


def _save(fig, out_path: Path) -> Path:
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=DPI, metadata=_METADATA)
    plt.close(fig)
    return out_path


def plot_profiles(csv_paths, out_path) -> Path:
    """Two panels: the angle profile and its first magnetization component."""
    paths = list(csv_paths)
    if not paths:
        raise ValueError("no profile files given")
    profiles = [read_profile(p) for p in paths]
    fig, (ax_theta, ax_m1) = plt.subplots(1, 2, figsize=FIGSIZE)
    for prof in profiles:
        ax_theta.plot(prof["x"], prof["theta"], label=prof["label"])
        ax_m1.plot(prof["x"], prof["m1"], label=prof["label"])
    ax_theta.set_xlabel("x")
    ax_theta.set_ylabel("theta")
    ax_m1.set_xlabel("x")
    ax_m1.set_ylabel("m1")
    ax_theta.legend(fontsize=8)
    ax_m1.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, Path(out_path))


def _subsample(items, limit):
    if len(items) <= limit:
        return list(items)
    idx = [round(k * (len(items) - 1) / (limit - 1)) for k in range(limit)]
    return [items[i] for i in sorted(set(idx))]


def plot_run(run_dir, out_base, max_curves: int = 16) -> list[Path]:
    """Waterfall of m1 snapshots plus the energy trace of one run directory.

    Returns the written image paths: <out_base>_m1.png (when snapshots
    exist) and <out_base>_energy.png.
    """
    run_dir = Path(run_dir)
    series_path = run_dir / "series.csv"
    if not series_path.exists():
        raise FileNotFoundError(f"{run_dir}: no series.csv")
    series = read_series(series_path)
    out_base = Path(out_base)
    if out_base.suffix == ".png":
        out_base = out_base.with_suffix("")
    written = []

    snaps = _subsample(find_snapshots(run_dir), max_curves)
    if snaps:
        fig, ax = plt.subplots(figsize=FIGSIZE)
        for t, path in snaps:
            snap = read_csv_table(path, SNAPSHOT_COLUMNS)
            ax.plot(snap["x"], snap["m1"], label=f"t = {t:g}")
        ax.set_xlabel("x")
        ax.set_ylabel("m1")
        ax.set_ylim(-1.1, 1.1)
        ax.legend(fontsize=7, ncol=2)
        written.append(_save(fig, out_base.with_name(out_base.name + "_m1.png")))
    else:
        warnings.warn(f"{run_dir}: no snapshots found, rendering energy only",
                      stacklevel=2)

    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.plot(series["t"], series["Etot"])
    ax.set_xlabel("t")
    ax.set_ylabel("total energy")
    fig.tight_layout()
    written.append(_save(fig, out_base.with_name(out_base.name + "_energy.png")))
    return written


def render(spec: PlotSpec) -> list[Path]:
    if spec.kind == "profiles":
        return [plot_profiles(spec.inputs, spec.output)]
    if spec.kind == "waterfall":
        if len(spec.inputs) != 1:
            raise ValueError("waterfall takes exactly one run directory")
        return plot_run(spec.inputs[0], spec.output, spec.max_curves)
    series = read_series(Path(spec.inputs[0]) / "series.csv")
    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.plot(series["t"], series["Etot"])
    ax.set_xlabel("t")
    ax.set_ylabel("total energy")
    fig.tight_layout()
    return [_save(fig, spec.output)]
