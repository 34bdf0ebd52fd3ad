import hashlib
import subprocess
import sys
from pathlib import Path

import pytest

from llgplots import plot_profiles, plot_run
from llgplots.io import read_csv_table, read_series, SERIES_COLUMNS

REPO = Path(__file__).resolve().parents[2]
RESULTS = REPO / "results"


def _write_profile(path, label_value="0.1"):
    rows = ["x,theta,dtheta,m1,m2,m3,lambda"]
    for k in range(11):
        x = -1.0 + 0.2 * k
        rows.append(f"{x},{0.3 * k},{0.1},{1.0 - 0.05 * k},{0.0},{0.0},{0.1}")
    path.write_text("\n".join(rows) + "\n")
    return path


def _write_run_dir(root, with_snapshots=True):
    root.mkdir(parents=True, exist_ok=True)
    rows = [",".join(SERIES_COLUMNS)]
    for k in range(6):
        rows.append(f"{0.1 * k},{2.0 - 0.1 * k},{0.0},{2.0 - 0.1 * k},"
                    f"{0.1},{-1.0},{1.0},nan")
    (root / "series.csv").write_text("\n".join(rows) + "\n")
    if with_snapshots:
        for t in (0.0, 0.5):
            body = ["x,m1,m2,m3"]
            for k in range(11):
                body.append(f"{-1.0 + 0.2 * k},{0.5},{0.5},{0.7071067811865476}")
            (root / f"snap_t{t:g}.csv").write_text("\n".join(body) + "\n")
    return root


def _tree_digest(root):
    digest = hashlib.sha256()
    for path in sorted(Path(root).rglob("*")):
        if path.is_file():
            digest.update(path.name.encode())
            digest.update(path.read_bytes())
    return digest.hexdigest()


def test_profiles_figure_from_synthetic(tmp_path):
    csvs = [_write_profile(tmp_path / f"profile_h0_{v}.csv") for v in ("0.1", "0.5")]
    out = plot_profiles(csvs, tmp_path / "fig.png")
    assert out.exists() and out.stat().st_size > 0


def test_profiles_single_file_renders(tmp_path):
    csvs = [_write_profile(tmp_path / "profile_h0_1.csv")]
    out = plot_profiles(csvs, tmp_path / "one.png")
    assert out.exists()


def test_profiles_empty_list_errors(tmp_path):
    with pytest.raises(ValueError, match="no profile files"):
        plot_profiles([], tmp_path / "x.png")


def test_profiles_schema_mismatch(tmp_path):
    bad = tmp_path / "profile_h0_0.1.csv"
    bad.write_text("x,y\n0,1\n")
    with pytest.raises(ValueError, match="expected columns"):
        plot_profiles([bad], tmp_path / "x.png")


def test_run_figures_from_synthetic(tmp_path):
    run = _write_run_dir(tmp_path / "run")
    outs = plot_run(run, tmp_path / "fig")
    names = {p.name for p in outs}
    assert names == {"fig_m1.png", "fig_energy.png"}
    assert all(p.stat().st_size > 0 for p in outs)


def test_run_without_snapshots_warns(tmp_path):
    run = _write_run_dir(tmp_path / "run", with_snapshots=False)
    with pytest.warns(UserWarning, match="no snapshots"):
        outs = plot_run(run, tmp_path / "fig")
    assert [p.name for p in outs] == ["fig_energy.png"]


def test_run_missing_series_errors(tmp_path):
    with pytest.raises(FileNotFoundError, match="series"):
        plot_run(tmp_path, tmp_path / "fig")


def test_corrupt_row_names_line(tmp_path):
    run = _write_run_dir(tmp_path / "run")
    series = run / "series.csv"
    lines = series.read_text().splitlines()
    lines[3] = "0.2,broken"
    series.write_text("\n".join(lines) + "\n")
    with pytest.raises(ValueError, match="series.csv:4"):
        read_series(series)


def test_inputs_are_untouched(tmp_path):
    run = _write_run_dir(tmp_path / "run")
    before = _tree_digest(run)
    plot_run(run, tmp_path / "fig")
    assert _tree_digest(run) == before


def test_byte_stable_rendering(tmp_path):
    run = _write_run_dir(tmp_path / "run")
    a = plot_run(run, tmp_path / "a")
    b = plot_run(run, tmp_path / "b")
    for pa, pb in zip(a, b):
        assert pa.read_bytes() == pb.read_bytes()


def test_cli_profiles_and_run(tmp_path):
    csv_dir = tmp_path / "profiles"
    csv_dir.mkdir()
    _write_profile(csv_dir / "profile_h0_0.1.csv")
    out = tmp_path / "profiles.png"
    rc = subprocess.run(
        [sys.executable, "-m", "llgplots", "profiles", "--in", str(csv_dir),
         "--out", str(out)], capture_output=True, text=True,
    )
    assert rc.returncode == 0, rc.stderr
    assert out.exists()

    run = _write_run_dir(tmp_path / "run")
    rc = subprocess.run(
        [sys.executable, "-m", "llgplots", "run", "--in", str(run),
         "--out", str(tmp_path / "fig.png")], capture_output=True, text=True,
    )
    assert rc.returncode == 0, rc.stderr
    assert (tmp_path / "fig_m1.png").exists()
    assert (tmp_path / "fig_energy.png").exists()


def test_cli_bad_input_exit_code(tmp_path):
    rc = subprocess.run(
        [sys.executable, "-m", "llgplots", "run", "--in", str(tmp_path),
         "--out", str(tmp_path / "x.png")], capture_output=True, text=True,
    )
    assert rc.returncode == 2


# ---------------------------------------------------------------------------
# shipped artifacts (acceptance): the committed fig1-fig8 run directories
# render without touching the simulation code, byte-stably
# ---------------------------------------------------------------------------

needs_artifacts = pytest.mark.skipif(
    not RESULTS.exists(), reason="shipped results/ artifacts not present"
)


@needs_artifacts
def test_shipped_profile_sweeps_render(tmp_path):
    for sweep in ("fig1", "fig2"):
        files = sorted((RESULTS / sweep).glob("profile_*.csv"))
        assert len(files) == 5
        out = plot_profiles(files, tmp_path / f"{sweep}.png")
        assert out.stat().st_size > 0


@needs_artifacts
@pytest.mark.parametrize("name", ["fig3", "fig4", "fig5", "fig6", "fig7", "fig8"])
def test_shipped_runs_render_byte_stable(tmp_path, name):
    run = RESULTS / name
    a = plot_run(run, tmp_path / f"{name}_a")
    b = plot_run(run, tmp_path / f"{name}_b")
    assert {p.name for p in a} == {f"{name}_a_m1.png", f"{name}_a_energy.png"}
    for pa, pb in zip(a, b):
        assert pa.read_bytes() == pb.read_bytes()
        assert pa.stat().st_size > 0
