import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

# Small but real sweep for the end-to-end tests.  Reduced phase grid to
# keep the fixture under a minute; everything else is the solver default,
# with the envelope passenger pass enabled so sandwich.csv exists and
# field dumps on so profile/heatmap have snapshots to read.
SWEEP_CONFIG = {
    "grid": {"n_v": 48, "n_w": 32},
    "sandwich": True,
    "dump_fields": "ends",
}


def solver_cmd() -> list[str]:
    """The simulation CLI, however it is reachable in this environment."""
    exe = shutil.which("fhnlab")
    if exe:
        return [exe]
    return [sys.executable, "-m", "fhnlab.cli"]


@pytest.fixture(scope="session")
def sweep_dir(tmp_path_factory):
    """A completed epsilon sweep produced through the solver's CLI."""
    root = tmp_path_factory.mktemp("sweep_fixture")
    cfg = root / "config.json"
    cfg.write_text(json.dumps(SWEEP_CONFIG))
    proc = subprocess.run(
        solver_cmd() + ["sweep-eps", str(cfg), "--output", str(root / "sweep")],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stdout + proc.stderr
    return root / "sweep"


def _csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format(float(x), ".17g") for x in row))
    path.write_text("\n".join(lines) + "\n")


@pytest.fixture()
def synthetic_run(tmp_path):
    """Hand-built single-run directory with an exactly Gaussian snapshot.

    The log-density in the snapshot equals the limiting parabola to the
    last bit, so a profile overlay must show zero gap; moments, decay
    series, theorem statistic, and sandwich gaps are filled with simple
    consistent values.
    """
    run = tmp_path / "run"
    run.mkdir()
    eps = 0.05
    V, rho0 = 0.3, 1.0
    t_end = 1.0
    v = np.linspace(-1.7, 2.3, 81)
    w = np.array([-0.5, 0.0, 0.5])
    rows = []
    for vi in v:
        phi = -0.5 * rho0 * (vi - V) ** 2
        for wj, amp in zip(w, (0.3, 1.0, 0.3)):
            rows.append((0, vi, wj, amp * np.exp(phi / eps), phi))
    snapdir = run / "snapshots"
    snapdir.mkdir()
    _csv(snapdir / "snap_020.csv", ["node", "v", "w", "f", "phi"], rows)

    times = np.linspace(0.0, t_end, 21)
    _csv(run / "moments.csv", ["t", "node", "mass", "V", "W"],
         [(t, 0, 1.0, V, 0.0) for t in times])
    _csv(run / "theorem_bound.csv", ["t", "statistic", "normalized"],
         [(t, 0.02 * (1.0 + t), 0.4) for t in times])
    _csv(run / "d2_series.csv", ["t", "node", "d2", "bound"],
         [(t, 0, 0.2 * np.exp(-20.0 * t) + eps, 3.0 * (0.2 * np.exp(-36.0 * t) + eps))
          for t in times])
    _csv(run / "sandwich.csv", ["t", "min_gap_plus", "min_gap_minus", "f_max"],
         [(t, 0.01, 0.02, 2.7) for t in times])

    manifest = {
        "kind": "run",
        "epsilon": eps,
        "status": "ok",
        "rho0": {"nodes": [0.5], "values": [rho0], "weights": [1.0]},
        "snapshots": [{"index": 20, "t": t_end, "file": "snapshots/snap_020.csv"}],
        "files": {"moments": "moments.csv", "theorem_bound": "theorem_bound.csv",
                  "d2_series": "d2_series.csv", "sandwich": "sandwich.csv"},
    }
    (run / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return run
