"""Readers for the run-directory file contract.

A run directory carries manifest.json plus fixed-column CSVs; a sweep
directory carries sweep_manifest.json plus one member run directory per
epsilon.  Everything here works from those files alone, no simulation
code involved, so the figures can be rebuilt on a machine that only has
the output directories.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np


class MissingColumn(Exception):
    """A required CSV column is absent; the message names it."""


def read_columns(path, required=()) -> dict[str, np.ndarray]:
    """Parse a headered CSV into float columns keyed by header name."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    for name in required:
        if name not in header:
            raise MissingColumn(
                f"column {name!r} not found in {path.name} (columns: {header})")
    data = (np.asarray(rows, dtype=float) if rows
            else np.empty((0, len(header))))
    return {name: data[:, k] for k, name in enumerate(header)}


def load_manifest(run_dir) -> dict:
    """manifest.json of a single run, or sweep_manifest.json of a sweep."""
    run_dir = Path(run_dir)
    for name in ("manifest.json", "sweep_manifest.json"):
        p = run_dir / name
        if p.exists():
            return json.loads(p.read_text())
    raise FileNotFoundError(f"no manifest.json or sweep_manifest.json in {run_dir}")


def member_runs(sweep_dir, manifest: dict) -> list[tuple[float, Path]]:
    """(epsilon, run_dir) for every completed member, largest epsilon first."""
    sweep_dir = Path(sweep_dir)
    return [(m["epsilon"], sweep_dir / m["dir"]) for m in manifest["members"]
            if m["status"] == "ok"]


def expand_runs(sources) -> list[tuple[float, Path, dict]]:
    """Resolve directories (runs or sweeps) to (epsilon, run_dir, manifest).

    A sweep contributes every completed member; a single run contributes
    itself.  Order follows the argument list, members largest epsilon
    first within a sweep.
    """
    out = []
    for src in sources:
        manifest = load_manifest(src)
        if manifest.get("kind") == "sweep":
            for eps, sub in member_runs(src, manifest):
                out.append((eps, sub, load_manifest(sub)))
        else:
            out.append((manifest["epsilon"], Path(src), manifest))
    if not out:
        raise ValueError("no completed runs among the given directories")
    return out


def final_statistic(run_dir) -> tuple[float, float]:
    """(t, statistic) at the last recorded time of theorem_bound.csv."""
    cols = read_columns(Path(run_dir) / "theorem_bound.csv",
                        required=("t", "statistic"))
    return float(cols["t"][-1]), float(cols["statistic"][-1])


def last_snapshot(run_dir, manifest: dict) -> tuple[float, Path]:
    """(t, path) of the latest dumped field snapshot."""
    snaps = manifest.get("snapshots") or []
    if not snaps:
        raise FileNotFoundError(
            f"{run_dir} has no field snapshots (run was made with dump_fields none)")
    best = max(snaps, key=lambda s: s["index"])
    return float(best["t"]), Path(run_dir) / best["file"]


def node_slice(cols: dict[str, np.ndarray], node: int) -> dict[str, np.ndarray]:
    """Rows of a snapshot table belonging to one spatial node."""
    keep = cols["node"].astype(int) == node
    if not keep.any():
        raise ValueError(f"node {node} not present in snapshot")
    return {k: v[keep] for k, v in cols.items()}
