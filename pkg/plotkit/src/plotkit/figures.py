"""Five figure kinds over run directories: rate, profile, heatmap, decay, sandwich.

Each renderer reads the CSV/JSON contract through plotkit.readers, draws
one matplotlib figure, writes it to the requested path, and returns a
small report dict with the numbers that ended up on the figure (fitted
slope, plotted gap, ...) so callers and tests can check them without
parsing the image back.

Rendering is deterministic: fixed figure geometry, fixed dpi, pinned
image metadata, and no clock or RNG anywhere, so rendering the same
inputs twice gives byte-identical files.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .readers import (MissingColumn, expand_runs, final_statistic,
                      last_snapshot, load_manifest, node_slice, read_columns)

KINDS = ("rate", "profile", "heatmap", "decay", "sandwich")

__all__ = ["FigureSpec", "render", "KINDS", "MissingColumn"]


@dataclass(frozen=True)
class FigureSpec:
    """What to draw: input run directories (or CSVs), kind, output path."""

    run_dirs: tuple
    kind: str
    output: str
    node: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; choose from {KINDS}")
        if not self.run_dirs:
            raise ValueError("at least one input directory or CSV is required")


def _save(fig, output: str) -> None:
    out = Path(output)
    out.parent.mkdir(parents=True, exist_ok=True)
    kwargs = {"dpi": 150}
    if out.suffix.lower() == ".png":
        # pin the only default metadata chunk so reruns are byte-identical
        # across matplotlib versions too
        kwargs["metadata"] = {"Software": "plotkit"}
    fig.savefig(out, **kwargs)
    plt.close(fig)


# ---------------------------------------------------------------------------
# rate


def _rate_pairs(sources) -> list[tuple[float, float]]:
    """(eps, statistic) pairs from sweep dirs, run dirs, or two-column CSVs."""
    pairs = []
    dirs = []
    for src in sources:
        p = Path(src)
        if p.is_file():
            cols = read_columns(p, required=("eps", "statistic"))
            pairs.extend(zip(cols["eps"].tolist(), cols["statistic"].tolist()))
        else:
            dirs.append(src)
    if dirs:
        for eps, run_dir, _ in expand_runs(dirs):
            _, stat = final_statistic(run_dir)
            pairs.append((eps, stat))
    return pairs


def _render_rate(spec: FigureSpec) -> dict:
    pairs = _rate_pairs(spec.run_dirs)
    if len(pairs) < 2:
        raise ValueError(f"rate figure needs at least 2 pairs, got {len(pairs)}")
    if any(e <= 0 or s <= 0 for e, s in pairs):
        raise ValueError("rate figure needs positive epsilons and statistics")
    pairs.sort()
    eps = np.array([e for e, _ in pairs])
    stat = np.array([s for _, s in pairs])
    slope, intercept = np.polyfit(np.log(eps), np.log(stat), 1)

    fig, ax = plt.subplots(figsize=(5.0, 4.0), layout="constrained")
    ax.loglog(eps, stat, "o", color="C0", label="measured")
    grid = np.geomspace(eps[0], eps[-1], 64)
    ax.loglog(grid, np.exp(intercept) * grid ** slope, "-", color="C0",
              label=f"fit, slope {slope:.2f}")
    # reference line of slope exactly 1 anchored at the largest epsilon
    ax.loglog(grid, stat[-1] * grid / eps[-1], "--", color="0.5",
              label="reference slope 1")
    annotation = f"{slope:.2f}"
    ax.annotate(f"fitted slope {annotation}", xy=(0.05, 0.92),
                xycoords="axes fraction")
    ax.set_xlabel("epsilon")
    ax.set_ylabel("statistic")
    ax.set_title("concentration statistic vs epsilon")
    ax.legend(loc="lower right")
    _save(fig, spec.output)
    return {"kind": "rate", "output": spec.output, "n_pairs": len(pairs),
            "slope": float(slope), "annotation": annotation}


# ---------------------------------------------------------------------------
# profile


def _pick_run(spec: FigureSpec) -> tuple[float, Path, dict]:
    """Smallest-epsilon completed run among the inputs (most concentrated)."""
    runs = expand_runs(spec.run_dirs)
    return min(runs, key=lambda r: r[0])


def _pick_node(spec: FigureSpec, manifest: dict) -> int:
    n_x = len(manifest["rho0"]["values"])
    node = spec.node if spec.node is not None else n_x // 2
    if not 0 <= node < n_x:
        raise ValueError(f"node {node} out of range (run has {n_x} nodes)")
    return node


def _render_profile(spec: FigureSpec) -> dict:
    eps, run_dir, manifest = _pick_run(spec)
    node = _pick_node(spec, manifest)
    t_snap, snap_path = last_snapshot(run_dir, manifest)
    snap = node_slice(read_columns(snap_path,
                                   required=("node", "v", "w", "f", "phi")), node)

    # slice along v through the w cell holding the density peak
    w_star = snap["w"][int(np.argmax(snap["f"]))]
    row = snap["w"] == w_star
    order = np.argsort(snap["v"][row])
    v = snap["v"][row][order]
    phi = snap["phi"][row][order]

    moments = read_columns(Path(run_dir) / "moments.csv",
                           required=("t", "node", "V"))
    here = moments["node"].astype(int) == node
    k = int(np.argmin(np.abs(moments["t"][here] - t_snap)))
    V = float(moments["V"][here][k])
    rho0_i = float(manifest["rho0"]["values"][node])
    parabola = -0.5 * rho0_i * (v - V) ** 2

    finite = np.isfinite(phi)
    max_gap = float(np.max(np.abs(phi[finite] - parabola[finite]))) \
        if finite.any() else float("nan")

    fig, ax = plt.subplots(figsize=(5.0, 4.0), layout="constrained")
    ax.plot(v[finite], phi[finite], "o", ms=3, color="C0",
            label="log-density profile")
    ax.plot(v, parabola, "-", color="C1",
            label="limit parabola")
    ax.set_xlabel("v")
    ax.set_ylabel("phi")
    ax.set_title(f"profile vs parabola, eps={eps:g}, node {node}, t={t_snap:g}")
    ax.legend(loc="lower center")
    _save(fig, spec.output)
    return {"kind": "profile", "output": spec.output, "epsilon": eps,
            "node": node, "t": t_snap, "max_gap": max_gap}


# ---------------------------------------------------------------------------
# heatmap


def _render_heatmap(spec: FigureSpec) -> dict:
    eps, run_dir, manifest = _pick_run(spec)
    node = _pick_node(spec, manifest)
    t_snap, snap_path = last_snapshot(run_dir, manifest)
    snap = node_slice(read_columns(snap_path,
                                   required=("node", "v", "w", "f")), node)

    v_ax, vi = np.unique(snap["v"], return_inverse=True)
    w_ax, wi = np.unique(snap["w"], return_inverse=True)
    field = np.zeros((v_ax.size, w_ax.size))
    field[vi, wi] = snap["f"]

    fig, ax = plt.subplots(figsize=(5.0, 4.0), layout="constrained")
    im = ax.imshow(field.T, origin="lower", aspect="auto",
                   extent=(v_ax[0], v_ax[-1], w_ax[0], w_ax[-1]),
                   cmap="viridis")
    fig.colorbar(im, ax=ax, label="f")
    ax.set_xlabel("v")
    ax.set_ylabel("w")
    ax.set_title(f"density, eps={eps:g}, node {node}, t={t_snap:g}")
    _save(fig, spec.output)
    return {"kind": "heatmap", "output": spec.output, "epsilon": eps,
            "node": node, "t": t_snap, "f_max": float(field.max())}


# ---------------------------------------------------------------------------
# decay


def _render_decay(spec: FigureSpec) -> dict:
    runs = expand_runs(spec.run_dirs)
    fig, ax = plt.subplots(figsize=(5.5, 4.0), layout="constrained")
    finals = {}
    for j, (eps, run_dir, _) in enumerate(runs):
        cols = read_columns(Path(run_dir) / "d2_series.csv",
                            required=("t", "node", "d2", "bound"))
        times = np.unique(cols["t"])
        worst = np.array([cols["d2"][cols["t"] == t].max() for t in times])
        bound = np.array([cols["bound"][cols["t"] == t].max() for t in times])
        color = f"C{j % 10}"
        ax.semilogy(times, worst, "-", color=color, label=f"eps={eps:g}")
        ax.semilogy(times, bound, ":", color=color)
        finals[eps] = float(worst[-1])
    ax.set_xlabel("t")
    ax.set_ylabel("centered second moment (worst node)")
    ax.set_title("relative energy decay and envelope (dotted)")
    ax.legend(loc="upper right", fontsize="small")
    _save(fig, spec.output)
    return {"kind": "decay", "output": spec.output,
            "final_d2": {f"{e:g}": v for e, v in sorted(finals.items())}}


# ---------------------------------------------------------------------------
# sandwich


def _render_sandwich(spec: FigureSpec) -> dict:
    runs = expand_runs(spec.run_dirs)
    with_file = [(eps, rd) for eps, rd, _ in runs
                 if (Path(rd) / "sandwich.csv").exists()]
    if not with_file:
        raise FileNotFoundError(
            "no sandwich.csv in any input run (enable the sandwich envelope "
            "pass when running the solver)")
    fig, ax = plt.subplots(figsize=(5.5, 4.0), layout="constrained")
    worst = np.inf
    for j, (eps, run_dir) in enumerate(with_file):
        cols = read_columns(Path(run_dir) / "sandwich.csv",
                            required=("t", "min_gap_plus", "min_gap_minus",
                                      "f_max"))
        scale = np.maximum(cols["f_max"], 1e-300)
        up = cols["min_gap_plus"] / scale
        dn = cols["min_gap_minus"] / scale
        color = f"C{j % 10}"
        ax.plot(cols["t"], up, "-", color=color, label=f"upper gap, eps={eps:g}")
        ax.plot(cols["t"], dn, "--", color=color, label=f"lower gap, eps={eps:g}")
        worst = min(worst, float(up.min()), float(dn.min()))
    ax.axhline(0.0, color="0.5", lw=0.8)
    ax.set_xlabel("t")
    ax.set_ylabel("ordering gap / max f")
    ax.set_title("envelope ordering gaps (must stay above 0)")
    ax.legend(loc="upper right", fontsize="small")
    _save(fig, spec.output)
    return {"kind": "sandwich", "output": spec.output,
            "worst_normalized_gap": worst}


_RENDERERS = {
    "rate": _render_rate,
    "profile": _render_profile,
    "heatmap": _render_heatmap,
    "decay": _render_decay,
    "sandwich": _render_sandwich,
}


def render(spec: FigureSpec) -> dict:
    """Draw one figure and return the report of what was drawn."""
    return _RENDERERS[spec.kind](spec)
