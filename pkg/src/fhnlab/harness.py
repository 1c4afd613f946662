"""Run orchestration: configs, persistence, sweeps, rate fits, verification.

A run directory is the unit of output.  Every number a figure or a
check could want is in a CSV with fixed column order and floats printed
at 17 significant digits, so reruns with the same config and seed are
byte-identical.  manifest.json carries the config echo, the column
schema, the spatial profile, a sha256 over the CSV bytes, and status.

Layout of a single run (one epsilon)::

    <dir>/manifest.json
    <dir>/moments.csv         t, node, mass, V, W, E, d2, m_high, outflow, ring, min_f
    <dir>/macro_compare.csv   t, node, V_eps, W_eps, V_limit, W_limit
    <dir>/theorem_bound.csv   t, statistic, normalized
    <dir>/d2_series.csv       t, node, d2, bound
    <dir>/sandwich.csv        t, min_gap_plus, min_gap_minus, f_max     (optional)
    <dir>/snapshots/snap_<k>.csv   node, v, w, f, phi                   (per dump)

A sweep directory holds one member run per epsilon plus
sweep_manifest.json.  Failures are isolated per member.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import (Kernel, ModelParams, SpatialField, kernel_matrix,
                    rho0_bump, rho0_uniform, validate_rho0)
from .phase_grid import PhaseGrid
from . import hopfcole, kinetic, macro_limit, particles


class DegeneratePairs(Exception):
    """Rate fitting needs strictly positive statistics."""


class ConfigError(Exception):
    """Configuration rejected before any work started."""


DEFAULT_CONFIG = {
    "model": {"a": 1.0, "b": 1.0, "c": 0.0, "drift_kind": "cubic",
              "drift_coeffs": None, "m_star": 0.9, "p_prime": None},
    "kernel": {"kind": "exponential", "strength": 1.0, "kappa": 1.0, "beta": 0.5},
    "rho0": {"kind": "uniform", "n_x": 4, "amplitude": 0.0},
    "grid": {"n_v": 160, "n_w": 72, "v_half": 3.0, "w_half": 4.5},
    "initial": {"v0_offset": 0.2, "v0_cos_amplitude": 0.5, "w0": 0.0, "sigma_w": 0.5},
    "schedule": {"t_end": 1.0, "dt": None, "snapshot_stride": 0.05},
    "scheme": "muscl",
    "sweep": [0.1, 0.05, 0.025, 0.0125],
    "seed": 0,
    "sandwich": False,
    "envelopes": {"alpha0": 1.0, "m0": 0.0, "C": 1.0},
    "dump_fields": "ends",
    "output_dir": "runs/default",
}


def _merge(base: dict, override: dict) -> dict:
    out = {}
    for key, val in base.items():
        if key in override and isinstance(val, dict) and isinstance(override[key], dict):
            out[key] = _merge(val, override[key])
        elif key in override:
            out[key] = override[key]
        else:
            out[key] = val
    extra = set(override) - set(base)
    if extra:
        raise ConfigError(f"unknown config keys: {sorted(extra)}")
    return out


@dataclass
class RunConfig:
    """Validated configuration; see DEFAULT_CONFIG for the schema."""

    raw: dict = field(default_factory=dict)

    def __post_init__(self):
        self.raw = _merge(DEFAULT_CONFIG, self.raw)
        sweep = self.raw["sweep"]
        if any(e <= 0 for e in sweep):
            raise ConfigError("sweep epsilons must be positive")
        if any(b >= a for a, b in zip(sweep, sweep[1:])):
            raise ConfigError("sweep epsilons must be strictly decreasing")
        if self.raw["scheme"] not in ("upwind", "muscl"):
            raise ConfigError(f"unknown scheme {self.raw['scheme']!r}")
        if self.raw["dump_fields"] not in ("none", "ends", "all"):
            raise ConfigError("dump_fields must be none, ends, or all")

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        with open(path) as fh:
            return cls(json.load(fh))

    def to_json(self) -> str:
        return json.dumps(self.raw, indent=2, sort_keys=True)

    # constructors for the model objects -----------------------------------

    def params(self, epsilon: float) -> ModelParams:
        m = self.raw["model"]
        coeffs = m["drift_coeffs"]
        return ModelParams(epsilon=epsilon, a=m["a"], b=m["b"], c=m["c"],
                           drift_kind=m["drift_kind"],
                           drift_coeffs=tuple(coeffs) if coeffs else None,
                           m_star=m["m_star"], p_prime=m["p_prime"])

    def grid(self) -> PhaseGrid:
        g = self.raw["grid"]
        return PhaseGrid(n_v=g["n_v"], n_w=g["n_w"],
                         v_half=g["v_half"], w_half=g["w_half"])

    def rho0(self) -> SpatialField:
        r = self.raw["rho0"]
        m_star = self.raw["model"]["m_star"]
        if r["kind"] == "uniform":
            return rho0_uniform(r["n_x"])
        if r["kind"] == "bump":
            return rho0_bump(r["n_x"], amplitude=r["amplitude"], m_star=m_star)
        raise ConfigError(f"unknown rho0 kind {r['kind']!r}")

    def kernel(self) -> Kernel:
        k = self.raw["kernel"]
        return Kernel(kind=k["kind"], strength=k["strength"],
                      kappa=k["kappa"], beta=k["beta"])

    def psi_matrix(self, rho0: SpatialField) -> np.ndarray | None:
        kern = self.kernel()
        if kern.kind == "zero":
            return None
        return kernel_matrix(kern, rho0, (0.0, 1.0))

    def v0(self, rho0: SpatialField) -> np.ndarray:
        ini = self.raw["initial"]
        return ini["v0_offset"] + ini["v0_cos_amplitude"] * np.cos(np.pi * rho0.nodes)

    def w0(self, rho0: SpatialField) -> np.ndarray:
        return np.full(rho0.n_x, float(self.raw["initial"]["w0"]))


# ---------------------------------------------------------------------------
# CSV plumbing


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _write_csv(path: Path, header: list[str], rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([cell if isinstance(cell, str) else _fmt(cell) for cell in row])
    path.write_text(buf.getvalue())


def read_csv_columns(path) -> dict[str, np.ndarray]:
    """Read a harness CSV back as float columns keyed by header name."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        cols = {h: [] for h in header}
        for row in reader:
            for h, cell in zip(header, row):
                cols[h].append(float(cell))
    return {h: np.array(v) for h, v in cols.items()}


def content_hash(run_dir: Path) -> str:
    """sha256 over every CSV under the run directory, path-sorted."""
    digest = hashlib.sha256()
    for p in sorted(run_dir.rglob("*.csv")):
        digest.update(p.relative_to(run_dir).as_posix().encode())
        digest.update(p.read_bytes())
    return "sha256:" + digest.hexdigest()


# ---------------------------------------------------------------------------
# single run


def run_single(config: RunConfig, epsilon: float, run_dir) -> dict:
    """Execute kinetic + macro + diagnostics for one epsilon; persist outputs.

    Returns the manifest dict (also written to manifest.json).  Never
    raises on solver failures: status / error land in the manifest and
    the caller decides.
    """
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    manifest = {
        "kind": "run",
        "epsilon": epsilon,
        "config": config.raw,
        "status": "ok",
        "error": None,
        "version": "0.1.0",
    }
    try:
        result = _execute(config, epsilon, run_dir, manifest)
        manifest.update(result)
    except Exception as exc:  # record and keep the sweep alive
        manifest["status"] = "failed"
        manifest["error"] = f"{type(exc).__name__}: {exc}"
    manifest["wall_time_s"] = round(time.perf_counter() - started, 3)
    if manifest["status"] == "ok":
        manifest["content_hash"] = content_hash(run_dir)
    (run_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return manifest


def _execute(config: RunConfig, epsilon: float, run_dir: Path, manifest: dict) -> dict:
    params = config.params(epsilon)
    grid = config.grid()
    rho0 = config.rho0()
    psi = config.psi_matrix(rho0)
    sched = config.raw["schedule"]
    state = kinetic.initialize_well_prepared(
        params, grid, rho0, config.v0(rho0), config.w0(rho0),
        sigma_w=config.raw["initial"]["sigma_w"], psi_mat=psi,
        scheme=config.raw["scheme"])

    limit = macro_limit.integrate(params, rho0, psi, config.v0(rho0),
                                  config.w0(rho0), sched["t_end"])

    sandwich_rows = []
    passengers = None
    extra = {}
    if config.raw["sandwich"]:
        env = config.raw["envelopes"]
        fm, fp, m0 = hopfcole.initial_envelopes(
            state, env["alpha0"], env["m0"], env["C"])
        passengers = [fm, fp]
        extra["sandwich"] = {"alpha0": env["alpha0"], "m0": m0, "C": env["C"]}
        sandwich_rows.append((state.t, float((fp - state.f).min()),
                              float((state.f - fm).min()), float(state.f.max())))

        def record(st, snap):
            sandwich_rows.append((snap.t, float((passengers[1] - st.f).min()),
                                  float((st.f - passengers[0]).min()),
                                  float(st.f.max())))
        observers = (record,)
    else:
        observers = ()

    snaps = kinetic.run(state, sched["t_end"], dt=sched["dt"],
                        snapshot_stride=sched["snapshot_stride"],
                        observers=observers, keep_fields="all",
                        passengers=passengers)

    node_ids = np.arange(rho0.n_x)
    moments_rows = []
    macro_rows = []
    d2_rows = []
    bound_rows = []
    d2_0 = snaps[0].d2
    for snap in snaps:
        Vl, Wl = limit.at(snap.t)
        decay = d2_0 * np.exp(-2.0 * params.m_star * snap.t / epsilon)
        bound = 3.0 * (decay + epsilon)
        for i in node_ids:
            moments_rows.append((snap.t, i, snap.mass[i], snap.V[i], snap.W[i],
                                 snap.E[i], snap.d2[i], snap.m_high[i],
                                 snap.outflow[i], snap.ring[i], snap.min_f))
            macro_rows.append((snap.t, i, snap.V[i], snap.W[i], Vl[i], Wl[i]))
            d2_rows.append((snap.t, i, snap.d2[i], bound[i]))
        state.f = snap.f
        hc = hopfcole.hopf_cole(state)
        stat = hopfcole.rate_statistic(hc, grid, params, rho0, Vl, Wl)
        norm = hopfcole.theorem_bound_check(hc, grid, params, rho0, Vl)
        bound_rows.append((snap.t, stat, norm))

    _write_csv(run_dir / "moments.csv",
               ["t", "node", "mass", "V", "W", "E", "d2", "m_high",
                "outflow", "ring", "min_f"], moments_rows)
    _write_csv(run_dir / "macro_compare.csv",
               ["t", "node", "V_eps", "W_eps", "V_limit", "W_limit"], macro_rows)
    _write_csv(run_dir / "d2_series.csv", ["t", "node", "d2", "bound"], d2_rows)
    _write_csv(run_dir / "theorem_bound.csv", ["t", "statistic", "normalized"],
               bound_rows)
    if sandwich_rows:
        _write_csv(run_dir / "sandwich.csv",
                   ["t", "min_gap_plus", "min_gap_minus", "f_max"], sandwich_rows)

    dump = config.raw["dump_fields"]
    snap_meta = []
    if dump != "none":
        keep = range(len(snaps)) if dump == "all" else (0, len(snaps) - 1)
        (run_dir / "snapshots").mkdir(exist_ok=True)
        vv, ww = grid.mesh()
        for k in keep:
            snap = snaps[k]
            state.f = snap.f
            hc = hopfcole.hopf_cole(state)
            rows = []
            for i in node_ids:
                for iv in range(grid.n_v):
                    for iw in range(grid.n_w):
                        rows.append((i, grid.v_centers[iv], grid.w_centers[iw],
                                     snap.f[i, iv, iw], hc.phi[i, iv, iw]))
            name = f"snapshots/snap_{k:03d}.csv"
            _write_csv(run_dir / name, ["node", "v", "w", "f", "phi"], rows)
            snap_meta.append({"index": k, "t": snap.t, "file": name})

    return {
        **extra,
        "files": {
            "moments": "moments.csv",
            "macro_compare": "macro_compare.csv",
            "d2_series": "d2_series.csv",
            "theorem_bound": "theorem_bound.csv",
            **({"sandwich": "sandwich.csv"} if sandwich_rows else {}),
        },
        "snapshots": snap_meta,
        "rho0": {
            "nodes": [float(x) for x in rho0.nodes],
            "values": [float(x) for x in rho0.values],
            "weights": [float(x) for x in rho0.quad_weights],
        },
        "schedule_effective": {
            "t_end": sched["t_end"],
            "snapshot_stride": sched["snapshot_stride"],
            "n_snapshots": len(snaps),
        },
    }


# ---------------------------------------------------------------------------
# sweep


def eps_dirname(epsilon: float) -> str:
    return "eps_" + format(epsilon, "g").replace(".", "p")


def run_sweep(config: RunConfig, output_dir=None) -> dict:
    """Run every sweep member; isolate failures; write sweep_manifest.json."""
    out = Path(output_dir if output_dir is not None else config.raw["output_dir"])
    out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    members = []
    for eps in config.raw["sweep"]:
        sub = out / eps_dirname(eps)
        manifest = run_single(config, eps, sub)
        members.append({"epsilon": eps, "dir": sub.name,
                        "status": manifest["status"],
                        "error": manifest["error"]})
    digest = hashlib.sha256()
    for m in members:
        sub_manifest = json.loads((out / m["dir"] / "manifest.json").read_text())
        digest.update(sub_manifest.get("content_hash", "failed").encode())
    sweep_manifest = {
        "kind": "sweep",
        "config": config.raw,
        "members": members,
        "content_hash": "sha256:" + digest.hexdigest(),
        "wall_time_s": round(time.perf_counter() - started, 3),
        "version": "0.1.0",
    }
    (out / "sweep_manifest.json").write_text(
        json.dumps(sweep_manifest, indent=2, sort_keys=True))
    return sweep_manifest


# ---------------------------------------------------------------------------
# particle cross-check


def run_particle_compare(config: RunConfig, epsilon: float, n: int, run_dir,
                         n_checkpoints: int = 10) -> dict:
    """Particle ensemble vs kinetic node means at evenly spaced checkpoints.

    Writes particles.csv (empirical moments) and particle_compare.csv
    (per checkpoint and node: mean_v, standard error, kinetic V, and the
    deviation in standard-error units).
    """
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    params = config.params(epsilon)
    grid = config.grid()
    rho0 = config.rho0()
    psi = config.psi_matrix(rho0)
    sched = config.raw["schedule"]
    state = kinetic.initialize_well_prepared(
        params, grid, rho0, config.v0(rho0), config.w0(rho0),
        sigma_w=config.raw["initial"]["sigma_w"], psi_mat=psi,
        scheme=config.raw["scheme"])
    snaps = kinetic.run(state, sched["t_end"], dt=sched["dt"],
                        snapshot_stride=sched["t_end"] / n_checkpoints,
                        keep_fields="none")

    ens = particles.initialize_ensemble(
        params, rho0, n, config.v0(rho0), config.w0(rho0),
        sigma_w=config.raw["initial"]["sigma_w"], seed=config.raw["seed"],
        kernel=config.kernel())
    moments = particles.run_particles(ens, sched["t_end"],
                                      n_checkpoints=n_checkpoints)

    # two yardsticks: the i.i.d. standard error of the cell mean, and the
    # fluctuation band from linearizing the finite-n mean dynamics (the
    # cell mean is preserved by the pairwise coupling, so it random-walks
    # at scale sqrt(2 t / n_cell) and the i.i.d. error bar is too tight)
    limit = macro_limit.integrate(params, rho0, psi, config.v0(rho0),
                                  config.w0(rho0), sched["t_end"])
    fluct = macro_limit.mean_fluctuation_sd(
        limit, params, rho0, psi, moments[0].count,
        params.epsilon / rho0.values,
        config.raw["initial"]["sigma_w"] ** 2,
        [mo.t for mo in moments])

    p_rows = []
    c_rows = []
    n_within = np.zeros(rho0.n_x, dtype=int)
    n_within_fluct = np.zeros(rho0.n_x, dtype=int)
    for k, (mo, snap) in enumerate(zip(moments, snaps)):
        for i in range(rho0.n_x):
            p_rows.append((mo.t, i, mo.count[i], mo.mean_v[i], mo.mean_w[i],
                           mo.var_v[i], mo.sem_v[i]))
            n_se = abs(mo.mean_v[i] - snap.V[i]) / max(mo.sem_v[i], 1e-300)
            n_fse = abs(mo.mean_v[i] - snap.V[i]) / max(fluct[k, i], 1e-300)
            c_rows.append((mo.t, i, mo.mean_v[i], mo.sem_v[i], snap.V[i],
                           n_se, fluct[k, i], n_fse))
            if mo.t > 0:
                n_within[i] += n_se <= 3.0
                n_within_fluct[i] += n_fse <= 3.0
    _write_csv(run_dir / "particles.csv",
               ["t", "node", "count", "mean_v", "mean_w", "var_v", "sem_v"], p_rows)
    _write_csv(run_dir / "particle_compare.csv",
               ["t", "node", "mean_v", "sem_v", "V_kinetic", "n_se",
                "fluct_se", "n_fse"], c_rows)
    summary = {
        "kind": "particle_compare",
        "epsilon": epsilon,
        "n_particles": n,
        "n_checkpoints": n_checkpoints,
        "within_3se_per_node": n_within.tolist(),
        "within_3fluct_per_node": n_within_fluct.tolist(),
        "version": "0.1.0",
    }
    (run_dir / "particle_manifest.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True))
    return summary


# ---------------------------------------------------------------------------
# rate fitting


@dataclass(frozen=True)
class RateFit:
    """Least-squares line through (ln eps, ln statistic)."""

    pairs: tuple
    slope: float
    r2: float


def fit_rate(pairs) -> RateFit:
    """Fit ln(statistic) = slope ln(eps) + const; needs >= 3 positive pairs."""
    pairs = tuple((float(e), float(s)) for e, s in pairs)
    if len(pairs) < 3:
        raise ValueError("rate fit needs at least 3 pairs")
    if any(e <= 0 or s <= 0 for e, s in pairs):
        raise DegeneratePairs("rate fit needs positive epsilons and statistics")
    x = np.log([e for e, _ in pairs])
    y = np.log([s for _, s in pairs])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot < 1e-30:
        r2 = 1.0 if ss_res < 1e-30 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return RateFit(pairs=pairs, slope=float(slope), r2=r2)


# ---------------------------------------------------------------------------
# verification


@dataclass
class CheckLine:
    name: str
    passed: bool
    detail: str

    def render(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.name}: {self.detail}"


def _member_dirs(sweep_dir: Path) -> list[tuple[float, Path]]:
    manifest = json.loads((sweep_dir / "sweep_manifest.json").read_text())
    return [(m["epsilon"], sweep_dir / m["dir"]) for m in manifest["members"]
            if m["status"] == "ok"]


def verify_run(run_dir) -> list[CheckLine]:
    """Conservation, positivity, truncation, decay envelope, hash for one run."""
    run_dir = Path(run_dir)
    manifest = json.loads((run_dir / "manifest.json").read_text())
    checks = []
    if manifest["status"] != "ok":
        return [CheckLine("run status", False, manifest["error"] or "failed")]

    stored = manifest["content_hash"]
    fresh = content_hash(run_dir)
    checks.append(CheckLine("content hash", fresh == stored,
                            f"{fresh[:18]}... vs manifest {stored[:18]}..."))

    mo = read_csv_columns(run_dir / "moments.csv")
    # per-node mass of f is rho0(x) itself: f integrates to the spatial
    # density pointwise, no cell-width factor
    rho0_vals = np.array(manifest["rho0"]["values"])
    node = mo["node"].astype(int)
    node_mass0 = rho0_vals[node]
    drift = np.abs(mo["mass"] + mo["outflow"] - node_mass0) / node_mass0
    checks.append(CheckLine("mass drift <= 1e-8", bool(drift.max() <= 1e-8),
                            f"max {drift.max():.3e}"))
    checks.append(CheckLine("min f >= 0", bool(mo["min_f"].min() >= 0.0),
                            f"min {mo['min_f'].min():.3e}"))
    checks.append(CheckLine("tail mass <= 1e-8", bool(mo["ring"].max() <= 1e-8),
                            f"max ring fraction {mo['ring'].max():.3e}"))

    d2 = read_csv_columns(run_dir / "d2_series.csv")
    ok = bool(np.all(d2["d2"] <= d2["bound"]))
    margin = (d2["bound"] - d2["d2"]).min()
    checks.append(CheckLine("relative energy decay envelope", ok,
                            f"min(bound - d2) = {margin:.3e}"))

    if (run_dir / "sandwich.csv").exists():
        sw = read_csv_columns(run_dir / "sandwich.csv")
        tol = -1e-10 * sw["f_max"]
        ok = bool(np.all(sw["min_gap_plus"] >= tol)
                  and np.all(sw["min_gap_minus"] >= tol))
        worst = min(sw["min_gap_plus"].min(), sw["min_gap_minus"].min())
        checks.append(CheckLine("sandwich ordering", ok, f"worst gap {worst:.3e}"))
    return checks


def verify_sweep(sweep_dir) -> list[CheckLine]:
    """Per-member checks plus the three cross-member rate fits."""
    sweep_dir = Path(sweep_dir)
    members = _member_dirs(sweep_dir)
    checks = []
    for eps, sub in members:
        for line in verify_run(sub):
            checks.append(CheckLine(f"[eps={eps:g}] {line.name}", line.passed,
                                    line.detail))
    if len(members) < 3:
        checks.append(CheckLine("rate fits", False,
                                f"only {len(members)} usable members"))
        return checks

    def last_row_stat(sub, csv_name, pick):
        cols = read_csv_columns(sub / csv_name)
        t_final = cols["t"].max()
        sel = cols["t"] == t_final
        return pick({k: v[sel] for k, v in cols.items()})

    pairs_theorem = [(eps, last_row_stat(sub, "theorem_bound.csv",
                                         lambda c: float(c["statistic"][0])))
                     for eps, sub in members]
    fit = fit_rate(pairs_theorem)
    checks.append(CheckLine("concentration rate slope >= 0.8, r2 >= 0.95",
                            fit.slope >= 0.8 and fit.r2 >= 0.95,
                            f"slope {fit.slope:.3f}, r2 {fit.r2:.4f}"))

    pairs_macro = [(eps, last_row_stat(
        sub, "macro_compare.csv",
        lambda c: float(np.max(np.hypot(c["V_eps"] - c["V_limit"],
                                        c["W_eps"] - c["W_limit"])))))
        for eps, sub in members]
    fit = fit_rate(pairs_macro)
    checks.append(CheckLine("macro gap rate slope >= 0.8", fit.slope >= 0.8,
                            f"slope {fit.slope:.3f}, r2 {fit.r2:.4f}"))

    pairs_d2 = [(eps, last_row_stat(sub, "d2_series.csv",
                                    lambda c: float(c["d2"].max())))
                for eps, sub in members]
    fit = fit_rate(pairs_d2)
    checks.append(CheckLine("relative energy plateau slope >= 0.8",
                            fit.slope >= 0.8,
                            f"slope {fit.slope:.3f}, r2 {fit.r2:.4f}"))
    return checks


def verify(path) -> tuple[bool, list[CheckLine]]:
    """Dispatch on directory kind; returns (all passed, check lines)."""
    path = Path(path)
    if (path / "sweep_manifest.json").exists():
        checks = verify_sweep(path)
    elif (path / "manifest.json").exists():
        checks = verify_run(path)
    else:
        return False, [CheckLine("manifest", False, f"no manifest under {path}")]
    return all(c.passed for c in checks), checks
