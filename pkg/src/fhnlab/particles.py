"""Stochastic particle network: n neurons at frozen spatial positions.

Each neuron carries (x_i, v_i, w_i); voltages follow an Euler-Maruyama
discretization of

    dv_i = ( N(v_i) - w_i - (1/n) sum_j Phi_eps(x_i, x_j) (v_i - v_j) ) dt
           + sqrt(2) dB_i
    dw_i = A(v_i, w_i) dt

with the two-scale coupling

    Phi_eps(x_i, x_j) = (1/eps) 1{same spatial cell} / (cell mass fraction)
                        + Psi(x_i, x_j).

The mean-field limit of the cell-local part relaxes each voltage toward
its cell mean at rate 1/eps, which matches the kinetic solver's local
alignment rate rho0(x)/eps on the uniform profile rho0 == 1 (the regime
the cross-validation suite runs in).  Noise comes from a counter-based
Philox stream keyed by the master seed, so results are reproducible
bit-for-bit regardless of how the draws are batched.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Kernel, ModelParams, SpatialField


class EmptyCell(Exception):
    """A spatial cell holds no neurons, so its mean is undefined."""


class StabilityViolation(Exception):
    """Euler-Maruyama step exceeds the stiff-coupling stability budget."""


@dataclass
class Ensemble:
    """Particle state plus the frozen spatial bookkeeping."""

    params: ModelParams
    rho0: SpatialField
    x: np.ndarray            # positions, frozen
    cell: np.ndarray         # cell index of each neuron
    v: np.ndarray
    w: np.ndarray
    cell_mass: np.ndarray    # mass fraction of each cell under rho0
    psi: np.ndarray | None   # pairwise Psi(x_i, x_j), or None
    rng: np.random.Generator
    t: float = 0.0

    @property
    def n(self) -> int:
        return len(self.x)

    def cell_counts(self) -> np.ndarray:
        return np.bincount(self.cell, minlength=self.rho0.n_x)


def _cell_edges(rho0: SpatialField) -> np.ndarray:
    dx = rho0.quad_weights
    edges = np.concatenate([[rho0.nodes[0] - 0.5 * dx[0]],
                            rho0.nodes + 0.5 * dx])
    return edges


def initialize_ensemble(params: ModelParams, rho0: SpatialField, n: int,
                        v0, w0, sigma_w: float = 0.5, seed: int = 0,
                        kernel: Kernel | None = None) -> Ensemble:
    """Sample neurons from the well-prepared product law.

    Positions are i.i.d. from rho0 (piecewise constant over the cells);
    per neuron, v ~ Gaussian(v0(cell), eps/rho0(cell)) and
    w ~ Gaussian(w0(cell), sigma_w^2).  Raises EmptyCell when sampling
    leaves a spatial cell unpopulated.
    """
    rng = np.random.Generator(np.random.Philox(key=seed))
    n_x = rho0.n_x
    edges = _cell_edges(rho0)
    probs = rho0.values * rho0.quad_weights
    probs = probs / probs.sum()
    cell = rng.choice(n_x, size=n, p=probs)
    u = rng.uniform(size=n)
    x = edges[cell] + u * (edges[cell + 1] - edges[cell])
    counts = np.bincount(cell, minlength=n_x)
    if np.any(counts == 0):
        raise EmptyCell(f"cells {np.nonzero(counts == 0)[0].tolist()} received no neurons")
    v0 = np.broadcast_to(np.asarray(v0, dtype=float), (n_x,))
    w0 = np.broadcast_to(np.asarray(w0, dtype=float), (n_x,))
    sig_v = np.sqrt(params.epsilon / rho0.values)
    v = v0[cell] + sig_v[cell] * rng.standard_normal(n)
    w = w0[cell] + sigma_w * rng.standard_normal(n)
    psi = None
    if kernel is not None and kernel.kind != "zero":
        half = 0.5 * float(rho0.quad_weights[0])
        psi = kernel.evaluate(x[:, None], x[None, :], half)
    return Ensemble(params=params, rho0=rho0, x=x, cell=cell, v=v, w=w,
                    cell_mass=probs, psi=psi, rng=rng)


def coupling_rates(ens: Ensemble) -> np.ndarray:
    """Per-neuron total coupling rate (1/n) sum_j Phi_eps(x_i, x_j)."""
    counts = ens.cell_counts()
    local = counts[ens.cell] / (ens.n * ens.params.epsilon * ens.cell_mass[ens.cell])
    if ens.psi is not None:
        local = local + ens.psi.sum(axis=1) / ens.n
    return local


def em_step(ens: Ensemble, dt: float):
    """One Euler-Maruyama step; noise only in v.

    Raises StabilityViolation when dt exceeds a quarter of the inverse
    maximal coupling rate times epsilon, the budget under which the
    stiff alignment stays contractive for the explicit step.
    """
    rate = coupling_rates(ens)
    if dt > ens.params.epsilon / (4.0 * rate.max()):
        raise StabilityViolation(
            f"dt = {dt:.3e} exceeds eps/(4 max rate) = {ens.params.epsilon / (4 * rate.max()):.3e}")
    counts = ens.cell_counts()
    if np.any(counts == 0):
        raise EmptyCell("a spatial cell lost all neurons")
    sums = np.bincount(ens.cell, weights=ens.v, minlength=ens.rho0.n_x)
    cell_mean = sums / counts
    local = (counts[ens.cell] / (ens.n * ens.params.epsilon * ens.cell_mass[ens.cell])) \
        * (ens.v - cell_mean[ens.cell])
    if ens.psi is not None:
        row = ens.psi.sum(axis=1)
        long_range = (ens.v * row - ens.psi @ ens.v) / ens.n
    else:
        long_range = 0.0
    drift_v = ens.params.drift_N(ens.v) - ens.w - local - long_range
    drift_w = ens.params.adaptation_A(ens.v, ens.w)
    noise = ens.rng.standard_normal(ens.n)
    ens.v = ens.v + dt * drift_v + np.sqrt(2.0 * dt) * noise
    ens.w = ens.w + dt * drift_w
    ens.t += dt


@dataclass
class CellMoments:
    """Per-cell empirical summaries at one time."""

    t: float
    count: np.ndarray
    mean_v: np.ndarray
    mean_w: np.ndarray
    var_v: np.ndarray
    sem_v: np.ndarray      # standard error of mean_v


def empirical_moments(ens: Ensemble) -> CellMoments:
    """Plug-in per-cell moments; raises EmptyCell on unpopulated cells."""
    counts = ens.cell_counts()
    if np.any(counts == 0):
        raise EmptyCell("a spatial cell holds no neurons")
    mean_v = np.bincount(ens.cell, weights=ens.v, minlength=ens.rho0.n_x) / counts
    mean_w = np.bincount(ens.cell, weights=ens.w, minlength=ens.rho0.n_x) / counts
    # centered second pass: the textbook E[v^2] - mean^2 form cancels
    # catastrophically once the cloud concentrates away from the origin
    centered = ens.v - mean_v[ens.cell]
    var_v = np.bincount(ens.cell, weights=centered ** 2, minlength=ens.rho0.n_x) / counts
    sem_v = np.sqrt(var_v / counts)
    return CellMoments(t=ens.t, count=counts, mean_v=mean_v, mean_w=mean_w,
                       var_v=var_v, sem_v=sem_v)


def run_particles(ens: Ensemble, t_end: float, dt: float | None = None,
                  n_checkpoints: int = 10) -> list[CellMoments]:
    """March to t_end recording per-cell moments at evenly spaced checkpoints."""
    if dt is None:
        dt = 0.8 * ens.params.epsilon / (4.0 * coupling_rates(ens).max())
    out = [empirical_moments(ens)]
    t0 = ens.t
    for k in range(1, n_checkpoints + 1):
        target = t0 + (t_end - t0) * k / n_checkpoints
        n_sub = max(1, int(np.ceil((target - ens.t) / dt - 1e-12)))
        h = (target - ens.t) / n_sub
        for _ in range(n_sub):
            em_step(ens, h)
        out.append(empirical_moments(ens))
    return out
