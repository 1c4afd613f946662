"""Uniform tensor grid on the (v, w) phase plane and midpoint quadrature.

Distributions are stored as cell-center samples f[i, j] ~ f(v_i, w_j) on a
box symmetric about a configurable center; integrals are midpoint sums
weighted by the cell area.  The box has to be generous enough that the
mass sitting in the outermost ring is negligible, which is what
`truncation_report` measures and what callers check before trusting a
run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class NonFiniteInput(Exception):
    """Raised when a quadrature input contains NaN or infinities."""


@dataclass(frozen=True)
class PhaseGrid:
    """Uniform cell-centered grid on [v_center +- v_half] x [w_center +- w_half]."""

    n_v: int
    n_w: int
    v_half: float
    w_half: float
    v_center: float = 0.0
    w_center: float = 0.0

    def __post_init__(self):
        if self.n_v < 8 or self.n_w < 8:
            raise ValueError("phase grid needs n_v, n_w >= 8")
        if self.v_half <= 0 or self.w_half <= 0:
            raise ValueError("phase grid needs positive half-widths")

    @property
    def dv(self) -> float:
        return 2.0 * self.v_half / self.n_v

    @property
    def dw(self) -> float:
        return 2.0 * self.w_half / self.n_w

    @property
    def cell_area(self) -> float:
        return self.dv * self.dw

    @property
    def v_centers(self) -> np.ndarray:
        return self.v_center - self.v_half + self.dv * (np.arange(self.n_v) + 0.5)

    @property
    def w_centers(self) -> np.ndarray:
        return self.w_center - self.w_half + self.dw * (np.arange(self.n_w) + 0.5)

    @property
    def v_edges(self) -> np.ndarray:
        return self.v_center - self.v_half + self.dv * np.arange(self.n_v + 1)

    @property
    def w_edges(self) -> np.ndarray:
        return self.w_center - self.w_half + self.dw * np.arange(self.n_w + 1)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Broadcastable (n_v, 1) and (1, n_w) center coordinates."""
        return self.v_centers[:, None], self.w_centers[None, :]

    def manifest(self) -> dict:
        return {
            "n_v": self.n_v, "n_w": self.n_w,
            "v_center": self.v_center, "v_half": self.v_half,
            "w_center": self.w_center, "w_half": self.w_half,
        }


def moment(grid: PhaseGrid, f: np.ndarray, weight=None) -> np.ndarray:
    """Midpoint quadrature of weight(v, w) * f over the phase plane.

    f may carry leading batch axes; the trailing two axes must be
    (n_v, n_w).  weight is either None (plain mass), a callable of the
    broadcast mesh, or a precomputed array broadcastable to (n_v, n_w).
    """
    f = np.asarray(f, dtype=float)
    if f.shape[-2:] != (grid.n_v, grid.n_w):
        raise ValueError(f"trailing axes {f.shape[-2:]} do not match grid "
                         f"({grid.n_v}, {grid.n_w})")
    if not np.all(np.isfinite(f)):
        raise NonFiniteInput("distribution contains non-finite entries")
    if weight is None:
        integrand = f
    else:
        if callable(weight):
            vv, ww = grid.mesh()
            weight = weight(vv, ww)
        weight = np.asarray(weight, dtype=float)
        if not np.all(np.isfinite(weight)):
            raise NonFiniteInput("weight contains non-finite entries")
        integrand = f * weight
    return integrand.sum(axis=(-2, -1)) * grid.cell_area


def truncation_report(grid: PhaseGrid, f: np.ndarray) -> np.ndarray:
    """Fraction of mass in the outermost cell ring, per batch entry.

    Callers treat anything above 1e-8 as an inadequate box.
    """
    f = np.asarray(f, dtype=float)
    total = moment(grid, f)
    ring = np.zeros(f.shape[:-2])
    ring = ring + f[..., 0, :].sum(axis=-1) + f[..., -1, :].sum(axis=-1)
    ring = ring + f[..., 1:-1, 0].sum(axis=-1) + f[..., 1:-1, -1].sum(axis=-1)
    ring = ring * grid.cell_area
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(total > 0, ring / total, 0.0)
    return frac
