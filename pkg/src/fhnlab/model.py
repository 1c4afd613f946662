"""Model data: dynamical parameters, spatial profiles, and interaction kernels.

The model couples a fast voltage variable v and a slow adaptation variable w
at every point x of a compact spatial domain K (an interval).  The voltage
feels a bistable drift N(v), the adaptation relaxes linearly,

    A(v, w) = a v - b w + c,       b > 0,

and neurons interact through a spatial kernel Psi(x, x') plus a strong local
alignment whose stiffness is 1/epsilon.  Everything downstream (kinetic
solver, macroscopic system, particle network) reads its coefficients from
the types defined here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np


class NonIntegrableKernel(Exception):
    """Raised when a kernel's row norms diverge under grid refinement."""


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one structural-assumption check."""

    name: str
    ok: bool
    detail: str


_CUBIC = (0.0, 1.0, 0.0, -1.0)  # N(v) = v - v^3, coefficients low -> high


@dataclass(frozen=True)
class ModelParams:
    """Dynamical parameters shared by all three description levels.

    drift_kind selects N: "cubic" is v - v^3; "polynomial" takes
    drift_coeffs (ascending order) and expects an odd degree with a
    negative leading coefficient so trajectories stay confined.
    p_prime bounds the growth of N' and N''; by default it is derived
    from the polynomial degree (deg N - 1).
    """

    epsilon: float
    a: float = 1.0
    b: float = 1.0
    c: float = 0.0
    drift_kind: str = "cubic"
    drift_coeffs: tuple[float, ...] | None = None
    m_star: float = 0.9
    p_prime: int | None = None

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.b <= 0:
            raise ValueError("b must be positive")
        if self.m_star <= 0 or self.m_star > 1:
            raise ValueError("m_star must lie in (0, 1]")
        if self.drift_kind not in ("cubic", "polynomial"):
            raise ValueError(f"unknown drift_kind {self.drift_kind!r}")
        if self.drift_kind == "polynomial" and not self.drift_coeffs:
            raise ValueError("polynomial drift needs drift_coeffs")

    @property
    def coeffs(self) -> tuple[float, ...]:
        if self.drift_kind == "cubic":
            return _CUBIC
        return tuple(float(ci) for ci in self.drift_coeffs)

    @property
    def p(self) -> int:
        """Confinement exponent: the polynomial degree of N."""
        cs = self.coeffs
        deg = len(cs) - 1
        while deg > 0 and cs[deg] == 0.0:
            deg -= 1
        return deg

    @property
    def p_prime_effective(self) -> int:
        if self.p_prime is not None:
            return self.p_prime
        return max(self.p - 1, 0)

    def drift_N(self, v):
        """Voltage drift N(v), vectorized."""
        v = np.asarray(v, dtype=float)
        out = np.zeros_like(v)
        for ci in reversed(self.coeffs):
            out = out * v + ci
        return out

    def drift_N_prime(self, v):
        v = np.asarray(v, dtype=float)
        cs = self.coeffs
        out = np.zeros_like(v)
        for k in range(len(cs) - 1, 0, -1):
            out = out * v + k * cs[k]
        return out

    def primitive_n(self, v):
        """Antiderivative n of N with n(0) = 0."""
        v = np.asarray(v, dtype=float)
        cs = self.coeffs
        out = np.zeros_like(v)
        for k in range(len(cs) - 1, -1, -1):
            out = out * v + cs[k] / (k + 1)
        return out * v

    def adaptation_A(self, v, w):
        """Adaptation drift A(v, w) = a v - b w + c."""
        return self.a * np.asarray(v, dtype=float) - self.b * np.asarray(w, dtype=float) + self.c

    def validate(self) -> list[CheckResult]:
        """Report on the structural assumptions; never raises.

        Oracle configurations (e.g. linear drift) intentionally violate
        the confinement assumption, so failures are reported rather than
        fatal.  Pass the report to `require_valid` to enforce.
        """
        checks = []
        cs = self.coeffs
        deg = self.p
        lead = cs[deg] if deg < len(cs) else 0.0
        ok = deg >= 2 and deg % 2 == 1 and lead < 0
        checks.append(CheckResult(
            "confinement of N (odd degree >= 3, negative leading coefficient)",
            ok, f"degree {deg}, leading coefficient {lead}"))
        pp = self.p_prime_effective
        ok = pp >= max(deg - 1, 0)
        checks.append(CheckResult(
            "growth exponent of N' covers deg N - 1",
            ok, f"p_prime {pp} vs deg N - 1 = {max(deg - 1, 0)}"))
        checks.append(CheckResult(
            "adaptation leak b > 0", self.b > 0, f"b = {self.b}"))
        checks.append(CheckResult(
            "stiffness epsilon > 0", self.epsilon > 0, f"epsilon = {self.epsilon}"))
        return checks


def require_valid(checks: list[CheckResult]):
    bad = [c for c in checks if not c.ok]
    if bad:
        msg = "; ".join(f"{c.name}: {c.detail}" for c in bad)
        raise ValueError(f"assumption checks failed: {msg}")


@dataclass(frozen=True)
class SpatialField:
    """Scalar field sampled at the midpoints of a uniform partition of K."""

    nodes: np.ndarray
    values: np.ndarray
    quad_weights: np.ndarray

    def __post_init__(self):
        if not (len(self.nodes) == len(self.values) == len(self.quad_weights)):
            raise ValueError("nodes, values, quad_weights must share a length")

    @property
    def n_x(self) -> int:
        return len(self.nodes)

    def integral(self) -> float:
        return float(np.dot(self.values, self.quad_weights))

    def with_values(self, values) -> "SpatialField":
        return replace(self, values=np.asarray(values, dtype=float))


def uniform_nodes(n_x: int, domain=(0.0, 1.0)) -> tuple[np.ndarray, np.ndarray]:
    """Cell midpoints and midpoint-rule weights on the interval domain."""
    lo, hi = float(domain[0]), float(domain[1])
    if n_x < 1 or hi <= lo:
        raise ValueError("need n_x >= 1 and a nondegenerate interval")
    dx = (hi - lo) / n_x
    nodes = lo + dx * (np.arange(n_x) + 0.5)
    return nodes, np.full(n_x, dx)


def rho0_uniform(n_x: int, domain=(0.0, 1.0)) -> SpatialField:
    """Uniform mass profile, total mass one."""
    nodes, wts = uniform_nodes(n_x, domain)
    meas = float(wts.sum())
    return SpatialField(nodes, np.full(n_x, 1.0 / meas), wts)


def rho0_bump(n_x: int, amplitude: float = 0.3, m_star: float = 0.7,
              domain=(0.0, 1.0)) -> SpatialField:
    """Cosine bump profile clipped to [m_star, 1/m_star], renormalized to mass one."""
    nodes, wts = uniform_nodes(n_x, domain)
    lo, hi = float(domain[0]), float(domain[1])
    vals = 1.0 + amplitude * np.cos(2 * np.pi * (nodes - lo) / (hi - lo))
    # clipping and renormalizing fight each other when the amplitude is
    # large, so iterate to their joint fixed point (geometric convergence;
    # one pass when nothing is clipped)
    for _ in range(200):
        clipped = np.clip(vals, m_star, 1.0 / m_star)
        vals = clipped / float(np.dot(clipped, wts))
        if np.max(np.abs(vals - clipped)) <= 1e-15:
            break
    return SpatialField(nodes, vals, wts)


def validate_rho0(rho0: SpatialField, m_star: float, tol: float = 1e-10) -> list[CheckResult]:
    checks = []
    total = rho0.integral()
    checks.append(CheckResult(
        "rho0 has total mass one", abs(total - 1.0) <= tol, f"integral = {total!r}"))
    lo, hi = float(rho0.values.min()), float(rho0.values.max())
    ok = lo >= m_star - 1e-12 and hi <= 1.0 / m_star + 1e-12
    checks.append(CheckResult(
        "rho0 within [m_star, 1/m_star]", ok,
        f"range [{lo:.6g}, {hi:.6g}] vs [{m_star:.6g}, {1.0 / m_star:.6g}]"))
    return checks


@dataclass(frozen=True)
class Kernel:
    """Spatial interaction kernel Psi(x, x').

    kinds: "zero"; "exponential" strength*exp(-kappa|x-x'|); "power_law"
    strength*|x-x'|^(-beta) with the diagonal capped at the half-cell
    value.  Power laws need beta < 1 (the spatial dimension) to stay
    integrable; construction of the matrix checks this by a refinement
    heuristic on the row norms.
    """

    kind: str = "exponential"
    strength: float = 1.0
    kappa: float = 1.0
    beta: float = 0.5

    def __post_init__(self):
        if self.kind not in ("zero", "exponential", "power_law"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")

    def evaluate(self, x, xp, half_cell: float) -> np.ndarray:
        """Pointwise Psi(x, x'), diagonal capped for the power law."""
        x = np.asarray(x, dtype=float)
        xp = np.asarray(xp, dtype=float)
        r = np.abs(x - xp)
        if self.kind == "zero":
            return np.zeros(np.broadcast(x, xp).shape)
        if self.kind == "exponential":
            return self.strength * np.exp(-self.kappa * r)
        r = np.maximum(r, half_cell)  # cap at half-cell separation
        return self.strength * r ** (-self.beta)


def _row_norm_at(kernel: Kernel, n_x: int, domain) -> float:
    nodes, wts = uniform_nodes(n_x, domain)
    half = 0.5 * float(wts[0])
    mat = kernel.evaluate(nodes[:, None], nodes[None, :], half)
    return float((mat * wts[None, :]).sum(axis=1).max())


def kernel_matrix(kernel: Kernel, rho0: SpatialField, domain=(0.0, 1.0)) -> np.ndarray:
    """Matrix of Psi sampled on the spatial nodes.

    Raises NonIntegrableKernel when the maximal row L1 norm keeps growing
    under a 2x and 4x refinement of the sampling grid, which is the
    discrete signature of beta >= 1.
    """
    n_x = rho0.n_x
    if kernel.kind == "power_law":
        norms = [_row_norm_at(kernel, m, domain) for m in (n_x, 2 * n_x, 4 * n_x)]
        # integrable kernels gain < a few percent per refinement; divergent ones keep climbing
        if norms[2] > 1.10 * norms[1] and norms[1] > 1.10 * norms[0]:
            raise NonIntegrableKernel(
                f"row norm grows under refinement ({norms[0]:.4g} -> {norms[1]:.4g} "
                f"-> {norms[2]:.4g}); power-law exponent beta={kernel.beta} >= 1?")
    half = 0.5 * float(rho0.quad_weights[0])
    return kernel.evaluate(rho0.nodes[:, None], rho0.nodes[None, :], half)


def convolve(mat: np.ndarray, g: np.ndarray, quad_weights: np.ndarray) -> np.ndarray:
    """Right convolution (Psi *r g)(x_i) = sum_j Psi(x_i, x_j) g(x_j) dx_j."""
    return mat @ (np.asarray(g, dtype=float) * quad_weights)
