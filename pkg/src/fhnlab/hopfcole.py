"""Log-transform diagnostics: correctors, sub/super-solution envelopes,
grid residuals of the order-1 equation, and the concentration bound.

The transform phi = eps ln( sqrt(2 pi eps / rho0) f ) maps the
concentrating density onto a function with a finite limit, namely
-(rho0/2)|v - V|^2.  Everything in this module is a pure function of
snapshot data:

  * ``hopf_cole`` / ``phi1_field``: the transform and its order-1
    corrector (phi + (rho0/2)|v - V|^2)/eps, on a floor mask.
  * ``phi1_bar``: the explicit equivalent of the corrector built from
    the macroscopic quantities and the primitive of the drift.
  * ``chi_bounds``: quadratic envelopes chi_pm = phi1_bar +- (psi + m)
    whose residual in the order-1 equation has a definite sign once the
    growth constant C is large enough.
  * ``hj_residual_order1``: centered-difference evaluation of that
    residual; ``certify_envelopes`` doubles C until the signs certify.
  * ``theorem_bound_check`` / ``rate_statistic``: the normalized and
    raw deviation |phi + (rho0/2)|v - V|^2 - eps n(v)|.
  * ``comparison_sandwich``: evolves the envelope densities through the
    same frozen-coefficient substeps as f and reports ordering gaps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import ModelParams, SpatialField, convolve
from .phase_grid import PhaseGrid
from . import kinetic


class EmptyMask(Exception):
    """No grid point carries density above the floor."""


class NonPositiveAlpha0(Exception):
    """The envelope curvature alpha0 must be positive."""


class BoundaryOnly(Exception):
    """Grid too small: every point sits on the outermost ring."""


class InitialOrderingViolated(Exception):
    """f- <= f0 <= f+ fails at t = 0 and cannot be fixed by raising m0."""


# ---------------------------------------------------------------------------
# transform and correctors


@dataclass(frozen=True)
class HopfColeField:
    """eps ln( sqrt(2 pi eps / rho0) f ), defined where f is above floor."""

    phi: np.ndarray       # (n_x, n_v, n_w), NaN off the mask
    mask: np.ndarray      # bool, same shape
    floor: float
    epsilon: float


def hopf_cole(state: kinetic.KineticState, floor: float | None = None) -> HopfColeField:
    """Transform a kinetic state; mask false where f <= floor.

    The default floor is 1e-30 relative to max f: below that, the
    logarithm is dominated by quadrature noise.
    """
    f = state.f
    fmax = float(f.max()) if f.size else 0.0
    if floor is None:
        floor = 1e-30 * fmax
    if floor <= 0.0:
        raise ValueError("floor must be positive")
    mask = f > floor
    eps = state.params.epsilon
    prefactor = 0.5 * np.log(2.0 * np.pi * eps / state.rho0.values)
    logf = np.log(f, where=mask, out=np.full(f.shape, np.nan))
    phi = eps * (prefactor[:, None, None] + logf)
    return HopfColeField(phi=phi, mask=mask, floor=floor, epsilon=eps)


def reconstruct_density(hc: HopfColeField, rho0: SpatialField) -> np.ndarray:
    """Invert the transform on the mask (zero elsewhere)."""
    amp = np.sqrt(rho0.values / (2.0 * np.pi * hc.epsilon))[:, None, None]
    f = np.where(hc.mask, amp * np.exp(np.where(hc.mask, hc.phi, 0.0) / hc.epsilon), 0.0)
    return f


@dataclass(frozen=True)
class FrozenCoefficients:
    """Macroscopic quantities pinning the linear coefficient fields at one time.

    Everything a diagnostic needs to rebuild B(v, w) = N(v) - w - (P v - PV),
    A(v, w) = a v - b w + c and the corrector equivalent at time t.
    """

    grid: PhaseGrid
    params: ModelParams
    rho0: np.ndarray      # (n_x,)
    V: np.ndarray         # (n_x,)
    W: np.ndarray         # (n_x,)
    E: np.ndarray         # (n_x,)
    P: np.ndarray         # Psi *r rho0, (n_x,)
    PV: np.ndarray        # Psi *r (rho0 V), (n_x,)
    t: float

    @classmethod
    def from_state(cls, state: kinetic.KineticState) -> "FrozenCoefficients":
        mass, V, W = kinetic.node_means(state.grid, state.f)
        if state.psi_mat is None:
            PV = np.zeros(state.rho0.n_x)
        else:
            PV = convolve(state.psi_mat, state.rho0.values * V, state.rho0.quad_weights)
        return cls(grid=state.grid, params=state.params, rho0=state.rho0.values.copy(),
                   V=V, W=W, E=kinetic.error_term(state, V), P=state.P.copy(),
                   PV=PV, t=state.t)

    @classmethod
    def from_snapshot(cls, snap: kinetic.Snapshot, grid: PhaseGrid,
                      params: ModelParams, rho0: SpatialField,
                      psi_mat: np.ndarray | None) -> "FrozenCoefficients":
        if psi_mat is None:
            P = np.zeros(rho0.n_x)
            PV = np.zeros(rho0.n_x)
        else:
            P = convolve(psi_mat, rho0.values, rho0.quad_weights)
            PV = convolve(psi_mat, rho0.values * snap.V, rho0.quad_weights)
        return cls(grid=grid, params=params, rho0=rho0.values.copy(),
                   V=snap.V.copy(), W=snap.W.copy(), E=snap.E.copy(),
                   P=P, PV=PV, t=snap.t)

    def b_fields(self):
        """Cell-centered velocities (B, A), each (n_x, n_v, n_w)."""
        vv, ww = self.grid.mesh()
        B = self.params.drift_N(vv) - ww \
            - (self.P[:, None, None] * vv - self.PV[:, None, None])
        A = self.params.adaptation_A(vv, ww)
        B, A = np.broadcast_arrays(B, A)
        return B, A

    def div_b(self) -> np.ndarray:
        """div_u b = N'(v) - P - b, (n_x, n_v, n_w)."""
        vv, ww = self.grid.mesh()
        out = self.params.drift_N_prime(vv) - self.P[:, None, None] \
            - self.params.b + 0.0 * ww
        return out


def phi1_field(hc: HopfColeField, coeffs: FrozenCoefficients) -> np.ndarray:
    """Order-1 corrector (phi + (rho0/2)|v - V|^2) / eps, NaN off mask."""
    vv, _ = coeffs.grid.mesh()
    dv = vv - coeffs.V[:, None, None]
    return (hc.phi + 0.5 * coeffs.rho0[:, None, None] * dv ** 2) / hc.epsilon


def phi1_bar(coeffs: FrozenCoefficients) -> np.ndarray:
    """Explicit corrector equivalent, (n_x, n_v, n_w).

    n(v) - n(V) - (v - V) [ N(V) + (w - W) + E + (P/2)(v - V) ]
    with n the drift primitive vanishing at 0.
    """
    p = coeffs.params
    vv, ww = coeffs.grid.mesh()
    dv = vv - coeffs.V[:, None, None]
    dw = ww - coeffs.W[:, None, None]
    bracket = p.drift_N(coeffs.V)[:, None, None] + dw + coeffs.E[:, None, None] \
        + 0.5 * coeffs.P[:, None, None] * dv
    return p.primitive_n(vv) - p.primitive_n(coeffs.V)[:, None, None] - dv * bracket


# ---------------------------------------------------------------------------
# envelopes


def alpha_of_t(t: float, alpha0: float, params: ModelParams) -> float:
    """alpha0 e^{2(|a|+b)t} + (e^{2(|a|+b)t} - 1)/(|a|+b).

    Solves alpha' = 2(|a|+b) alpha + 2 with alpha(0) = alpha0, the exact
    closure that cancels the w-quadratic growth in the envelope residual.
    """
    k = abs(params.a) + params.b
    g = np.exp(2.0 * k * t)
    return alpha0 * g + (g - 1.0) / k


def m_of_t(t: float, m0: float, C: float, params: ModelParams) -> float:
    """m0 + C e^{6(|a|+b)t}; only C matters for the residual sign."""
    k = abs(params.a) + params.b
    return m0 + C * np.exp(6.0 * k * t)


@dataclass(frozen=True)
class CorrectorBundle:
    """Everything needed to evaluate the envelopes at one snapshot time."""

    coeffs: FrozenCoefficients
    alpha0: float
    m0: float
    C: float

    def __post_init__(self):
        if self.alpha0 <= 0.0:
            raise NonPositiveAlpha0(f"alpha0 = {self.alpha0} must be positive")

    @property
    def t(self) -> float:
        return self.coeffs.t

    @property
    def alpha_t(self) -> float:
        return alpha_of_t(self.t, self.alpha0, self.coeffs.params)

    @property
    def m_t(self) -> float:
        return m_of_t(self.t, self.m0, self.C, self.coeffs.params)

    def psi(self) -> np.ndarray:
        """(alpha0/2)|v - V|^2 + (alpha(t)/2)|w - W|^2."""
        vv, ww = self.coeffs.grid.mesh()
        dv = vv - self.coeffs.V[:, None, None]
        dw = ww - self.coeffs.W[:, None, None]
        return 0.5 * self.alpha0 * dv ** 2 + 0.5 * self.alpha_t * dw ** 2

    def phi1_bar(self) -> np.ndarray:
        return phi1_bar(self.coeffs)


def chi_bounds(bundle: CorrectorBundle):
    """(chi_minus, chi_plus) = phi1_bar -+ (psi + m) at the bundle time."""
    base = bundle.phi1_bar()
    shift = bundle.psi() + bundle.m_t
    return base - shift, base + shift


# ---------------------------------------------------------------------------
# order-1 residual


def hj_residual_order1(chi_prev: np.ndarray | None, chi_mid: np.ndarray,
                       chi_next: np.ndarray | None, coeffs: FrozenCoefficients,
                       dt_fd: float, phi1_bar_mid: np.ndarray | None = None) -> np.ndarray:
    """Signed residual of the order-1 equation at chi, centered differences.

    Evaluates  d_t chi + grad chi . b + div b - d_v^2 chi - |d_v chi|^2
    + (rho0/eps)(v - V) d_v(chi - phi1_bar).  The time derivative uses
    (chi_next - chi_prev)/(2 dt_fd); passing None for one neighbor falls
    back to a one-sided difference over dt_fd.  The returned array is
    NaN on the outermost ring, where the centered stencils do not fit;
    raises BoundaryOnly when no interior point exists.
    """
    grid = coeffs.grid
    if grid.n_v < 3 or grid.n_w < 3:
        raise BoundaryOnly("no interior cells for the centered stencil")
    if chi_prev is None and chi_next is None:
        raise ValueError("need at least one time-adjacent field")
    if chi_prev is None:
        dchi_dt = (chi_next - chi_mid) / dt_fd
    elif chi_next is None:
        dchi_dt = (chi_mid - chi_prev) / dt_fd
    else:
        dchi_dt = (chi_next - chi_prev) / (2.0 * dt_fd)

    if phi1_bar_mid is None:
        phi1_bar_mid = phi1_bar(coeffs)
    dv, dw = grid.dv, grid.dw
    vv, _ = grid.mesh()

    def d_v(g):
        return (g[:, 2:, :] - g[:, :-2, :]) / (2.0 * dv)

    def d_w(g):
        return (g[:, :, 2:] - g[:, :, :-2]) / (2.0 * dw)

    B, A = coeffs.b_fields()
    inner = (slice(None), slice(1, -1), slice(1, -1))
    chi_v = d_v(chi_mid)[:, :, 1:-1]
    chi_w = d_w(chi_mid)[:, 1:-1, :]
    chi_vv = (chi_mid[:, 2:, :] - 2.0 * chi_mid[:, 1:-1, :] + chi_mid[:, :-2, :])[:, :, 1:-1] / dv ** 2
    gap_v = d_v(chi_mid - phi1_bar_mid)[:, :, 1:-1]
    dv_centered = (vv - coeffs.V[:, None, None])[:, 1:-1, :]   # (n_x, n_v-2, 1)
    stiff = (coeffs.rho0[:, None, None] / coeffs.params.epsilon) \
        * dv_centered * gap_v
    res_inner = dchi_dt[inner] + chi_v * B[inner] + chi_w * A[inner] \
        + coeffs.div_b()[inner] - chi_vv - chi_v ** 2 + stiff
    out = np.full(chi_mid.shape, np.nan)
    out[inner] = res_inner
    return out


def centered_subdomain(coeffs: FrozenCoefficients, half_v: float = 2.0,
                       half_w: float = 2.0) -> np.ndarray:
    """Bool mask |v - V| <= half_v and |w - W| <= half_w per node."""
    vv, ww = coeffs.grid.mesh()
    dv = np.abs(vv - coeffs.V[:, None, None])
    dw = np.abs(ww - coeffs.W[:, None, None])
    return (dv <= half_v) & (dw <= half_w)


@dataclass
class EnvelopeCertificate:
    """Result of the C-doubling search over a run's snapshots."""

    passed: bool
    C: float
    alpha0: float
    tol: float
    worst_plus: float            # min over run of residual(chi_plus)
    worst_minus: float           # max over run of residual(chi_minus)
    tried: list[float] = field(default_factory=list)
    series: list[tuple[float, float, float]] = field(default_factory=list)
    # series rows: (t, min residual at chi_plus, max residual at chi_minus)


def _residual_extrema(snaps, grid, params, rho0, psi_mat, alpha0, C,
                      half_v, half_w):
    times = np.array([s.t for s in snaps])
    dt = float(np.diff(times).mean())
    if not np.allclose(np.diff(times), dt, rtol=1e-8, atol=1e-12):
        raise ValueError("snapshots must be uniformly spaced in time")
    coeffs = [FrozenCoefficients.from_snapshot(s, grid, params, rho0, psi_mat)
              for s in snaps]
    bundles = [CorrectorBundle(c, alpha0=alpha0, m0=0.0, C=C) for c in coeffs]
    chis = [chi_bounds(b) for b in bundles]
    series = []
    for i in range(len(snaps)):
        lo = chis[i - 1] if i > 0 else (None, None)
        hi = chis[i + 1] if i < len(snaps) - 1 else (None, None)
        bar = bundles[i].phi1_bar()
        res_m = hj_residual_order1(lo[0], chis[i][0], hi[0], coeffs[i], dt, bar)
        res_p = hj_residual_order1(lo[1], chis[i][1], hi[1], coeffs[i], dt, bar)
        sub = centered_subdomain(coeffs[i], half_v, half_w)
        sub &= np.isfinite(res_p)
        if not sub.any():
            raise BoundaryOnly("centered subdomain has no interior cells")
        series.append((float(times[i]), float(res_p[sub].min()),
                       float(res_m[sub].max())))
    return series


def certify_envelopes(snaps, grid: PhaseGrid, params: ModelParams,
                      rho0: SpatialField, psi_mat: np.ndarray | None,
                      alpha0: float = 1.0, tol: float = 1e-2,
                      c_start: float = 1.0, c_cap: float = 2.0 ** 10,
                      half_v: float = 2.0, half_w: float = 2.0) -> EnvelopeCertificate:
    """Double C until the envelope residual signs certify on the subdomain.

    chi_plus must have residual >= -tol and chi_minus residual <= +tol at
    every snapshot, restricted to |v - V| <= half_v, |w - W| <= half_w.
    The search starts at c_start and doubles up to c_cap; m0 never enters
    the residual (it is constant in space and time-independent).
    """
    if alpha0 <= 0.0:
        raise NonPositiveAlpha0(f"alpha0 = {alpha0} must be positive")
    tried = []
    C = float(c_start)
    best = None
    while C <= c_cap * (1.0 + 1e-12):
        tried.append(C)
        series = _residual_extrema(snaps, grid, params, rho0, psi_mat,
                                   alpha0, C, half_v, half_w)
        worst_plus = min(row[1] for row in series)
        worst_minus = max(row[2] for row in series)
        best = EnvelopeCertificate(
            passed=(worst_plus >= -tol and worst_minus <= tol),
            C=C, alpha0=alpha0, tol=tol, worst_plus=worst_plus,
            worst_minus=worst_minus, tried=list(tried), series=series)
        if best.passed:
            return best
        C *= 2.0
    return best


# ---------------------------------------------------------------------------
# concentration bound


def theorem_deviation(hc: HopfColeField, grid: PhaseGrid, params: ModelParams,
                      rho0: SpatialField, V_limit: np.ndarray) -> np.ndarray:
    """|phi + (rho0/2)|v - V|^2 - eps n(v)| with the limit mean V; NaN off mask."""
    vv, _ = grid.mesh()
    dv = vv - np.asarray(V_limit)[:, None, None]
    dev = hc.phi + 0.5 * rho0.values[:, None, None] * dv ** 2 \
        - params.epsilon * params.primitive_n(vv)
    return np.abs(dev)


def theorem_bound_check(hc: HopfColeField, grid: PhaseGrid, params: ModelParams,
                        rho0: SpatialField, V_limit: np.ndarray) -> float:
    """Normalized sup over the mask of deviation / (eps (1 + |u|^2))."""
    if not hc.mask.any():
        raise EmptyMask("density below floor everywhere")
    dev = theorem_deviation(hc, grid, params, rho0, V_limit)
    vv, ww = grid.mesh()
    norm = params.epsilon * (1.0 + vv ** 2 + ww ** 2)
    ratio = np.where(hc.mask, dev / norm, 0.0)
    return float(np.nanmax(ratio))


def rate_statistic(hc: HopfColeField, grid: PhaseGrid, params: ModelParams,
                   rho0: SpatialField, V_limit: np.ndarray, W_limit: np.ndarray,
                   half_v: float = 2.0, half_w: float = 2.0) -> float:
    """Raw deviation sup over the centered subdomain intersected with the mask.

    This is the quantity whose sweep over eps exhibits the order-eps
    concentration rate; it is kept unnormalized so the log-log fit sees
    the rate directly.
    """
    vv, ww = grid.mesh()
    sub = (np.abs(vv - np.asarray(V_limit)[:, None, None]) <= half_v) \
        & (np.abs(ww - np.asarray(W_limit)[:, None, None]) <= half_w) & hc.mask
    if not sub.any():
        raise EmptyMask("mask misses the centered subdomain entirely")
    dev = theorem_deviation(hc, grid, params, rho0, V_limit)
    return float(dev[sub].max())


# ---------------------------------------------------------------------------
# comparison sandwich


@dataclass
class SandwichReport:
    """Ordering gaps of the envelope densities along a run."""

    times: np.ndarray
    gap_plus: np.ndarray     # min over cells of f_plus - f, per snapshot
    gap_minus: np.ndarray    # min over cells of f - f_minus
    f_max: np.ndarray        # max f per snapshot, for relative tolerances
    m0: float
    alpha0: float
    C: float

    def worst_relative(self) -> float:
        scale = np.maximum(self.f_max, 1e-300)
        return float(min((self.gap_plus / scale).min(),
                         (self.gap_minus / scale).min()))


def envelope_density(coeffs: FrozenCoefficients, chi: np.ndarray) -> np.ndarray:
    """sqrt(rho0/(2 pi eps)) exp( -(rho0/(2 eps))|v - V|^2 + chi )."""
    eps = coeffs.params.epsilon
    vv, _ = coeffs.grid.mesh()
    dv = vv - coeffs.V[:, None, None]
    amp = np.sqrt(coeffs.rho0 / (2.0 * np.pi * eps))[:, None, None]
    return amp * np.exp(-0.5 * coeffs.rho0[:, None, None] * dv ** 2 / eps + chi)


def initial_envelopes(state: kinetic.KineticState, alpha0: float, m0: float,
                      C: float, auto_raise_m0: bool = True,
                      margin: float = 1e-6):
    """Build (f_minus, f_plus, m0) bracketing the initial density.

    When the requested m0 fails the nodewise ordering, the deficit is
    measured in log space and m0 is raised just past it (the envelope
    construction is valid for every real m0).  Raises
    InitialOrderingViolated when no finite m0 can help, or when
    auto_raise_m0 is off and the given m0 fails.
    """
    coeffs = FrozenCoefficients.from_state(state)
    if np.any(state.f < 0.0):
        raise InitialOrderingViolated("initial density has negative cells")
    positive = state.f > 0.0
    bundle = CorrectorBundle(coeffs, alpha0=alpha0, m0=m0, C=C)
    chi_m, chi_p = chi_bounds(bundle)
    fp = envelope_density(coeffs, chi_p)
    fm = envelope_density(coeffs, chi_m)
    with np.errstate(divide="ignore"):
        logf = np.where(positive, np.log(np.where(positive, state.f, 1.0)), -np.inf)
    deficit_plus = np.max(logf - np.log(fp))           # need <= 0
    deficit_minus = np.max(np.log(fm) - logf)          # need <= 0, +inf where f == 0
    need = max(deficit_plus, deficit_minus, 0.0)
    if need > 0.0:
        if not auto_raise_m0:
            raise InitialOrderingViolated(
                f"ordering fails by e^{need:.3g}; rerun with m0 >= {m0 + need:.6g}")
        if not np.isfinite(need):
            raise InitialOrderingViolated(
                "density vanishes on some cell; no finite m0 restores f- <= f")
        m0 = m0 + need + margin
        bundle = CorrectorBundle(coeffs, alpha0=alpha0, m0=m0, C=C)
        chi_m, chi_p = chi_bounds(bundle)
        fp = envelope_density(coeffs, chi_p)
        fm = envelope_density(coeffs, chi_m)
    if np.any(fm > state.f) or np.any(state.f > fp):
        raise InitialOrderingViolated("ordering still fails after raising m0")
    return fm, fp, m0


def comparison_sandwich(state: kinetic.KineticState, t_end: float,
                        dt: float | None = None, snapshot_stride: float = 0.05,
                        alpha0: float = 1.0, m0: float = 0.0, C: float = 1.0,
                        auto_raise_m0: bool = True) -> SandwichReport:
    """Evolve envelope densities through the run and record ordering gaps.

    The envelopes ride the exact same frozen-coefficient transport and
    relaxation substeps as the density itself, so with a monotone scheme
    the initial ordering can only be broken by roundoff.  Mutates state
    (marches it to t_end) like the plain runner does.
    """
    fm, fp, m0 = initial_envelopes(state, alpha0, m0, C, auto_raise_m0)
    passengers = [fm, fp]
    times = [state.t]
    gap_plus = [float((passengers[1] - state.f).min())]
    gap_minus = [float((state.f - passengers[0]).min())]
    f_max = [float(state.f.max())]

    def record(st, snap):
        times.append(snap.t)
        gap_plus.append(float((passengers[1] - st.f).min()))
        gap_minus.append(float((st.f - passengers[0]).min()))
        f_max.append(float(st.f.max()))

    kinetic.run(state, t_end, dt=dt, snapshot_stride=snapshot_stride,
                observers=(record,), keep_fields="none", passengers=passengers)
    return SandwichReport(times=np.array(times), gap_plus=np.array(gap_plus),
                          gap_minus=np.array(gap_minus), f_max=np.array(f_max),
                          m0=m0, alpha0=alpha0, C=C)
