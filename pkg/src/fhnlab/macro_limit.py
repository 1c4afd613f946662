"""Macroscopic mean dynamics on the spatial domain.

The limit system for the node means (V, W) reads

    dV/dt = N(V) - W - L[V]
    dW/dt = a V - b W + c

where L[V](x) = V(x) (Psi *r rho0)(x) - (Psi *r (rho0 V))(x) is the
nonlocal coupling; it annihilates spatially constant states.  The same
right-hand side plus the kinetic closure error E(f) governs the node
means of the kinetic solver, which is what `reconstruction_residual`
checks against recorded snapshots.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ModelParams, SpatialField, convolve


class BlowupDetected(Exception):
    """Mean field left the trust region during integration."""


class MissingSnapshots(Exception):
    """Too few snapshots to form the requested time derivative."""


BLOWUP_BOUND = 10.0


def nonlocal_L(V: np.ndarray, rho0: SpatialField, psi_mat: np.ndarray | None) -> np.ndarray:
    """L[V] = V (Psi *r rho0) - Psi *r (rho0 V); zero for constant V."""
    if psi_mat is None:
        return np.zeros_like(np.asarray(V, dtype=float))
    P = convolve(psi_mat, rho0.values, rho0.quad_weights)
    PV = convolve(psi_mat, rho0.values * V, rho0.quad_weights)
    return V * P - PV


def rhs(V: np.ndarray, W: np.ndarray, params: ModelParams, rho0: SpatialField,
        psi_mat: np.ndarray | None, E: np.ndarray | float = 0.0):
    """Right-hand side of the mean system; E adds the kinetic closure error."""
    dV = params.drift_N(V) - W - nonlocal_L(V, rho0, psi_mat) + E
    dW = params.adaptation_A(V, W)
    return dV, dW


@dataclass
class MacroTrajectory:
    """Dense RK4 output: times plus node means, shapes (n_t,) and (n_t, n_x)."""

    t: np.ndarray
    V: np.ndarray
    W: np.ndarray

    def at(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Means at time t by linear interpolation between stored steps."""
        k = np.searchsorted(self.t, t)
        k = min(max(k, 1), len(self.t) - 1)
        t0, t1 = self.t[k - 1], self.t[k]
        th = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
        return ((1 - th) * self.V[k - 1] + th * self.V[k],
                (1 - th) * self.W[k - 1] + th * self.W[k])


def integrate(params: ModelParams, rho0: SpatialField, psi_mat: np.ndarray | None,
              V0, W0, t_end: float, dt: float = 1e-3) -> MacroTrajectory:
    """Fixed-step RK4 for the limit system.

    Raises BlowupDetected as soon as any |V| exceeds 10, which for the
    confined drifts only happens on misconfigured inputs.
    """
    n_x = rho0.n_x
    V = np.broadcast_to(np.asarray(V0, dtype=float), (n_x,)).copy()
    W = np.broadcast_to(np.asarray(W0, dtype=float), (n_x,)).copy()
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    n = max(1, int(np.ceil(t_end / dt - 1e-12)))
    h = t_end / n
    ts = [0.0]
    Vs = [V.copy()]
    Ws = [W.copy()]
    for k in range(n):
        k1 = rhs(V, W, params, rho0, psi_mat)
        k2 = rhs(V + 0.5 * h * k1[0], W + 0.5 * h * k1[1], params, rho0, psi_mat)
        k3 = rhs(V + 0.5 * h * k2[0], W + 0.5 * h * k2[1], params, rho0, psi_mat)
        k4 = rhs(V + h * k3[0], W + h * k3[1], params, rho0, psi_mat)
        V = V + (h / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        W = W + (h / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        if np.any(np.abs(V) > BLOWUP_BOUND):
            raise BlowupDetected(f"|V| > {BLOWUP_BOUND} at t = {(k + 1) * h:.6g}")
        ts.append((k + 1) * h)
        Vs.append(V.copy())
        Ws.append(W.copy())
    return MacroTrajectory(np.array(ts), np.array(Vs), np.array(Ws))


def mean_jacobian(V: np.ndarray, params: ModelParams, rho0: SpatialField,
                  psi_mat: np.ndarray | None) -> np.ndarray:
    """Jacobian of the mean system at state V, ordered (V_0..V_nx, W_0..W_nx).

    The W rows are state independent; the V block picks up the drift
    slope and the nonlocal exchange terms.
    """
    n_x = rho0.n_x
    V = np.asarray(V, dtype=float)
    J = np.zeros((2 * n_x, 2 * n_x))
    dv_block = np.zeros((n_x, n_x))
    if psi_mat is not None:
        mass = rho0.values * rho0.quad_weights
        dv_block += psi_mat * mass[None, :]
        dv_block[np.diag_indices(n_x)] -= psi_mat @ mass
    dv_block[np.diag_indices(n_x)] += params.drift_N_prime(V)
    J[:n_x, :n_x] = dv_block
    J[:n_x, n_x:] = -np.eye(n_x)
    J[n_x:, :n_x] = params.a * np.eye(n_x)
    J[n_x:, n_x:] = -params.b * np.eye(n_x)
    return J


def mean_fluctuation_sd(traj: MacroTrajectory, params: ModelParams,
                        rho0: SpatialField, psi_mat: np.ndarray | None,
                        n_cell, var_v0, var_w0, times, dt: float = 1e-3) -> np.ndarray:
    """Standard deviation of a finite ensemble's cell means around the flow.

    Pairwise interactions inside a cell cancel in the cell mean, so the
    empirical mean feels only the smooth drift plus the averaged noise:
    linearizing gives dS/dt = J S + S J^T + Q with Q = diag(2 / n_cell)
    on the V block and zero on the noiseless W block.  The returned
    array has shape (len(times), n_x): sqrt of the V-block diagonal at
    each requested time.  This is the honest yardstick for comparing a
    single interacting ensemble against the limit means; the i.i.d.
    formula std/sqrt(n) underestimates it badly once t is order one.
    """
    n_x = rho0.n_x
    n_cell = np.broadcast_to(np.asarray(n_cell, dtype=float), (n_x,))
    if np.any(n_cell <= 0):
        raise ValueError("every cell needs at least one member")
    times = np.asarray(times, dtype=float)
    S = np.zeros((2 * n_x, 2 * n_x))
    S[:n_x, :n_x] = np.diag(np.broadcast_to(var_v0, (n_x,)) / n_cell)
    S[n_x:, n_x:] = np.diag(np.broadcast_to(var_w0, (n_x,)) / n_cell)
    Q = np.zeros((2 * n_x, 2 * n_x))
    Q[:n_x, :n_x] = np.diag(2.0 / n_cell)

    def lyap(t, S):
        J = mean_jacobian(traj.at(t)[0], params, rho0, psi_mat)
        return J @ S + S @ J.T + Q

    out = np.empty((len(times), n_x))
    t = 0.0
    for k, target in enumerate(times):
        if target < t - 1e-12:
            raise ValueError("times must be nondecreasing from zero")
        while t < target - 1e-12:
            h = min(dt, target - t)
            k1 = lyap(t, S)
            k2 = lyap(t + 0.5 * h, S + 0.5 * h * k1)
            k3 = lyap(t + 0.5 * h, S + 0.5 * h * k2)
            k4 = lyap(t + h, S + h * k3)
            S = S + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            t += h
        out[k] = np.sqrt(np.maximum(np.diag(S)[:n_x], 0.0))
    return out


def reconstruction_residual(times: np.ndarray, V: np.ndarray, W: np.ndarray,
                            E: np.ndarray, params: ModelParams, rho0: SpatialField,
                            psi_mat: np.ndarray | None) -> np.ndarray:
    """Residual of the mean system with closure error, from recorded series.

    times must be uniform; V, W, E have shape (n_t, n_x).  The time
    derivative is a centered difference, so the residual lives at the
    interior times and has shape (n_t - 2, n_x, 2) for the (V, W)
    components.  Raises MissingSnapshots for fewer than three times.
    """
    times = np.asarray(times, dtype=float)
    if len(times) < 3:
        raise MissingSnapshots("need at least three snapshot times")
    dt = np.diff(times)
    if not np.allclose(dt, dt[0], rtol=1e-8, atol=1e-12):
        raise ValueError("snapshot times must be uniformly spaced")
    dVdt = (V[2:] - V[:-2]) / (2 * dt[0])
    dWdt = (W[2:] - W[:-2]) / (2 * dt[0])
    res = np.empty((len(times) - 2, rho0.n_x, 2))
    for k in range(1, len(times) - 1):
        fV, fW = rhs(V[k], W[k], params, rho0, psi_mat, E=E[k])
        res[k - 1, :, 0] = dVdt[k - 1] - fV
        res[k - 1, :, 1] = dWdt[k - 1] - fW
    return res
