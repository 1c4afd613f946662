"""Shared fixtures.

The expensive runs (full default sweep, oracle-grade kinetic runs,
particle ensembles) are session-scoped so the acceptance tests and the
harness tests share one execution.
"""

import numpy as np
import pytest

from fhnlab import harness, hopfcole, kinetic, model
from fhnlab.phase_grid import PhaseGrid


@pytest.fixture(scope="session")
def sweep_dir(tmp_path_factory):
    """Full default sweep {0.1, 0.05, 0.025, 0.0125}; the workhorse fixture."""
    out = tmp_path_factory.mktemp("sweep") / "default"
    config = harness.RunConfig({})
    manifest = harness.run_sweep(config, output_dir=out)
    assert all(m["status"] == "ok" for m in manifest["members"]), manifest
    return out


@pytest.fixture(scope="session")
def linear_oracle_rows():
    """Kinetic solver on the exactly solvable linear-drift configuration.

    Four independent nodes, no spatial coupling, drift N(v) = -v with
    a = c = 0, so the per-node mean obeys V' = -V and the v-variance a
    closed Riccati ODE.  The grid is a tight recentered box: the mean
    error of the limited scheme scales like (dv/sigma)^1.4, so the box
    is kept as small as the initial Gaussian tails allow.
    """
    params = model.ModelParams(epsilon=0.05, a=0.0, b=1.0, c=0.0,
                               drift_kind="polynomial", drift_coeffs=(0.0, -1.0))
    grid = PhaseGrid(n_v=192, n_w=96, v_half=1.8, w_half=3.0, v_center=0.2)
    rho0 = model.rho0_uniform(4)
    v0 = 0.2 + 0.5 * np.cos(np.pi * rho0.nodes)
    state = kinetic.initialize_well_prepared(params, grid, rho0, v0, np.zeros(4),
                                             sigma_w=0.5, scheme="muscl")
    rows = []

    def record(st, snap):
        mass = st.node_mass()
        rows.append((round(st.t, 10), st.V.copy(), st.W.copy(),
                     (kinetic.centered_moment_v(st, 2) / mass).copy()))

    kinetic.run(state, 1.0, snapshot_stride=0.1, keep_fields="none",
                observers=(record,))
    return v0, rows


@pytest.fixture(scope="session")
def cubic_state_factory():
    """Fresh default-style cubic state (4 coupled nodes) on demand."""

    def make(epsilon=0.05, scheme="muscl", grid=None):
        params = model.ModelParams(epsilon=epsilon)
        if grid is None:
            grid = PhaseGrid(n_v=160, n_w=72, v_half=3.0, w_half=4.5)
        rho0 = model.rho0_uniform(4)
        kern = model.Kernel(kind="exponential", strength=1.0, kappa=1.0)
        psi = model.kernel_matrix(kern, rho0, (0.0, 1.0))
        v0 = 0.2 + 0.5 * np.cos(np.pi * rho0.nodes)
        state = kinetic.initialize_well_prepared(
            params, grid, rho0, v0, np.zeros(4), sigma_w=0.5,
            psi_mat=psi, scheme=scheme)
        return state, params, grid, rho0, psi

    return make


@pytest.fixture(scope="session")
def envelope_certificate(cubic_state_factory):
    """Sub/supersolution certification over the cubic run on [0, 1]."""
    state, params, grid, rho0, psi = cubic_state_factory(scheme="muscl")
    snaps = kinetic.run(state, 1.0, snapshot_stride=0.05, keep_fields="all")
    cert = hopfcole.certify_envelopes(snaps, grid, params, rho0, psi)
    return cert


@pytest.fixture(scope="session")
def sandwich_report(cubic_state_factory):
    """Envelope densities riding the monotone scheme over [0, 1]."""
    state, *_ = cubic_state_factory(scheme="upwind")
    return hopfcole.comparison_sandwich(state, 1.0)


@pytest.fixture(scope="session")
def particle_summary(tmp_path_factory):
    """Particle ensemble vs kinetic means, n = 5000, eps = 0.05."""
    out = tmp_path_factory.mktemp("particles") / "compare"
    config = harness.RunConfig({})
    summary = harness.run_particle_compare(config, 0.05, 5000, out)
    return summary, out
