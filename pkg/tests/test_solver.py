import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from besovflux.fields import abc_flow, random_smooth_field, taylor_green_2d
from besovflux.grid import TorusField, TorusGrid
from besovflux.solver import SimState, cfl_limit, initial_state, rhs, run, step


def test_taylor_green_stays_put(grid2):
    traj = run(taylor_green_2d(grid2), 1.0, 0.02)
    a, b = traj.snapshots[0].state, traj.snapshots[-1].state
    assert np.abs(b - a).max() <= 1e-9 * np.abs(a).max()


def test_abc_budgets(grid3):
    traj = run(abc_flow(grid3), 0.1, 0.01)
    assert traj.relative_drift("energy") <= 1e-7
    assert traj.relative_drift("second") <= 1e-6
    assert traj.second_name == "helicity"


def test_zero_stays_zero(grid2):
    traj = run(TorusField.zeros(grid2, 2), 0.3, 0.1)
    assert np.all(traj.snapshots[-1].state == 0)


def test_snapshot_cadence(grid2):
    v = random_smooth_field(grid2, 3.0, seed=1)
    assert len(run(v, 0.1, 0.01)) == 2
    traj = run(v, 0.1, 0.01, snapshot_every=3)
    assert [s.step_index for s in traj] == [0, 3, 6, 9, 10]
    assert traj.snapshots[-1].t == 0.1
    assert traj.energy.size == 11 and traj.cfl.size == 10


def test_step_adjusts_to_land_on_T(grid2):
    traj = run(taylor_green_2d(grid2), 0.1, 0.03)
    assert traj.params["steps"] == 4
    assert traj.dt == pytest.approx(0.025)


def test_cfl_violation_suggests_dt(grid2):
    s = initial_state(random_smooth_field(grid2, 3.0, seed=2))
    limit = cfl_limit(s)
    with pytest.raises(ValueError, match="try dt <="):
        step(s, 2 * limit)


def test_rejects_compressible(grid2):
    v = TorusField(grid2, np.stack([np.cos(grid2.coords[0]), np.zeros(grid2.shape)]))
    with pytest.raises(ValueError):
        run(v, 0.1, 0.01)


def test_nan_aborts_with_step(grid2, monkeypatch):
    import besovflux.solver as sv

    real = sv.step

    def poisoned(s, dt):
        out = real(s, dt)
        if out.step_index == 3:
            return SimState(out.grid, out.t, out.state * np.nan, out.step_index)
        return out

    monkeypatch.setattr(sv, "step", poisoned)
    with pytest.raises(FloatingPointError, match="step 3"):
        sv.run(random_smooth_field(grid2, 3.0, seed=2), 0.1, 0.01)


@given(seed=st.integers(0, 2**32 - 1))
def test_3d_steps_stay_solenoidal_and_dealiased(seed):
    g = TorusGrid(3, 16)
    s = initial_state(random_smooth_field(g, 2.0, seed=seed))
    for _ in range(3):
        s = step(s, 0.5 * cfl_limit(s))
        assert s.max_divergence() <= 1e-10
        assert np.all(s.state[:, ~g.dealias_mask] == 0)


@given(seed=st.integers(0, 2**32 - 1))
def test_semidiscrete_energy_conservation(seed):
    g = TorusGrid(2, 32)
    s = initial_state(random_smooth_field(g, 2.0, seed=seed))
    du = rhs(s.state, g)
    v = s.velocity_spectral()
    # d/dt (1/2)|v|^2 = <v, dv/dt>, with dv/dt recovered from the vorticity tendency
    dv = SimState(g, 0.0, du).velocity_spectral()
    rate = np.sum((v * np.conj(dv)).real) * g.volume
    assert abs(rate) <= 1e-12 * s.energy()
    rate_z = np.sum((s.state * np.conj(du)).real) * g.volume
    assert abs(rate_z) <= 1e-12 * max(s.enstrophy(), 1.0)


def test_drift_converges_at_least_fourth_order():
    g = TorusGrid(2, 64)
    v = random_smooth_field(g, 3.0, seed=7)
    coarse, fine = run(v, 1.0, 0.02), run(v, 1.0, 0.01)
    for which in ("energy", "second"):
        order = math.log2(coarse.relative_drift(which) / fine.relative_drift(which))
        assert order >= 3.5


def test_budgets_csv(grid2):
    traj = run(taylor_green_2d(grid2), 0.04, 0.02)
    lines = traj.budgets_csv().splitlines()
    assert lines[0] == "step,t,energy,enstrophy"
    assert len(lines) == 4
