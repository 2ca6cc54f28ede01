import numpy as np
import numpy.testing as npt
import pytest

from spinning_charge.body import BodyState
from spinning_charge.errors import NumericalBlowup
from spinning_charge.external import ExternalField
from spinning_charge.fields import FieldState, max_div_b
from spinning_charge.grid import GridSpec
from spinning_charge.simulation import (SimConfig, SimState, Trajectory, initial_state, read_snapshot,
                                        run, step_rk4)

from conftest import reference_config


def test_config_validation(grid):
    with pytest.raises(ValueError):
        SimConfig(grid=grid, dt=0.3)  # above 0.5 h = 0.25
    with pytest.raises(ValueError):
        SimConfig(grid=grid, dt=-0.1)
    SimConfig(grid=grid, dt=0.25)
    assert SimConfig(grid=grid, dt=0.125, t_end=5.0).n_steps == 40


def test_free_body_moves_uniformly(grid):
    cfg = SimConfig(grid=grid, v0=(0.1, 0.0, 0.0), omega0=(0.0, 0.0, 1.0), self_field=False, t_end=1.0)
    traj = run(cfg)
    last = traj.samples[-1].body
    npt.assert_allclose(last.q, [0.1, 0.0, 0.0], atol=1e-14)
    npt.assert_allclose(last.w, [0.0, 0.0, 1.0], atol=1e-14)
    c, s = np.cos(1.0), np.sin(1.0)
    npt.assert_allclose(last.R, [[c, -s, 0], [s, c, 0], [0, 0, 1]], atol=1e-14)


def test_static_soliton_stays_at_rest(grid):
    traj = run(SimConfig(grid=grid, t_end=1.0))
    last = traj.samples[-1]
    npt.assert_allclose(last.body.v, 0.0, atol=1e-10)
    npt.assert_allclose(last.fields.E, traj.samples[0].fields.E, atol=1e-10)


def _phase(xy):
    return np.unwrap(np.arctan2(xy[:, 1], xy[:, 0]))


def test_cyclotron_period(grid):
    cfg = SimConfig(grid=grid, external=ExternalField("uniform_b", b=1.0), v0=(0.2, 0.0, 0.0),
                    self_field=False, dt=grid.h / 4, t_end=2 * np.pi)
    traj = run(cfg, keep_fields=False)
    v = np.array([s.body.v for s in traj.samples])
    period = 2 * np.pi * traj.times[-1] / abs(_phase(v)[-1] - _phase(v)[0])
    assert period == pytest.approx(2 * np.pi, rel=1e-4)
    # |v| preserved to RK4 accuracy; v_z untouched
    assert abs(np.linalg.norm(v[-1]) - 0.2) < 1e-6


def test_spin_precesses_at_half_b(grid):
    w0 = np.array([0.3, -0.2, 1.0])
    cfg = SimConfig(grid=grid, external=ExternalField("uniform_b", b=1.0), omega0=tuple(w0),
                    self_field=False, dt=grid.h / 4, t_end=4.0)
    traj = run(cfg, keep_fields=False)
    w = np.array([s.body.w for s in traj.samples])
    rate = abs(_phase(w)[-1] - _phase(w)[0]) / traj.times[-1]
    assert rate == pytest.approx(0.5, rel=1e-4)
    # |w| drift below 1e-8 per unit time
    assert np.max(np.abs(np.linalg.norm(w, axis=1) - np.linalg.norm(w0))) / traj.times[-1] < 1e-8
    npt.assert_allclose(w[:, 2], 1.0, atol=1e-12)


@pytest.mark.slow
def test_constraints_hold_over_many_steps(grid):
    cfg = reference_config(t_end=1000 * grid.h / 4, stride=100)
    traj = run(cfg)
    gauss = np.array([r.gauss_residual for r in traj.rows])
    assert gauss.max() < 1e-6
    # no secular constraint drift beyond 1e-8 per unit time
    assert (gauss[-1] - gauss[1]) / (traj.rows[-1].t - traj.rows[1].t) < 1e-8
    assert max(max_div_b(s.fields, grid) for s in traj.samples) < 1e-10


def test_stride_and_uniform_times(grid):
    traj = run(SimConfig(grid=grid, t_end=1.0, stride=2), keep_fields=False)
    assert len(traj.rows) == 9 and len(traj.samples) == 5
    npt.assert_allclose(np.diff(traj.times), 0.25, rtol=0, atol=0)
    assert traj.samples[0].fields is None


def test_blowup_is_reported(grid):
    s = initial_state(SimConfig(grid=grid))
    s.fields.E[0, 0, 0, 0] = np.nan
    with pytest.raises(NumericalBlowup):
        step_rk4(s, 0.1, SimConfig(grid=grid))


def test_outputs_and_resume(tmp_path, grid):
    prefix = str(tmp_path / "ref")
    cfg = reference_config(t_end=1.0, output_prefix=prefix, snapshot_every=4, save_trajectory=True)
    full = run(cfg)
    header = (tmp_path / "ref_diagnostics.csv").read_text().splitlines()[0]
    assert header == "t,energy,px,py,pz,mx,my,mz,gauss_residual,qx,qy,qz,vx,vy,vz,wx,wy,wz"
    assert len((tmp_path / "ref_diagnostics.csv").read_text().splitlines()) == 10
    step, state = read_snapshot(prefix, 4)
    assert step == 4 and state.t == full.samples[4].t
    resumed = run(cfg.with_(output_prefix=None), resume=(step, state))
    npt.assert_array_equal(resumed.samples[-1].fields.E, full.samples[-1].fields.E)
    npt.assert_array_equal(resumed.samples[-1].body.w, full.samples[-1].body.w)
    loaded = Trajectory.load(prefix + "_trajectory.npz", cfg)
    npt.assert_array_equal(loaded.times, full.times)
    npt.assert_array_equal(loaded.samples[3].fields.B, full.samples[3].fields.B)


def test_decoupled_diagnostics_ignore_spectator_field(grid):
    cfg = SimConfig(grid=grid, external=ExternalField("uniform_b", b=1.0), v0=(0.2, 0.0, 0.0),
                    self_field=False, t_end=1.0)
    traj = run(cfg)
    energies = [r.energy for r in traj.rows]
    assert energies[0] == pytest.approx(0.5 * 0.04, abs=1e-12)
    assert np.ptp(energies) < 1e-8
