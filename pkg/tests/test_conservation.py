import numpy as np
import numpy.testing as npt
import pytest

from spinning_charge.body import BodyState
from spinning_charge.charge import ChargeProfile, charge_cloud
from spinning_charge.conservation import (angular_momentum, background_angular_momentum,
                                          convergence_order, default_flags, diagnostics_row,
                                          drift_report, energy, momentum)
from spinning_charge.external import ExternalField
from spinning_charge.fields import FieldState, coulomb_init
from spinning_charge.simulation import SimState

P = ChargeProfile()


def test_angular_momentum_point_formula(grid):
    s = SimState(0.0, FieldState.zeros(grid), BodyState([1.0, 0, 0], [0, 1.0, 0], w=[0, 0, 2.0]))
    npt.assert_allclose(angular_momentum(s, ExternalField(), P, grid), [0, 0, 5.0], atol=1e-12)


def test_angular_momentum_at_rest_is_spin(grid):
    s = SimState(0.0, coulomb_init(P, grid, np.zeros(3)), BodyState(np.zeros(3), np.zeros(3), w=[0.1, 0.2, 0.3]))
    npt.assert_allclose(angular_momentum(s, ExternalField(), P, grid), [0.2, 0.4, 0.6], atol=1e-14)


def test_uniform_b_external_term_moment_oracle(grid):
    # int x ^ (1/2 B ^ x) rho(x - q) = 1/2 [ <x.x> B - <x (x.B)> ] with <x_i x_j> = q_i q_j + delta_ij
    q = np.array([0.3, -0.4, 0.2])
    b = 1.5
    B = np.array([0, 0, b])
    s = SimState(0.0, None, BodyState(q, np.zeros(3)))
    second = np.outer(q, q) + np.eye(3)
    oracle = 0.5 * (np.trace(second) * B - second @ B)
    got = angular_momentum(s, ExternalField("uniform_b", b=b), P, grid) - np.cross(q, np.zeros(3))
    npt.assert_allclose(got, oracle, atol=1e-10)


def test_momentum_and_energy_simple_states(grid):
    s = SimState(0.0, FieldState.zeros(grid), BodyState(np.zeros(3), [0.2, 0, 0.1], w=[0, 0, 1.0]))
    npt.assert_allclose(momentum(s, ExternalField(), P, grid), [0.2, 0, 0.1], atol=1e-14)
    assert energy(s, ExternalField(), P, grid) == pytest.approx(0.5 * 0.05 + 0.5 * 2.0, abs=1e-14)
    # uniform_b momentum picks up int A_ext rho = 1/2 B ^ q
    s.body.q = np.array([1.0, 0.0, 0.0])
    npt.assert_allclose(momentum(s, ExternalField("uniform_b", b=2.0), P, grid),
                        [0.2, 1.0, 0.1], atol=1e-10)


def test_coulomb_energy_parseval(grid):
    f = coulomb_init(P, grid, np.zeros(3))
    s = SimState(0.0, f, BodyState(np.zeros(3), np.zeros(3)))
    rho = charge_cloud(P, grid, np.zeros(3)).rho - 1 / grid.length**3
    from spinning_charge.fields import poisson_solve
    phi = poisson_solve(rho, grid)
    assert energy(s, ExternalField(), P, grid) == pytest.approx(0.5 * grid.integrate(rho * phi), rel=1e-10)


def test_background_term_vanishes_without_magnetic_field(grid):
    s = SimState(0.0, coulomb_init(P, grid, np.zeros(3)), BodyState(np.zeros(3), np.zeros(3)))
    npt.assert_array_equal(background_angular_momentum(s, grid), 0.0)


def test_drift_report_single_sample(grid):
    s = SimState(0.0, FieldState.zeros(grid), BodyState([1.0, 0, 0], [0, 1.0, 0], w=[0, 0, 2.0]))
    rows = [diagnostics_row(s, ExternalField(), P, grid)]
    rep = drift_report(rows, default_flags(ExternalField()))
    assert len(rep) == 7 and all(r["drift"] == 0.0 for r in rep) and all(r["conserved"] for r in rep)
    with pytest.raises(ValueError):
        drift_report([])


def test_drift_normalization():
    class Row:
        def __init__(self, e):
            self.energy, self.momentum, self.angular_momentum = e, np.zeros(3), np.array([0, 0, 4.0 + e])
    rep = drift_report([Row(0.5), Row(0.5 + 1e-3)])
    assert rep[0]["drift"] == pytest.approx(1e-3)  # |Q0| < 1 -> absolute
    assert rep[-1]["drift"] == pytest.approx(1e-3 / 4.5)


def test_default_flags():
    assert default_flags(ExternalField("uniform_b", b=1.0)) == {
        "energy": True, "momentum": [2], "angular_momentum": [2]}
    assert default_flags(ExternalField("zero"))["momentum"] == [0, 1, 2]


def test_convergence_order_of_power_law():
    steps = np.array([0.1, 0.05, 0.025])
    assert convergence_order(steps, 3.0 * steps**4) == pytest.approx(4.0)


def test_reference_energy_and_axial_momentum_converge(reference_run, grid):
    from spinning_charge.simulation import run
    from conftest import reference_config
    flags = default_flags(reference_run.config.external)
    fine = run(reference_config(dt=grid.h / 8), keep_fields=False)
    coarse_rep = drift_report(reference_run.rows, flags)
    fine_rep = drift_report(fine.rows, flags)
    for a, b in zip(coarse_rep, fine_rep):
        if a["charge"] != "angular_momentum" and a["conserved"]:
            assert a["drift"] < 1e-5
            assert convergence_order([grid.h / 4, grid.h / 8], [a["drift"], b["drift"]]) > 3.7
