import numpy as np
import pytest

from bfl.dynamics import FlowState
from bfl.integrate import IntegratorSpec, evolve
from bfl.lattice import Field, Grid, norm_h, unit_field
from bfl.probe import (
    DiagnosticsRecord,
    oracle_circle_curve,
    diagnose,
    dual_bound_margin,
    energy,
    energy_rate_residual,
    frenet,
    frenet_curve,
    gradient_bound_margin,
    helix_rotation_rate,
    oracle_great_circle,
    oracle_helix,
    oracle_soliton_curve,
    peak_location,
    perturbed_initial_data,
    smooth_bump,
    stability_probe,
)
from bfl.speed import make_constant, speed_from_name


# ------------------------------------------------------------- margins

def test_gradient_margin_at_time_zero():
    speed = speed_from_name("sin:2,1,1")  # alpha 1, beta 3
    grad0 = 0.7
    m = gradient_bound_margin(0.0, grad0, grad0, speed)
    assert m == pytest.approx((np.sqrt(3.0) - 1.0) * grad0)
    assert m >= 0.0


def test_dual_margin_full_bound_for_constant_field():
    grid = Grid.make_periodic(2 * np.pi, 32)
    speed = make_constant(1.0)
    # constant tangent: rhs = 0, margin equals the full bound
    m = dual_bound_margin(0.5, 0.3, 0.0, speed)
    assert m == pytest.approx(0.3)


def test_helix_margins_constant_under_rigid_precession():
    grid = Grid.make_periodic(2 * np.pi, 64)
    u0, _, _ = oracle_helix(grid, np.pi / 4, 2)
    res = evolve(FlowState(0.0, u0, make_constant(1.0)), 0.5,
                 IntegratorSpec(method="rotation", cfl=0.25, snapshot_stride=100))
    recs = diagnose(res, make_constant(1.0))
    margins = [r.bound_margins["gradient_bound"] for r in recs]
    grads = [r.grad_norm for r in recs]
    assert np.max(np.abs(np.diff(grads))) <= 1e-10  # |D+u|_h rigid
    assert min(margins) >= -1e-10
    assert max(np.abs(margins)) <= 1e-10  # beta = alpha: bound is tight


def test_margins_nonnegative_space_only_variable_speed():
    # beta1 = 0: the bound specializes to sqrt(beta/alpha) |D+u0|_h, which
    # exact energy conservation guarantees
    grid = Grid.make_periodic(2 * np.pi, 64)
    u0, _, _ = oracle_helix(grid, np.pi / 4, 2)
    speed = speed_from_name("sin:2,1,1")
    res = evolve(FlowState(0.0, u0, speed), 1.0,
                 IntegratorSpec(method="rotation", cfl=0.25, snapshot_stride=50))
    recs = diagnose(res, speed)
    assert min(r.bound_margins["gradient_bound"] for r in recs) >= -1e-10
    assert min(r.bound_margins["dual_bound"] for r in recs) >= -1e-10


def test_margins_positive_with_time_dependent_speed():
    grid = Grid.make_periodic(2 * np.pi, 64)
    u0, _, _ = oracle_helix(grid, np.pi / 4, 2)
    speed = speed_from_name("sintime:2,1,1,1")
    res = evolve(FlowState(0.0, u0, speed), 1.0,
                 IntegratorSpec(method="rotation", cfl=0.25, snapshot_stride=50))
    recs = diagnose(res, speed)
    for r in recs:
        assert r.bound_margins["gradient_bound"] >= -1e-8
        assert r.bound_margins["dual_bound"] >= -1e-8


def test_diagnose_oracle_error_and_fields():
    grid = Grid.make_periodic(2 * np.pi, 64)
    u0, closed_form, _ = oracle_helix(grid, np.pi / 4, 2)
    res = evolve(FlowState(0.0, u0, make_constant(1.0)), 0.2,
                 IntegratorSpec(method="rotation", cfl=0.25, snapshot_stride=50))
    recs = diagnose(res, make_constant(1.0), oracle=closed_form)
    assert isinstance(recs[0], DiagnosticsRecord)
    assert recs[0].oracle_error == pytest.approx(0.0, abs=1e-14)
    assert recs[-1].oracle_error <= 1e-9
    for r in recs:
        assert r.unit_drift <= 1e-13
        assert r.rhs_dual_norm <= r.rhs_norm * (1 + 1e-12)


def test_diagnose_curve_mode_skips_margins():
    grid = Grid.make_periodic(2 * np.pi, 48)
    gamma0 = oracle_circle_curve(grid)
    speed = speed_from_name("coupled-tanh:1,0.5")
    res = evolve(FlowState(0.0, gamma0, speed, mode="curve"), 0.1,
                 IntegratorSpec(method="rk4", cfl=0.25, snapshot_stride=20))
    recs = diagnose(res, speed)
    assert recs[-1].bound_margins == {}
    assert recs[0].unit_drift <= 1e-13   # unit chords by construction
    assert recs[-1].unit_drift <= 1e-10


# ------------------------------------------------------------- energy law

def test_energy_rate_matches_time_derivative_of_g():
    grid = Grid.make_periodic(2 * np.pi, 64)
    u0, _, _ = oracle_helix(grid, np.pi / 4, 2)
    speed = speed_from_name("sintime:2,1,1,1")
    spec10 = IntegratorSpec(method="rotation", cfl=0.25, snapshot_stride=10)
    spec5 = IntegratorSpec(method="rotation", cfl=0.25, snapshot_stride=5)
    r10 = energy_rate_residual(evolve(FlowState(0.0, u0, speed), 0.3, spec10), speed)
    r5 = energy_rate_residual(evolve(FlowState(0.0, u0, speed), 0.3, spec5), speed)
    assert r5 <= 1e-3          # measured 2.8e-4
    assert r5 < r10            # second-order in the snapshot spacing


def test_energy_rate_coupled_transport_term():
    grid = Grid.make_periodic(2 * np.pi, 48)
    x = grid.nodes()
    gamma0 = Field(grid, np.stack([np.cos(x), np.sin(x), np.zeros_like(x)], axis=1))
    speed = speed_from_name("coupled-tanh:1,0.5")
    res = evolve(FlowState(0.0, gamma0, speed, mode="curve"), 0.5,
                 IntegratorSpec(method="rk4", cfl=0.25, snapshot_stride=5))
    assert energy_rate_residual(res, speed) <= 3e-3  # measured 6.6e-4


# ------------------------------------------------------------- frenet

def test_frenet_straight_line():
    grid = Grid.make_window(0.0, 16, 0.25)
    gamma = Field(grid, np.outer(grid.nodes(), [1.0, 0.0, 0.0]))
    data = frenet(gamma)
    assert np.all(data.kappa.values == 0.0)
    assert not np.any(data.tau_defined)


def test_frenet_unit_circle_curvature():
    grid = Grid.make_periodic(2 * np.pi, 64)
    x = grid.nodes()
    gamma = Field(grid, np.stack([np.cos(x), np.sin(x), np.zeros_like(x)], axis=1))
    data = frenet(gamma)
    expected = (2 - 2 * np.cos(grid.h)) / grid.h ** 2
    assert expected == pytest.approx(0.99920, abs=5e-5)
    assert np.allclose(data.kappa.values, expected, atol=1e-12)
    # planar: torsion vanishes where defined
    assert np.max(np.abs(data.tau.values[data.tau_defined])) <= 1e-10


def test_frenet_warns_off_arc_length():
    grid = Grid.make_periodic(2 * np.pi, 32)
    x = grid.nodes()
    gamma = Field(grid, 2.0 * np.stack([np.cos(x), np.sin(x), np.zeros_like(x)], axis=1))
    with pytest.warns(UserWarning):
        frenet(gamma)


def test_peak_location_parabolic():
    grid = Grid.make_window(0.0, 20, 0.1)
    x = grid.nodes()
    vals = 5.0 - (x - 1.03) ** 2
    assert peak_location(Field(grid, vals)) == pytest.approx(1.03, abs=1e-12)


# ------------------------------------------------------------- oracles

def test_helix_degenerates_to_great_circle():
    grid = Grid.make_periodic(2 * np.pi, 32)
    u0, closed_form, omega = oracle_helix(grid, np.pi / 2, 1)
    assert abs(omega) <= 1e-13
    assert np.allclose(u0.values, oracle_great_circle(grid).values, atol=1e-15)
    assert np.max(np.abs(closed_form(3.0) - u0.values)) <= 1e-12


def test_helix_rate_formula_value():
    grid = Grid.make_periodic(2 * np.pi, 64)
    omega = helix_rotation_rate(grid, np.pi / 4, 2)
    expected = (np.sqrt(2) / 2) * (2 - 2 * np.cos(2 * grid.h)) / grid.h ** 2
    assert omega == pytest.approx(expected, rel=1e-15)


def test_helix_rejects_incompatible_wavenumber():
    grid = Grid.make_periodic(3.0, 32)
    with pytest.raises(ValueError):
        oracle_helix(grid, np.pi / 4, 1)


def test_frenet_curve_reproduces_circle():
    # constant curvature 1, zero torsion: a unit circle arc
    grid = Grid.make_window(0.0, 64, np.pi / 64)
    gamma, u = frenet_curve(grid, lambda x: 1.0 + 0 * x, lambda x: 0.0 * x)
    data = frenet(gamma)
    inner = data.stencil_valid
    # unit chords turning by h per node: discrete curvature 2 sin(h/2) / h
    assert np.allclose(data.kappa.values[inner],
                       2 * np.sin(grid.h / 2) / grid.h, atol=1e-6)


def test_soliton_curve_peak_and_torsion():
    grid = Grid.make_window(-20.0, 512, 40.0 / 512)
    gamma, u = oracle_soliton_curve(grid, nu=1.0, tau0=0.5)
    assert np.max(np.abs(np.linalg.norm(np.diff(gamma.values, axis=0), axis=1)
                         / grid.h - 1.0)) <= 1e-8
    data = frenet(gamma)
    peak = np.max(data.kappa.values)
    assert peak == pytest.approx(2.0, rel=2e-3)
    assert abs(peak_location(data.kappa)) <= grid.h
    core = data.tau_defined & (data.kappa.values > 0.5)
    assert np.mean(data.tau.values[core]) == pytest.approx(0.5, abs=0.02)


def test_soliton_window_too_narrow():
    grid = Grid.make_window(-5.0, 64, 10.0 / 64)
    with pytest.raises(ValueError):
        oracle_soliton_curve(grid, nu=1.0, tau0=0.5)


# ------------------------------------------------------------- stability

def test_perturbation_is_tangent_and_small():
    grid = Grid.make_periodic(2 * np.pi, 64)
    u0, _, _ = oracle_helix(grid, np.pi / 4, 2)
    eps = 1e-3
    u_tilde = perturbed_initial_data(u0, eps)
    diff = u_tilde.values - u0.values
    assert np.max(np.linalg.norm(diff, axis=1)) <= 2 * eps
    assert norm_h(u_tilde - u0) > 0
    bump = smooth_bump(grid)
    assert bump.max() == pytest.approx(1.0, abs=1e-6)
    assert np.min(bump) == 0.0  # compact support


def test_perturbation_scale_guard():
    grid = Grid.make_periodic(2 * np.pi, 16)
    u0 = oracle_great_circle(grid)
    with pytest.raises(ValueError):
        perturbed_initial_data(u0, 0.0)
    with pytest.raises(ValueError):
        perturbed_initial_data(u0, 0.5)


def test_stability_ratio_near_equilibrium_bounded():
    grid = Grid.make_periodic(2 * np.pi, 64)
    u0 = oracle_great_circle(grid)
    spec = IntegratorSpec(method="rotation", cfl=0.25, snapshot_stride=10 ** 6)
    ratio = stability_probe(u0, 1e-3, make_constant(1.0), 0.5, spec)
    # measured 0.902; frozen empirical growth bound for this configuration
    assert ratio <= 1.1


def test_energy_helper_matches_definition():
    grid = Grid.make_periodic(2 * np.pi, 32)
    u0 = oracle_great_circle(grid)
    ones = Field(grid, np.ones(grid.n_nodes))
    from bfl.lattice import dminus
    dm = dminus(u0)
    manual = grid.h * float(np.sum(np.einsum("ij,ij->i", dm.values, dm.values)))
    assert energy(u0, ones) == pytest.approx(manual, rel=1e-14)
