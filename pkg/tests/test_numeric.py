import math
import time

import numpy as np
import pytest

from app.config import SolverConfig
from app.services import analytic, numeric
from app.services.levinson import audit_k_grid
from app.services.models import Parity
from app.services.numeric import Direction
from app.services.potentials import make_reflectionless, make_tabulated, make_zero
from app.services.transfer_matrix import square_well_layers, transfer_coefficients
from app.utils.cache import get_cache
from app.utils.errors import PreconditionError, ResolutionError

KS = np.geomspace(0.05, 10.0, 50)


@pytest.fixture(scope="module")
def curves(solver_cfg):
    return {ell: numeric.phase_curve(make_reflectionless(ell), KS, solver_cfg) for ell in range(1, 5)}


# =============================================================================
# INTEGRATOR
# =============================================================================

def test_discrete_wavenumber():
    h = 1e-3
    for k in (0.01, 1.0, 10.0, 100.0):
        f = 1.0 + h * h * k * k / 12.0
        kt = numeric.discrete_wavenumber(k, h)
        assert math.cos(kt * h) == pytest.approx((6.0 - 5.0 * f) / f, abs=1e-15)
        assert abs(kt - k) < 1e-6 * k
    for kappa in (0.5, 3.0):
        f = 1.0 - h * h * kappa * kappa / 12.0
        assert math.cosh(numeric.discrete_decay_rate(kappa, h) * h) == pytest.approx((6.0 - 5.0 * f) / f, abs=1e-15)


def _free_error(h):
    cfg = SolverConfig(h=h)
    k = 10.0
    grid = numeric.build_grid(make_zero(), cfg)
    seed = (math.cos(k * grid.xs[0]), math.cos(k * grid.xs[1]))
    sol = numeric.numerov_integrate(make_zero(), k * k, Direction.LEFT_TO_RIGHT, cfg, seed)
    return float(np.max(np.abs(sol.psi - np.cos(k * sol.xs))))


def test_free_particle_fourth_order():
    ratio = _free_error(1e-3) / _free_error(5e-4)
    assert 12.0 <= ratio <= 20.0


def test_numerov_bound_state_profile(solver_cfg):
    p = make_reflectionless(1)
    grid = numeric.build_grid(p, solver_cfg)
    seed = (1.0 / math.cosh(grid.xs[0]), 1.0 / math.cosh(grid.xs[1]))
    sol = numeric.numerov_integrate(p, -1.0, "left_to_right", solver_cfg, seed)
    inside = sol.xs <= 5.0
    assert np.max(np.abs(sol.psi[inside] - 1.0 / np.cosh(sol.xs[inside]))) < 1e-7
    assert sol.xs[0] == -solver_cfg.x_max and np.all(np.diff(sol.xs) > 0)


def test_grid_places_origin_on_a_node(solver_cfg):
    grid = numeric.build_grid(make_zero(), solver_cfg)
    assert grid.xs[grid.center] == 0.0
    assert grid.size == 2 * round(solver_cfg.x_max / solver_cfg.h) + 1


# =============================================================================
# SCATTERING
# =============================================================================

@pytest.mark.parametrize("ell", [1, 2, 3, 4])
def test_reflectionless_sweep(ell, curves, solver_cfg):
    for result in numeric.scattering_sweep(make_reflectionless(ell), KS, solver_cfg):
        assert abs(result.coefficients.reflection_amplitude) <= 1e-8
        assert result.transmission_probability == pytest.approx(1.0, abs=1e-8)
    exact = [analytic.phase_shift(ell, k) for k in KS]
    assert np.allclose(curves[ell].delta_samples, exact, atol=1e-6)


def test_single_momentum(solver_cfg):
    result = numeric.solve_scattering(make_reflectionless(1), 1.0, solver_cfg)
    assert result.delta == pytest.approx(math.pi / 4, abs=1e-6)
    assert abs(result.coefficients.R / result.coefficients.I) < 1e-8


def test_two_level_phase_at_half_momentum(solver_cfg):
    result = numeric.solve_scattering(make_reflectionless(2), 0.5, solver_cfg)
    assert result.delta == pytest.approx(math.atan(2.0) + math.atan(4.0), abs=1e-7)
    assert abs(result.coefficients.reflection_amplitude) < 1e-8


def _phase_error(h):
    cfg = SolverConfig(h=h)
    p = make_reflectionless(2)
    return max(
        abs(numeric.solve_scattering(p, k, cfg).delta - analytic.phase_shift(2, k) % math.pi)
        for k in (1.0, 2.0, 4.0)
    )


def test_phase_shift_fourth_order():
    ratio = _phase_error(4e-3) / _phase_error(2e-3)
    assert 12.0 <= ratio <= 20.0


@pytest.mark.parametrize("k", [0.5, 1.0, 2.0])
def test_square_well_matches_transfer_matrix(k, well, solver_cfg):
    numeric_c = numeric.solve_scattering(well, k, solver_cfg).coefficients
    oracle = transfer_coefficients(square_well_layers(2.0, 1.0), k)
    assert numeric_c.reflection_amplitude == pytest.approx(oracle.reflection_amplitude, abs=1e-7)
    assert numeric_c.transmission_amplitude == pytest.approx(oracle.transmission_amplitude, abs=1e-7)


def test_parity_phases_reflectionless(solver_cfg):
    phases = numeric.solve_parity_phases(make_reflectionless(1), 1.0, solver_cfg)
    assert phases.delta_even == pytest.approx(math.pi / 4, abs=1e-7)
    assert phases.delta_odd == pytest.approx(math.pi / 4, abs=1e-7)
    assert abs(phases.reflection) < 1e-8


def test_parity_phases_rebuild_square_well(well, solver_cfg):
    for k in (0.5, 1.5):
        phases = numeric.solve_parity_phases(well, k, solver_cfg)
        direct = numeric.solve_scattering(well, k, solver_cfg).coefficients
        assert phases.reflection == pytest.approx(direct.reflection_amplitude, abs=1e-7)
        assert phases.transmission == pytest.approx(direct.transmission_amplitude, abs=1e-7)


def test_preconditions(solver_cfg):
    lopsided = make_tabulated([-2, -1, 0, 1, 2], [0, -1, -2, -0.5, 0])
    with pytest.raises(PreconditionError):
        numeric.solve_parity_phases(lopsided, 1.0, solver_cfg)
    with pytest.raises(PreconditionError):
        numeric.find_bound_states(lopsided, solver_cfg)

    xs = np.arange(5.0, 31.0)
    with pytest.raises(PreconditionError):
        numeric.solve_scattering(make_tabulated(xs, 1.0 / xs ** 2), 1.0, solver_cfg)


def test_momentum_beyond_resolution(solver_cfg):
    with pytest.raises(ResolutionError):
        numeric.solve_scattering(make_reflectionless(1), 600.0, solver_cfg)


# =============================================================================
# PHASE CURVES
# =============================================================================

def test_unwrap_by_pi():
    ks = np.linspace(0.1, 5.0, 40)
    true = 2.0 * np.arctan(1.0 / ks) + 0.3
    lifted = numeric.unwrap_by_pi(ks, true % math.pi, anchor=true[-1] + 0.4)
    assert np.allclose(lifted, true, atol=1e-12)

    jumpy = np.array([0.1, 1.55, 0.1])
    with pytest.raises(ResolutionError):
        numeric.unwrap_by_pi(np.array([1.0, 2.0, 3.0]), jumpy, anchor=0.1)


def test_phase_curve_parity_sector(solver_cfg):
    curve = numeric.phase_curve(make_reflectionless(1), KS, solver_cfg, parity="odd")
    assert curve.sector is numeric.PhaseSector.ODD
    assert curve.delta_zero_extrapolated == pytest.approx(math.pi / 2, abs=1e-3)
    again = numeric.PhaseShiftCurve.from_dict(
        {"k_samples": list(curve.k_samples), "delta_samples": list(curve.delta_samples),
         "delta_zero_extrapolated": curve.delta_zero_extrapolated, "sector": "odd", "potential": curve.potential}
    )
    assert again == curve


@pytest.mark.parametrize("ell", [0, 1, 2, 3, 4])
def test_delta_zero_extrapolation(ell, solver_cfg):
    curve = numeric.phase_curve(make_reflectionless(ell), audit_k_grid(), solver_cfg)
    assert curve.delta_zero_extrapolated == pytest.approx(ell * math.pi / 2, abs=1e-3)


def test_delta_zero_runtime(solver_cfg):
    get_cache().clear_all()
    start = time.perf_counter()
    for ell in range(1, 5):
        numeric.phase_curve(make_reflectionless(ell), audit_k_grid(), solver_cfg)
    assert time.perf_counter() - start < 10.0


# =============================================================================
# BOUND STATES AND ZERO ENERGY
# =============================================================================

@pytest.mark.parametrize("ell", [1, 2, 3, 4])
def test_find_bound_states(ell, solver_cfg):
    states = numeric.find_bound_states(make_reflectionless(ell), solver_cfg)
    assert len(states) == ell
    for n, state in enumerate(states):
        assert state.energy == pytest.approx(-float((ell - n) ** 2), abs=1e-8)
        assert state.parity is Parity.of_index(n)
        assert state.node_count == n


def test_numeric_ground_state_profile(solver_cfg):
    ground = numeric.find_bound_states(make_reflectionless(1), solver_cfg)[0]
    exact = analytic.ground_state(1)
    assert np.max(np.abs(ground.psi - exact.psi)) < 1e-6


def test_no_bound_states_without_attraction(solver_cfg):
    assert numeric.find_bound_states(make_reflectionless(0), solver_cfg) == []


@pytest.mark.parametrize("ell", [0, 1, 2, 3, 4])
def test_zero_energy_classification(ell, solver_cfg):
    crit = numeric.classify_zero_energy(make_reflectionless(ell), solver_cfg)
    expected = analytic.half_bound_state(ell).parity
    assert crit.is_critical(expected)
    assert not crit.is_critical(Parity.ODD if expected is Parity.EVEN else Parity.EVEN)


@pytest.mark.parametrize("ell", [0, 1, 2, 3, 4])
def test_numeric_census_matches_closed_form(ell, solver_cfg):
    assert numeric.numeric_census(make_reflectionless(ell), solver_cfg) == analytic.census(ell)


def test_square_well_bound_state(well, solver_cfg):
    # depth 2, half-width 1: sqrt(2) < pi/2 leaves a single even state, q tan q = kappa
    states = numeric.find_bound_states(well, solver_cfg)
    assert [s.parity for s in states] == [Parity.EVEN]
    q, kappa = math.sqrt(2.0 + states[0].energy), math.sqrt(-states[0].energy)
    assert q * math.tan(q) == pytest.approx(kappa, abs=1e-6)
