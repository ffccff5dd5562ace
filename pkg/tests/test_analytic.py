import cmath
import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from app.services import analytic
from app.services.analytic import LadderState, SampledFunction
from app.services.models import Parity
from app.utils.errors import DomainError, ToleranceError

KS = np.geomspace(0.05, 10.0, 50)


# =============================================================================
# BOUND STATES
# =============================================================================

def test_ground_state_shapes():
    assert analytic.ground_state(0) is None

    one = analytic.ground_state(1)
    assert one.energy == -1.0 and one.parity is Parity.EVEN and one.node_count == 0
    center = int(np.argmin(np.abs(one.xs)))
    shape = one.psi.real / one.psi.real[center]
    assert np.allclose(shape, 1.0 / np.cosh(one.xs), atol=1e-12)

    two = analytic.ground_state(2)
    assert two.energy == -4.0
    assert np.allclose(two.psi.real / two.psi.real[center], 1.0 / np.cosh(two.xs) ** 2, atol=1e-12)
    assert analytic.ground_state(3).energy == -9.0


@pytest.mark.parametrize("ell", [1, 2, 3, 4])
def test_bound_spectrum(ell):
    states = analytic.bound_spectrum(ell)
    assert [s.energy for s in states] == [-float((ell - n) ** 2) for n in range(ell)]
    assert [s.parity for s in states] == [Parity.of_index(n) for n in range(ell)]
    assert [s.node_count for s in states] == list(range(ell))
    for state in states:
        assert trapezoid(np.abs(state.psi) ** 2, state.xs) == pytest.approx(1.0, abs=1e-8)


def test_bound_spectrum_examples():
    assert analytic.bound_spectrum(0) == []
    two = analytic.bound_spectrum(2)
    assert [s.energy for s in two] == [-4.0, -1.0]
    assert [s.parity for s in two] == [Parity.EVEN, Parity.ODD]


@pytest.mark.parametrize("ell", [1, 2, 3, 4, 5])
def test_bound_spectrum_parity_alternates(ell):
    for n, state in enumerate(analytic.bound_spectrum(ell)):
        assert np.allclose(state.xs[::-1], -state.xs, atol=1e-12)
        assert np.max(np.abs(state.psi[::-1] - (-1) ** n * state.psi)) < 1e-8


@pytest.mark.parametrize("ell,n", [(1, 0), (2, 0), (2, 1), (3, 2), (4, 1)])
def test_bound_states_are_eigenfunctions(ell, n):
    xs = np.linspace(-10, 10, 4001)
    s = ell - n
    state = LadderState(s=s, k=0.0)
    for m in range(s + 1, ell + 1):
        state = analytic.apply_raising(m, state)
    values = state.values(xs)
    exact_d2 = state.derivative().derivative().values(xs)
    scale = np.max(np.abs(values))

    exact = analytic.hamiltonian_residual(ell, xs, values, -s * s, second_derivative=exact_d2)
    assert np.max(np.abs(exact)) / scale < 1e-10
    sampled = analytic.hamiltonian_residual(ell, xs, values, -s * s)
    assert np.max(np.abs(sampled)) / scale < 1e-6


# =============================================================================
# OPERATORS
# =============================================================================

def test_raising_plane_wave():
    xs = np.linspace(-4, 4, 81)
    k = 0.8
    raised = analytic.apply_raising(1, LadderState(s=0, k=k))
    expected = (k + 1j * np.tanh(xs)) * np.exp(1j * k * xs)
    assert np.allclose(raised.values(xs), expected, atol=1e-14)


def test_raising_sech_gives_odd_state():
    xs = np.linspace(-6, 6, 121)
    raised = analytic.apply_raising(2, LadderState(s=1, k=0.0)).values(xs)
    reference = np.tanh(xs) / np.cosh(xs)
    ratio = raised[xs != 0] / reference[xs != 0]
    assert np.allclose(ratio, ratio[0], atol=1e-12)
    assert np.allclose(raised, -raised[::-1], atol=1e-14)


def test_raising_sampled_matches_closed_form():
    xs = np.linspace(-6, 6, 2401)
    k = 1.3
    sampled = SampledFunction(xs=xs, values=np.exp(1j * k * xs))
    raised = analytic.apply_raising(3, sampled)
    closed = analytic.apply_raising(3, LadderState(s=0, k=k)).values(xs)
    assert np.max(np.abs(raised.values - closed)) < 1e-7


def test_raising_zero_function():
    xs = np.linspace(-3, 3, 301)
    out = analytic.apply_raising(1, SampledFunction(xs=xs, values=np.zeros(xs.size)))
    assert np.all(out.values == 0)


def test_coarse_grid_is_rejected():
    xs = np.linspace(0.0, 10.0, 21)
    with pytest.raises(ToleranceError):
        analytic.finite_difference(xs, np.sin(5 * xs))
    with pytest.raises(DomainError):
        analytic.finite_difference(xs, np.sin(xs), order=3)


@pytest.mark.parametrize("ell", [1, 2, 3])
def test_intertwining(ell):
    xs = np.linspace(-5, 5, 10001)
    trial = np.exp(-0.5 * xs ** 2) * (1.0 + 0.3j * xs) * np.exp(0.7j * xs)
    res_a, res_b = analytic.intertwining_residuals(ell, xs, trial)
    assert res_a <= 1e-6
    assert res_b <= 1e-6


@pytest.mark.parametrize("ell", [1, 2, 3])
def test_lowering_annihilates_ground_state(ell):
    state = analytic.ground_state(ell)
    lowered = analytic.apply_lowering(ell, SampledFunction(xs=state.xs, values=state.psi))
    assert np.max(np.abs(lowered.values)) <= 1e-6 * np.max(np.abs(state.psi))
    assert analytic.apply_lowering(ell, LadderState(s=ell, k=0.0)).edge_values() == (0j, 0j)


# =============================================================================
# SCATTERING
# =============================================================================

def test_scattering_wavefunction_limits():
    far = np.array([40.0])
    psi = analytic.scattering_wavefunction(1, 1.0, far)
    assert psi[0] * cmath.exp(-1j * 40.0) == pytest.approx(1 + 1j, abs=1e-12)

    xs = np.linspace(-3, 3, 7)
    assert np.allclose(analytic.scattering_wavefunction(0, 2.5, xs), np.exp(2.5j * xs))


def test_scattering_wavefunction_forms_at_origin():
    origin = np.array([0.0])
    assert analytic.scattering_wavefunction(2, 1.0, origin, form="product")[0] == pytest.approx(1.0)
    assert analytic.scattering_wavefunction(2, 1.0, origin)[0] == pytest.approx(2.0)
    with pytest.raises(DomainError):
        analytic.scattering_wavefunction(1, 0.0, origin)


@pytest.mark.parametrize("ell", [1, 2, 3])
def test_ladder_scattering_state_is_eigenfunction(ell):
    k = 0.9
    xs = np.linspace(-8, 8, 3201)
    state = analytic.raising_chain(ell, k)
    values = state.values(xs)
    residual = analytic.hamiltonian_residual(
        ell, xs, values, k * k, second_derivative=state.derivative().derivative().values(xs)
    )
    assert np.max(np.abs(residual)) / np.max(np.abs(values)) < 1e-10


def test_coefficients_examples():
    one = analytic.coefficients(1, 1.0)
    assert one.T == 1 + 1j and one.I == 1 - 1j and one.R == 0
    free = analytic.coefficients(0, 2.0)
    assert free.T == 1 and free.I == 1
    assert analytic.coefficients(2, 1.0).T == pytest.approx(-1 + 3j)
    for bad in (0.0, -1.0):
        with pytest.raises(DomainError):
            analytic.coefficients(1, bad)


@pytest.mark.parametrize("ell", [1, 2, 3, 4])
def test_coefficients_structure(ell):
    for k in (0.3, 1.0, 4.0):
        c = analytic.coefficients(ell, k)
        assert c.I == pytest.approx(c.T.conjugate())
        assert c.reflection_probability + c.transmission_probability == pytest.approx(1.0, abs=1e-10)
        assert analytic.asymptotic_amplitudes(analytic.raising_chain(ell, k)) == (
            pytest.approx(c.I), pytest.approx(c.T)
        )


def test_phase_shift_examples():
    assert analytic.phase_shift(1, 1.0) == pytest.approx(math.pi / 4)
    assert analytic.phase_shift(1, 1e-9) == pytest.approx(math.pi / 2, abs=1e-8)
    assert analytic.phase_shift(2, 0.5) == pytest.approx(math.atan(2) + math.atan(4), abs=1e-15)
    assert analytic.phase_shift(2, 0.5) == pytest.approx(2.4329663, abs=1e-7)
    with pytest.raises(DomainError):
        analytic.phase_shift(1, 0.0)


def test_phase_shift_zero():
    assert analytic.phase_shift_zero(0) == 0.0
    assert analytic.phase_shift_zero(1) == math.pi / 2
    assert analytic.phase_shift_zero(3) == 3 * math.pi / 2


@pytest.mark.parametrize("ell", [1, 2, 3, 4])
def test_phase_shift_decreases_and_matches_continuation(ell):
    closed = np.array([analytic.phase_shift(ell, k) for k in KS])
    assert np.all(np.diff(closed) < 0)
    continued = analytic.phase_shift_by_continuation(ell, KS)
    assert np.allclose(continued, closed, atol=1e-12)


# =============================================================================
# HALF-BOUND STATES AND CENSUS
# =============================================================================

def test_half_bound_states():
    xs = analytic.reporting_grid()
    one = analytic.half_bound_state(1)
    assert one.parity is Parity.ODD
    assert np.allclose(one.psi.real, np.tanh(xs), atol=1e-14)

    two = analytic.half_bound_state(2)
    assert two.parity is Parity.EVEN
    assert np.allclose(two.psi.real, 0.5 * (3 * np.tanh(xs) ** 2 - 1), atol=1e-14)
    assert np.allclose(analytic.half_bound_state(2, form="product").psi.real, np.tanh(xs) ** 2)

    zero = analytic.half_bound_state(0)
    assert zero.parity is Parity.EVEN
    assert np.all(zero.psi == 1)


@pytest.mark.parametrize("ell", [0, 1, 2, 3, 4])
def test_half_bound_states_are_bounded_zero_energy_solutions(ell):
    state = analytic.half_bound_state(ell)
    assert abs(state.psi[-1]) == pytest.approx(1.0, abs=1e-12)
    assert abs(state.psi[0]) == pytest.approx(1.0, abs=1e-12)
    assert np.max(np.abs(state.psi)) <= 1.0 + 1e-12
    chain = analytic.raising_chain(ell, 0.0)
    xs = np.linspace(-6, 6, 1201)
    residual = analytic.hamiltonian_residual(
        ell, xs, chain.values(xs), 0.0, second_derivative=chain.derivative().derivative().values(xs)
    )
    assert np.max(np.abs(residual)) < 1e-9 * max(1.0, np.max(np.abs(chain.values(xs))))


def test_census_examples():
    one = analytic.census(1)
    assert (one.n_even, one.n_odd, one.critical_odd, one.critical_even) == (1, 0, True, False)
    two = analytic.census(2)
    assert (two.n_even, two.n_odd, two.critical_even) == (1, 1, True)
    zero = analytic.census(0)
    assert zero.n_total == 0 and zero.critical_even and not zero.critical_odd
    for ell in range(6):
        c = analytic.census(ell)
        assert c.n_total == ell == c.n_even + c.n_odd
        assert c.critical_sectors == (analytic.half_bound_state(ell).parity,)
