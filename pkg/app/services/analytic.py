"""
Exact solutions for the reflectionless family v(x) = -l(l+1) sech^2(x).

Everything is built with the ladder operators
    a_m  = p - i m tanh(x),   a_m^+ = p + i m tanh(x),   p = -i d/dx,
which intertwine H_{m-1} and H_m. Closed-form states have the shape
    psi(x) = sech^s(x) e^{ikx} P(tanh x)
with P a complex polynomial, and that shape is preserved by d/dx and by both
ladder operators, so raising chains are evaluated exactly.
"""
import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import Polynomial
from scipy.integrate import trapezoid

from app.services.models import (
    BoundState,
    BoundStateCensus,
    HalfBoundState,
    Parity,
    ScatteringCoefficients,
)
from app.utils.errors import DomainError, ToleranceError
from app.utils.validators import validate_ell, validate_finite, validate_k_grid, validate_positive

logger = logging.getLogger(__name__)

REPORT_HALFWIDTH = 20.0
REPORT_STEP = 0.01
NODE_FLOOR = 1e-10
DERIVATIVE_TOL = 1e-6

# 1 - t^2 and t as polynomials in t = tanh(x)
_ONE_MINUS_T2 = Polynomial([1.0, 0.0, -1.0])
_T = Polynomial([0.0, 1.0])


def reporting_grid() -> np.ndarray:
    """Uniform grid on [-20, 20] with step 0.01 (x = 0 included)"""
    count = int(round(2.0 * REPORT_HALFWIDTH / REPORT_STEP)) + 1
    return np.linspace(-REPORT_HALFWIDTH, REPORT_HALFWIDTH, count)


# =============================================================================
# CLOSED-FORM LADDER STATES
# =============================================================================

@dataclass(frozen=True)
class LadderState:
    """psi(x) = sech^s(x) e^{ikx} P(tanh x), P given by ascending coefficients"""
    s: int
    k: float
    coeffs: Tuple[complex, ...] = (1.0 + 0j,)

    @property
    def poly(self) -> Polynomial:
        return Polynomial(np.asarray(self.coeffs, dtype=complex))

    @classmethod
    def _from_poly(cls, s: int, k: float, poly: Polynomial) -> "LadderState":
        return cls(s=s, k=k, coeffs=tuple(complex(c) for c in poly.coef))

    def values(self, xs) -> np.ndarray:
        x = np.asarray(xs, dtype=float)
        t = np.tanh(x)
        envelope = np.exp(1j * self.k * x)
        if self.s:
            envelope = envelope / np.cosh(x) ** self.s
        return envelope * self.poly(t)

    def derivative(self) -> "LadderState":
        """d/dx keeps the shape: Q = (ik - s t) P + (1 - t^2) P'"""
        P = self.poly
        Q = (1j * self.k - self.s * _T) * P + _ONE_MINUS_T2 * P.deriv()
        return self._from_poly(self.s, self.k, Q)

    def raise_(self, m: int) -> "LadderState":
        """a_m^+ psi: P -> k P + i(s+m) t P - i(1-t^2) P'"""
        P = self.poly
        Q = self.k * P + 1j * (self.s + m) * _T * P - 1j * _ONE_MINUS_T2 * P.deriv()
        return self._from_poly(self.s, self.k, Q)

    def lower(self, m: int) -> "LadderState":
        """a_m psi: P -> k P + i(s-m) t P - i(1-t^2) P'"""
        P = self.poly
        Q = self.k * P + 1j * (self.s - m) * _T * P - 1j * _ONE_MINUS_T2 * P.deriv()
        return self._from_poly(self.s, self.k, Q)

    def edge_values(self) -> Tuple[complex, complex]:
        """P(-1), P(+1): amplitudes of e^{ikx} at x -> -inf and x -> +inf (s = 0)"""
        P = self.poly
        return complex(P(-1.0)), complex(P(1.0))


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Complex samples on a uniform grid, optionally with their derivative"""
    xs: np.ndarray
    values: np.ndarray
    derivative: Optional[np.ndarray] = field(default=None)


Operand = Union[LadderState, SampledFunction]


# =============================================================================
# FINITE DIFFERENCES
# =============================================================================

def _uniform_step(xs: np.ndarray, minimum_points: int) -> float:
    if xs.ndim != 1 or xs.size < minimum_points:
        raise ToleranceError(f"Need at least {minimum_points} grid points for 4th-order differences")
    steps = np.diff(xs)
    h = float(steps.mean())
    if h <= 0.0 or np.max(np.abs(steps - h)) > 1e-6 * h:
        raise ToleranceError("Finite differences need a uniform increasing grid")
    return h


def _first_derivative(ys: np.ndarray, h: float) -> np.ndarray:
    d = np.empty_like(ys)
    d[2:-2] = (-ys[4:] + 8.0 * ys[3:-1] - 8.0 * ys[1:-3] + ys[:-4]) / (12.0 * h)
    d[0] = (-25.0 * ys[0] + 48.0 * ys[1] - 36.0 * ys[2] + 16.0 * ys[3] - 3.0 * ys[4]) / (12.0 * h)
    d[1] = (-3.0 * ys[0] - 10.0 * ys[1] + 18.0 * ys[2] - 6.0 * ys[3] + ys[4]) / (12.0 * h)
    d[-1] = (25.0 * ys[-1] - 48.0 * ys[-2] + 36.0 * ys[-3] - 16.0 * ys[-4] + 3.0 * ys[-5]) / (12.0 * h)
    d[-2] = (3.0 * ys[-1] + 10.0 * ys[-2] - 18.0 * ys[-3] + 6.0 * ys[-4] - ys[-5]) / (12.0 * h)
    return d


def _second_derivative(ys: np.ndarray, h: float) -> np.ndarray:
    d = np.empty_like(ys)
    h2 = 12.0 * h * h
    d[2:-2] = (-ys[4:] + 16.0 * ys[3:-1] - 30.0 * ys[2:-2] + 16.0 * ys[1:-3] - ys[:-4]) / h2
    d[0] = (45.0 * ys[0] - 154.0 * ys[1] + 214.0 * ys[2] - 156.0 * ys[3] + 61.0 * ys[4] - 10.0 * ys[5]) / h2
    d[1] = (10.0 * ys[0] - 15.0 * ys[1] - 4.0 * ys[2] + 14.0 * ys[3] - 6.0 * ys[4] + ys[5]) / h2
    d[-1] = (45.0 * ys[-1] - 154.0 * ys[-2] + 214.0 * ys[-3] - 156.0 * ys[-4] + 61.0 * ys[-5] - 10.0 * ys[-6]) / h2
    d[-2] = (10.0 * ys[-1] - 15.0 * ys[-2] - 4.0 * ys[-3] + 14.0 * ys[-4] - 6.0 * ys[-5] + ys[-6]) / h2
    return d


def finite_difference(xs, ys, order: int = 1, tol: float = DERIVATIVE_TOL) -> np.ndarray:
    """
    4th-order finite-difference derivative on a uniform grid.

    The truncation error is estimated by comparing against the same stencil
    on the every-other-point grid; an estimate above tol * max|y| raises
    ToleranceError.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=complex)
    if order not in (1, 2):
        raise DomainError(f"Only first and second derivatives are supported, got order {order}")
    h = _uniform_step(xs, 12)
    stencil = _first_derivative if order == 1 else _second_derivative
    fine = stencil(ys, h)
    coarse = stencil(ys[::2], 2.0 * h)

    interior = slice(2, -2)
    error = float(np.max(np.abs(fine[::2][interior] - coarse[interior]))) / 15.0
    scale = max(1.0, float(np.max(np.abs(ys))))
    if error > tol * scale:
        raise ToleranceError(
            f"Grid step {h:g} too coarse for derivative accuracy {tol:g} (estimated error {error:.3g})",
            context={"step": h, "estimated_error": error},
        )
    return fine


# =============================================================================
# OPERATORS
# =============================================================================

def _sampled_derivative(f: SampledFunction) -> np.ndarray:
    if f.derivative is not None:
        return np.asarray(f.derivative, dtype=complex)
    return finite_difference(f.xs, f.values)


def apply_raising(ell, f: Operand) -> Operand:
    """
    a_l^+ f = -i f' + i l tanh(x) f.

    Closed-form LadderState inputs stay exact; sampled inputs use their
    attached derivative or 4th-order central differences.
    """
    ell = validate_ell(ell, minimum=1)
    if isinstance(f, LadderState):
        return f.raise_(ell)
    values = np.asarray(f.values, dtype=complex)
    out = -1j * _sampled_derivative(f) + 1j * ell * np.tanh(f.xs) * values
    return SampledFunction(xs=np.asarray(f.xs, dtype=float), values=out)


def apply_lowering(ell, f: Operand) -> Operand:
    """a_l f = -i f' - i l tanh(x) f"""
    ell = validate_ell(ell, minimum=1)
    if isinstance(f, LadderState):
        return f.lower(ell)
    values = np.asarray(f.values, dtype=complex)
    out = -1j * _sampled_derivative(f) - 1j * ell * np.tanh(f.xs) * values
    return SampledFunction(xs=np.asarray(f.xs, dtype=float), values=out)


def hamiltonian_residual(ell, xs, values, energy: complex, second_derivative=None) -> np.ndarray:
    """H_l psi - E psi with H_l = -d^2/dx^2 - l(l+1) sech^2(x)"""
    ell = validate_ell(ell)
    xs = np.asarray(xs, dtype=float)
    psi = np.asarray(values, dtype=complex)
    d2 = (
        np.asarray(second_derivative, dtype=complex)
        if second_derivative is not None
        else finite_difference(xs, psi, order=2)
    )
    return -d2 - ell * (ell + 1) / np.cosh(xs) ** 2 * psi - energy * psi


def intertwining_residuals(ell, xs, values) -> Tuple[float, float]:
    """
    Relative sup-norms of (a^+a - H_l - l^2) f and (a a^+ - H_{l-1} - l^2) f.

    Every derivative is a finite difference, so both vanish up to
    discretization error.
    """
    ell = validate_ell(ell, minimum=1)
    xs = np.asarray(xs, dtype=float)
    f = SampledFunction(xs=xs, values=np.asarray(values, dtype=complex))
    scale = float(np.max(np.abs(f.values)))
    if scale == 0.0:
        return 0.0, 0.0

    A_f = apply_raising(ell, apply_lowering(ell, f)).values
    B_f = apply_lowering(ell, apply_raising(ell, f)).values
    H_l = hamiltonian_residual(ell, xs, f.values, 0.0)
    H_lm1 = hamiltonian_residual(ell - 1, xs, f.values, 0.0)
    res_a = np.max(np.abs(A_f - H_l - ell ** 2 * f.values)) / scale
    res_b = np.max(np.abs(B_f - H_lm1 - ell ** 2 * f.values)) / scale
    return float(res_a), float(res_b)


def raising_chain(ell, k: float) -> LadderState:
    """a_l^+ ... a_1^+ e^{ikx}: the exact scattering eigenstate of H_l (k = 0 allowed)"""
    ell = validate_ell(ell)
    state = LadderState(s=0, k=validate_finite(k, "k"))
    for m in range(1, ell + 1):
        state = state.raise_(m)
    return state


def asymptotic_amplitudes(state: LadderState) -> Tuple[complex, complex]:
    """(I, T): coefficients of e^{ikx} as x -> -inf and x -> +inf"""
    if state.s != 0:
        raise DomainError("Only unbounded (s = 0) states have plane-wave asymptotics")
    return state.edge_values()


# =============================================================================
# SCATTERING
# =============================================================================

def scattering_wavefunction(ell, k: float, xs, form: str = "ladder") -> np.ndarray:
    """
    Scattering state of H_l at momentum k sampled on xs.

    form="ladder" returns the exact raising-chain eigenfunction;
    form="product" returns prod_j (k + i j tanh x) e^{ikx}, which shares its
    asymptotic amplitudes but is an eigenfunction only for l <= 1.
    """
    ell = validate_ell(ell)
    k = validate_finite(k, "k")
    if k == 0.0:
        raise DomainError("k must be nonzero; use half_bound_state for k = 0")
    x = np.asarray(xs, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("xs must be finite")
    if form == "ladder":
        return raising_chain(ell, k).values(x)
    if form == "product":
        t = np.tanh(x)
        out = np.exp(1j * k * x)
        for j in range(1, ell + 1):
            out = out * (k + 1j * j * t)
        return out
    raise DomainError(f"form must be 'ladder' or 'product', got {form!r}")


def coefficients(ell, k: float) -> ScatteringCoefficients:
    """R = 0, T = prod_j (k + ij), I = prod_j (k - ij)"""
    ell = validate_ell(ell)
    k = validate_positive(k, "k")
    T = complex(1.0)
    I = complex(1.0)
    for j in range(1, ell + 1):
        T *= complex(k, j)
        I *= complex(k, -j)
    return ScatteringCoefficients(k=k, I=I, R=0j, T=T)


def phase_shift(ell, k: float) -> float:
    """sum_{j=1..l} arctan(j/k)"""
    ell = validate_ell(ell)
    k = validate_positive(k, "k")
    return math.fsum(math.atan(j / k) for j in range(1, ell + 1))


def phase_shift_zero(ell) -> float:
    """Zero-momentum limit l * pi / 2"""
    ell = validate_ell(ell)
    return ell * math.pi / 2.0


def phase_shift_by_continuation(ell, ks: Sequence[float], points_per_decade: int = 50) -> np.ndarray:
    """
    Half of arg(T/I), unwrapped along a geometric path that starts where the
    phase is still below pi/2 and follows it down to the requested momenta.
    """
    ell = validate_ell(ell)
    grid = validate_k_grid(ks)
    anchor = max(float(grid[-1]), 10.0 * ell * (ell + 1) + 1.0)
    decades = math.log10(anchor / grid[0])
    path = np.union1d(grid, np.geomspace(grid[0], anchor, max(2, int(decades * points_per_decade) + 1)))[::-1]

    args = np.array([cmath.phase(coefficients(ell, k).transmission_amplitude) for k in path])
    delta = 0.5 * np.unwrap(args)
    lookup = dict(zip(path.tolist(), delta.tolist()))
    return np.array([lookup[k] for k in grid.tolist()])


# =============================================================================
# BOUND AND HALF-BOUND STATES
# =============================================================================

def _fix_phase(xs: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """Make psi real and positive at the first x >= 0 where |psi| peaks"""
    half = np.flatnonzero(xs >= 0.0)
    peak = half[int(np.argmax(np.abs(psi[half])))]
    rotated = psi * (abs(psi[peak]) / psi[peak])
    return rotated.real.astype(complex)


def count_nodes(values: np.ndarray, floor: float = NODE_FLOOR) -> int:
    """Sign changes of a real wavefunction, skipping near-zero samples"""
    real = np.real(values)
    cutoff = floor * float(np.max(np.abs(real)))
    signs = np.sign(real[np.abs(real) > cutoff])
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def _normalize(xs: np.ndarray, psi: np.ndarray) -> np.ndarray:
    norm = math.sqrt(trapezoid(np.abs(psi) ** 2, xs))
    return psi / norm


def _bound_state(ell: int, n: int, xs: np.ndarray) -> BoundState:
    s = ell - n
    state = LadderState(s=s, k=0.0)
    for m in range(s + 1, ell + 1):
        state = state.raise_(m)
    psi = _fix_phase(xs, _normalize(xs, state.values(xs)))
    return BoundState(
        n=n,
        energy=-float(s * s),
        parity=Parity.of_index(n),
        node_count=count_nodes(psi),
        xs=xs,
        psi=psi,
        ell=ell,
    )


def ground_state(ell) -> Optional[BoundState]:
    """sech^l(x) normalized, energy -l^2; None for l = 0 (no bound state)"""
    ell = validate_ell(ell)
    if ell == 0:
        return None
    return _bound_state(ell, 0, reporting_grid())


def bound_spectrum(ell) -> List[BoundState]:
    """
    All l bound states of H_l, deepest first.

    Level n is a_l^+ ... a_{l-n+1}^+ applied to the ground state of H_{l-n},
    so its energy is -(l-n)^2.
    """
    ell = validate_ell(ell)
    xs = reporting_grid()
    states = [_bound_state(ell, n, xs) for n in range(ell)]
    for state in states:
        if state.node_count != state.n:
            logger.warning(f"Level {state.n} of ell={ell} has {state.node_count} nodes")
    return states


def half_bound_state(ell, form: str = "ladder") -> HalfBoundState:
    """
    Zero-energy solution bounded at infinity, normalized so psi(+inf) = 1.

    form="ladder" gives the exact solution P_l(tanh x) (Legendre polynomial);
    form="product" gives tanh^l(x), which has the same parity and limits.
    """
    ell = validate_ell(ell)
    xs = reporting_grid()
    if form == "ladder":
        state = raising_chain(ell, 0.0)
        _, at_plus_inf = state.edge_values()
        psi = (state.values(xs) / at_plus_inf).real.astype(complex)
    elif form == "product":
        psi = (np.tanh(xs) ** ell).astype(complex)
    else:
        raise DomainError(f"form must be 'ladder' or 'product', got {form!r}")
    return HalfBoundState(ell=ell, parity=Parity.of_index(ell), xs=xs, psi=psi)


def census(ell) -> BoundStateCensus:
    ell = validate_ell(ell)
    return BoundStateCensus(
        n_total=ell,
        n_even=(ell + 1) // 2,
        n_odd=ell // 2,
        critical_even=(ell % 2 == 0),
        critical_odd=(ell % 2 == 1),
    )
