"""
General 1D Schrodinger solver for psi'' = (v(x) - E) psi.

Numerov marching on the uniform grid [-x_max, x_max] comes in two flavours
that share the same arithmetic: a pure-Python scalar kernel (full profiles,
bisection) and a numpy kernel that marches many energies side by side as
columns (momentum sweeps, energy meshes). Asymptotic matching uses the
discrete plane waves the recurrence propagates exactly, so free space adds
no phase error.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid
from scipy.interpolate import lagrange
from scipy.optimize import bisect

from app.config import SolverConfig
from app.services.analytic import count_nodes, reporting_grid
from app.services.models import BoundState, BoundStateCensus, Parity, ScatteringCoefficients
from app.services.potentials import Potential, born_phase_estimate, check_decay_condition, jumps
from app.utils.cache import cached
from app.utils.errors import (
    DegenerateInputError,
    DomainError,
    PreconditionError,
    ResolutionError,
)
from app.utils.validators import validate_finite, validate_k_grid, validate_positive

logger = logging.getLogger(__name__)

RESCALE_LIMIT = 1e150
MAX_KH = 0.5
MATCH_WINDOW_WIDTH = 1.0
DECAY_PROBES = 5
TAIL_FRACTION = 0.1
UNWRAP_JUMP_LIMIT = 0.45 * math.pi
RECOMMENDED_K_MIN = 0.01
RECOMMENDED_K_MAX = 20.0
RECOMMENDED_SAMPLES = 50
ANCHOR_WARN = 0.2


class Direction(str, Enum):
    LEFT_TO_RIGHT = "left_to_right"
    RIGHT_TO_LEFT = "right_to_left"


class PhaseSector(str, Enum):
    TOTAL = "total"
    EVEN = "even"
    ODD = "odd"


# =============================================================================
# RESULT TYPES
# =============================================================================

@dataclass(frozen=True, eq=False)
class NumerovSolution:
    xs: np.ndarray = field(repr=False)
    psi: np.ndarray = field(repr=False)
    energy: float = 0.0
    direction: Direction = Direction.LEFT_TO_RIGHT
    renormalizations: Tuple[int, ...] = ()


@dataclass(frozen=True)
class ScatteringResult:
    k: float
    coefficients: ScatteringCoefficients
    delta: float
    reflection_probability: float
    transmission_probability: float
    renormalizations: int = 0

    @classmethod
    def of(cls, coefficients: ScatteringCoefficients, renormalizations: int = 0) -> "ScatteringResult":
        return cls(
            k=float(coefficients.k),
            coefficients=coefficients,
            delta=coefficients.delta,
            reflection_probability=coefficients.reflection_probability,
            transmission_probability=coefficients.transmission_probability,
            renormalizations=renormalizations,
        )

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "ScatteringResult":
        """Rebuild a result from its JSON form"""
        return cls(
            k=float(data["k"]),
            coefficients=ScatteringCoefficients.from_dict(data["coefficients"]),
            delta=float(data["delta"]),
            reflection_probability=float(data["reflection_probability"]),
            transmission_probability=float(data["transmission_probability"]),
            renormalizations=int(data.get("renormalizations", 0)),
        )


@dataclass(frozen=True)
class ParityPhases:
    k: float
    delta_even: float
    delta_odd: float

    @property
    def s_even(self) -> complex:
        return complex(math.cos(2.0 * self.delta_even), math.sin(2.0 * self.delta_even))

    @property
    def s_odd(self) -> complex:
        return complex(math.cos(2.0 * self.delta_odd), math.sin(2.0 * self.delta_odd))

    @property
    def reflection(self) -> complex:
        """R/I rebuilt from the sector phases"""
        return (self.s_even - self.s_odd) / 2.0

    @property
    def transmission(self) -> complex:
        """T/I rebuilt from the sector phases"""
        return (self.s_even + self.s_odd) / 2.0

    @property
    def total_delta(self) -> float:
        t = self.transmission
        return (0.5 * math.atan2(t.imag, t.real)) % math.pi


@dataclass(frozen=True)
class PhaseShiftCurve:
    k_samples: Tuple[float, ...]
    delta_samples: Tuple[float, ...]
    delta_zero_extrapolated: float
    sector: PhaseSector = PhaseSector.TOTAL
    potential: str = ""

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "PhaseShiftCurve":
        """Rebuild a curve from its JSON form"""
        return cls(
            k_samples=tuple(float(k) for k in data["k_samples"]),
            delta_samples=tuple(float(d) for d in data["delta_samples"]),
            delta_zero_extrapolated=float(data["delta_zero_extrapolated"]),
            sector=PhaseSector(data.get("sector", "total")),
            potential=str(data.get("potential", "")),
        )


@dataclass(frozen=True)
class Criticality:
    even_critical: bool
    odd_critical: bool
    even_ratio: float = math.inf
    odd_ratio: float = math.inf

    def is_critical(self, parity: Parity) -> bool:
        return self.even_critical if parity is Parity.EVEN else self.odd_critical


# =============================================================================
# GRID
# =============================================================================

@dataclass(frozen=True, eq=False)
class Grid:
    xs: np.ndarray
    v: np.ndarray
    h: float
    center: int
    jump_dv: Dict[int, float]

    @property
    def size(self) -> int:
        return self.xs.size


@cached('grids', key_func=lambda p, cfg: (p, cfg.x_max, cfg.h))
def build_grid(p: Potential, cfg: SolverConfig) -> Grid:
    """
    Sample v on N = 2 round(x_max/h) + 1 nodes (x = 0 is a node).

    Potential steps are snapped to the nearest node, whose value becomes the
    mean of the one-sided limits.
    """
    half = int(round(cfg.x_max / cfg.h))
    xs = np.linspace(-cfg.x_max, cfg.x_max, 2 * half + 1)
    xs[half] = 0.0
    h = 2.0 * cfg.x_max / (2 * half)
    v = np.array(p.values(xs), dtype=float)

    jump_dv: Dict[int, float] = {}
    for jump in jumps(p):
        if abs(jump.position) > cfg.x_max:
            continue
        index = int(round((jump.position + cfg.x_max) / h))
        offset = abs(xs[index] - jump.position)
        if offset > 1e-6 * h:
            logger.warning(
                f"Potential step at x={jump.position:g} is {offset:.3g} off the grid; "
                f"snapped to x={xs[index]:g} (accuracy drops to second order)"
            )
        v[index] = 0.5 * (jump.left + jump.right)
        jump_dv[index] = jump.size

    xs.setflags(write=False)
    v.setflags(write=False)
    return Grid(xs=xs, v=v, h=h, center=half, jump_dv=jump_dv)


# =============================================================================
# MARCHING KERNELS
# =============================================================================

@dataclass
class _March:
    prev: object
    cur: object
    recorded: Dict[int, object]
    nodes: object
    events: List[int]
    values: Optional[List[float]] = None


def _march_scalar(
    grid: Grid,
    energy: float,
    start: int,
    stop: int,
    seed0: float,
    seed1: float,
    record: Iterable[int] = (),
    store: bool = False,
) -> _March:
    """March one solution from node `start` to node `stop` (inclusive)"""
    v, h = grid.v, grid.h
    step = 1 if stop > start else -1
    h2 = h * h / 12.0
    h4 = h * h * h * h / 48.0
    wanted = set(record)

    psi_prev, psi_cur = float(seed0), float(seed1)
    f_prev = 1.0 - h2 * (v[start] - energy)
    f_cur = 1.0 - h2 * (v[start + step] - energy)
    recorded: Dict[int, float] = {}
    for index, value in ((start, psi_prev), (start + step, psi_cur)):
        if index in wanted:
            recorded[index] = value
    values = [psi_prev, psi_cur] if store else None
    nodes = 0
    events: List[int] = []

    for n in range(start + step, stop, step):
        nxt = n + step
        f_next = 1.0 - h2 * (v[nxt] - energy)
        if nxt in grid.jump_dv:
            # limit on the side the march arrives from
            f_next += 0.5 * h2 * grid.jump_dv[nxt] * step
        dv = grid.jump_dv.get(n)
        if dv is None:
            psi_next = ((12.0 - 10.0 * f_cur) * psi_cur - f_prev * psi_prev) / f_next
        else:
            delta = dv * step
            f_mean = 1.0 - h2 * (v[n] - energy)
            d = h * h * delta / 24.0
            e = h4 * delta * delta
            psi_next = ((12.0 - 10.0 * f_mean - e) * psi_cur - (f_prev + d) * psi_prev) / (f_next - d)
            # the next stencil sees the far-side limit at the step
            f_cur = f_mean - 0.5 * h2 * delta

        if psi_next * psi_cur < 0.0:
            nodes += 1
        if abs(psi_next) > RESCALE_LIMIT:
            scale = 1.0 / abs(psi_next)
            psi_next *= scale
            psi_cur *= scale
            for key in recorded:
                recorded[key] *= scale
            if values is not None:
                values = [x * scale for x in values]
            events.append(nxt)
        if nxt in wanted:
            recorded[nxt] = psi_next
        if values is not None:
            values.append(psi_next)

        psi_prev, psi_cur = psi_cur, psi_next
        f_prev, f_cur = f_cur, f_next

    return _March(prev=psi_prev, cur=psi_cur, recorded=recorded, nodes=nodes, events=events, values=values)


def _march_batch(
    grid: Grid,
    energies: np.ndarray,
    start: int,
    stop: int,
    seed0: np.ndarray,
    seed1: np.ndarray,
    record: Iterable[int] = (),
) -> _March:
    """Column-wise version of _march_scalar: one column per energy"""
    v, h = grid.v, grid.h
    step = 1 if stop > start else -1
    h2 = h * h / 12.0
    h4 = h * h * h * h / 48.0
    E = np.asarray(energies, dtype=float)
    wanted = set(record)

    psi_prev = np.array(seed0, dtype=float)
    psi_cur = np.array(seed1, dtype=float)
    f_prev = 1.0 - h2 * (v[start] - E)
    f_cur = 1.0 - h2 * (v[start + step] - E)
    recorded: Dict[int, np.ndarray] = {}
    for index, value in ((start, psi_prev), (start + step, psi_cur)):
        if index in wanted:
            recorded[index] = value.copy()
    nodes = np.zeros(E.shape, dtype=int)
    events: List[int] = []

    for n in range(start + step, stop, step):
        nxt = n + step
        f_next = 1.0 - h2 * (v[nxt] - E)
        if nxt in grid.jump_dv:
            f_next = f_next + 0.5 * h2 * grid.jump_dv[nxt] * step
        dv = grid.jump_dv.get(n)
        if dv is None:
            psi_next = ((12.0 - 10.0 * f_cur) * psi_cur - f_prev * psi_prev) / f_next
        else:
            delta = dv * step
            f_mean = 1.0 - h2 * (v[n] - E)
            d = h * h * delta / 24.0
            e = h4 * delta * delta
            psi_next = ((12.0 - 10.0 * f_mean - e) * psi_cur - (f_prev + d) * psi_prev) / (f_next - d)
            f_cur = f_mean - 0.5 * h2 * delta

        nodes += psi_next * psi_cur < 0.0
        magnitude = np.abs(psi_next)
        big = magnitude > RESCALE_LIMIT
        if big.any():
            scale = np.where(big, 1.0 / np.where(big, magnitude, 1.0), 1.0)
            psi_next = psi_next * scale
            psi_cur = psi_cur * scale
            for key in recorded:
                recorded[key] = recorded[key] * scale
            events.append(nxt)
        if nxt in wanted:
            recorded[nxt] = psi_next.copy()

        psi_prev, psi_cur = psi_cur, psi_next
        f_prev, f_cur = f_cur, f_next

    return _March(prev=psi_prev, cur=psi_cur, recorded=recorded, nodes=nodes, events=events)


def _log_events(events: Sequence[int], what: str, potential: str = "") -> None:
    if events:
        logger.warning(
            f"{what} [{potential}]: {len(events)} renormalization event(s) during integration",
            extra={"potential": potential, "events": len(events)},
        )


# =============================================================================
# NUMEROV INTEGRATION
# =============================================================================

def numerov_integrate(
    p: Potential,
    energy: float,
    direction: Direction,
    cfg: SolverConfig,
    seed: Tuple[float, float],
) -> NumerovSolution:
    """
    Integrate psi'' = (v - E) psi across the whole grid.

    Args:
        p: Potential
        energy: E = k^2 (negative for bound-state energies)
        direction: left_to_right or right_to_left
        cfg: Solver configuration
        seed: psi at the first two nodes in marching order

    Returns:
        NumerovSolution sampled on the full grid, in increasing x order
    """
    energy = validate_finite(energy, "energy")
    direction = Direction(direction)
    if len(seed) != 2:
        raise DomainError("seed must supply exactly two starting values")
    seed0, seed1 = (validate_finite(s, "seed") for s in seed)

    grid = build_grid(p, cfg)
    last = grid.size - 1
    if direction is Direction.LEFT_TO_RIGHT:
        march = _march_scalar(grid, energy, 0, last, seed0, seed1, store=True)
        psi = np.asarray(march.values)
    else:
        march = _march_scalar(grid, energy, last, 0, seed0, seed1, store=True)
        psi = np.asarray(march.values)[::-1]
    _log_events(march.events, f"numerov_integrate(E={energy:g})", p.label)
    return NumerovSolution(
        xs=grid.xs,
        psi=psi,
        energy=energy,
        direction=direction,
        renormalizations=tuple(march.events),
    )


# =============================================================================
# DISCRETE ASYMPTOTICS
# =============================================================================

def discrete_wavenumber(k: float, h: float) -> float:
    """
    k~ with cos(k~ h) = (6 - 5f)/f, f = 1 + h^2 k^2 / 12.

    Written as sin(k~ h / 2) = (hk/2) / sqrt(f) to avoid cancellation at small k.
    """
    f = 1.0 + h * h * k * k / 12.0
    return 2.0 * math.asin(0.5 * h * k / math.sqrt(f)) / h


def discrete_decay_rate(kappa: float, h: float) -> float:
    """kappa~ with cosh(kappa~ h) = (6 - 5f)/f, f = 1 - h^2 kappa^2 / 12"""
    f = 1.0 - h * h * kappa * kappa / 12.0
    return 2.0 * math.asinh(0.5 * h * kappa / math.sqrt(f)) / h


def _window_steps(k_tilde: float, h: float) -> int:
    """Matching window of about a quarter wavelength, capped at unit width"""
    theta = k_tilde * h
    cap = max(1, int(round(MATCH_WINDOW_WIDTH / h)))
    return int(min(max(1, round(0.5 * math.pi / theta)), cap))


def _require_decay(p: Potential, cfg: SolverConfig) -> None:
    probes = np.linspace(10.0, cfg.x_max, DECAY_PROBES)
    report = check_decay_condition(p, probes)
    if not report.passes:
        raise PreconditionError(
            f"{p.label} fails the decay check (max x^2|v| = {report.max_tail:.3g})",
            context={"tails": report.tails},
        )


def _require_quiet(grid: Grid, lo: int, hi: int, cfg: SolverConfig, where: str) -> None:
    peak = float(np.max(np.abs(grid.v[lo:hi + 1])))
    if peak > cfg.match_tol:
        raise PreconditionError(
            f"Potential reaches {peak:.3g} in the {where} matching window "
            f"(tolerance {cfg.match_tol:g}); increase x_max",
            context={"window": [float(grid.xs[lo]), float(grid.xs[hi])]},
        )


def _require_resolved(ks: np.ndarray, h: float) -> None:
    if ks[-1] * h > MAX_KH:
        raise ResolutionError(
            f"k={ks[-1]:g} is too large for step h={h:g} (need k*h <= {MAX_KH})",
        )


# =============================================================================
# SCATTERING
# =============================================================================

def _sweep_chunks(func, p: Potential, ks: np.ndarray, cfg: SolverConfig, workers: int) -> list:
    if workers <= 1 or ks.size < 2 * workers:
        return func(p, ks, cfg)
    chunks = [c for c in np.array_split(ks, workers) if c.size]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda chunk: func(p, chunk, cfg), chunks))
    return [item for part in parts for item in part]


def _scattering_batch(p: Potential, ks: np.ndarray, cfg: SolverConfig) -> List[ScatteringResult]:
    grid = build_grid(p, cfg)
    h, last = grid.h, grid.size - 1
    count = ks.size

    k_tilde = np.array([discrete_wavenumber(k, h) for k in ks])
    windows = np.array([_window_steps(kt, h) for kt in k_tilde])
    _require_quiet(grid, 0, int(windows.max()), cfg, "left")
    _require_quiet(grid, last - 1, last, cfg, "right")

    x0, x1 = grid.xs[last], grid.xs[last - 1]
    seed0 = np.concatenate([np.cos(k_tilde * x0), np.sin(k_tilde * x0)])
    seed1 = np.concatenate([np.cos(k_tilde * x1), np.sin(k_tilde * x1)])
    energies = np.concatenate([ks * ks, ks * ks])

    march = _march_batch(grid, energies, last, 0, seed0, seed1, record=set(windows.tolist()) | {0})
    _log_events(march.events, "scattering sweep", p.label)

    results = []
    for i in range(count):
        m = int(windows[i])
        psi_a = complex(march.recorded[0][i], march.recorded[0][count + i])
        psi_b = complex(march.recorded[m][i], march.recorded[m][count + i])
        e_a = complex(math.cos(k_tilde[i] * grid.xs[0]), math.sin(k_tilde[i] * grid.xs[0]))
        e_b = complex(math.cos(k_tilde[i] * grid.xs[m]), math.sin(k_tilde[i] * grid.xs[m]))
        det = e_a / e_b - e_b / e_a
        incident = (psi_a / e_b - psi_b / e_a) / det
        reflected = (e_a * psi_b - e_b * psi_a) / det
        coeffs = ScatteringCoefficients(k=float(ks[i]), I=incident, R=reflected, T=1.0 + 0j)
        results.append(ScatteringResult.of(coeffs, renormalizations=len(march.events)))
    return results


@cached('sweeps', key_func=lambda p, ks, cfg, workers=1: (p, ks, cfg))
def _scattering_sweep(p: Potential, ks: Tuple[float, ...], cfg: SolverConfig, workers: int = 1) -> Tuple[ScatteringResult, ...]:
    return tuple(_sweep_chunks(_scattering_batch, p, np.asarray(ks), cfg, workers))


def scattering_sweep(p: Potential, ks: Sequence[float], cfg: SolverConfig, workers: int = 1) -> List[ScatteringResult]:
    """solve_scattering for many momenta, marched together"""
    grid_ks = validate_k_grid(ks)
    _require_resolved(grid_ks, cfg.h)
    _require_decay(p, cfg)
    return list(_scattering_sweep(p, tuple(float(k) for k in grid_ks), cfg, workers))


def solve_scattering(p: Potential, k: float, cfg: SolverConfig) -> ScatteringResult:
    """
    Incident, reflected and transmitted amplitudes at momentum k.

    Integrates from psi = e^{ikx} at +x_max (T = 1) to -x_max and splits the
    result into I e^{ikx} + R e^{-ikx}; delta = arg(T/I)/2 mod pi.
    """
    k = validate_positive(k, "k")
    return scattering_sweep(p, [k], cfg)[0]


def _parity_batch(p: Potential, ks: np.ndarray, cfg: SolverConfig) -> List[ParityPhases]:
    grid = build_grid(p, cfg)
    h, c, last = grid.h, grid.center, grid.size - 1
    count = ks.size

    k_tilde = np.array([discrete_wavenumber(k, h) for k in ks])
    windows = np.array([_window_steps(kt, h) for kt in k_tilde])
    _require_quiet(grid, last - int(windows.max()), last, cfg, "outer")

    energies = np.concatenate([ks * ks, ks * ks])
    f0 = 1.0 - h * h / 12.0 * (grid.v[c] - energies[:count])
    f1 = 1.0 - h * h / 12.0 * (grid.v[c + 1] - energies[:count])
    seed0 = np.concatenate([np.ones(count), np.zeros(count)])
    seed1 = np.concatenate([(12.0 - 10.0 * f0) / (2.0 * f1), np.full(count, h)])

    record = {last - int(m) for m in windows} | {last}
    march = _march_batch(grid, energies, c, last, seed0, seed1, record=record)
    _log_events(march.events, "parity sweep", p.label)

    results = []
    for i in range(count):
        a = last - int(windows[i])
        sin_a, cos_a = math.sin(k_tilde[i] * grid.xs[a]), math.cos(k_tilde[i] * grid.xs[a])
        sin_b, cos_b = math.sin(k_tilde[i] * grid.xs[last]), math.cos(k_tilde[i] * grid.xs[last])
        det = sin_a * cos_b - cos_a * sin_b
        phases = []
        for column in (i, count + i):
            psi_a, psi_b = march.recorded[a][column], march.recorded[last][column]
            alpha = (psi_a * cos_b - psi_b * cos_a) / det
            beta = (sin_a * psi_b - sin_b * psi_a) / det
            phases.append(math.atan2(beta, alpha))
        results.append(
            ParityPhases(
                k=float(ks[i]),
                delta_even=(phases[0] - 0.5 * math.pi) % math.pi,
                delta_odd=phases[1] % math.pi,
            )
        )
    return results


def _require_symmetric(p: Potential) -> None:
    if not p.symmetric:
        raise PreconditionError(f"{p.label} is not even; parity-resolved solvers need a symmetric potential")


def parity_sweep(p: Potential, ks: Sequence[float], cfg: SolverConfig, workers: int = 1) -> List[ParityPhases]:
    """solve_parity_phases for many momenta"""
    _require_symmetric(p)
    grid_ks = validate_k_grid(ks)
    _require_resolved(grid_ks, cfg.h)
    _require_decay(p, cfg)
    return _sweep_chunks(_parity_batch, p, grid_ks, cfg, workers)


def solve_parity_phases(p: Potential, k: float, cfg: SolverConfig) -> ParityPhases:
    """
    Even and odd phase shifts at momentum k.

    Even: psi(0)=1, psi'(0)=0; odd: psi(0)=0, psi'(0)=1. Each is matched to
    sin(kx + phi) near x_max; delta_e = phi_even - pi/2 and delta_o = phi_odd,
    both mod pi.
    """
    k = validate_positive(k, "k")
    return parity_sweep(p, [k], cfg)[0]


# =============================================================================
# PHASE CURVES
# =============================================================================

def _extrapolate_zero(ks: np.ndarray, deltas: np.ndarray) -> float:
    """Quadratic through the three smallest momenta, evaluated at k = 0"""
    return float(lagrange(ks[:3], deltas[:3])(0.0))


def unwrap_by_pi(ks: np.ndarray, raw: np.ndarray, anchor: float) -> np.ndarray:
    """
    Lift mod-pi phases into a continuous curve.

    The largest-k sample takes the branch nearest `anchor`; every smaller k
    takes the branch nearest its neighbour.
    """
    out = np.empty_like(raw)
    out[-1] = raw[-1] + math.pi * round((anchor - raw[-1]) / math.pi)
    for i in range(raw.size - 2, -1, -1):
        out[i] = raw[i] + math.pi * round((out[i + 1] - raw[i]) / math.pi)
        jump = abs(out[i] - out[i + 1])
        if jump > UNWRAP_JUMP_LIMIT:
            raise ResolutionError(
                f"Phase changes by {jump:.3f} rad between k={ks[i]:g} and k={ks[i + 1]:g}; "
                f"use a denser k grid",
                context={"k_left": float(ks[i]), "k_right": float(ks[i + 1])},
            )
    return out


def _warn_recommendations(ks: np.ndarray) -> None:
    if ks[0] < RECOMMENDED_K_MIN:
        logger.warning(f"k_min={ks[0]:g} is below the recommended {RECOMMENDED_K_MIN}")
    if ks[-1] < RECOMMENDED_K_MAX:
        logger.warning(f"k_max={ks[-1]:g} is below the recommended {RECOMMENDED_K_MAX}; the anchor relies on the first-order estimate")
    if ks.size < RECOMMENDED_SAMPLES:
        logger.warning(f"{ks.size} k samples; at least {RECOMMENDED_SAMPLES} are recommended")


@cached('phase_curves', key_func=lambda p, ks, cfg, sector="total", workers=1: (p, tuple(ks), cfg, sector))
def _phase_curve(p: Potential, ks: Tuple[float, ...], cfg: SolverConfig, sector: str = "total", workers: int = 1) -> PhaseShiftCurve:
    grid_ks = np.asarray(ks)
    sector = PhaseSector(sector)
    if sector is PhaseSector.TOTAL:
        raw = np.array([r.delta for r in scattering_sweep(p, grid_ks, cfg, workers)])
    else:
        phases = parity_sweep(p, grid_ks, cfg, workers)
        raw = np.array([ph.delta_even if sector is PhaseSector.EVEN else ph.delta_odd for ph in phases])

    anchor = born_phase_estimate(p, float(grid_ks[-1]))
    deltas = unwrap_by_pi(grid_ks, raw, anchor)
    if abs(deltas[-1]) >= ANCHOR_WARN:
        logger.warning(f"|delta(k_max)| = {abs(deltas[-1]):.3f} for {p.label}; k_max may be too small")

    return PhaseShiftCurve(
        k_samples=tuple(float(k) for k in grid_ks),
        delta_samples=tuple(float(d) for d in deltas),
        delta_zero_extrapolated=_extrapolate_zero(grid_ks, deltas),
        sector=sector,
        potential=p.label,
    )


def phase_curve(
    p: Potential,
    k_grid: Sequence[float],
    cfg: SolverConfig,
    parity: str = "total",
    workers: int = 1,
) -> PhaseShiftCurve:
    """
    Continuous phase shift over a momentum grid plus its k -> 0 limit.

    Args:
        p: Potential
        k_grid: Increasing momenta (geometric spacing recommended)
        cfg: Solver configuration
        parity: total, even or odd
        workers: Worker threads for the sweep

    Returns:
        PhaseShiftCurve with unwrapped samples and the extrapolated delta(0)
    """
    grid_ks = validate_k_grid(k_grid, min_samples=3)
    try:
        sector = PhaseSector(parity)
    except ValueError:
        raise DomainError(f"parity must be total, even or odd; got {parity!r}")
    _warn_recommendations(grid_ks)
    return _phase_curve(p, tuple(float(k) for k in grid_ks), cfg, sector.value, workers)


# =============================================================================
# BOUND STATES
# =============================================================================

def _matching_index(grid: Grid, energy: float) -> int:
    """Outermost classically allowed node on x >= 0, kept off the edges"""
    half = grid.v[grid.center:]
    allowed = np.flatnonzero(half < energy)
    m = grid.center + (int(allowed[-1]) if allowed.size else 0)
    return min(max(m, grid.center + 2), grid.size - 3)


def _parity_seeds(grid: Grid, energy: float, parity: Parity) -> Tuple[float, float]:
    if parity is Parity.ODD:
        return 0.0, grid.h
    h2 = grid.h * grid.h / 12.0
    f0 = 1.0 - h2 * (grid.v[grid.center] - energy)
    f1 = 1.0 - h2 * (grid.v[grid.center + 1] - energy)
    return 1.0, (12.0 - 10.0 * f0) / (2.0 * f1)


def _decaying_seeds(grid: Grid, energy: float) -> Tuple[float, float]:
    kappa_t = discrete_decay_rate(math.sqrt(-energy), grid.h)
    return 1.0, math.exp(kappa_t * grid.h)


def _mismatch(grid: Grid, energy: float, parity: Parity) -> float:
    """Wronskian of the outward parity solution and the inward decaying one"""
    last = grid.size - 1
    m = _matching_index(grid, energy)
    out = _march_scalar(grid, energy, grid.center, m + 1, *_parity_seeds(grid, energy, parity), record=(m, m + 1))
    inward = _march_scalar(grid, energy, last, m, *_decaying_seeds(grid, energy), record=(m, m + 1))
    return out.recorded[m] * inward.recorded[m + 1] - out.recorded[m + 1] * inward.recorded[m]


def _mesh_scan(grid: Grid, mesh: np.ndarray, label: str = ""):
    """Mismatch signs and half-line node counts for both parities over the mesh"""
    count = mesh.size
    last = grid.size - 1
    h2 = grid.h * grid.h / 12.0
    matches = np.array([_matching_index(grid, e) for e in mesh])

    energies = np.concatenate([mesh, mesh])
    f0 = 1.0 - h2 * (grid.v[grid.center] - mesh)
    f1 = 1.0 - h2 * (grid.v[grid.center + 1] - mesh)
    seed0 = np.concatenate([np.ones(count), np.zeros(count)])
    seed1 = np.concatenate([(12.0 - 10.0 * f0) / (2.0 * f1), np.full(count, grid.h)])
    wanted = set(matches.tolist()) | set((matches + 1).tolist())
    outward = _march_batch(grid, energies, grid.center, last, seed0, seed1, record=wanted)

    kappa_t = np.array([discrete_decay_rate(math.sqrt(-e), grid.h) for e in mesh])
    inward = _march_batch(
        grid, mesh, last, int(matches.min()),
        np.ones(count), np.exp(kappa_t * grid.h), record=wanted,
    )
    _log_events(outward.events + inward.events, "bound-state mesh scan", label)

    mismatch = np.empty((2, count))
    for i, m in enumerate(matches):
        for sector in (0, 1):
            col = sector * count + i
            mismatch[sector, i] = (
                outward.recorded[m][col] * inward.recorded[m + 1][i]
                - outward.recorded[m + 1][col] * inward.recorded[m][i]
            )
    nodes = outward.nodes.reshape(2, count)
    return mismatch, nodes


def _bracket(mesh: np.ndarray, mismatch: np.ndarray, nodes: np.ndarray, parity: Parity) -> List[Tuple[float, float]]:
    signs = np.sign(mismatch)
    changes = signs[:-1] * signs[1:] < 0
    jumps_n = np.diff(nodes)
    for i, dn in enumerate(jumps_n):
        nearby = changes[max(0, i - 1):i + 2].any()
        if dn >= 2 or (dn >= 1 and not nearby):
            raise ResolutionError(
                f"{parity.value} sector: node count jumps by {dn} between E={mesh[i]:g} and E={mesh[i + 1]:g}; "
                f"raise energy_mesh",
                context={"e_low": float(mesh[i]), "e_high": float(mesh[i + 1])},
            )
    cells = [(float(mesh[i]), float(mesh[i + 1])) for i in np.flatnonzero(changes)]
    exact = [(float(mesh[i]), float(mesh[i])) for i in np.flatnonzero(signs == 0)]
    return sorted(cells + exact)


def _assemble(p: Potential, grid: Grid, energy: float, parity: Parity) -> BoundState:
    last = grid.size - 1
    m = _matching_index(grid, energy)
    out = _march_scalar(grid, energy, grid.center, m + 1, *_parity_seeds(grid, energy, parity), store=True)
    inward = _march_scalar(grid, energy, last, m, *_decaying_seeds(grid, energy), store=True)
    inner = np.asarray(out.values)               # nodes center .. m+1
    outer = np.asarray(inward.values)[::-1]      # nodes m .. last
    j = 0 if abs(outer[0]) >= abs(outer[1]) else 1
    outer = outer * (inner[-2 + j] / outer[j])
    half = np.concatenate([inner[:-1], outer[1:]])

    full = np.concatenate([parity.sign * half[:0:-1], half])
    xs = reporting_grid()
    psi = np.interp(xs, grid.xs, full, left=0.0, right=0.0)
    psi = psi / math.sqrt(trapezoid(psi * psi, xs))
    half_index = np.flatnonzero(xs >= 0.0)
    peak = half_index[int(np.argmax(np.abs(psi[half_index])))]
    if psi[peak] < 0.0:
        psi = -psi
    nodes = count_nodes(psi)
    return BoundState(
        n=nodes,
        energy=float(energy),
        parity=parity,
        node_count=nodes,
        xs=xs,
        psi=psi.astype(complex),
        ell=p.ell,
    )


@cached('bound_states', key_func=lambda p, cfg: (p, cfg))
def _find_bound_states(p: Potential, cfg: SolverConfig) -> Tuple[BoundState, ...]:
    grid = build_grid(p, cfg)
    v_min = float(grid.v.min())
    if v_min >= 0.0:
        return ()

    mesh = np.linspace(v_min, 0.0, cfg.energy_mesh + 2)[1:-1]
    mismatch, nodes = _mesh_scan(grid, mesh, p.label)

    states = []
    for sector, parity in enumerate((Parity.EVEN, Parity.ODD)):
        for low, high in _bracket(mesh, mismatch[sector], nodes[sector], parity):
            if low == high:
                energy = low
            else:
                energy = bisect(lambda e: _mismatch(grid, e, parity), low, high, xtol=cfg.energy_tol)
            logger.debug(f"{p.label}: {parity.value} bound state at E={energy:.12g}")
            states.append(_assemble(p, grid, energy, parity))
    return tuple(sorted(states, key=lambda s: s.energy))


def find_bound_states(p: Potential, cfg: SolverConfig) -> List[BoundState]:
    """
    Bound states by shooting, sorted by energy.

    Scans E in (min v, 0) on cfg.energy_mesh points per parity, brackets the
    zeros of the outward/inward Wronskian and refines them by bisection.
    """
    _require_symmetric(p)
    return list(_find_bound_states(p, cfg))


# =============================================================================
# ZERO ENERGY
# =============================================================================

@cached('zero_energy', key_func=lambda p, cfg: (p, cfg))
def _classify_zero_energy(p: Potential, cfg: SolverConfig) -> Criticality:
    grid = build_grid(p, cfg)
    c, last = grid.center, grid.size - 1
    tail = max(2, int(round(TAIL_FRACTION * (last - c))))
    first = last - tail

    seed0 = np.array([1.0, 0.0])
    h2 = grid.h * grid.h / 12.0
    f0 = 1.0 - h2 * grid.v[c]
    f1 = 1.0 - h2 * grid.v[c + 1]
    seed1 = np.array([(12.0 - 10.0 * f0) / (2.0 * f1), grid.h])
    march = _march_batch(grid, np.zeros(2), c, last, seed0, seed1, record={first, last})
    _log_events(march.events, "zero-energy classification", p.label)

    ratios = []
    x_first, x_last = float(grid.xs[first]), float(grid.xs[last])
    for column, name in ((0, "even"), (1, "odd")):
        psi_first, psi_last = march.recorded[first][column], march.recorded[last][column]
        beta = (psi_last - psi_first) / (x_last - x_first)
        alpha = psi_last - beta * x_last
        if abs(alpha) < 1e-300 and abs(beta) < 1e-300:
            raise DegenerateInputError(f"{name} zero-energy solution vanished identically for {p.label}")
        ratios.append(math.inf if alpha == 0.0 else abs(beta) * cfg.x_max / abs(alpha))

    return Criticality(
        even_critical=bool(ratios[0] < cfg.zero_energy_slope_tol),
        odd_critical=bool(ratios[1] < cfg.zero_energy_slope_tol),
        even_ratio=ratios[0],
        odd_ratio=ratios[1],
    )


def classify_zero_energy(p: Potential, cfg: SolverConfig) -> Criticality:
    """
    Which parity sectors carry a half-bound state.

    The E = 0 solution tends to alpha + beta x; a sector is critical when
    |beta| x_max / |alpha| < cfg.zero_energy_slope_tol.
    """
    _require_symmetric(p)
    _require_decay(p, cfg)
    return _classify_zero_energy(p, cfg)


def numeric_census(p: Potential, cfg: SolverConfig) -> BoundStateCensus:
    states = find_bound_states(p, cfg)
    criticality = classify_zero_energy(p, cfg)
    n_even = sum(1 for s in states if s.parity is Parity.EVEN)
    return BoundStateCensus(
        n_total=len(states),
        n_even=n_even,
        n_odd=len(states) - n_even,
        critical_even=bool(criticality.even_critical),
        critical_odd=bool(criticality.odd_critical),
    )
