"""
Potentials: the reflectionless -l(l+1)sech^2(x) family, tabulated user
potentials and the free particle, plus the dimensionless reduction and the
decay check that gates the Levinson machinery.
"""
import csv
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from app.utils.errors import DomainError, OutputError
from app.utils.validators import validate_ell, validate_finite, validate_positive

logger = logging.getLogger(__name__)

DEFAULT_HALFWIDTH = 20.0
SYMMETRY_RTOL = 1e-9
DECAY_PROBE_MIN = 10.0
DECAY_TAIL_MAX = 1e-6
JUMP_NEGLIGIBLE = 1e-12

ArrayLike = Union[float, Sequence[float], np.ndarray]


class PotentialKind(str, Enum):
    REFLECTIONLESS = "reflectionless"
    TABULATED = "tabulated"
    ZERO = "zero"


@dataclass(frozen=True)
class Jump:
    """Step discontinuity of a potential at `position`"""
    position: float
    left: float
    right: float

    @property
    def size(self) -> float:
        return self.right - self.left


@dataclass(frozen=True)
class DecayReport:
    passes: bool
    max_tail: float
    tails: Tuple[float, ...] = ()


@dataclass(frozen=True)
class Potential:
    """
    Immutable 1D potential.

    Tabulated potentials keep their samples as tuples so the whole value is
    hashable and can key the result cache. The interpolant is rebuilt
    privately and takes no part in equality.
    """
    kind: PotentialKind
    ell: Optional[int] = None
    xs: Tuple[float, ...] = ()
    vs: Tuple[float, ...] = ()
    domain_halfwidth: float = DEFAULT_HALFWIDTH
    symmetric: bool = True
    source: str = ""
    _spline: Optional[CubicHermiteSpline] = field(default=None, compare=False, hash=False, repr=False)

    def __post_init__(self):
        if self.kind is PotentialKind.TABULATED and self._spline is None:
            object.__setattr__(self, "_spline", _catmull_rom(np.asarray(self.xs), np.asarray(self.vs)))

    @property
    def label(self) -> str:
        if self.kind is PotentialKind.REFLECTIONLESS:
            return f"reflectionless(ell={self.ell})"
        if self.kind is PotentialKind.TABULATED:
            return f"tabulated({self.source or len(self.xs)})"
        return "zero"

    @property
    def samples(self) -> List[Tuple[float, float]]:
        return list(zip(self.xs, self.vs))

    def values(self, x: ArrayLike) -> np.ndarray:
        """Vectorized evaluation; no finiteness check"""
        xs = np.asarray(x, dtype=float)
        if self.kind is PotentialKind.ZERO or (self.kind is PotentialKind.REFLECTIONLESS and self.ell == 0):
            return np.zeros_like(xs)
        if self.kind is PotentialKind.REFLECTIONLESS:
            with np.errstate(over="ignore"):
                out = -self.ell * (self.ell + 1) / np.cosh(xs) ** 2
            return np.where(np.abs(xs) > self.domain_halfwidth, 0.0, out)
        inside = (xs >= self.xs[0]) & (xs <= self.xs[-1])
        return np.where(inside, self._spline(np.clip(xs, self.xs[0], self.xs[-1])), 0.0)


def _catmull_rom(xs: np.ndarray, vs: np.ndarray) -> CubicHermiteSpline:
    """Piecewise-cubic Hermite interpolant with centred-difference slopes"""
    slopes = np.empty_like(vs)
    slopes[1:-1] = (vs[2:] - vs[:-2]) / (xs[2:] - xs[:-2])
    slopes[0] = (vs[1] - vs[0]) / (xs[1] - xs[0])
    slopes[-1] = (vs[-1] - vs[-2]) / (xs[-1] - xs[-2])
    return CubicHermiteSpline(xs, vs, slopes, extrapolate=False)


# =============================================================================
# CONSTRUCTORS
# =============================================================================

def make_reflectionless(ell, domain_halfwidth: float = DEFAULT_HALFWIDTH) -> Potential:
    """Reflectionless potential v(x) = -l(l+1) sech^2(x)"""
    ell = validate_ell(ell)
    return Potential(
        kind=PotentialKind.REFLECTIONLESS,
        ell=ell,
        domain_halfwidth=validate_positive(domain_halfwidth, "domain_halfwidth"),
        symmetric=True,
    )


def make_zero(domain_halfwidth: float = DEFAULT_HALFWIDTH) -> Potential:
    return Potential(kind=PotentialKind.ZERO, domain_halfwidth=domain_halfwidth, symmetric=True)


def make_tabulated(
    xs: Iterable[float],
    vs: Iterable[float],
    symmetric: Optional[bool] = None,
    source: str = "",
) -> Potential:
    """
    Build a tabulated potential.

    Args:
        xs: Strictly increasing abscissae (at least 4)
        vs: Potential values
        symmetric: Claimed evenness; None runs the symmetry audit and adopts
            its outcome, True requires the audit to pass
        source: Free label (usually the file it came from)
    """
    x_arr = np.asarray(list(xs), dtype=float)
    v_arr = np.asarray(list(vs), dtype=float)
    if x_arr.ndim != 1 or x_arr.shape != v_arr.shape:
        raise DomainError("Tabulated potential needs matching 1D x and v arrays")
    if x_arr.size < 4:
        raise DomainError(f"Tabulated potential needs at least 4 samples, got {x_arr.size}")
    if not (np.all(np.isfinite(x_arr)) and np.all(np.isfinite(v_arr))):
        raise DomainError("Tabulated potential contains non-finite samples")
    if np.any(np.diff(x_arr) <= 0.0):
        raise DomainError("Tabulated abscissae must be strictly increasing")

    potential = Potential(
        kind=PotentialKind.TABULATED,
        xs=tuple(float(x) for x in x_arr),
        vs=tuple(float(v) for v in v_arr),
        domain_halfwidth=float(max(abs(x_arr[0]), abs(x_arr[-1]))),
        symmetric=False,
        source=source,
    )
    audit = symmetry_audit(potential)
    if symmetric and not audit:
        raise DomainError("Tabulated potential claims evenness but fails the symmetry audit")
    if symmetric is None and not audit:
        logger.info(f"Tabulated potential {potential.label} is not even; parity solvers disabled")
    if audit and symmetric is not False:
        object.__setattr__(potential, "symmetric", True)
    return potential


def symmetry_audit(p: Potential) -> bool:
    """Check |v(x) - v(-x)| <= 1e-9 * max(1, |v(x)|) on the sample abscissae"""
    if p.kind is not PotentialKind.TABULATED:
        return True
    xs = np.asarray(p.xs)
    here = p.values(xs)
    mirrored = p.values(-xs)
    return bool(np.all(np.abs(here - mirrored) <= SYMMETRY_RTOL * np.maximum(1.0, np.abs(here))))


# =============================================================================
# EVALUATION
# =============================================================================

def evaluate(p: Potential, x: float) -> float:
    """Evaluate the potential at one finite coordinate"""
    x = validate_finite(x, "x")
    return float(p.values(x))


def jumps(p: Potential) -> Tuple[Jump, ...]:
    """Step discontinuities: a table whose end values are nonzero drops to 0 outside"""
    if p.kind is not PotentialKind.TABULATED:
        return ()
    found = []
    floor = JUMP_NEGLIGIBLE * max(1.0, max(abs(v) for v in p.vs))
    if abs(p.vs[0]) > floor:
        found.append(Jump(position=p.xs[0], left=0.0, right=p.vs[0]))
    if abs(p.vs[-1]) > floor:
        found.append(Jump(position=p.xs[-1], left=p.vs[-1], right=0.0))
    return tuple(found)


def integral(p: Potential) -> float:
    """Integral of v over the real line"""
    if p.kind is PotentialKind.ZERO:
        return 0.0
    if p.kind is PotentialKind.REFLECTIONLESS:
        return -2.0 * p.ell * (p.ell + 1) * math.tanh(p.domain_halfwidth)
    return float(p._spline.integrate(p.xs[0], p.xs[-1]))


def born_phase_estimate(p: Potential, k: float) -> float:
    """First-order phase shift -(1/4k) * integral of v, the high-k branch anchor"""
    k = validate_positive(k, "k")
    return -integral(p) / (4.0 * k)


def check_decay_condition(p: Potential, probe_xs: Sequence[float]) -> DecayReport:
    """
    Finite-probe version of the decay condition x^2 |v(x)| -> 0.

    Passes iff x^2|v| is non-increasing over the probes and its last value is
    below 1e-6.
    """
    if len(probe_xs) == 0:
        raise DomainError("decay check needs at least one probe")
    probes = np.asarray([validate_finite(x, "probe") for x in probe_xs])
    if np.any(probes < DECAY_PROBE_MIN):
        raise DomainError(f"decay probes must be >= {DECAY_PROBE_MIN:g} to be asymptotic")

    tails = probes ** 2 * np.abs(p.values(probes))
    monotone = bool(np.all(np.diff(tails) <= 0.0))
    passes = monotone and bool(tails[-1] < DECAY_TAIL_MAX)
    if not passes:
        logger.warning(f"Decay check failed for {p.label}: tails={tails.tolist()}")
    return DecayReport(passes=passes, max_tail=float(tails.max()), tails=tuple(float(t) for t in tails))


# =============================================================================
# DIMENSIONLESS REDUCTION
# =============================================================================

@dataclass(frozen=True)
class DimensionlessParams:
    """x = b r, v0 = 2 m V0 b^2 / hbar^2, k^2 = 2 m b^2 E / hbar^2"""
    V0: float
    b: float
    m: float
    hbar: float

    @property
    def scale(self) -> float:
        return 2.0 * self.m * self.b ** 2 / self.hbar ** 2

    @property
    def v0(self) -> float:
        return self.scale * self.V0

    def x_of(self, r: float) -> float:
        return self.b * r

    def k_squared_of(self, energy: float) -> float:
        return self.scale * energy

    def reflectionless_ell(self, rtol: float = 1e-9) -> Optional[int]:
        """The integer l with v0 = l(l+1), if there is one"""
        if self.v0 < 0.0:
            return None
        ell = int(round((-1.0 + math.sqrt(1.0 + 4.0 * self.v0)) / 2.0))
        target = ell * (ell + 1)
        if abs(self.v0 - target) <= rtol * max(1.0, target):
            return ell
        return None


def to_dimensionless(V0: float, b: float, m: float, hbar: float) -> DimensionlessParams:
    return DimensionlessParams(
        V0=validate_finite(V0, "V0"),
        b=validate_positive(b, "b"),
        m=validate_positive(m, "m"),
        hbar=validate_positive(hbar, "hbar"),
    )


def depth_for_ell(ell, b: float, m: float, hbar: float) -> float:
    """Physical depth V0 that makes v0 = l(l+1)"""
    ell = validate_ell(ell)
    b = validate_positive(b, "b")
    m = validate_positive(m, "m")
    hbar = validate_positive(hbar, "hbar")
    return ell * (ell + 1) * hbar ** 2 / (2.0 * m * b ** 2)


# =============================================================================
# FILES
# =============================================================================

def load_tabulated(path: Union[str, Path], symmetric: Optional[bool] = None) -> Potential:
    """Read an `x,v` CSV file"""
    file_path = Path(path)
    try:
        with open(file_path, newline="", encoding="utf-8") as handle:
            rows = list(csv.reader(handle))
    except OSError as exc:
        raise OutputError(f"Cannot read potential file {file_path}: {exc}") from exc

    if not rows or [c.strip() for c in rows[0]] != ["x", "v"]:
        raise OutputError(f"Potential file {file_path} must start with the header 'x,v'")
    xs, vs = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise OutputError(f"{file_path}:{lineno}: expected two columns, got {len(row)}")
        try:
            xs.append(float(row[0]))
            vs.append(float(row[1]))
        except ValueError as exc:
            raise OutputError(f"{file_path}:{lineno}: {exc}") from exc
    return make_tabulated(xs, vs, symmetric=symmetric, source=file_path.name)


def save_tabulated(path: Union[str, Path], p: Potential) -> Path:
    if p.kind is not PotentialKind.TABULATED:
        raise DomainError("Only tabulated potentials can be saved")
    file_path = Path(path)
    try:
        with open(file_path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["x", "v"])
            for x, v in zip(p.xs, p.vs):
                writer.writerow(["%.17g" % x, "%.17g" % v])
    except OSError as exc:
        raise OutputError(f"Cannot write potential file {file_path}: {exc}") from exc
    return file_path
