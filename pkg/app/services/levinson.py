"""
Restricted Levinson predictors and their audit.

Two predictors turn a bound-state census into a zero-momentum phase shift:
the direct restriction of the three-dimensional theorem (total count plus a
half for the critical case) and the parity-resolved theorem (one phase per
sector). The audit compares both against the exact value l*pi/2 and/or the
numeric extrapolation for the reflectionless family.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from app.config import SolverConfig
from app.services import analytic
from app.services.models import BoundStateCensus, Parity
from app.services.numeric import numeric_census, phase_curve
from app.services.potentials import make_reflectionless
from app.utils.errors import ConsistencyError, InvalidCensusError
from app.utils.validators import validate_choice, validate_ell

logger = logging.getLogger(__name__)

VERDICT_TOL = math.pi / 8.0

# Momentum grid for numeric delta(0): inside the recommended range
AUDIT_K_MIN = 0.01
AUDIT_K_MAX = 20.0
AUDIT_K_SAMPLES = 60


class Theorem(str, Enum):
    DIRECT = "direct_3d_restriction"
    PARITY = "parity"

    @classmethod
    def parse(cls, value: str) -> "Theorem":
        """Accept 'direct' as shorthand for the direct restriction"""
        if value == "direct":
            return cls.DIRECT
        return cls(value)


class GroundTruth(str, Enum):
    ANALYTIC = "analytic"
    NUMERIC = "numeric"
    BOTH = "both"


class Verdict(str, Enum):
    AGREES = "agrees"
    CONTRADICTS = "contradicts"


class Comparison(str, Enum):
    STATED = "stated"
    EITHER_SECTOR = "either_sector"


@dataclass(frozen=True)
class LevinsonPrediction:
    theorem: Theorem
    inputs: BoundStateCensus
    predicted_delta_even: Optional[float] = None
    predicted_delta_odd: Optional[float] = None
    predicted_delta_direct: Optional[float] = None
    critical_branch: bool = False

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "LevinsonPrediction":
        return cls(
            theorem=Theorem(data["theorem"]),
            inputs=BoundStateCensus.from_dict(data["inputs"]),
            predicted_delta_even=_optional_float(data.get("predicted_delta_even")),
            predicted_delta_odd=_optional_float(data.get("predicted_delta_odd")),
            predicted_delta_direct=_optional_float(data.get("predicted_delta_direct")),
            critical_branch=bool(data.get("critical_branch", False)),
        )


@dataclass(frozen=True)
class LevinsonAudit:
    ell: int
    prediction: LevinsonPrediction
    actual_delta_zero: float
    actual_source: GroundTruth
    verdict: Verdict
    discrepancy: float
    compared: str
    predicted: float
    notes: Tuple[str, ...] = ()
    analytic_delta_zero: Optional[float] = None
    numeric_delta_zero: Optional[float] = None

    @property
    def theorem(self) -> Theorem:
        return self.prediction.theorem

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "LevinsonAudit":
        """Rebuild an audit from its JSON form"""
        return cls(
            ell=int(data["ell"]),
            prediction=LevinsonPrediction.from_dict(data["prediction"]),
            actual_delta_zero=float(data["actual_delta_zero"]),
            actual_source=GroundTruth(data["actual_source"]),
            verdict=Verdict(data["verdict"]),
            discrepancy=float(data["discrepancy"]),
            compared=str(data["compared"]),
            predicted=float(data["predicted"]),
            notes=tuple(str(n) for n in data.get("notes", ())),
            analytic_delta_zero=_optional_float(data.get("analytic_delta_zero")),
            numeric_delta_zero=_optional_float(data.get("numeric_delta_zero")),
        )


def _optional_float(value: Any) -> Optional[float]:
    return None if value is None else float(value)


# =============================================================================
# PREDICTORS
# =============================================================================

def predict_direct(census: BoundStateCensus) -> LevinsonPrediction:
    """delta(0) = n pi, plus pi/2 when a half-bound state exists"""
    delta = census.n_total * math.pi + (0.5 * math.pi if census.critical else 0.0)
    return LevinsonPrediction(
        theorem=Theorem.DIRECT,
        inputs=census,
        predicted_delta_direct=delta,
        critical_branch=census.critical,
    )


def predict_parity(census: BoundStateCensus) -> LevinsonPrediction:
    """
    Sector phases at zero momentum.

    Non-critical: delta_e = n_e pi + pi/2, delta_o = n_o pi.
    Critical:     delta_e = n_e pi,        delta_o = n_o pi + pi/2.
    """
    if census.critical_even and census.critical_odd:
        raise InvalidCensusError(
            "Both parity sectors are flagged critical",
            context={"n_even": census.n_even, "n_odd": census.n_odd},
        )
    if census.critical:
        even = census.n_even * math.pi
        odd = census.n_odd * math.pi + 0.5 * math.pi
    else:
        even = census.n_even * math.pi + 0.5 * math.pi
        odd = census.n_odd * math.pi
    return LevinsonPrediction(
        theorem=Theorem.PARITY,
        inputs=census,
        predicted_delta_even=even,
        predicted_delta_odd=odd,
        critical_branch=census.critical,
    )


# =============================================================================
# FORMATTING
# =============================================================================

def format_pi_multiple(value: float, tol: float = 1e-9) -> str:
    """Render radians as a multiple of pi/2 when close to one ('3π/2'), else as a number"""
    if value is None or not math.isfinite(value):
        return "nan"
    halves = round(2.0 * value / math.pi)
    if abs(value - halves * 0.5 * math.pi) > tol:
        return f"{value:.6g}"
    ratio = Fraction(halves, 2)
    if ratio == 0:
        return "0"
    sign = "-" if ratio < 0 else ""
    num, den = abs(ratio.numerator), ratio.denominator
    head = "π" if num == 1 else f"{num}π"
    return f"{sign}{head}" if den == 1 else f"{sign}{head}/{den}"


def _mod_pi_distance(a: float, b: float) -> float:
    d = (a - b) % math.pi
    return min(d, math.pi - d)


# =============================================================================
# GROUND TRUTH
# =============================================================================

def audit_k_grid() -> np.ndarray:
    return np.geomspace(AUDIT_K_MIN, AUDIT_K_MAX, AUDIT_K_SAMPLES)


def _ground_truth(ell: int, source: GroundTruth, cfg: SolverConfig):
    """Census and delta(0) from the requested source(s), cross-checked for 'both'"""
    exact_census = exact_delta = None
    numeric_cen = numeric_delta = None

    if source in (GroundTruth.ANALYTIC, GroundTruth.BOTH):
        exact_census = analytic.census(ell)
        exact_delta = analytic.phase_shift_zero(ell)

    if source in (GroundTruth.NUMERIC, GroundTruth.BOTH):
        p = make_reflectionless(ell, domain_halfwidth=cfg.x_max)
        numeric_cen = numeric_census(p, cfg)
        numeric_delta = phase_curve(p, audit_k_grid(), cfg).delta_zero_extrapolated

    if source is GroundTruth.BOTH:
        if exact_census != numeric_cen:
            raise ConsistencyError(
                f"Analytic and numeric censuses differ for ell={ell}",
                context={"analytic": repr(exact_census), "numeric": repr(numeric_cen)},
            )
        if abs(exact_delta - numeric_delta) >= VERDICT_TOL:
            raise ConsistencyError(
                f"Numeric delta(0)={numeric_delta:.6g} is far from the exact {exact_delta:.6g} for ell={ell}",
                context={"analytic": exact_delta, "numeric": numeric_delta},
            )

    census = exact_census if exact_census is not None else numeric_cen
    actual = exact_delta if exact_delta is not None else numeric_delta
    return census, actual, exact_delta, numeric_delta


def _stated_sector(census: BoundStateCensus) -> Parity:
    """Sector the parity theorem singles out: odd in the critical branch, even otherwise"""
    if census.n_total == 0:
        return Parity.ODD if census.critical_odd and not census.critical_even else Parity.EVEN
    return Parity.ODD if census.critical else Parity.EVEN


# =============================================================================
# AUDIT
# =============================================================================

def _judge_direct(prediction: LevinsonPrediction, actual: float) -> Tuple[str, float, float, List[str]]:
    predicted = prediction.predicted_delta_direct
    census = prediction.inputs
    notes = [
        f"n_total={census.n_total}, {'critical' if census.critical else 'non-critical'} branch",
        "absolute comparison",
    ]
    return "direct", predicted, abs(predicted - actual), notes


def _judge_parity(
    prediction: LevinsonPrediction,
    actual: float,
    comparison: Comparison,
) -> Tuple[str, float, float, List[str]]:
    census = prediction.inputs
    by_sector = {
        Parity.EVEN: prediction.predicted_delta_even,
        Parity.ODD: prediction.predicted_delta_odd,
    }
    branch = "critical" if prediction.critical_branch else "non-critical"
    critical = ",".join(s.value for s in census.critical_sectors) or "none"
    notes = [f"n_e={census.n_even}, n_o={census.n_odd}, {branch} branch (critical sector: {critical})"]

    if comparison is Comparison.STATED:
        sector = _stated_sector(census)
    else:
        sector = min(by_sector, key=lambda s: _mod_pi_distance(by_sector[s], actual))
    predicted = by_sector[sector]
    notes.append(f"compared sector: {sector.value} ({comparison.value}, mod pi)")
    return sector.value, predicted, _mod_pi_distance(predicted, actual), notes


def _audit_one(
    ell: int,
    theorem: Theorem,
    census: BoundStateCensus,
    actual: float,
    source: GroundTruth,
    comparison: Comparison,
    exact_delta: Optional[float],
    numeric_delta: Optional[float],
) -> LevinsonAudit:
    if theorem is Theorem.DIRECT:
        prediction = predict_direct(census)
        compared, predicted, discrepancy, notes = _judge_direct(prediction, actual)
        if ell >= 1:
            notes.append("no reference verdict for ell >= 1")
    else:
        prediction = predict_parity(census)
        compared, predicted, discrepancy, notes = _judge_parity(prediction, actual, comparison)
        if ell == 2:
            notes.append(
                "ell=2: the semi-bound state is the even k^2=0 solution P_2(tanh x); "
                "k^2=-1 is the odd bound state"
            )

    verdict = Verdict.AGREES if discrepancy < VERDICT_TOL else Verdict.CONTRADICTS
    notes.append(f"predicted {format_pi_multiple(predicted)} vs actual {format_pi_multiple(actual)}")
    logger.info(
        f"Levinson audit ell={ell} {theorem.value}: {verdict.value} (discrepancy {discrepancy:.3g})",
        extra={"ell": ell, "potential": f"reflectionless(ell={ell})"},
    )
    return LevinsonAudit(
        ell=ell,
        prediction=prediction,
        actual_delta_zero=actual,
        actual_source=source,
        verdict=verdict,
        discrepancy=discrepancy,
        compared=compared,
        predicted=predicted,
        notes=tuple(notes),
        analytic_delta_zero=exact_delta,
        numeric_delta_zero=numeric_delta,
    )


def audit(
    ell,
    source: str = "analytic",
    cfg: Optional[SolverConfig] = None,
    theorems: Sequence[str] = ("direct", "parity"),
    comparison: str = "stated",
) -> List[LevinsonAudit]:
    """
    Audit the Levinson predictors for Reflectionless(ell).

    Args:
        ell: Family index
        source: analytic, numeric or both
        cfg: Solver configuration (defaults used when omitted)
        theorems: Predictors to evaluate, in output order
        comparison: stated or either_sector for the parity predictor

    Returns:
        One LevinsonAudit per theorem

    Raises:
        ConsistencyError: analytic and numeric ground truths disagree
    """
    ell = validate_ell(ell)
    ground = GroundTruth(validate_choice(source, [g.value for g in GroundTruth], "source"))
    mode = Comparison(validate_choice(comparison.replace("-", "_"), [c.value for c in Comparison], "comparison"))
    kinds = [Theorem.parse(validate_choice(t, ["direct", Theorem.DIRECT.value, Theorem.PARITY.value], "theorem")) for t in theorems]
    cfg = cfg or SolverConfig()

    census, actual, exact_delta, numeric_delta = _ground_truth(ell, ground, cfg)
    return [
        _audit_one(ell, theorem, census, actual, ground, mode, exact_delta, numeric_delta)
        for theorem in kinds
    ]


def audit_table(
    ells: Iterable[int],
    theorems: Sequence[str] = ("direct", "parity"),
    source: str = "analytic",
    cfg: Optional[SolverConfig] = None,
    comparison: str = "stated",
    workers: int = 1,
) -> List[LevinsonAudit]:
    """Audits for several ell, ordered by (ell, theorem) whatever the completion order"""
    ells = sorted(set(validate_ell(ell) for ell in ells))

    def run(ell: int) -> List[LevinsonAudit]:
        return audit(ell, source=source, cfg=cfg, theorems=theorems, comparison=comparison)

    if workers > 1 and len(ells) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, ells))
    else:
        parts = [run(ell) for ell in ells]
    return [row for part in parts for row in part]
