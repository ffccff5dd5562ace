"""Workbench tools: phase shifts, scattering, spectra and Levinson audits"""
import logging
import time
from typing import Optional

import numpy as np

from app.config import get_config
from app.mcp.server import register_tool
from app.mcp.tools.utils import ResponseSizeManager, format_error_response, format_success_response
from app.services import analytic, levinson, numeric
from app.services.potentials import Potential, load_tabulated, make_reflectionless
from app.utils.errors import UsageError
from app.utils.logging import log_command_execution, new_correlation_id
from app.utils.validators import parse_ell_range, validate_choice

logger = logging.getLogger(__name__)

MAX_SAMPLES = 200


def _log_call(tool: str, start: float, error: Optional[Exception] = None) -> None:
    log_command_execution(
        logger, tool, (time.perf_counter() - start) * 1000, error is None, str(error) if error else None
    )


def _select(ell: Optional[int], potential_file: str) -> Potential:
    if potential_file:
        return load_tabulated(potential_file)
    if ell is None:
        raise UsageError("Pass either ell or potential_file")
    return make_reflectionless(ell, domain_halfwidth=get_config().x_max)


@register_tool
def compute_phase_shifts(
    ell: Optional[int] = None,
    potential_file: str = "",
    method: str = "both",
    k_min: float = 0.05,
    k_max: float = 10.0,
    k_steps: int = 50,
    parity: str = "total",
) -> str:
    """Phase shift delta(k) over a geometric momentum sweep, with delta(0).

    Args:
        ell: Reflectionless family index (omit when potential_file is given)
        potential_file: Path to a tabulated potential (CSV header x,v)
        method: analytic, numeric or both
        k_min: Smallest momentum
        k_max: Largest momentum
        k_steps: Number of sweep points
        parity: total, even or odd (numeric only)

    Returns:
        JSON with one curve per method and the extrapolated delta(0)
    """
    start = time.perf_counter()
    new_correlation_id()
    try:
        validate_choice(method, ("analytic", "numeric", "both"), "method")
        if method != "numeric" and potential_file:
            raise UsageError("Closed forms exist only for the reflectionless family; use method='numeric'")
        ks = np.geomspace(k_min, k_max, k_steps)
        curves = {}
        if method in ("analytic", "both"):
            p = _select(ell, "")
            curves["analytic"] = {
                "delta_samples": [analytic.phase_shift(p.ell, float(k)) for k in ks],
                "delta_zero": analytic.phase_shift_zero(p.ell),
            }
        if method in ("numeric", "both"):
            p = _select(ell, potential_file)
            curve = numeric.phase_curve(p, ks, get_config().solver(), parity=parity)
            curves["numeric"] = {"delta_samples": list(curve.delta_samples), "delta_zero": curve.delta_zero_extrapolated}

        k_list, thinned = ResponseSizeManager.thin_samples(list(ks), MAX_SAMPLES)
        for entry in curves.values():
            entry["delta_samples"], _ = ResponseSizeManager.thin_samples(entry["delta_samples"], MAX_SAMPLES)

        _log_call("compute_phase_shifts", start)
        return format_success_response({"k": k_list, "curves": curves, "thinned": thinned})
    except Exception as e:
        _log_call("compute_phase_shifts", start, e)
        return format_error_response(e, "compute_phase_shifts", ell=ell, method=method)


@register_tool
def scatter_at_momentum(ell: Optional[int] = None, potential_file: str = "", k: float = 1.0) -> str:
    """Incident, reflected and transmitted amplitudes at one momentum.

    Args:
        ell: Reflectionless family index (omit when potential_file is given)
        potential_file: Path to a tabulated potential
        k: Momentum, > 0

    Returns:
        JSON with the numeric ScatteringResult and, for ell, the closed form
    """
    start = time.perf_counter()
    new_correlation_id()
    try:
        p = _select(ell, potential_file)
        payload = {"numeric": numeric.solve_scattering(p, k, get_config().solver())}
        if not potential_file:
            payload["analytic"] = analytic.coefficients(p.ell, k)
        _log_call("scatter_at_momentum", start)
        return format_success_response(payload)
    except Exception as e:
        _log_call("scatter_at_momentum", start, e)
        return format_error_response(e, "scatter_at_momentum", ell=ell, k=k)


@register_tool
def list_bound_states(ell: Optional[int] = None, potential_file: str = "", method: str = "numeric") -> str:
    """Bound-state energies, parities and node counts.

    Args:
        ell: Reflectionless family index (omit when potential_file is given)
        potential_file: Path to a tabulated potential
        method: analytic or numeric

    Returns:
        JSON list of states (wavefunctions omitted)
    """
    start = time.perf_counter()
    new_correlation_id()
    try:
        validate_choice(method, ("analytic", "numeric"), "method")
        if method == "analytic":
            if potential_file:
                raise UsageError("analytic spectra need ell")
            states = analytic.bound_spectrum(_select(ell, "").ell)
        else:
            states = numeric.find_bound_states(_select(ell, potential_file), get_config().solver())
        rows = [
            {"n": n, "energy": s.energy, "parity": s.parity, "node_count": s.node_count}
            for n, s in enumerate(states)
        ]
        _log_call("list_bound_states", start)
        return format_success_response({"method": method, "states": rows})
    except Exception as e:
        _log_call("list_bound_states", start, e)
        return format_error_response(e, "list_bound_states", ell=ell, method=method)


@register_tool
def run_levinson_audit(
    ell_range: str = "0..2",
    theorem: str = "both",
    source: str = "analytic",
    comparison: str = "stated",
) -> str:
    """Audit the restricted Levinson predictors for the reflectionless family.

    Args:
        ell_range: Inclusive range like '0..2'
        theorem: direct, parity or both
        source: analytic, numeric or both
        comparison: stated or either_sector

    Returns:
        JSON list of audits with predictions, actual delta(0) and verdicts
    """
    start = time.perf_counter()
    new_correlation_id()
    try:
        validate_choice(theorem, ("direct", "parity", "both"), "theorem")
        theorems = ("direct", "parity") if theorem == "both" else (theorem,)
        rows = levinson.audit_table(
            parse_ell_range(ell_range),
            theorems=theorems,
            source=source,
            cfg=get_config().solver(),
            comparison=comparison,
        )
        _log_call("run_levinson_audit", start)
        return format_success_response({"audits": rows})
    except Exception as e:
        _log_call("run_levinson_audit", start, e)
        return format_error_response(e, "run_levinson_audit", ell_range=ell_range, theorem=theorem)
