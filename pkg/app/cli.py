"""
Command-line surface of the Levinson workbench.

Commands: phase-shift, bound-states, audit, plot-data, scatter. Results go to
standard output (or --out); diagnostics go to stderr. Exit codes: 0 success,
2 usage, 3 solver or consistency failure, 4 I/O.
"""
import argparse
import dataclasses
import logging
import math
import sys
import time
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.config import RunConfig, load_run_config
from app.services import analytic, levinson, numeric
from app.services.numeric import PhaseSector, PhaseShiftCurve, ScatteringResult
from app.services.potentials import Potential, load_tabulated, make_reflectionless
from app.utils.errors import UsageError, WorkbenchError, as_workbench_error
from app.utils.logging import log_command_execution, new_correlation_id, setup_structured_logging
from app.utils.serialization import (
    ensure_directory,
    render_csv,
    render_json,
    to_jsonable,
    write_manifest,
    write_plot_series,
    write_text,
)
from app.utils.validators import parse_ell_range

logger = logging.getLogger(__name__)

METHODS = ("analytic", "numeric", "both")
ENERGY_AGREEMENT_TOL = 1e-8

# Flags whose values feed RunConfig (dest -> field)
_CONFIG_FLAGS = {
    "x_max": "x_max",
    "step": "step",
    "tol": "tol",
    "k_min": "k_min",
    "k_max": "k_max",
    "k_steps": "k_steps",
    "format": "format",
    "out": "out",
    "degrees": "degrees",
    "workers": "workers",
    "log_level": "log_level",
    "log_json": "log_json",
}


# =============================================================================
# PARSER
# =============================================================================

def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    group = common.add_argument_group("run settings")
    group.add_argument("--x-max", type=float, help="Integration half-width (default 20)")
    group.add_argument("--step", type=float, help="Numerov step h (default 1e-3)")
    group.add_argument("--tol", type=float, help="Matching-window tolerance on |v| (default 1e-9)")
    group.add_argument("--k-min", type=float, help="Smallest sweep momentum (default 0.05)")
    group.add_argument("--k-max", type=float, help="Largest sweep momentum (default 10)")
    group.add_argument("--k-steps", type=int, help="Number of geometric sweep points (default 200)")
    group.add_argument("--config", metavar="PATH", help="Flat key=value config file")
    group.add_argument("--out", metavar="PATH", help="Output file ('-' for stdout) or directory for plot-data")
    group.add_argument("--format", choices=("csv", "json"), help="Output format (default csv)")
    group.add_argument("--degrees", action="store_true", default=None, help="Show phases in degrees on stdout")
    group.add_argument("--workers", type=int, help="Worker threads for momentum sweeps")
    group.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")
    group.add_argument("--log-json", action="store_true", default=None, help="JSON log lines on stderr")
    return common


def _add_selector(parser: argparse.ArgumentParser, default_method: Optional[str] = None) -> None:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--ell", type=int, help="Reflectionless potential -l(l+1) sech^2 x")
    source.add_argument("--potential-file", metavar="PATH", help="Tabulated potential, CSV with header x,v")
    parser.add_argument("--method", choices=METHODS, default=default_method,
                        help="Ground truth route (default: analytic for --ell, numeric for a file)")


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="levinson-workbench",
        description="Scattering, bound states and Levinson audits for 1D potentials",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    phase = commands.add_parser("phase-shift", parents=[common], help="Phase shift over a momentum sweep")
    _add_selector(phase)

    bound = commands.add_parser("bound-states", parents=[common], help="Bound-state spectrum")
    _add_selector(bound)

    audit = commands.add_parser("audit", parents=[common], help="Audit the restricted Levinson predictors")
    ells = audit.add_mutually_exclusive_group(required=True)
    ells.add_argument("--ell", type=int, help="Single family index")
    ells.add_argument("--ell-range", metavar="A..B", help="Inclusive range of family indices")
    audit.add_argument("--theorem", choices=("direct", "parity", "both"), default="both")
    audit.add_argument("--source", choices=METHODS, default="analytic")
    audit.add_argument("--comparison", choices=("stated", "either-sector"), default="stated",
                       help="Which parity sector is compared with delta(0)")

    plot = commands.add_parser("plot-data", parents=[common], help="Two-column (k, delta) series files")
    _add_selector(plot)

    scatter = commands.add_parser("scatter", parents=[common], help="Scattering amplitudes at one momentum")
    _add_selector(scatter)
    scatter.add_argument("--k", type=float, required=True, help="Momentum, > 0")

    return parser


# =============================================================================
# HELPERS
# =============================================================================

def resolve_config(args: argparse.Namespace) -> RunConfig:
    overrides = {field: getattr(args, dest, None) for dest, field in _CONFIG_FLAGS.items()}
    return load_run_config(overrides, config_file=getattr(args, "config", None))


def _potential(args: argparse.Namespace, cfg: RunConfig) -> Potential:
    if args.potential_file:
        return load_tabulated(args.potential_file)
    return make_reflectionless(args.ell, domain_halfwidth=cfg.x_max)


def _method(args: argparse.Namespace) -> str:
    method = args.method or ("analytic" if args.ell is not None else "numeric")
    if method != "numeric" and args.ell is None:
        raise UsageError(f"--method {method} needs --ell (closed forms exist only for the reflectionless family)")
    return method


def _k_grid(cfg: RunConfig) -> np.ndarray:
    return np.geomspace(cfg.k_min, cfg.k_max, cfg.k_steps)


def _degrees(value: Optional[float]) -> Optional[float]:
    return None if value is None else math.degrees(value)


def _show_degrees(cfg: RunConfig) -> bool:
    """Degrees are a display option: never applied to files"""
    return cfg.degrees and cfg.to_stdout


def _emit(cfg: RunConfig, columns: Sequence[str], rows: List[Dict[str, Any]], document: Any) -> None:
    if cfg.format == "json":
        write_text(cfg.out, render_json(document))
    else:
        write_text(cfg.out, render_csv(columns, rows))


def _analytic_curve(ell: int, ks: np.ndarray) -> PhaseShiftCurve:
    return PhaseShiftCurve(
        k_samples=tuple(float(k) for k in ks),
        delta_samples=tuple(analytic.phase_shift(ell, float(k)) for k in ks),
        delta_zero_extrapolated=analytic.phase_shift_zero(ell),
        sector=PhaseSector.TOTAL,
        potential=f"reflectionless(ell={ell})",
    )


def _curves(args: argparse.Namespace, cfg: RunConfig) -> Tuple[Dict[str, PhaseShiftCurve], List[float]]:
    """Phase curves per method plus |R/I| per momentum"""
    method = _method(args)
    ks = _k_grid(cfg)
    curves: Dict[str, PhaseShiftCurve] = {}
    abs_r = [0.0] * ks.size
    if method in ("analytic", "both"):
        curves["analytic"] = _analytic_curve(args.ell, ks)
    if method in ("numeric", "both"):
        p = _potential(args, cfg)
        solver = cfg.solver()
        sweep = numeric.scattering_sweep(p, ks, solver, workers=cfg.workers)
        abs_r = [abs(r.coefficients.reflection_amplitude) for r in sweep]
        curves["numeric"] = numeric.phase_curve(p, ks, solver, workers=cfg.workers)
    return curves, abs_r


# =============================================================================
# COMMANDS
# =============================================================================

def cmd_phase_shift(args: argparse.Namespace, cfg: RunConfig) -> int:
    curves, abs_r = _curves(args, cfg)
    convert = _degrees if _show_degrees(cfg) else (lambda v: v)
    columns = ["k"] + [f"delta_{name}" for name in curves] + ["abs_R"]

    ks = next(iter(curves.values())).k_samples
    rows = []
    for i, k in enumerate(ks):
        row: Dict[str, Any] = {"k": k, "abs_R": abs_r[i]}
        for name, curve in curves.items():
            row[f"delta_{name}"] = convert(curve.delta_samples[i])
        rows.append(row)
    footer: Dict[str, Any] = {"k": 0.0}
    for name, curve in curves.items():
        footer[f"delta_{name}"] = convert(curve.delta_zero_extrapolated)
    rows.append(footer)

    if _show_degrees(cfg):
        shown = {
            name: dataclasses.replace(
                curve,
                delta_samples=tuple(math.degrees(d) for d in curve.delta_samples),
                delta_zero_extrapolated=math.degrees(curve.delta_zero_extrapolated),
            )
            for name, curve in curves.items()
        }
    else:
        shown = curves
    document = {"command": "phase-shift", "units": "degrees" if _show_degrees(cfg) else "radians",
                "curves": shown, "abs_R": abs_r}
    _emit(cfg, columns, rows, document)
    return 0


def _state_row(n: int, state) -> Dict[str, Any]:
    return {"n": n, "energy": state.energy, "parity": state.parity.value, "node_count": state.node_count}


def cmd_bound_states(args: argparse.Namespace, cfg: RunConfig) -> int:
    method = _method(args)
    exact = analytic.bound_spectrum(args.ell) if method in ("analytic", "both") else []
    found = numeric.find_bound_states(_potential(args, cfg), cfg.solver()) if method in ("numeric", "both") else []

    if method == "both":
        columns = ["n", "energy", "parity", "node_count", "energy_numeric", "agrees"]
        rows = []
        for n in range(max(len(exact), len(found))):
            a = exact[n] if n < len(exact) else None
            b = found[n] if n < len(found) else None
            row = _state_row(n, a or b)
            row["energy"] = a.energy if a else None
            row["energy_numeric"] = b.energy if b else None
            row["agrees"] = bool(
                a and b
                and abs(a.energy - b.energy) <= ENERGY_AGREEMENT_TOL
                and a.parity is b.parity
                and a.node_count == b.node_count
            )
            rows.append(row)
    else:
        columns = ["n", "energy", "parity", "node_count"]
        rows = [_state_row(n, s) for n, s in enumerate(exact or found)]

    label = f"reflectionless(ell={args.ell})" if args.ell is not None else args.potential_file
    _emit(cfg, columns, rows, {"command": "bound-states", "potential": label, "method": method, "states": rows})
    return 0


AUDIT_COLUMNS = [
    "ell", "theorem", "predicted", "predicted_even", "predicted_odd", "compared",
    "actual", "actual_source", "discrepancy", "verdict", "notes",
]


def _audit_row(row: levinson.LevinsonAudit, degrees: bool) -> Dict[str, Any]:
    convert = _degrees if degrees else (lambda v: v)
    prediction = row.prediction
    return {
        "ell": row.ell,
        "theorem": row.theorem.value,
        "predicted": convert(row.predicted),
        "predicted_even": convert(prediction.predicted_delta_even),
        "predicted_odd": convert(prediction.predicted_delta_odd),
        "compared": row.compared,
        "actual": convert(row.actual_delta_zero),
        "actual_source": row.actual_source.value,
        "discrepancy": convert(row.discrepancy),
        "verdict": row.verdict.value,
        "notes": "; ".join(row.notes),
    }


def cmd_audit(args: argparse.Namespace, cfg: RunConfig) -> int:
    ells = parse_ell_range(args.ell_range) if args.ell_range else (args.ell,)
    theorems = ("direct", "parity") if args.theorem == "both" else (args.theorem,)
    rows = levinson.audit_table(
        ells,
        theorems=theorems,
        source=args.source,
        cfg=cfg.solver(),
        comparison=args.comparison,
        workers=cfg.workers,
    )
    degrees = _show_degrees(cfg)
    table = [_audit_row(r, degrees) for r in rows]
    document = rows if not degrees else table
    _emit(cfg, AUDIT_COLUMNS, table, document)
    return 0


def cmd_plot_data(args: argparse.Namespace, cfg: RunConfig) -> int:
    if cfg.to_stdout:
        raise UsageError("plot-data writes files; pass --out DIRECTORY")
    directory = ensure_directory(cfg.out)
    curves, _ = _curves(args, cfg)
    tag = f"ell{args.ell}" if args.ell is not None else "potential"
    series = {}
    for name, curve in curves.items():
        series_name = f"{name}_{tag}"
        series[series_name] = write_plot_series(directory, series_name, curve.k_samples, curve.delta_samples)
    write_manifest(directory, series)
    return 0


def cmd_scatter(args: argparse.Namespace, cfg: RunConfig) -> int:
    method = _method(args)
    results: List[Tuple[str, ScatteringResult]] = []
    if method in ("analytic", "both"):
        results.append(("analytic", ScatteringResult.of(analytic.coefficients(args.ell, args.k))))
    if method in ("numeric", "both"):
        results.append(("numeric", numeric.solve_scattering(_potential(args, cfg), args.k, cfg.solver())))

    convert = _degrees if _show_degrees(cfg) else (lambda v: v)
    rows = []
    for name, result in results:
        c = result.coefficients
        rows.append({
            "k": c.k,
            "method": name,
            "I_re": c.I.real, "I_im": c.I.imag,
            "R_re": c.R.real, "R_im": c.R.imag,
            "T_re": c.T.real, "T_im": c.T.imag,
            "abs_R": abs(c.reflection_amplitude),
            "abs_T": abs(c.transmission_amplitude),
            "delta": convert(result.delta),
        })
    columns = list(rows[0].keys())
    document = {"command": "scatter", "units": "degrees" if _show_degrees(cfg) else "radians", "results": [
        {"method": name, **to_jsonable(dataclasses.replace(result, delta=convert(result.delta)))}
        for name, result in results
    ]}
    _emit(cfg, columns, rows, document)
    return 0


COMMANDS = {
    "phase-shift": cmd_phase_shift,
    "bound-states": cmd_bound_states,
    "audit": cmd_audit,
    "plot-data": cmd_plot_data,
    "scatter": cmd_scatter,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command; returns the process exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    start = time.perf_counter()
    try:
        cfg = resolve_config(args)
        setup_structured_logging(level=cfg.log_level, use_json=cfg.log_json)
        new_correlation_id()
        status = COMMANDS[args.command](args, cfg)
    except Exception as exc:
        error = as_workbench_error(exc)
        if not isinstance(exc, WorkbenchError):
            logger.exception(f"Unexpected failure in {args.command}")
        print(f"error: {error.message}", file=sys.stderr)
        for hint in error.suggestions[:1]:
            print(f"hint: {hint}", file=sys.stderr)
        log_command_execution(logger, args.command, (time.perf_counter() - start) * 1000, False, error.message)
        return error.exit_code

    log_command_execution(logger, args.command, (time.perf_counter() - start) * 1000, True)
    return status


if __name__ == "__main__":
    sys.exit(main())
