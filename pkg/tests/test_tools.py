import json
import logging
import math

import pytest

from app.mcp.server import tool_registry
from app.mcp.tools import workbench
from app.mcp.tools.utils import ResponseSizeManager


def test_tools_are_registered():
    for name in ("compute_phase_shifts", "scatter_at_momentum", "list_bound_states", "run_levinson_audit"):
        assert name in tool_registry
    entry = tool_registry["compute_phase_shifts"]
    assert entry["description"].startswith("Phase shift")
    assert "Reflectionless" in entry["schema"].model_fields["ell"].description


def test_thin_samples_keeps_the_last_value():
    kept, thinned = ResponseSizeManager.thin_samples(list(range(10)), 4)
    assert thinned and len(kept) <= 4 and kept[-1] == 9
    assert ResponseSizeManager.thin_samples([1, 2], 4) == ([1, 2], False)


def test_compute_phase_shifts():
    body = json.loads(workbench.compute_phase_shifts(ell=1, method="analytic", k_steps=10))
    assert body["success"] is True
    assert body["curves"]["analytic"]["delta_zero"] == pytest.approx(math.pi / 2)
    assert len(body["k"]) == 10
    assert "_metadata" in body


def test_scatter_at_momentum():
    body = json.loads(workbench.scatter_at_momentum(ell=1, k=1.0))
    assert body["analytic"]["T"] == {"re": 1.0, "im": 1.0}
    assert body["numeric"]["delta"] == pytest.approx(math.pi / 4, abs=1e-6)


def test_list_bound_states():
    body = json.loads(workbench.list_bound_states(ell=2, method="analytic"))
    assert [(s["energy"], s["parity"]) for s in body["states"]] == [(-4.0, "even"), (-1.0, "odd")]


def test_levinson_audit_tool():
    body = json.loads(workbench.run_levinson_audit(ell_range="0..2", theorem="parity"))
    assert [row["verdict"] for row in body["audits"]] == ["agrees", "agrees", "contradicts"]


def test_tool_errors_are_structured():
    body = json.loads(workbench.list_bound_states())
    assert body["success"] is False and body["category"] == "usage"
    body = json.loads(workbench.compute_phase_shifts(ell=1, method="sideways"))
    assert body["category"] == "domain"


def test_levinson_audit_tool_numeric_source():
    body = json.loads(workbench.run_levinson_audit(ell_range="1..1", theorem="parity", source="numeric"))
    assert body["success"] is True
    (row,) = body["audits"]
    assert row["verdict"] == "agrees"
    assert row["prediction"]["inputs"]["critical_odd"] is True


def test_success_carries_correlation_id():
    body = json.loads(workbench.list_bound_states(ell=1, method="analytic"))
    assert body["_metadata"]["correlation_id"]


@pytest.mark.parametrize(
    "tool,kwargs,success",
    [
        ("compute_phase_shifts", {"ell": 1, "method": "analytic", "k_steps": 5}, True),
        ("compute_phase_shifts", {"ell": 1, "method": "sideways"}, False),
        ("scatter_at_momentum", {"ell": 1, "k": 1.0}, True),
        ("scatter_at_momentum", {"ell": 1, "k": -1.0}, False),
        ("list_bound_states", {"ell": 2, "method": "analytic"}, True),
        ("list_bound_states", {}, False),
        ("run_levinson_audit", {"ell_range": "0..1"}, True),
        ("run_levinson_audit", {"ell_range": "2..0"}, False),
    ],
)
def test_every_tool_logs_its_call(caplog, tool, kwargs, success):
    with caplog.at_level(logging.INFO, logger=workbench.logger.name):
        getattr(workbench, tool)(**kwargs)
    (record,) = [r for r in caplog.records if getattr(r, "command", None) == tool]
    assert record.success is success
    assert record.duration_ms >= 0.0
    if not success:
        assert record.levelno == logging.ERROR and record.error
