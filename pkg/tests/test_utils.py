import json
import logging
import math

import numpy as np
import pytest

from app.services.models import Parity, ScatteringCoefficients
from app.utils import validators
from app.utils.cache import GlobalCache, cached, get_cache
from app.utils.errors import (
    ConsistencyError,
    DomainError,
    ErrorCategory,
    OutputError,
    ResolutionError,
    UsageError,
    as_workbench_error,
    create_error_response,
)
from app.utils.logging import CorrelationIDFilter, JSONFormatter, set_correlation_id
from app.utils.serialization import format_float, render_csv, render_json, to_jsonable, write_text


# =============================================================================
# ERRORS
# =============================================================================

@pytest.mark.parametrize(
    "error,code",
    [(DomainError("x"), 2), (UsageError("x"), 2), (ResolutionError("x"), 3), (ConsistencyError("x"), 3), (OutputError("x"), 4)],
)
def test_exit_codes(error, code):
    assert error.exit_code == code
    assert error.suggestions


def test_foreign_errors_are_wrapped():
    assert as_workbench_error(FileNotFoundError("gone")).category is ErrorCategory.IO
    wrapped = as_workbench_error(KeyError("k"))
    assert wrapped.category is ErrorCategory.UNKNOWN and wrapped.context["type"] == "KeyError"


def test_error_response():
    body = json.loads(create_error_response(ResolutionError("coarse", context={"k": 1.0}), context={"ell": 2}))
    assert body["success"] is False
    assert body["category"] == "resolution"
    assert body["context"] == {"k": 1.0, "ell": 2}
    assert body["suggestions"]


# =============================================================================
# VALIDATORS
# =============================================================================

def test_validators():
    assert validators.validate_ell(2.0) == 2
    assert validators.parse_ell_range(" 1 .. 3 ") == (1, 2, 3)
    for bad in ("3..1", "1-3", ""):
        with pytest.raises(DomainError):
            validators.parse_ell_range(bad)
    with pytest.raises(DomainError):
        validators.validate_k_grid([1.0, 1.0])
    with pytest.raises(DomainError):
        validators.validate_k_grid([0.0, 1.0])
    with pytest.raises(DomainError):
        validators.validate_positive(float("inf"))


# =============================================================================
# SERIALIZATION
# =============================================================================

def test_csv_rendering():
    text = render_csv(["k", "parity", "agrees", "missing"], [{"k": 0.1, "parity": Parity.ODD, "agrees": True}])
    assert text == "k,parity,agrees,missing\n0.10000000000000001,odd,true,\n"
    assert format_float(float("nan")) == ""


def test_numpy_booleans_render_as_booleans():
    assert render_csv(["flag"], [{"flag": np.bool_(True)}]) == "flag\ntrue\n"
    data = to_jsonable({"critical": np.float64(1e-9) < 1e-6, "flags": np.array([True, False])})
    assert data == {"critical": True, "flags": [True, False]}
    assert type(data["critical"]) is bool
    assert json.loads(render_json({"b": np.bool_(False)})) == {"b": False}


def test_json_rendering():
    coeffs = ScatteringCoefficients(k=1.0, I=1 - 1j, R=0j, T=1 + 1j)
    data = to_jsonable({"c": coeffs, "v": np.array([1.5, math.nan]), "n": np.int64(3)})
    assert data["c"]["T"] == {"re": 1.0, "im": 1.0}
    assert data["v"] == [1.5, None]
    assert data["n"] == 3
    assert render_json({"a": 0.1}) == '{\n  "a": 0.1\n}\n'
    with pytest.raises(TypeError):
        to_jsonable(object())


def test_write_text_errors(tmp_path):
    with pytest.raises(OutputError):
        write_text(str(tmp_path / "no" / "such" / "dir.csv"), "x")


# =============================================================================
# CACHE
# =============================================================================

def test_cache_eviction_and_stats():
    cache = GlobalCache()
    for i in range(GlobalCache.DEFAULT_MAX_SIZE["grids"] + 2):
        cache.set("grids", i, i)
    assert cache.get("grids", 0) is None
    assert cache.get("grids", 5) == 5
    stats = cache.get_stats()
    assert stats["evictions"] == 2 and stats["hits"] == 1 and stats["misses"] == 1
    assert cache.clear_category("grids") == GlobalCache.DEFAULT_MAX_SIZE["grids"]


def test_cached_decorator():
    calls = []

    @cached("default", key_func=lambda x, scale=1: (x, scale))
    def square(x, scale=1):
        calls.append(x)
        return scale * x * x

    get_cache().clear_category("default")
    assert square(3) == 9 and square(3) == 9
    assert square(3, scale=2) == 18
    assert calls == [3, 3]


# =============================================================================
# LOGGING
# =============================================================================

def test_json_formatter_carries_correlation_id():
    set_correlation_id("run-42")
    record = logging.LogRecord("app.cli", logging.INFO, __file__, 1, "done", None, None)
    record.command = "audit"
    CorrelationIDFilter().filter(record)
    line = json.loads(JSONFormatter().format(record))
    assert line["correlation_id"] == "run-42"
    assert line["command"] == "audit"
    assert line["message"] == "done" and line["level"] == "INFO"


def test_json_formatter_carries_run_fields():
    record = logging.LogRecord("app.services.numeric", logging.WARNING, __file__, 1, "rescaled", None, None)
    record.potential = "reflectionless(ell=3)"
    record.events = 2
    record.success = False
    record.error = "coarse grid"
    line = json.loads(JSONFormatter().format(record))
    assert (line["potential"], line["events"]) == ("reflectionless(ell=3)", 2)
    assert (line["success"], line["error"]) == (False, "coarse grid")
    assert "ell" not in line
