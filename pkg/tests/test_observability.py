"""Tests for logging helpers."""

import json
import logging
from unittest.mock import MagicMock

import numpy as np
import pytest

from netdyad import observability
from netdyad.observability import config_fingerprint, log_timing


def _record(msg: str = "hello", level: int = logging.INFO) -> logging.LogRecord:
    return logging.LogRecord(
        name="netdyad.test",
        level=level,
        pathname=__file__,
        lineno=42,
        msg=msg,
        args=(),
        exc_info=None,
    )


@pytest.mark.unit
def test_json_formatter_includes_custom_fields():
    formatter = observability._JsonFormatter()
    record = _record()
    record.component = "cli-simulate"
    record.reps = 1000

    payload = json.loads(formatter.format(record))

    assert payload["component"] == "cli-simulate"
    assert payload["reps"] == 1000
    assert payload["message"] == "hello"
    assert payload["logger"] == "netdyad.test"


@pytest.mark.unit
def test_json_formatter_includes_exception_and_stack():
    formatter = observability._JsonFormatter()
    record = _record("boom", logging.ERROR)
    record.stack_info = "stacktrace"
    try:
        raise RuntimeError("explode")
    except RuntimeError as exc:
        record.exc_info = (exc.__class__, exc, exc.__traceback__)

    payload = json.loads(formatter.format(record))

    assert payload["stack"] == "stacktrace"
    assert "RuntimeError" in payload["exc_info"]


@pytest.mark.unit
def test_json_formatter_stringifies_unknown_values():
    formatter = observability._JsonFormatter()
    record = _record()
    record.component = "cli"
    record.path = object()

    payload = json.loads(formatter.format(record))

    assert payload["path"].startswith("<object object")


@pytest.mark.unit
def test_text_formatter_appends_known_fields():
    formatter = observability._TextFormatter()
    record = _record("Estimation complete")
    record.component = "cli-estimate"
    record.n_dyads = 2500
    record.bandwidth = 3.5
    record.unrelated = "hidden"

    formatted = formatter.format(record)

    assert "cli-estimate" in formatted
    assert "n_dyads=2500" in formatted
    assert "bandwidth=3.5" in formatted
    assert "hidden" not in formatted


@pytest.mark.unit
def test_text_formatter_without_extras_returns_base():
    formatter = observability._TextFormatter()
    record = _record("plain log")
    record.component = "cli"

    assert "|" not in formatter.format(record)


@pytest.mark.unit
def test_component_filter_sets_component():
    flt = observability._ComponentFilter("cli-diagnose")
    record = _record()

    assert flt.filter(record) is True
    assert record.component == "cli-diagnose"


@pytest.mark.unit
@pytest.mark.parametrize(
    ("kwargs", "level", "formatter"),
    [
        ({"log_format": "text", "level": "info"}, logging.INFO, observability._TextFormatter),
        ({}, logging.WARNING, observability._JsonFormatter),
        ({"level": "nonsense", "default_level": "ERROR"}, logging.ERROR, observability._JsonFormatter),
        ({"log_format": "yaml", "level": 10}, logging.DEBUG, observability._JsonFormatter),
    ],
)
def test_setup_logging_configures_root(monkeypatch, kwargs, level, formatter):
    handler = logging.StreamHandler()
    monkeypatch.setattr("netdyad.observability.logging.StreamHandler", lambda: handler)
    mock_basic = MagicMock()
    monkeypatch.setattr("netdyad.observability.logging.basicConfig", mock_basic)

    observability.setup_logging(component="cli", **kwargs)

    assert isinstance(handler.filters[0], observability._ComponentFilter)
    assert isinstance(handler.formatter, formatter)
    assert mock_basic.call_args.kwargs["level"] == level
    assert mock_basic.call_args.kwargs["force"] is True


@pytest.mark.unit
def test_config_fingerprint_is_order_independent():
    first = config_fingerprint({"reps": 1000, "gamma": 0.8})
    second = config_fingerprint({"gamma": 0.8, "reps": 1000})

    assert first == second
    assert len(first) == 16
    assert config_fingerprint({"reps": 999, "gamma": 0.8}) != first


@pytest.mark.unit
def test_json_formatter_serialises_numpy_fields():
    formatter = observability._JsonFormatter()
    record = _record()
    record.n_dyads = np.int64(250)
    record.bandwidth = np.float64(2.5)
    record.shell_sizes = np.array([1, 3, 4])

    payload = json.loads(formatter.format(record))

    assert payload["n_dyads"] == 250
    assert payload["bandwidth"] == 2.5
    assert payload["shell_sizes"] == [1, 3, 4]


@pytest.mark.unit
def test_text_formatter_without_component_uses_logger_name():
    formatted = observability._TextFormatter().format(_record("loose record"))

    assert "netdyad.test loose record" in formatted


@pytest.mark.unit
def test_log_timing_logs_fields_and_duration(caplog):
    logger = logging.getLogger("netdyad.timing")
    caplog.set_level(logging.INFO, logger="netdyad.timing")

    with log_timing(logger, "Block done", reps=10) as fields:
        fields["workers"] = 2

    (record,) = caplog.records
    assert record.getMessage() == "Block done"
    assert (record.reps, record.workers) == (10, 2)
    assert record.duration_ms >= 0


@pytest.mark.unit
def test_log_timing_stays_silent_when_block_raises(caplog):
    logger = logging.getLogger("netdyad.timing")
    caplog.set_level(logging.DEBUG, logger="netdyad.timing")

    with pytest.raises(RuntimeError), log_timing(logger, "never", level=logging.DEBUG):
        raise RuntimeError("boom")

    assert caplog.records == []


@pytest.mark.unit
def test_config_fingerprint_accepts_numpy_values():
    assert config_fingerprint({"gamma": np.float64(0.8)}) == config_fingerprint(
        {"gamma": 0.8}
    )
