"""Tests for result records, report files and the trial log."""

import json
import math
import tempfile
from pathlib import Path

import pytest


def _record(**overrides):
    from detrc.report import ResultRecord

    values = {
        "variant": "tcrc-lm",
        "activation": "tanh",
        "tau": 17.0,
        "trajectory": 0,
        "seed": "deterministic",
        "mse": 0.125,
        "wall_clock_s": 0.5,
    }
    values.update(overrides)
    return ResultRecord(**values)


class TestRenderCSV:
    """CSV report layout."""

    def test_empty_report_is_header_only(self):
        from detrc.report import render_csv

        header = "variant,activation,tau,trajectory,seed,mse,wall_clock_s,divergent\n"
        assert render_csv([]) == header

    def test_two_records(self):
        from detrc.report import render_csv

        text = render_csv([_record(), _record(variant="esn", seed=3, trajectory=1, divergent=True)])
        lines = text.splitlines()
        assert len(lines) == 3
        assert lines[1] == "tcrc-lm,tanh,17,0,deterministic,0.125,0.5,false"
        assert lines[2] == "esn,tanh,17,1,3,0.125,0.5,true"

    def test_full_precision(self):
        from detrc.report import render_csv

        line = render_csv([_record(mse=0.1)]).splitlines()[1]
        assert "0.10000000000000001" in line

    def test_without_timing_blanks_wall_clock(self):
        from detrc.report import render_csv

        a = render_csv([_record(wall_clock_s=0.5)], include_timing=False)
        b = render_csv([_record(wall_clock_s=9.0)], include_timing=False)
        assert a == b
        assert a.splitlines()[1].split(",")[6] == ""

    def test_summary_rows(self):
        from detrc.report import SummaryRow, render_csv

        row = SummaryRow("tcrc", "tanh", 17.0, 0.01, 0.002, 0.3, 10)
        lines = render_csv([row]).splitlines()
        assert lines[0].startswith("variant,activation,tau,mean_mse,std_mse")
        assert lines[1].startswith("tcrc,tanh,17,0.01")


class TestRenderJSON:
    """JSON report layout."""

    def test_nan_written_as_null(self):
        from detrc.report import render_json

        data = json.loads(render_json([_record(mse=math.nan, error="boom")]))
        assert data[0]["mse"] is None
        assert data[0]["error"] == "boom"

    def test_timing_fields_dropped(self):
        from detrc.report import render_json

        data = json.loads(render_json([_record(timestamp="2026-01-01T00:00:00")], False))
        assert data[0]["wall_clock_s"] is None
        assert "timestamp" not in data[0]

    def test_benchmark_rows(self):
        from detrc.report import BenchmarkRow, render_json

        row = BenchmarkRow("esn", 300, 3, 0.2, [0.1, 0.2, 0.3])
        assert json.loads(render_json([row]))[0]["timings"] == [0.1, 0.2, 0.3]


class TestEmitAndRead:
    """Writing and reading report files."""

    @pytest.mark.parametrize("fmt,suffix", [("csv", ".csv"), ("json", ".json")])
    def test_round_trip(self, fmt, suffix):
        from detrc.report import emit_report, read_report

        records = [
            _record(),
            _record(variant="esn", seed=14, trajectory=9, mse=1.0 / 3.0, divergent=True),
        ]
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / f"out{suffix}"
            text = emit_report(records, fmt, path)
            assert path.read_text() == text
            loaded = read_report(path)

        assert [(r.variant, r.seed, r.trajectory, r.divergent) for r in loaded] == [
            ("tcrc-lm", "deterministic", 0, False),
            ("esn", 14, 9, True),
        ]
        assert loaded[1].mse == 1.0 / 3.0

    def test_render_only(self):
        from detrc.report import emit_report

        assert emit_report([_record()], "csv", None).startswith("variant,")

    def test_unknown_format(self):
        from detrc.errors import ConfigError
        from detrc.report import emit_report

        with pytest.raises(ConfigError):
            emit_report([_record()], "xml", None)

    def test_unwritable_path(self):
        from detrc.errors import ReportIOError
        from detrc.report import emit_report

        with tempfile.TemporaryDirectory() as tmpdir:
            blocker = Path(tmpdir) / "file"
            blocker.write_text("")
            with pytest.raises(ReportIOError) as exc:
                emit_report([_record()], "csv", blocker / "out.csv")
        assert exc.value.path.name == "out.csv"

    def test_bad_csv_header(self):
        from detrc.errors import ConfigError
        from detrc.report import read_report

        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "bad.csv"
            path.write_text("a,b,c\n1,2,3\n")
            with pytest.raises(ConfigError):
                read_report(path)

    def test_missing_report(self):
        from detrc.errors import ReportIOError
        from detrc.report import read_report

        with tempfile.TemporaryDirectory() as tmpdir:
            with pytest.raises(ReportIOError):
                read_report(Path(tmpdir) / "none.csv")

    @pytest.mark.parametrize("fmt,suffix", [("csv", ".csv"), ("json", ".json")])
    def test_failed_record_survives_round_trip(self, fmt, suffix):
        from detrc.harness import aggregate
        from detrc.report import emit_report, read_report

        records = [
            _record(mse=1.0),
            _record(trajectory=1, mse=math.nan, error="Series of length 10 too short"),
        ]
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / f"out{suffix}"
            emit_report(records, fmt, path)
            loaded = read_report(path)

        assert loaded[0].ok
        assert not loaded[1].ok
        assert loaded[1].error is not None
        rows = aggregate(loaded)
        assert rows[0].mean_mse == 1.0
        assert rows[0].error_count == 1
        assert rows[0].count == 2


class TestResultRecord:
    """Record ordering and status."""

    def test_sort_key_orders_deterministic_first(self):
        records = [_record(seed=2), _record(seed="deterministic"), _record(seed=10)]
        assert [r.seed for r in sorted(records, key=lambda r: r.sort_key)] == [
            "deterministic", 2, 10,
        ]

    def test_ok(self):
        assert _record().ok
        assert not _record(divergent=True).ok
        assert not _record(error="bad").ok
        assert not _record(mse=math.nan).ok


class TestTrialLog:
    """JSONL trial persistence."""

    def test_append_and_read(self):
        from detrc.report import TrialLog

        with tempfile.TemporaryDirectory() as tmpdir:
            log = TrialLog(Path(tmpdir) / "nested" / "trials.jsonl")
            assert log.read() == []
            log.append({"index": 0, "mse": 0.5})
            log.append({"index": 1, "mse": None})
            assert log.read() == [{"index": 0, "mse": 0.5}, {"index": 1, "mse": None}]
            assert len(log.path.read_text().splitlines()) == 2

    def test_corrupt_line_skipped(self):
        from detrc.report import TrialLog

        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "trials.jsonl"
            path.write_text('{"index": 0}\n{broken\n\n{"index": 2}\n')
            assert TrialLog(path).read() == [{"index": 0}, {"index": 2}]

    def test_clear(self):
        from detrc.report import TrialLog

        with tempfile.TemporaryDirectory() as tmpdir:
            log = TrialLog(Path(tmpdir) / "trials.jsonl")
            log.append({"index": 0})
            log.clear()
            assert not log.path.exists()
            log.clear()


class TestTables:
    """rich tables for terminal output."""

    def test_summary_table_has_row_per_group(self):
        from detrc.report import SummaryRow, summary_table

        table = summary_table([SummaryRow("tcrc", "tanh", 17.0, 0.01, 0.0, 0.1, 10)])
        assert table.row_count == 1

    def test_benchmark_table(self):
        from detrc.report import BenchmarkRow, benchmark_table

        rows = [BenchmarkRow("esn", 300, 3, 0.2), BenchmarkRow("tcrc", 300, 3, 0.1)]
        table = benchmark_table(rows)
        assert table.row_count == 2
