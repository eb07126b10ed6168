"""Result records, summary rows and report files.

Reports are CSV or JSON:
- CSV uses a fixed header and %.17g numbers (round-trip exact for float64)
- JSON is an array of objects using Python's shortest round-trip floats,
  with NaN written as null

Search trials are persisted to JSONL, one trial per line, appended as they
finish.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence, Union

from .errors import ConfigError, ReportIOError

logger = logging.getLogger(__name__)

DETERMINISTIC_SEED = "deterministic"
FAILED_ERROR = "failed"
RECORD_HEADER = [
    "variant", "activation", "tau", "trajectory", "seed", "mse", "wall_clock_s", "divergent",
]
REPORT_FORMATS = ("csv", "json")

Seed = Union[int, str]


@dataclass
class ResultRecord:
    """One evaluated (variant, tau, trajectory, seed) run.

    mse is NaN when the run failed before producing a forecast; `error` then
    holds the reason.
    """

    variant: str
    activation: str
    tau: float
    trajectory: int
    seed: Seed
    mse: float
    wall_clock_s: float = math.nan
    divergent: bool = False
    config_hash: str = ""
    timestamp: str = ""
    error: Optional[str] = None

    @property
    def sort_key(self) -> tuple:
        seed_key = (0, 0) if self.seed == DETERMINISTIC_SEED else (1, int(self.seed))
        return (self.variant, self.tau, self.trajectory, seed_key)

    @property
    def ok(self) -> bool:
        return self.error is None and not self.divergent and math.isfinite(self.mse)

    def to_dict(self, include_timing: bool = True) -> dict[str, Any]:
        data: dict[str, Any] = {
            "variant": self.variant,
            "activation": self.activation,
            "tau": self.tau,
            "trajectory": self.trajectory,
            "seed": self.seed,
            "mse": _json_float(self.mse),
            "wall_clock_s": _json_float(self.wall_clock_s) if include_timing else None,
            "divergent": self.divergent,
            "config_hash": self.config_hash,
        }
        if include_timing:
            data["timestamp"] = self.timestamp
        if self.error is not None:
            data["error"] = self.error
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ResultRecord":
        seed = data["seed"]
        return cls(
            variant=data["variant"],
            activation=data["activation"],
            tau=float(data["tau"]),
            trajectory=int(data["trajectory"]),
            seed=seed if seed == DETERMINISTIC_SEED else int(seed),
            mse=_from_json_float(data.get("mse")),
            wall_clock_s=_from_json_float(data.get("wall_clock_s")),
            divergent=bool(data.get("divergent", False)),
            config_hash=data.get("config_hash", ""),
            timestamp=data.get("timestamp", ""),
            error=data.get("error"),
        )


@dataclass
class SummaryRow:
    """Aggregate over the records of one (variant, activation, tau) group."""

    variant: str
    activation: str
    tau: float
    mean_mse: float
    std_mse: float
    mean_wall_clock_s: float
    count: int
    divergent_count: int = 0
    error_count: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {f.name: _json_float(getattr(self, f.name)) for f in fields(self)}


@dataclass
class BenchmarkRow:
    """Median train+forecast time of one variant at a given state size."""

    variant: str
    state_size: int
    repeats: int
    median_s: float
    timings: list[float] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "variant": self.variant,
            "state_size": self.state_size,
            "repeats": self.repeats,
            "median_s": self.median_s,
            "timings": list(self.timings),
        }


Row = Union[ResultRecord, SummaryRow, BenchmarkRow]


def _json_float(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _from_json_float(value: Any) -> float:
    if value is None or value == "":
        return math.nan
    return float(value)


def _csv_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    if value is None:
        return ""
    return str(value)


def _row_dicts(rows: Sequence[Row], include_timing: bool) -> list[dict[str, Any]]:
    out = []
    for row in rows:
        if isinstance(row, ResultRecord):
            out.append(row.to_dict(include_timing=include_timing))
        else:
            out.append(row.to_dict())
    return out


def render_csv(rows: Sequence[Row], include_timing: bool = True) -> str:
    """CSV text; record reports always carry RECORD_HEADER."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    if not rows or isinstance(rows[0], ResultRecord):
        writer.writerow(RECORD_HEADER)
        for rec in rows:
            writer.writerow(
                [
                    rec.variant,
                    rec.activation,
                    _csv_value(float(rec.tau)),
                    rec.trajectory,
                    rec.seed,
                    _csv_value(float(rec.mse)),
                    _csv_value(float(rec.wall_clock_s)) if include_timing else "",
                    _csv_value(bool(rec.divergent)),
                ]
            )
        return buffer.getvalue()

    dicts = _row_dicts(rows, include_timing)
    header = list(dicts[0])
    writer.writerow(header)
    for data in dicts:
        writer.writerow(
            [_csv_value(";".join(f"{v:.17g}" for v in data[k]) if isinstance(data[k], list)
                        else data[k]) for k in header]
        )
    return buffer.getvalue()


def render_json(rows: Sequence[Row], include_timing: bool = True) -> str:
    return json.dumps(_row_dicts(rows, include_timing), indent=2, allow_nan=False) + "\n"


def emit_report(
    rows: Sequence[Row],
    fmt: str,
    path: Union[str, Path, None],
    include_timing: bool = True,
) -> str:
    """Write records or summary rows as CSV or JSON.

    Args:
        rows: ResultRecord, SummaryRow or BenchmarkRow instances (one kind)
        fmt: "csv" or "json"
        path: Destination file; None only renders
        include_timing: False blanks wall-clock columns and timestamps so
            deterministic runs produce byte-identical reports

    Returns:
        The rendered text

    Raises:
        ConfigError: unknown format
        ReportIOError: the file cannot be written
    """
    if fmt == "csv":
        text = render_csv(rows, include_timing)
    elif fmt == "json":
        text = render_json(rows, include_timing)
    else:
        raise ConfigError(f"Unknown report format {fmt!r}; expected csv or json")

    if path is not None:
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
        except OSError as e:
            raise ReportIOError(path, e) from e
        logger.info(f"Wrote {len(rows)} rows to {path}")
    return text


def _parse_csv_records(text: str) -> list[ResultRecord]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != RECORD_HEADER:
        raise ConfigError(f"Unexpected CSV header {reader.fieldnames}")
    records = []
    for row in reader:
        seed = row["seed"]
        mse = _from_json_float(row["mse"])
        divergent = row["divergent"] == "true"
        records.append(
            ResultRecord(
                variant=row["variant"],
                activation=row["activation"],
                tau=float(row["tau"]),
                trajectory=int(row["trajectory"]),
                seed=seed if seed == DETERMINISTIC_SEED else int(seed),
                mse=mse,
                wall_clock_s=_from_json_float(row["wall_clock_s"]),
                divergent=divergent,
                # The CSV layout has no error column
                error=FAILED_ERROR if not divergent and not math.isfinite(mse) else None,
            )
        )
    return records


def read_report(path: Union[str, Path], fmt: Optional[str] = None) -> list[ResultRecord]:
    """Read a record report; the format defaults to the file extension.

    Raises:
        ReportIOError: unreadable file
        ConfigError: malformed content
    """
    path = Path(path)
    fmt = fmt or ("json" if path.suffix.lower() == ".json" else "csv")
    try:
        text = path.read_text()
    except OSError as e:
        raise ReportIOError(path, e) from e

    if fmt == "csv":
        return _parse_csv_records(text)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Invalid JSON report {path}: {e}") from e
    if not isinstance(data, list):
        raise ConfigError(f"JSON report {path} must hold an array of records")
    try:
        return [ResultRecord.from_dict(item) for item in data]
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"Malformed record in {path}: {e}") from e


class TrialLog:
    """JSONL persistence of search trials.

    Each trial is appended as one line when it finishes so that an
    interrupted search keeps every completed trial.
    """

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)

    def append(self, trial: dict[str, Any]) -> None:
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a") as f:
                f.write(json.dumps(trial, allow_nan=False) + "\n")
        except OSError as e:
            raise ReportIOError(self.path, e) from e

    def read(self) -> list[dict[str, Any]]:
        """All trials in append order; corrupt lines are skipped."""
        if not self.path.exists():
            return []
        trials = []
        try:
            with open(self.path) as f:
                for line in f:
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        trials.append(json.loads(line))
                    except json.JSONDecodeError:
                        logger.warning(f"Skipping corrupt trial line in {self.path}")
        except OSError as e:
            raise ReportIOError(self.path, e) from e
        return trials

    def clear(self) -> None:
        if self.path.exists():
            self.path.unlink()


def summary_table(rows: Iterable[SummaryRow]):
    """rich Table of summary rows for terminal output."""
    from rich.table import Table

    table = Table(title="detrc summary")
    for name in ("variant", "activation", "tau", "mean mse", "std mse", "mean time [s]",
                 "runs", "divergent", "errors"):
        table.add_column(name, justify="left" if name in ("variant", "activation") else "right")
    for row in rows:
        table.add_row(
            row.variant,
            row.activation,
            f"{row.tau:g}",
            f"{row.mean_mse:.4e}",
            f"{row.std_mse:.2e}",
            f"{row.mean_wall_clock_s:.3f}",
            str(row.count),
            str(row.divergent_count),
            str(row.error_count),
        )
    return table


def benchmark_table(rows: Iterable[BenchmarkRow]):
    """rich Table of benchmark timings."""
    from rich.table import Table

    table = Table(title="detrc benchmark")
    table.add_column("variant")
    table.add_column("state size", justify="right")
    table.add_column("repeats", justify="right")
    table.add_column("median [s]", justify="right")
    for row in rows:
        table.add_row(row.variant, str(row.state_size), str(row.repeats), f"{row.median_s:.4f}")
    return table
