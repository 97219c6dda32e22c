"""Aggregation of simulation outputs into table rows and deterministic files.

One :class:`ReportRow` per loss mirrors the benchmark-table columns:
train/test average final IoU, the best run's test average, the spread
between the best and worst run, and overfit = train - test (negative means
underfit, which does occur on heavily noisy labels; it is not clamped).

Emission is byte-deterministic: fixed header, 6 significant digits with
round-half-even, '.' decimal separator and '\\n' line endings, so golden
files compare equal across platforms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from boxloss.losses import LossKind
from boxloss.sim import SimResult

__all__ = ["CSV_HEADER", "ReportRow", "aggregate", "emit", "parse_csv"]

CSV_HEADER = "loss,train_avg,test_avg,test_best,spread,overfit"

_COLUMNS = ("train_avg", "test_avg", "test_best", "spread", "overfit")


@dataclass(frozen=True)
class ReportRow:
    loss: LossKind
    train_avg: float
    test_avg: float
    test_best: float
    spread: float
    overfit: float

    def __post_init__(self) -> None:
        if self.test_best < self.test_avg - 1e-12:
            raise ValueError("test_best cannot be below test_avg")
        if self.spread < 0.0:
            raise ValueError("spread cannot be negative")


def _per_run_stats(result: SimResult) -> tuple[float, float]:
    # without a train/test split, both statistics are the plain mean final IoU
    s = result.summary
    train = s.train_avg if s.train_avg is not None else s.mean_final_iou
    test = s.test_avg if s.test_avg is not None else s.mean_final_iou
    return train, test


def aggregate(results: list[SimResult], runs: int) -> list[ReportRow]:
    """One row per loss kind from `runs` repeated results per kind.

    Results may arrive in any order; rows are emitted in LossKind
    declaration order.  train_avg/test_avg are means over runs, test_best is
    the best run's test average, spread the difference between the best and
    worst run.
    """
    if runs < 1:
        raise ValueError("runs must be at least 1")
    grouped: dict[LossKind, list[SimResult]] = {}
    for r in results:
        grouped.setdefault(r.config.loss, []).append(r)
    rows = []
    for kind in LossKind:
        if kind not in grouped:
            continue
        group = grouped[kind]
        if len(group) != runs:
            raise ValueError(
                f"expected {runs} results for {kind.value}, got {len(group)}"
            )
        stats = [_per_run_stats(r) for r in group]
        trains = [t for t, _ in stats]
        tests = [t for _, t in stats]
        train_avg = sum(trains) / runs
        test_avg = sum(tests) / runs
        rows.append(
            ReportRow(
                loss=kind,
                train_avg=train_avg,
                test_avg=test_avg,
                test_best=max(tests),
                spread=max(tests) - min(tests),
                overfit=train_avg - test_avg,
            )
        )
    return rows


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def emit(rows: list[ReportRow], format: str, path: str | Path) -> Path:
    """Write rows as CSV or JSON; byte-identical for identical input."""
    path = Path(path)
    if format == "csv":
        lines = [CSV_HEADER]
        for r in rows:
            cells = [r.loss.value] + [_fmt(getattr(r, c)) for c in _COLUMNS]
            lines.append(",".join(cells))
        text = "\n".join(lines) + "\n"
    elif format == "json":
        payload = [
            {"loss": r.loss.value, **{c: float(_fmt(getattr(r, c))) for c in _COLUMNS}}
            for r in rows
        ]
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        raise ValueError(f"unknown report format {format!r} (expected 'csv' or 'json')")
    try:
        path.write_text(text, encoding="utf-8", newline="")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
    return path


def parse_csv(path: str | Path) -> list[ReportRow]:
    """Read back an emitted CSV; inverse of emit at 6 significant digits."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path}: missing or unexpected report header")
    rows = []
    for line_no, line in enumerate(lines[1:], 2):
        if not line:
            continue
        cells = line.split(",")
        if len(cells) != 6:
            raise ValueError(f"{path}:{line_no}: expected 6 columns, got {len(cells)}")
        rows.append(
            ReportRow(
                loss=LossKind.parse(cells[0]),
                train_avg=float(cells[1]),
                test_avg=float(cells[2]),
                test_best=float(cells[3]),
                spread=float(cells[4]),
                overfit=float(cells[5]),
            )
        )
    return rows
