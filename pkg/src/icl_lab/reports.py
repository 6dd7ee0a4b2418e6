"""Experiment reports: per-trial records, aggregate pass/fail, JSON and CSV output.

A report passes when the observed failure rate does not exceed the target
failure probability plus a normal-approximation 95% half-width,
``1.96 * sqrt(r (1 - r) / trials)`` with ``r`` the observed rate.  Reports
carry no timestamps or environment state, so identical (config, seed) runs
serialize to identical bytes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class TrialResult:
    """Outcome of one Monte Carlo trial (or one sweep point within a trial)."""

    trial_index: int
    sup_error: float
    failed: bool
    sweep_value: int | None = None
    detail: str = ""

    def __post_init__(self):
        if self.sup_error < 0:
            raise ParameterError(f"sup_error must be non-negative, got {self.sup_error}")


@dataclass(frozen=True)
class BoundReport:
    """Aggregated result of a verification run."""

    config: dict
    trials: tuple[TrialResult, ...]
    failure_rate: float
    delta_target: float
    ci_halfwidth: float
    passed: bool
    extras: dict = field(default_factory=dict)


def confidence_halfwidth(rate: float, trials: int) -> float:
    """Normal-approximation 95% half-width for a binomial frequency."""
    return 1.96 * math.sqrt(rate * (1.0 - rate) / trials)


def build_report(
    config: dict,
    trials: Sequence[TrialResult],
    delta_target: float,
    extras: dict | None = None,
) -> BoundReport:
    trials = tuple(trials)
    if not trials:
        raise ParameterError("a report needs at least one trial")
    failures = sum(1 for t in trials if t.failed)
    rate = failures / len(trials)
    ci = confidence_halfwidth(rate, len(trials))
    return BoundReport(
        config=config,
        trials=trials,
        failure_rate=rate,
        delta_target=delta_target,
        ci_halfwidth=ci,
        passed=rate <= delta_target + ci,
        extras=dict(extras or {}),
    )


def report_to_dict(report: BoundReport) -> dict:
    return {
        "config": report.config,
        "failure_rate": report.failure_rate,
        "delta_target": report.delta_target,
        "ci_halfwidth": report.ci_halfwidth,
        "pass": report.passed,
        "extras": report.extras,
        "trials": [
            {
                "trial_index": t.trial_index,
                "sup_error": t.sup_error,
                "failed": t.failed,
                "sweep_value": t.sweep_value,
                "detail": t.detail,
            }
            for t in report.trials
        ],
    }


def write_json_report(report: BoundReport, path) -> None:
    payload = json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n"
    Path(path).write_text(payload, encoding="utf-8")


def write_csv_report(report: BoundReport, path) -> None:
    lines = ["trial_index,sup_error,failed"]
    lines += [f"{t.trial_index},{t.sup_error!r},{int(t.failed)}" for t in report.trials]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def fit_log_log_slope(xs, ys) -> float:
    """Least-squares slope of log(y) against log(x)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size != ys.size or xs.size < 2:
        raise ParameterError("slope fit needs at least two matching (x, y) points")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ParameterError("slope fit requires strictly positive values")
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])
