"""Shared result containers for inequality checks and fitted estimates."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class CheckResult:
    """Outcome of a single verifiable inequality.

    ``slack`` is the measured margin (bound minus value); a check passes
    when the slack is not worse than the stated tolerance.
    """

    name: str
    passed: bool
    value: float
    bound: float
    slack: float
    detail: str = ""

    def __bool__(self):
        return self.passed


@dataclass
class EstimateReport:
    """Fit/holdout record for an empirically calibrated a-priori bound."""

    k1: float
    k2: float
    feasible: bool
    train_pairs: list[tuple[float, float]] = field(default_factory=list)
    holdout_pairs: list[tuple[float, float]] = field(default_factory=list)
    holdout_passed: bool = False
    worst_ratio: float = 0.0
    detail: str = ""
