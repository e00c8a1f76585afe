"""Forward-backward selection with early dropping (FBED-k).

The forward phase sweeps candidates in order of marginal association
(p ascending, ties by larger statistic then name); each candidate is tested
conditional on the current selected set and either joins it or drops out of
the sweep's pool. Dropped candidates get another chance in up to k further
sweeps, re-ranked each time. The backward phase then removes variables that
test independent of the target given the rest of the selection, repeating
until a full pass removes nothing.

Tests are injected as a callable mapping (candidate, conditioning-tuple) to a
CITestResult with the target implicit, so the same driver runs Fourier-based
and chi-square-based testers. A data-insufficient result counts as
independence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .result import CITestResult

Tester = Callable[[str, tuple[str, ...]], CITestResult]

FORWARD = "forward"
BACKWARD = "backward"

ADDED = "added"
DROPPED = "dropped"
REMOVED = "removed"
KEPT = "kept"


@dataclass(frozen=True)
class FbedConfig:
    k: int = 1
    alpha: float = 1e-4

    def __post_init__(self) -> None:
        if self.k < 0:
            raise ValueError("k must be >= 0")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")


@dataclass(frozen=True)
class TraceEvent:
    variable: str
    phase: str
    action: str
    p_value: float
    conditioning_set: tuple[str, ...]
    sweep: int


@dataclass
class SelectionTrace:
    """Flat action log of one FBED run, in execution order."""

    events: list[TraceEvent] = field(default_factory=list)

    def log(self, variable, phase, action, p_value, cond, sweep) -> None:
        self.events.append(
            TraceEvent(variable, phase, action, float(p_value), tuple(cond), sweep)
        )

    def variables(self, action: str) -> list[str]:
        return [e.variable for e in self.events if e.action == action]


def _dependent(result: CITestResult, alpha: float) -> bool:
    return not result.data_insufficient and result.p_value < alpha


def rank_candidates(
    pool: list[str] | tuple[str, ...], tester: Tester
) -> list[tuple[str, CITestResult]]:
    """Pool sorted by marginal evidence: p asc, statistic desc, name asc."""
    scored = [(name, tester(name, ())) for name in pool]
    scored.sort(key=lambda item: (item[1].p_value, -item[1].statistic, item[0]))
    return scored


def fbed(
    candidates: list[str] | tuple[str, ...],
    tester: Tester,
    config: FbedConfig = FbedConfig(),
) -> tuple[list[str], SelectionTrace]:
    """Run FBED-k over candidates; returns (selected, trace).

    Selected names keep insertion order. Empty candidate lists are fine.
    """
    if len(set(candidates)) != len(candidates):
        raise ValueError("duplicate candidates")
    trace = SelectionTrace()
    selected: list[str] = []
    pool = list(candidates)

    sweep = 0
    while pool:
        dropped: list[str] = []
        added = 0
        for name, _ in rank_candidates(pool, tester):
            cond = tuple(selected)
            result = tester(name, cond)
            if _dependent(result, config.alpha):
                selected.append(name)
                added += 1
                trace.log(name, FORWARD, ADDED, result.p_value, cond, sweep)
            else:
                dropped.append(name)
                trace.log(name, FORWARD, DROPPED, result.p_value, cond, sweep)
        # Re-sweeping an unchanged pool against an unchanged selection is a
        # no-op, so stop early when nothing was added.
        if sweep >= config.k or added == 0:
            break
        pool = dropped
        sweep += 1

    while True:
        removed_any = False
        for name in reversed(list(selected)):
            cond = tuple(v for v in selected if v != name)
            result = tester(name, cond)
            if _dependent(result, config.alpha):
                trace.log(name, BACKWARD, KEPT, result.p_value, cond, sweep)
            else:
                selected.remove(name)
                removed_any = True
                trace.log(name, BACKWARD, REMOVED, result.p_value, cond, sweep)
        if not removed_any:
            break

    return selected, trace
