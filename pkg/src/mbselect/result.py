"""Shared result record for all conditional independence tests."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class CITestResult:
    """Outcome of one (conditional) independence test.

    `method` is a small descriptor dict (test name, null backend, feature
    counts, flags); selection code only ever reads the `data_insufficient`
    flag from it, everything else is for reports.
    """

    statistic: float
    p_value: float
    eigenvalues: np.ndarray = field(repr=False)
    n_used: int
    method: dict

    def __post_init__(self) -> None:
        if not (0.0 <= self.p_value <= 1.0):
            raise ValueError(f"p_value {self.p_value} outside [0, 1]")

    @property
    def data_insufficient(self) -> bool:
        return bool(self.method.get("data_insufficient", False))
