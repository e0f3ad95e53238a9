"""Numerical tolerances shared by the floating-point modules."""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass

DEFAULT_SEED = 20240601
VERTEX_CAP = 10_000


@dataclass(frozen=True)
class Tolerances:
    """
    eig: relative clustering gap, multiplied by the vertex count.
    zero: positivity / zero tests.
    num: reconstruction residuals.
    gs: rank cutoff for graded Gram-Schmidt, relative to the largest norm.
    """

    eig: float = 1e-8
    zero: float = 1e-9
    num: float = 1e-8
    gs: float = 1e-10

    def __post_init__(self):
        eps = sys.float_info.epsilon
        for name in ("eig", "zero", "num", "gs"):
            if getattr(self, name) < eps:
                raise ValueError(f"tolerance {name} below machine epsilon")

    def eig_gap(self, n: int) -> float:
        return self.eig * n


DEFAULT_TOL = Tolerances()


def vertex_cap() -> int:
    raw = os.environ.get("SCHEMEQ_CAP_VERTICES")
    return int(raw) if raw else VERTEX_CAP
