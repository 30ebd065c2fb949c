"""Sample-path rate functionals and the cost identities tied to a(q).

Rates are extended reals: ``math.inf`` marks paths with infinite cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import dual_geometry as geo
from .errors import DomainError


@dataclass(frozen=True)
class PiecewiseLinearPath:
    times: np.ndarray
    positions: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        x = np.atleast_2d(np.asarray(self.positions, dtype=float))
        if t.ndim != 1 or t.size < 2 or x.shape[0] != t.size:
            raise DomainError("need at least two breakpoints with one position each")
        if t[0] != 0 or np.any(np.diff(t) <= 0):
            raise DomainError("times must start at 0 and increase strictly")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(x))):
            raise DomainError("non-finite breakpoint")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "positions", x)

    @classmethod
    def from_points(cls, points):
        """``[(t0, x0), (t1, x1), ...]``."""
        return cls([p[0] for p in points], [p[1] for p in points])

    def segments(self):
        for i in range(self.times.size - 1):
            dt = self.times[i + 1] - self.times[i]
            yield dt, (self.positions[i + 1] - self.positions[i]) / dt


def rate_free(model, path: PiecewiseLinearPath) -> float:
    total = 0.0
    for dt, v in path.segments():
        try:
            total += dt * geo.log_phi_conjugate(model, v)
        except DomainError:
            return math.inf
    return total


def rate_killed(model, path: PiecewiseLinearPath) -> float:
    """Free rate for paths in the closed half-space ``y >= 0``, else infinite."""
    if np.any(path.positions[:, -1] < 0):
        return math.inf
    return rate_free(model, path)


@dataclass(frozen=True)
class CostReport:
    cost: float
    conjugate_value: float
    identity_value: float

    @property
    def identity_error(self):
        return abs(self.conjugate_value - self.identity_value)


def optimal_cost(model, q, tol=1e-8) -> CostReport:
    """``a(q).q``, with both sides of ``(log phi)*(grad phi(a(q))) = |grad phi(a(q))| a(q).q``."""
    q = geo.unit(q)
    if q[-1] < 0:
        raise DomainError("direction must lie on the upper half-sphere")
    a = geo.a_of_q(model, q)
    g = geo.grad_phi(model, a)
    lhs = geo.log_phi_conjugate(model, g)
    rhs = float(np.linalg.norm(g) * (a @ q))
    report = CostReport(float(a @ q), lhs, rhs)
    if report.identity_error > tol:
        raise DomainError(f"conjugate identity off by {report.identity_error:.3e}")
    return report


@dataclass(frozen=True)
class BoundCheck:
    final_slope: float
    bound: float
    threshold: float
    passed: bool

    @property
    def margin(self):
        return self.final_slope - self.threshold


def green_ld_bound_check(model, q, slopes, slack=0.2) -> BoundCheck:
    """Is the last log-slope above ``-(1 + slack) a(q).q``?

    ``slopes`` are ``(|z_n|, slope)`` pairs or bare numbers.
    """
    slopes = list(slopes)
    if not slopes:
        raise DomainError("no slopes given")
    last = slopes[-1]
    final = float(last[1] if isinstance(last, (tuple, list)) else last)
    bound = -optimal_cost(model, q).cost
    threshold = bound * (1 + slack)
    return BoundCheck(final, bound, threshold, final >= threshold)
