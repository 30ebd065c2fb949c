"""Boundary functions of one-dimensional walks killed on ``{y <= 0}``.

For a walk on Z with non-negative drift, the positive solutions of

    f(y) = sum_{y' > 0} P(y, y') f(y'),   y >= 1,

are multiples of the survival probability ``P_y(tau = inf)`` when the drift is
positive, and of ``y - E_y Y(tau)`` when it is zero. Both are computed here by
truncated linear solves with adaptive doubling of the truncation height.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy import optimize

from . import _mc
from .errors import ConvergenceError, DomainError, ModelError

DRIFT_TOL = 1e-9
DEFAULT_TOL = 1e-9
MAX_HEIGHT = 1 << 17


@dataclass(frozen=True, eq=False)
class OneDWalk:
    """Jump law of a walk on Z: integer jumps with positive probabilities."""

    jumps: np.ndarray
    probs: np.ndarray
    sum_tol: float = 1e-12

    def __post_init__(self):
        jumps = np.array(self.jumps, dtype=np.int64).reshape(-1)
        probs = np.array(self.probs, dtype=float).reshape(-1)
        if jumps.size == 0 or probs.shape != jumps.shape:
            raise ModelError("one probability per jump is required")
        if np.any(probs <= 0) or not np.all(np.isfinite(probs)):
            raise ModelError("probabilities must be finite and strictly positive")
        if len(set(jumps.tolist())) != jumps.size:
            raise ModelError("duplicate jumps")
        if abs(probs.sum() - 1.0) > self.sum_tol:
            raise ModelError(f"probabilities sum to {probs.sum()!r}, not 1")
        order = np.argsort(jumps)
        jumps, probs = jumps[order], probs[order]
        jumps.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "jumps", jumps)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_dict(cls, law, sum_tol=1e-12):
        law = {int(k): float(v) for k, v in law.items() if v != 0}
        return cls(np.array(list(law)), np.array(list(law.values())), sum_tol)

    def as_dict(self):
        return {int(j): float(p) for j, p in zip(self.jumps, self.probs)}

    @property
    def span(self) -> int:
        """gcd of the support; the walk from y stays on ``y + span * Z``."""
        return reduce(math.gcd, (abs(int(j)) for j in self.jumps), 0) or 1

    def __eq__(self, other):
        if not isinstance(other, OneDWalk):
            return NotImplemented
        return self.as_dict() == other.as_dict()


@dataclass(frozen=True)
class BoundaryFunctionTable:
    """Values ``f(1), ..., f(L)`` of a boundary function.

    ``est_error`` is the change observed on the last doubling of the
    truncation height; ``residual`` is the max harmonic-equation residual on
    ``{1..L/2}``.
    """

    drift_case: str
    L: int
    values: np.ndarray
    est_error: float
    residual: float

    def __call__(self, y):
        y = int(y)
        if not 1 <= y <= self.L:
            raise IndexError(f"y={y} outside table range 1..{self.L}")
        return float(self.values[y - 1])


def drift(law: OneDWalk) -> float:
    return float(law.probs @ law.jumps)


def _killed_operator(law, L, far, r=0.0):
    """Restriction of the kernel to ``{1..L}`` with a far-field rule for ``y > L``.

    Targets ``t > L`` are folded onto the largest height ``t' <= L`` in the
    same residue class mod the span. ``far`` decides what the fold means:
    ``"flat"`` sets ``f(t) = f(t')``; ``"geometric"`` sets
    ``1 - f(t) = r**(t - t') (1 - f(t'))``, the dominant tail of a survival
    probability. Returns ``(Q, c)`` with ``f = Q f + c`` on ``{1..L}``.
    """
    ys = np.arange(1, L + 1)
    rows, cols, vals = [], [], []
    const = np.zeros(L)
    s = law.span
    for j, p in zip(law.jumps, law.probs):
        t = ys + j
        inside = (t >= 1) & (t <= L)
        rows.append(ys[inside] - 1)
        cols.append(t[inside] - 1)
        vals.append(np.full(inside.sum(), p))
        above = t > L
        folded = t[above] - s * (-((L - t[above]) // s))
        w = np.full(above.sum(), p)
        if far == "geometric":
            decay = r ** (t[above] - folded)
            const[ys[above] - 1] += p * (1 - decay)
            w = w * decay
        rows.append(ys[above] - 1)
        cols.append(folded - 1)
        vals.append(w)
    Q = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(L, L)
    )
    return Q, const


def tail_ratio(law: OneDWalk) -> float:
    """``exp(-theta)`` with ``theta > 0`` the root of ``sum p_j exp(-theta j) = 1``.

    For positive drift this is the decay rate of ``P_y(tau < inf)`` in ``y``;
    0 when there are no downward jumps.
    """
    if law.jumps[0] >= 0:
        return 0.0
    j, p = law.jumps.astype(float), law.probs

    def psi(th):
        return float(p @ np.exp(-th * j)) - 1.0

    def dpsi(th):
        return float(-(p * j) @ np.exp(-th * j))

    hi = 1.0
    while dpsi(hi) < 0:
        hi *= 2
    th_min = optimize.brentq(dpsi, 0.0, hi, xtol=1e-300, rtol=1e-15)
    hi = 2 * th_min
    while psi(hi) < 0:
        hi *= 2
    return math.exp(-optimize.brentq(psi, th_min, hi, xtol=1e-300, rtol=1e-15))


def _harmonic_residual(law, values, upto):
    """max_{y <= upto} |sum_{y' > 0} P(y, y') f(y') - f(y)|."""
    L = values.size
    if upto + int(law.jumps[-1]) > L:
        return float("nan")
    padded = np.concatenate([np.zeros(max(0, -int(law.jumps[0]))), values])
    off = padded.size - L
    ys = np.arange(1, upto + 1)
    acc = np.zeros(upto)
    for j, p in zip(law.jumps, law.probs):
        acc += p * padded[off + ys + j - 1]
    return float(np.max(np.abs(acc - values[:upto]))) if upto else 0.0


def _solve_survival(law, L, r):
    Q, c = _killed_operator(law, L, "geometric", r)
    A = sp.identity(L, format="csc") - Q.tocsc()
    return spla.spsolve(A, c)


def _solve_overshoot(law, L):
    """g(y) = E_y Y(tau) on {1..L} with span-respecting flat extrapolation above L."""
    Q, _ = _killed_operator(law, L, "flat")
    ys = np.arange(1, L + 1)
    c = np.zeros(L)
    for j, p in zip(law.jumps, law.probs):
        t = ys + j
        c += np.where(t <= 0, p * t, 0.0)
    A = sp.identity(L, format="csc") - Q.tocsc()
    return spla.spsolve(A, c)


def _adaptive(law, solver, tol, min_L, transform):
    L = max(32, int(min_L))
    change = float("nan")
    prev = transform(solver(law, L))
    while True:
        if 2 * L > MAX_HEIGHT:
            raise ConvergenceError(f"truncation height exceeded {MAX_HEIGHT}", change)
        cur = transform(solver(law, 2 * L))
        change = float(np.max(np.abs(cur[: L // 2] - prev[: L // 2])))
        if change < tol:
            return L, cur[:L], change
        L *= 2
        prev = cur


def survival_probability(law: OneDWalk, tol=DEFAULT_TOL, min_L=32, tol_drift=DRIFT_TOL):
    """``u(y) = P_y(tau = inf)`` for a walk with positive drift."""
    m = drift(law)
    if not m > tol_drift:
        raise DomainError(f"survival probability needs positive drift, got {m!r}")
    r = tail_ratio(law)
    L, values, change = _adaptive(law, lambda w, n: _solve_survival(w, n, r), tol, min_L, lambda u: u)
    res = _harmonic_residual(law, values, L // 2)
    return BoundaryFunctionTable("positive", L, values, change, res)


def mean_overshoot(law: OneDWalk, tol=DEFAULT_TOL, min_L=32, tol_drift=DRIFT_TOL):
    """``f(y) = y - E_y Y(tau)`` for a walk with zero drift."""
    m = drift(law)
    if abs(m) > tol_drift:
        raise DomainError(f"mean overshoot needs zero drift, got {m!r}")
    if law.jumps[0] >= 0:
        raise DomainError("walk has no downward jumps and is never killed")

    def to_f(g):
        return np.arange(1, g.size + 1) - g

    L, values, change = _adaptive(law, _solve_overshoot, tol, min_L, to_f)
    res = _harmonic_residual(law, values, L // 2)
    return BoundaryFunctionTable("zero", L, values, change, res)


def f_table(law: OneDWalk, tol=DEFAULT_TOL, min_L=32, tol_drift=DRIFT_TOL):
    """Dispatch on the sign of the drift."""
    m = drift(law)
    if m < -tol_drift:
        raise DomainError(f"negative drift {m!r}: no positive boundary function of this kind")
    if m > tol_drift:
        table = survival_probability(law, tol, min_L, tol_drift)
    else:
        table = mean_overshoot(law, tol, min_L, tol_drift)
    if not table.residual <= 10 * tol:
        raise ConvergenceError("boundary function fails the harmonic equation", table.residual)
    return table


@dataclass(frozen=True)
class MCEstimate:
    """Monte Carlo estimate with its standard error.

    ``unfinished`` is the fraction of paths still alive at the horizon; for
    overshoot estimates those paths are excluded, which is the horizon bias.
    """

    estimate: float
    std_error: float
    unfinished: float
    n_paths: int


def mc_boundary_oracle(law: OneDWalk, y0, n_paths, horizon, seed, kind=None):
    """Simulate the killed walk from ``y0``.

    ``kind="survival"`` estimates ``P(tau > horizon)``; ``kind="overshoot"``
    estimates ``E(Y(tau) | tau <= horizon)``. By default the kind follows the
    sign of the drift.
    """
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    if kind is None:
        kind = "survival" if drift(law) > DRIFT_TOL else "overshoot"
    pos, times = _mc.exit_1d(
        law.jumps, _mc.cdf_of(law.probs), int(y0), int(n_paths), int(horizon), int(seed)
    )
    alive = times < 0
    frac_alive = float(alive.mean())
    if kind == "survival":
        se = math.sqrt(frac_alive * (1 - frac_alive) / n_paths)
        return MCEstimate(frac_alive, se, frac_alive, n_paths)
    if kind != "overshoot":
        raise ValueError(f"unknown kind {kind!r}")
    exits = pos[~alive].astype(float)
    if exits.size == 0:
        return MCEstimate(float("nan"), float("inf"), frac_alive, n_paths)
    se = float(exits.std(ddof=1) / math.sqrt(exits.size)) if exits.size > 1 else 0.0
    return MCEstimate(float(exits.mean()), se, frac_alive, n_paths)
