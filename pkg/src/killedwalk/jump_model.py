"""Finite-support jump laws on Z^d and the structural checks they must pass.

A model is a probability measure ``mu`` on Z^d with finitely many atoms. The
walk ``Z(t)`` has increments distributed as ``mu``; the last coordinate is the
vertical one, killed when it drops to <= 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from pathlib import Path

import numpy as np

from .errors import DomainError, ModelError
from .ladder import OneDWalk

PROB_TOL = 1e-12
TWIST_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class JumpDistribution:
    """Jump law ``mu``: integer jumps (k, d) with positive probabilities (k,).

    Arrays are read-only after construction. ``sum_tol`` is the tolerance on
    total mass used at construction; twisted laws are built with a looser one.
    """

    jumps: np.ndarray
    probs: np.ndarray
    sum_tol: float = PROB_TOL

    def __post_init__(self):
        jumps = np.array(self.jumps, dtype=np.int64)
        probs = np.array(self.probs, dtype=float)
        if jumps.ndim != 2 or jumps.shape[0] == 0:
            raise ModelError("support must be a non-empty (k, d) array of jumps")
        if jumps.shape[1] < 2:
            raise ModelError(f"dimension must be >= 2, got {jumps.shape[1]}")
        if probs.shape != (jumps.shape[0],):
            raise ModelError("one probability per jump is required")
        if not np.all(np.isfinite(probs)) or np.any(probs <= 0):
            raise ModelError("probabilities must be finite and strictly positive")
        if len({tuple(j) for j in jumps}) != len(jumps):
            raise ModelError("duplicate jumps in support")
        total = probs.sum()
        if abs(total - 1.0) > self.sum_tol:
            raise ModelError(f"probabilities sum to {total!r}, not 1")
        jumps.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "jumps", jumps)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_dict(cls, entries, sum_tol=PROB_TOL):
        entries = {tuple(int(c) for c in z): float(p) for z, p in entries.items()}
        if not entries:
            raise ModelError("empty jump law")
        dims = {len(z) for z in entries}
        if len(dims) != 1:
            raise ModelError("jumps of mixed dimension")
        return cls(np.array(list(entries)), np.array(list(entries.values())), sum_tol)

    @property
    def dim(self) -> int:
        return self.jumps.shape[1]

    def as_dict(self):
        return {tuple(int(c) for c in z): float(p) for z, p in zip(self.jumps, self.probs)}

    def max_jump_norm(self) -> int:
        return int(np.abs(self.jumps).max())

    def __eq__(self, other):
        if not isinstance(other, JumpDistribution):
            return NotImplemented
        return self.as_dict() == other.as_dict()

    def __repr__(self):
        body = ", ".join(f"{z}: {p:.6g}" for z, p in self.as_dict().items())
        return f"JumpDistribution({{{body}}})"


@dataclass(frozen=True)
class ValidationReport:
    irreducible: bool
    mean: tuple
    mean_nonzero: bool
    y_aperiodic: bool
    left_continuous: bool
    period: int

    @property
    def ok(self) -> bool:
        """True when the hypotheses required of the walk all hold."""
        return self.irreducible and self.mean_nonzero and self.y_aperiodic

    def failures(self):
        out = []
        if not self.irreducible:
            out.append("walk is not irreducible on Z^d")
        if not self.mean_nonzero:
            out.append("mean is zero")
        if not self.y_aperiodic:
            out.append("vertical marginal is periodic")
        return out


def mean(model: JumpDistribution) -> np.ndarray:
    return model.probs @ model.jumps


def y_marginal(model: JumpDistribution) -> OneDWalk:
    """Law of the vertical increment, summing out the horizontal coordinates."""
    law = {}
    for z, p in zip(model.jumps, model.probs):
        law[int(z[-1])] = law.get(int(z[-1]), 0.0) + p
    return OneDWalk.from_dict(law, sum_tol=model.sum_tol)


def twist(model: JumpDistribution, a, tol=TWIST_TOL) -> JumpDistribution:
    """Exponential change of measure ``mu(z) exp(a.z)``.

    Only defined for ``a`` on the level set ``phi(a) = 1``; no renormalisation.
    """
    a = np.asarray(a, dtype=float)
    if a.shape != (model.dim,):
        raise DomainError(f"tilt must have {model.dim} coordinates")
    weights = model.probs * np.exp(model.jumps @ a)
    phi = weights.sum()
    if abs(phi - 1.0) > tol:
        raise DomainError(f"phi(a) = {phi!r} is not 1 within {tol}; twist is not a probability law")
    return JumpDistribution(model.jumps, weights, sum_tol=tol)


def _reachable_by_length(steps, n_max):
    """Sets of lattice points that are sums of exactly n support jumps, n = 0..n_max."""
    layers = [{tuple([0] * steps.shape[1])}]
    for _ in range(n_max):
        prev = layers[-1]
        layers.append({tuple(int(c) for c in np.add(p, s)) for p in prev for s in steps})
    return layers


def validate(model: JumpDistribution, search_bound=None) -> ValidationReport:
    """Check irreducibility, drift, vertical aperiodicity and left continuity.

    Irreducibility and the period are decided by a bounded search over partial
    sums of at most ``search_bound`` jumps (default ``4 d max|jump|``).
    """
    if not isinstance(model, JumpDistribution):
        raise ModelError("validate expects a JumpDistribution")
    d = model.dim
    if search_bound is None:
        search_bound = 4 * d * model.max_jump_norm()
    if search_bound < 1:
        raise ValueError("search_bound must be >= 1")

    layers = _reachable_by_length(model.jumps, search_bound)
    reached = set().union(*layers[1:])
    units = []
    for i in range(d):
        e = [0] * d
        e[i] = 1
        units.append(tuple(e))
        e = list(e)
        e[i] = -1
        units.append(tuple(e))
    irreducible = all(u in reached for u in units)

    origin = tuple([0] * d)
    cycle_lengths = [n for n in range(1, search_bound + 1) if origin in layers[n]]
    period = reduce(math.gcd, cycle_lengths) if cycle_lengths else 0

    ys = np.unique(model.jumps[:, -1])
    y_layers = _reachable_by_length(ys.reshape(-1, 1), search_bound)
    y_cycles = [n for n in range(1, search_bound + 1) if (0,) in y_layers[n]]
    y_aperiodic = bool(y_cycles) and reduce(math.gcd, y_cycles) == 1

    m = mean(model)
    return ValidationReport(
        irreducible=irreducible,
        mean=tuple(float(c) for c in m),
        mean_nonzero=bool(np.any(np.abs(m) > PROB_TOL)),
        y_aperiodic=y_aperiodic,
        left_continuous=bool(model.jumps[:, -1].min() >= -1),
        period=period,
    )


def parse_model(text: str) -> JumpDistribution:
    """Parse the line format ``dim <d>`` followed by ``jump <z1> .. <zd> <prob>``."""
    dim = None
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if dim is None:
                if parts[0] != "dim" or len(parts) != 2:
                    raise ModelError("first statement must be 'dim <d>'")
                dim = int(parts[1])
                if dim < 2:
                    raise ModelError("dim must be >= 2")
                continue
            if parts[0] != "jump" or len(parts) != dim + 2:
                raise ModelError(f"expected 'jump' with {dim} coordinates and a probability")
            z = tuple(int(c) for c in parts[1:-1])
            p = float(parts[-1])
        except ValueError as exc:
            if isinstance(exc, ModelError):
                raise ModelError(f"line {lineno}: {exc}") from None
            raise ModelError(f"line {lineno}: malformed number ({exc})") from None
        if z in entries:
            raise ModelError(f"line {lineno}: duplicate jump {z}")
        if p == 0:
            continue
        entries[z] = p
    if dim is None:
        raise ModelError("missing 'dim' line")
    return JumpDistribution.from_dict(entries)


def load_model(path) -> JumpDistribution:
    return parse_model(Path(path).read_text(encoding="utf-8"))


def format_model(model: JumpDistribution) -> str:
    lines = [f"dim {model.dim}"]
    for z, p in model.as_dict().items():
        lines.append("jump " + " ".join(str(c) for c in z) + f" {p!r}")
    return "\n".join(lines) + "\n"
