"""Minimal harmonic functions of the killed walk.

For ``a`` on the upper part of ``phi = 1`` the function is
``h(z) = exp(a.z) f_a(y)``, where ``f_a`` is the boundary function of the
vertical marginal of the walk twisted by ``a``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import dual_geometry as geo
from . import ladder
from .errors import DomainError
from .jump_model import JumpDistribution, twist, y_marginal


@dataclass(frozen=True)
class HarmonicEvaluator:
    a: np.ndarray
    boundary_class: geo.BoundaryClass
    f: ladder.BoundaryFunctionTable
    conjugate: Optional[np.ndarray] = None

    @property
    def L(self):
        return self.f.L

    def evaluate(self, z) -> float:
        z = np.asarray(z, dtype=float)
        return float(np.exp(self.a @ z) * self.f(int(z[-1])))

    __call__ = evaluate


def build(model: JumpDistribution, a, tol=ladder.DEFAULT_TOL, y_max=32, class_tol=geo.CLASS_TOL, phi_tol=1e-9):
    """Evaluator for ``h_{a,+}``; the table covers at least ``1..y_max``."""
    a = np.asarray(a, dtype=float)
    cls = geo.classify(model, a, class_tol, phi_tol)
    walk = y_marginal(twist(model, a, tol=phi_tol))
    if cls is geo.BoundaryClass.TANGENT:
        table = ladder.mean_overshoot(walk, tol, min_L=y_max, tol_drift=class_tol)
    else:
        table = ladder.survival_probability(walk, tol, min_L=y_max, tol_drift=class_tol)
    conj = None
    if model.jumps[:, -1].min() >= -1:
        conj = geo.conjugate_point(model, a, class_tol)
    return HarmonicEvaluator(a, cls, table, conj)


def explicit_left_continuous(model: JumpDistribution, a, z, class_tol=geo.CLASS_TOL) -> float:
    """Closed form for walks whose vertical jumps down are at most one step."""
    if model.jumps[:, -1].min() < -1:
        raise DomainError("closed form needs a left-continuous vertical marginal")
    a = np.asarray(a, dtype=float)
    z = np.asarray(z, dtype=float)
    if geo.classify(model, a, class_tol) is geo.BoundaryClass.TANGENT:
        return float(z[-1] * np.exp(a @ z))
    abar = geo.conjugate_point(model, a, class_tol)
    return float(np.exp(a @ z) - np.exp(abar @ z))


def harmonic_residual(model: JumpDistribution, ev: HarmonicEvaluator, z) -> float:
    """Relative defect of the mean-value equation for the killed kernel at ``z``."""
    z = np.asarray(z, dtype=np.int64)
    y = int(z[-1])
    if y < 1:
        raise DomainError("z must lie in the open half-space")
    if y + model.jumps[:, -1].max() > ev.L:
        raise IndexError(f"y={y} too close to the table limit {ev.L}")
    h = ev.evaluate(z)
    acc = 0.0
    for j, p in zip(model.jumps, model.probs):
        zn = z + j
        if zn[-1] >= 1:
            acc += p * ev.evaluate(zn)
    return abs(acc - h) / h


def martin_candidate_ratio(ev: HarmonicEvaluator, z, z0) -> float:
    return ev.evaluate(z) / ev.evaluate(z0)
