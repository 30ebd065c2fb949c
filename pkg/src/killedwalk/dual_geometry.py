"""Geometry of the dual body ``D = {a : phi(a) <= 1}``.

``phi(a) = sum_z mu(z) exp(a.z)`` is the jump generating function. Its level
set ``phi = 1`` is a smooth convex surface whose outward normal ``q(a)`` sweeps
the unit sphere once; ``a(q)`` inverts that map. The vertical coordinate is
the last one: ``a = (alpha, beta)``.
"""

from __future__ import annotations

import enum

import numpy as np

from .errors import ConvergenceError, DomainError
from .jump_model import JumpDistribution, mean

RESIDUAL_TOL = 1e-10
CLASS_TOL = 1e-8
LEGENDRE_CAP = 50.0


class BoundaryClass(enum.Enum):
    POSITIVE_INTERIOR = "positive_interior"
    TANGENT = "tangent"


def _weights(model, a):
    a = np.asarray(a, dtype=float)
    if a.shape != (model.dim,):
        raise DomainError(f"expected a point with {model.dim} coordinates, got shape {a.shape}")
    # far-out trial points in line searches may overflow; inf is the right answer there
    with np.errstate(over="ignore"):
        return model.probs * np.exp(model.jumps @ a)


def phi(model: JumpDistribution, a) -> float:
    return float(_weights(model, a).sum())


def grad_phi(model: JumpDistribution, a) -> np.ndarray:
    with np.errstate(invalid="ignore"):
        return _weights(model, a) @ model.jumps


def hessian_phi(model: JumpDistribution, a) -> np.ndarray:
    J = model.jumps.astype(float)
    return (J * _weights(model, a)[:, None]).T @ J


def unit(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q)
    if not n > 0:
        raise DomainError("direction must be non-zero")
    return q / n


def q_of_a(model, a) -> np.ndarray:
    """Outward unit normal ``grad phi / |grad phi|``."""
    g = grad_phi(model, a)
    n = np.linalg.norm(g)
    if n == 0:
        raise DomainError("gradient of phi vanishes; direction undefined")
    return g / n


def _newton_system(model, q, a0, t0, max_iter):
    """Solve phi(a) = 1, grad phi(a) = t q for (a, t) by damped Newton.

    Runs to stagnation; the caller judges the residual. Returns None if the
    iteration leaves the branch t > 0 or the Jacobian is singular.
    """
    d = model.dim
    x = np.concatenate([a0, [t0]])

    def F(x):
        a, t = x[:d], x[d]
        return np.concatenate([[phi(model, a) - 1.0], grad_phi(model, a) - t * q])

    f = F(x)
    nf = np.linalg.norm(f)
    for _ in range(max_iter):
        if nf <= 1e-15:
            break
        a = x[:d]
        J = np.zeros((d + 1, d + 1))
        J[0, :d] = grad_phi(model, a)
        J[1:, :d] = hessian_phi(model, a)
        J[1:, d] = -q
        try:
            step = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError:
            return None
        lam = 1.0
        while lam > 1e-10:
            xn = x + lam * step
            fn = F(xn)
            if np.all(np.isfinite(fn)) and np.linalg.norm(fn) < (1 - 1e-4 * lam) * nf:
                break
            lam *= 0.5
        else:
            break
        x, f, nf = xn, fn, np.linalg.norm(fn)
    if x[d] <= 0 or not np.all(np.isfinite(x)):
        return None
    return x[:d]


def _kkt_residual(model, a, q):
    return max(abs(phi(model, a) - 1.0), float(np.linalg.norm(q_of_a(model, a) - q)))


def _argmin_tilted(model, v, a0, tol=1e-12, max_iter=200):
    """Minimise the convex function ``phi(a) - a.v`` by damped Newton."""
    a = np.array(a0, dtype=float)
    val = phi(model, a) - a @ v
    scale = max(1.0, float(np.linalg.norm(v)))
    for _ in range(max_iter):
        g = grad_phi(model, a) - v
        if np.linalg.norm(g) <= tol * scale:
            return a
        step = np.linalg.solve(hessian_phi(model, a), -g)
        lam = 1.0
        gn = np.linalg.norm(g)
        while lam >= 1e-12:
            an = a + lam * step
            vn = phi(model, an) - an @ v
            # near the optimum, rounding hides the decrease in value; use the gradient
            if vn <= val + 1e-4 * lam * (g @ step) or np.linalg.norm(grad_phi(model, an) - v) < 0.5 * gn:
                break
            lam *= 0.5
        else:
            # no further decrease possible at working precision
            return a
        a, val = an, vn
    raise ConvergenceError("tilted minimisation did not converge", float(np.linalg.norm(g)))


def _parametric_path(model, q, tol):
    """Globally convergent route to a(q).

    For t > 0 the minimiser a_t of ``phi(a) - t a.q`` satisfies
    ``grad phi(a_t) = t q`` and ``t -> phi(a_t)`` is increasing, so bisect on t.
    """
    a_lo = _argmin_tilted(model, 0 * q, np.zeros(model.dim))
    if phi(model, a_lo) >= 1.0:
        raise DomainError("min phi >= 1: the dual body is degenerate (zero mean)")
    t_lo, t_hi = 0.0, 1.0
    a_hi = _argmin_tilted(model, t_hi * q, a_lo)
    while phi(model, a_hi) < 1.0:
        t_lo, a_lo = t_hi, a_hi
        t_hi *= 2.0
        a_hi = _argmin_tilted(model, t_hi * q, a_hi)
    a = a_hi
    for _ in range(200):
        t = 0.5 * (t_lo + t_hi)
        a = _argmin_tilted(model, t * q, a)
        val = phi(model, a)
        if abs(val - 1.0) <= tol:
            break
        if val < 1.0:
            t_lo = t
        else:
            t_hi = t
    return a, t


def a_of_q(model: JumpDistribution, q, tol=RESIDUAL_TOL, max_iter=100) -> np.ndarray:
    """Point of ``phi = 1`` whose outward normal is ``q`` (the maximiser of a.q over D).

    Newton on the (d+1)-equation system from ``a = 0, t = |m|``; if that stalls,
    a monotone bisection along the tilted-minimiser path supplies a start.
    For ``q`` on the equator the vertical coordinate is snapped onto the
    minimiser of ``beta -> phi(alpha, beta)``.
    """
    q = unit(q)
    m = mean(model)
    if not np.linalg.norm(m) > 0:
        raise DomainError("zero mean: the dual body has empty interior boundary map")
    a = _newton_system(model, q, np.zeros(model.dim), np.linalg.norm(m), max_iter)
    if a is None or _kkt_residual(model, a, q) > tol:
        a0, t0 = _parametric_path(model, q, 1e-6)
        a = _newton_system(model, q, a0, t0, max_iter)
        if a is None or _kkt_residual(model, a, q) > tol:
            a, _ = _parametric_path(model, q, 1e-15)
    if q[-1] == 0.0:
        b0, _ = beta_min(model, a[:-1])
        a = np.concatenate([a[:-1], [b0]])
    res = _kkt_residual(model, a, q)
    if res > tol:
        raise ConvergenceError("a(q) solve failed", res)
    return a


def _vertical(model, alpha, beta):
    return np.concatenate([np.atleast_1d(np.asarray(alpha, dtype=float)), [beta]])


def beta_min(model: JumpDistribution, alpha, tol=1e-14, max_iter=200):
    """Minimiser ``beta0`` of ``beta -> log phi(alpha, beta)`` and ``lambda_plus = log phi`` there.

    Safeguarded Newton on the derivative inside an expanding bracket.
    """
    ys = model.jumps[:, -1]
    if not (ys.min() < 0 < ys.max()):
        raise DomainError("vertical marginal needs jumps of both signs")
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    if alpha.shape != (model.dim - 1,):
        raise DomainError(f"alpha must have {model.dim - 1} coordinates")
    c = model.probs * np.exp(model.jumps[:, :-1] @ alpha)
    y = ys.astype(float)

    def derivs(b):
        w = c * np.exp(y * b)
        return w.sum(), w @ y, w @ (y * y)

    # d/dbeta log phi has the sign of sum w*y; bracket it
    lo, hi = -1.0, 1.0
    while derivs(lo)[1] > 0:
        lo *= 2
    while derivs(hi)[1] < 0:
        hi *= 2
    b = 0.0 if lo < 0 < hi else 0.5 * (lo + hi)
    for _ in range(max_iter):
        f0, f1, f2 = derivs(b)
        if f1 > 0:
            hi = b
        else:
            lo = b
        if abs(f1) <= tol * f0 or hi - lo <= 4e-16 * max(1.0, abs(b)):
            break
        bn = b - f1 / f2
        b = bn if lo < bn < hi else 0.5 * (lo + hi)
    else:
        raise ConvergenceError("beta_min did not converge", abs(f1))
    return float(b), float(np.log(derivs(b)[0]))


def _root_in_beta(model, alpha, lo, hi):
    """phi(alpha, .) - 1 has exactly one sign change on [lo, hi]."""
    from scipy.optimize import brentq

    return brentq(lambda b: phi(model, _vertical(model, alpha, b)) - 1.0, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500)


def boundary_point_for_alpha(model: JumpDistribution, alpha, tol=1e-8) -> np.ndarray:
    """The point ``(alpha, beta)`` on ``phi = 1`` with ``beta >= beta0(alpha)``."""
    b0, lam = beta_min(model, alpha)
    if lam > tol:
        raise DomainError(f"lambda_plus(alpha) = {lam:.3e} > 0: alpha outside the projection of D")
    if lam >= -tol:
        return _vertical(model, alpha, b0)
    step = 1.0
    while phi(model, _vertical(model, alpha, b0 + step)) < 1.0:
        step *= 2
    return _vertical(model, alpha, _root_in_beta(model, alpha, b0, b0 + step))


def classify(model: JumpDistribution, a, class_tol=CLASS_TOL, tol=1e-8) -> BoundaryClass:
    """Tangent iff the vertical slope of phi vanishes (within ``class_tol``)."""
    a = np.asarray(a, dtype=float)
    val = phi(model, a)
    if abs(val - 1.0) > tol:
        raise DomainError(f"phi(a) = {val!r}: a is not on the boundary of D")
    slope = grad_phi(model, a)[-1]
    if abs(slope) <= class_tol:
        return BoundaryClass.TANGENT
    if slope < 0:
        raise DomainError(f"d phi/d beta = {slope:.3e} < 0: a is on the lower boundary")
    return BoundaryClass.POSITIVE_INTERIOR


def conjugate_point(model: JumpDistribution, a, class_tol=CLASS_TOL) -> np.ndarray:
    """Second root ``(alpha, beta_bar)`` of ``phi(alpha, .) = 1`` below ``beta0(alpha)``."""
    a = np.asarray(a, dtype=float)
    if classify(model, a, class_tol) is BoundaryClass.TANGENT:
        return a.copy()
    alpha = a[:-1]
    b0, _ = beta_min(model, alpha)
    step = 1.0
    while phi(model, _vertical(model, alpha, b0 - step)) < 1.0:
        step *= 2
    return _vertical(model, alpha, _root_in_beta(model, alpha, b0 - step, b0))


def legendre_point(model: JumpDistribution, v, tol=1e-12, max_iter=200, cap=LEGENDRE_CAP):
    """Maximiser of ``a.v - log phi(a)``, i.e. the solution of ``grad log phi(a) = v``.

    Raises ``DomainError`` when the iterates run past ``|a| = cap``, which is how
    velocities outside the open convex hull of the support show up.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (model.dim,):
        raise DomainError(f"velocity must have {model.dim} coordinates")
    J = model.jumps.astype(float)
    a = np.zeros(model.dim)

    logp = np.log(model.probs)

    def obj(a):
        e = logp + J @ a
        top = e.max()
        w = np.exp(e - top)
        s = w.sum()
        p = w / s
        g = p @ J - v
        H = (J * p[:, None]).T @ J - np.outer(p @ J, p @ J)
        return top + np.log(s) - a @ v, g, H

    F, g, H = obj(a)
    for _ in range(max_iter):
        if np.linalg.norm(g) <= tol:
            return a
        try:
            step = np.linalg.solve(H, -g)
        except np.linalg.LinAlgError:
            raise DomainError("singular curvature: velocity not attainable") from None
        lam = 1.0
        while lam >= 1e-12:
            an = a + lam * step
            Fn, gn, Hn = obj(an)
            if Fn <= F + 1e-4 * lam * (g @ step) or np.linalg.norm(gn) < 0.5 * np.linalg.norm(g):
                break
            lam *= 0.5
        else:
            if np.linalg.norm(g) <= 1e3 * tol:
                return a
            break
        a, F, g, H = an, Fn, gn, Hn
        if np.linalg.norm(a) > cap:
            raise DomainError(f"velocity {v} not attainable (|a| exceeded {cap})")
    raise DomainError(f"velocity {v} not attainable (no convergence, |grad|={np.linalg.norm(g):.2e})")


def log_phi_conjugate(model: JumpDistribution, v, **kw) -> float:
    """Convex conjugate ``(log phi)*(v) = sup_a (a.v - log phi(a))``."""
    a = legendre_point(model, v, **kw)
    e = np.log(model.probs) + model.jumps @ a
    top = e.max()
    return float(a @ np.asarray(v, dtype=float) - top - np.log(np.exp(e - top).sum()))


def feynman_kac_matrix(model: JumpDistribution, alpha, K: int) -> np.ndarray:
    """``P_+(alpha; y, y') = sum_x mu(x, y'-y) exp(alpha.x)`` for ``y, y'`` in ``1..K``."""
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    c = model.probs * np.exp(model.jumps[:, :-1] @ alpha)
    M = np.zeros((K, K))
    idx = np.arange(K)
    for dy, w in zip(model.jumps[:, -1], c):
        src = idx[(idx + dy >= 0) & (idx + dy < K)]
        M[src, src + dy] += w
    return M


def spectral_radius_truncated(model: JumpDistribution, alpha, K: int, tol=1e-10, max_iter=10_000) -> float:
    """Log of the Perron root of the K x K truncated Feynman-Kac matrix.

    Power iteration on a shifted, repeatedly squared copy of the matrix; the
    Collatz-Wielandt bounds ``min (Mv)/v <= rho <= max (Mv)/v`` give the stop rule.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    M = feynman_kac_matrix(model, alpha, K)
    if K == 1:
        return float(np.log(M[0, 0]))
    shift = M.max()
    B = M + shift * np.eye(K)
    n_sq = max(0, int(np.ceil(np.log2(K * K))))
    for _ in range(n_sq):
        B = B @ B
        B /= B.max()
    v = np.ones(K)
    lo = hi = np.nan
    for _ in range(max_iter):
        v = B @ v
        v /= v.max()
        if np.any(v <= 0):
            raise ConvergenceError("truncated matrix is not irreducible", np.inf)
        r = (M @ v) / v
        lo, hi = r.min(), r.max()
        if hi - lo <= tol * hi:
            return float(np.log(0.5 * (lo + hi)))
    raise ConvergenceError("power iteration did not converge", hi - lo)
