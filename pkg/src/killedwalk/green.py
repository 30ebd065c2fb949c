"""Green's functions on truncated boxes and the ratio-limit experiments built on them.

A field is solved for a fixed target ``t``: ``u(z) = G(z, t)`` is the expected
number of visits to ``t`` from ``z`` before the walk is killed (leaves the
half-space) or leaves the box. Paths leaving the box are discarded, so every
value is a lower bound that increases with the box.
"""

from __future__ import annotations

import csv
import io
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import _mc
from . import dual_geometry as geo
from . import harmonic
from .errors import ConvergenceError, DomainError
from .jump_model import JumpDistribution, mean, twist, validate

KILLED = "killed"
FREE = "free"
CSV_HEADER = ("n", "abs_zn", "kernel", "limit", "abs_err")


@dataclass(frozen=True)
class TruncationBox:
    """Box ``prod_i [-w_i, w_i] x [y_min, y_max]``; ``y_min = 1`` for killed walks."""

    x_half_width: tuple
    y_max: int
    y_min: int = 1

    def __post_init__(self):
        w = tuple(int(v) for v in np.atleast_1d(self.x_half_width))
        if any(v < 1 for v in w) or self.y_max < max(1, self.y_min):
            raise DomainError("box extents must be positive")
        object.__setattr__(self, "x_half_width", w)

    @property
    def dim(self):
        return len(self.x_half_width) + 1

    @property
    def shape(self):
        return tuple(2 * w + 1 for w in self.x_half_width) + (self.y_max - self.y_min + 1,)

    @property
    def offset(self):
        return np.array(self.x_half_width + (-self.y_min,), dtype=np.int64)

    def contains(self, z) -> bool:
        z = np.asarray(z)
        return bool(
            all(abs(int(c)) <= w for c, w in zip(z[:-1], self.x_half_width))
            and self.y_min <= int(z[-1]) <= self.y_max
        )

    def strictly_contains(self, z) -> bool:
        z = np.asarray(z)
        return bool(
            all(abs(int(c)) < w for c, w in zip(z[:-1], self.x_half_width))
            and self.y_min <= int(z[-1]) < self.y_max
            and (self.y_min == 1 or int(z[-1]) > self.y_min)
        )

    def doubled(self):
        return TruncationBox(
            tuple(2 * w for w in self.x_half_width),
            2 * self.y_max,
            self.y_min if self.y_min >= 1 else 2 * self.y_min,
        )


@dataclass(frozen=True, eq=False)
class GreenField:
    target: tuple
    kind: str
    values: np.ndarray
    iterations: int
    residual: float
    box: TruncationBox

    def value(self, z) -> float:
        z = np.asarray(z, dtype=np.int64)
        if not self.box.contains(z):
            return 0.0
        return float(self.values[tuple(z + self.box.offset)])

    __call__ = value


def _check_target(model, target, box, kind):
    target = tuple(int(c) for c in target)
    if len(target) != model.dim or box.dim != model.dim:
        raise DomainError("target, box and model dimensions disagree")
    if kind == KILLED and (target[-1] < 1 or box.y_min < 1):
        raise DomainError("killed walk lives on y >= 1")
    if not box.strictly_contains(target):
        raise DomainError(f"target {target} not strictly inside box")
    return target


def transition_operator(model: JumpDistribution, box: TruncationBox):
    """Sparse one-step kernel restricted to the box (row = source, column = destination)."""
    shape = box.shape
    n = int(np.prod(shape))
    grid = np.indices(shape).reshape(len(shape), -1)
    rows, cols, vals = [], [], []
    for j, p in zip(model.jumps, model.probs):
        dest = grid + j[:, None]
        ok = np.all((dest >= 0) & (dest < np.array(shape)[:, None]), axis=0)
        rows.append(np.ravel_multi_index(grid[:, ok], shape))
        cols.append(np.ravel_multi_index(dest[:, ok], shape))
        vals.append(np.full(ok.sum(), p))
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )


def _solve(model, target, box, tol, kind, method, max_iter):
    P = transition_operator(model, box)
    n = P.shape[0]
    b = np.zeros(n)
    b[np.ravel_multi_index(tuple(np.asarray(target) + box.offset), box.shape)] = 1.0
    iterations = 0
    if method == "direct":
        u = spla.spsolve((sp.identity(n, format="csc") - P).tocsc(), b)
    elif method == "sweep":
        # alternating forward/backward Gauss-Seidel from u = 0 (monotone from below)
        A = (sp.identity(n, format="csr") - P).tocsr()
        lower = sp.tril(A, format="csr")
        upper = sp.triu(A, format="csr")
        strict_up = A - lower
        strict_lo = A - upper
        u = np.zeros(n)
        while True:
            u_new = spla.spsolve_triangular(lower, b - strict_up @ u, lower=True)
            u_new = spla.spsolve_triangular(upper, b - strict_lo @ u_new, lower=False)
            iterations += 1
            delta = float(np.max(np.abs(u_new - u)))
            u = u_new
            if delta < tol:
                break
            if iterations >= max_iter:
                raise ConvergenceError("sweep iteration budget exhausted", delta)
    else:
        raise ValueError(f"unknown method {method!r}")
    residual = float(np.max(np.abs(u - b - P @ u)))
    if not residual <= max(tol, 1e-12):
        raise ConvergenceError("Green solve residual above tolerance", residual)
    if np.any(u < -1e-12):
        raise ConvergenceError("negative Green values", float(-u.min()))
    return GreenField(target, kind, np.maximum(u, 0.0).reshape(box.shape), iterations, residual, box)


def green_killed(model, target, box, tol=1e-10, method="direct", max_iter=100_000) -> GreenField:
    """``G_+(., target)`` for the walk killed below ``y = 1`` and outside ``box``."""
    target = _check_target(model, target, box, KILLED)
    return _solve(model, target, box, tol, KILLED, method, max_iter)


def green_free(model, target, box, tol=1e-10, method="direct", max_iter=100_000) -> GreenField:
    """``G(., target)`` for the unkilled walk, truncated to ``box``."""
    if not np.any(mean(model) != 0):
        raise DomainError("free walk with zero mean is not transient in general; rejected")
    target = _check_target(model, target, box, FREE)
    return _solve(model, target, box, tol, FREE, method, max_iter)


def nstep_green(model, target, box, kind, n_steps) -> np.ndarray:
    """Brute-force ``sum_{n <= n_steps} P_z(Z_n = target, stayed in box)`` over the box.

    Written with array shifts, independently of the sparse operator above.
    """
    shape = box.shape
    v = np.zeros(shape)
    v[tuple(np.asarray(target) + box.offset)] = 1.0
    total = v.copy()
    for _ in range(n_steps):
        nxt = np.zeros(shape)
        for j, p in zip(model.jumps, model.probs):
            src, dst = [], []
            for c, s in zip(j, shape):
                c = int(c)
                src.append(slice(max(0, -c), s - max(0, c)))
                dst.append(slice(max(0, c), s - max(0, -c)))
            nxt[tuple(src)] += p * v[tuple(dst)]
        v = nxt
        total += v
    return total


def martin_kernel(field: GreenField, z, z0) -> float:
    den = field.value(z0)
    if den <= 0:
        raise ZeroDivisionError(f"G(z0, target) = 0 at z0={tuple(z0)}")
    return field.value(z) / den


def mc_green(model, source, target, kind, n_paths, horizon, seed):
    """Visit-count estimate of ``G(source, target)``: (estimate, std_error)."""
    counts = _mc.visits_nd(
        model.jumps,
        _mc.cdf_of(model.probs),
        np.asarray(source, dtype=np.int64),
        np.asarray(target, dtype=np.int64),
        kind == KILLED,
        int(n_paths),
        int(horizon),
        int(seed),
    )
    se = float(counts.std(ddof=1) / math.sqrt(n_paths)) if n_paths > 1 else float("inf")
    return float(counts.mean()), se


# --- experiments -----------------------------------------------------------


@dataclass(frozen=True)
class BoxPolicy:
    """Box sized from ``|z_n|``, then doubled until the probed quantity settles."""

    x_scale: float = 2.0
    x_pad: int = 40
    y_scale: float = 1.0
    y_pad: int = 40
    rel_change: float = 0.005
    max_doublings: int = 2
    check: bool = True

    def box_for(self, target, kind, extra=()):
        target = np.asarray(target)
        r = float(np.linalg.norm(target))
        reach = max([r] + [float(np.max(np.abs(e))) for e in extra])
        w = int(math.ceil(self.x_scale * reach + self.x_pad))
        h = int(math.ceil(self.y_scale * reach + self.y_pad))
        y_min = 1 if kind == KILLED else -h
        return TruncationBox((w,) * (len(target) - 1), h, y_min)


def _solve_kind(model, target, box, kind, tol):
    fn = green_killed if kind == KILLED else green_free
    return fn(model, target, box, tol)


def solve_with_policy(model, target, kind, policy, probe, tol=1e-10, extra=()):
    """Solve on the policy box and certify ``probe(field)`` by doubling.

    Returns (field, probe value, relative change on the last doubling).
    """
    box = policy.box_for(target, kind, extra)
    fld = _solve_kind(model, target, box, kind, tol)
    val = probe(fld)
    change = float("nan")
    if policy.check:
        for _ in range(policy.max_doublings):
            box = box.doubled()
            big = _solve_kind(model, target, box, kind, tol)
            new = probe(big)
            change = abs(new - val) / abs(new) if new != 0 else abs(new - val)
            fld, val = big, new
            if change < policy.rel_change:
                break
        else:
            raise ConvergenceError("kernel still moving after box doublings", change)
    return fld, val, change


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    abs_zn: float
    kernel: float
    limit: float
    abs_err: float
    z: tuple = ()
    box_change: float = float("nan")


@dataclass
class ConvergenceTable:
    rows: list = field(default_factory=list)

    def for_z(self, z):
        z = tuple(int(c) for c in z)
        return [r for r in self.rows if r.z == z]

    def to_csv(self, out=None) -> str:
        """CSV with header ``n,abs_zn,kernel,limit,abs_err`` (a leading ``z`` column if several z)."""
        multi = len({r.z for r in self.rows}) > 1
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow((("z",) if multi else ()) + CSV_HEADER)
        for r in self.rows:
            lead = (" ".join(str(c) for c in r.z),) if multi else ()
            w.writerow(lead + (r.n, format(r.abs_zn, ".17g"), format(r.kernel, ".17g"),
                               format(r.limit, ".17g"), format(r.abs_err, ".17g")))
        text = buf.getvalue()
        if out is not None:
            with open(out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text


def eventually_decreasing(errors, last=4, lag=3) -> bool:
    """Each of the last ``last`` errors is <= the one ``lag`` places earlier."""
    errors = list(errors)
    if len(errors) < last + lag:
        return False
    return all(errors[i] <= errors[i - lag] for i in range(len(errors) - last, len(errors)))


def parse_schedule(spec: str, dim: int):
    """Target schedules: ``diag:a..b:step`` (n,...,n), ``wall:a..b:step`` (n,0,..,1),
    ``axis:a..b:step`` (n,0,...,0), or an explicit ``x,y;x,y`` list.

    Returns a list of (n, target).
    """
    spec = spec.strip()
    kind, _, rest = spec.partition(":")
    if kind in ("diag", "wall", "axis"):
        try:
            rng, _, step = rest.partition(":")
            a, _, b = rng.partition("..")
            a, b, step = int(a), int(b), int(step or 1)
        except ValueError:
            raise ValueError(f"malformed schedule {spec!r}") from None
        if step < 1 or b < a:
            raise ValueError(f"empty schedule {spec!r}")
        out = []
        for n in range(a, b + 1, step):
            if kind == "diag":
                t = (n,) * dim
            elif kind == "wall":
                t = (n,) + (0,) * (dim - 2) + (1,)
            else:
                t = (n,) + (0,) * (dim - 1)
            out.append((n, t))
        return out
    pts = []
    for i, chunk in enumerate(spec.split(";"), 1):
        t = tuple(int(c) for c in chunk.split(","))
        if len(t) != dim:
            raise ValueError(f"target {chunk!r} does not have {dim} coordinates")
        pts.append((i, t))
    return pts


def _as_points(zs):
    return [tuple(int(c) for c in z) for z in zs]


def ratio_limit_experiment(model, q, targets, zs, z0, box_policy=BoxPolicy(), tol=1e-10, cache=None):
    """Martin kernel ``G_+(z, z_n) / G_+(z0, z_n)`` against ``h(z)/h(z0)`` with ``h = h_{a(q),+}``.

    ``targets`` is a list of (n, z_n). ``cache`` may hold solved fields keyed by target.
    """
    zs, z0 = _as_points(zs), tuple(int(c) for c in z0)
    a = geo.a_of_q(model, q)
    y_need = max(p[-1] for p in zs + [z0]) + int(model.jumps[:, -1].max()) + 1
    ev = harmonic.build(model, a, y_max=y_need)
    table = ConvergenceTable()
    for n, t in targets:
        t = tuple(t)

        def probe(f):
            return max(martin_kernel(f, z, z0) for z in zs)

        if cache is not None and (KILLED, t) in cache:
            fld, change = cache[(KILLED, t)]
        else:
            fld, _, change = solve_with_policy(model, t, KILLED, box_policy, probe, tol, zs + [z0])
            if cache is not None:
                cache[(KILLED, t)] = (fld, change)
        for z in zs:
            k = martin_kernel(fld, z, z0)
            lim = harmonic.martin_candidate_ratio(ev, z, z0)
            table.rows.append(ConvergenceRow(n, float(np.linalg.norm(t)), k, lim, abs(k - lim), z, change))
    return table


def shift_ratio_check(model, targets, z, w, box_policy=BoxPolicy(), tol=1e-10, period=None, cache=None):
    """``G_+(z + k w, z_n) / G_+(z, z_n)`` with ``k`` the period of the walk; limit 1."""
    w = np.asarray(w, dtype=np.int64)
    if w[-1] != 0:
        raise DomainError("shift must be horizontal (last coordinate 0)")
    if period is None:
        period = validate(model).period
    z = np.asarray(z, dtype=np.int64)
    zs = z + period * w
    table = ConvergenceTable()
    for n, t in targets:
        t = tuple(t)

        def probe(f):
            return martin_kernel(f, zs, z)

        if cache is not None and (KILLED, t) in cache:
            fld, change = cache[(KILLED, t)]
        else:
            fld, _, change = solve_with_policy(model, t, KILLED, box_policy, probe, tol, [tuple(zs), tuple(z)])
            if cache is not None:
                cache[(KILLED, t)] = (fld, change)
        r = martin_kernel(fld, zs, z)
        table.rows.append(ConvergenceRow(n, float(np.linalg.norm(t)), r, 1.0, abs(r - 1.0), tuple(int(c) for c in zs), change))
    return table


def compare_twisted_fields(base: GreenField, twisted: GreenField, a, sources):
    """max over sources of ``|G~(z, t) - exp(a.(t - z)) G(z, t)| / G(z, t)``."""
    if base.box != twisted.box or base.target != twisted.target:
        raise DomainError("fields solved on different boxes or targets are not comparable")
    a = np.asarray(a, dtype=float)
    t = np.asarray(base.target)
    worst = 0.0
    for z in sources:
        g = base.value(z)
        if g <= 0:
            raise DomainError(f"G({tuple(z)}, target) = 0; pair carries no information")
        gt = twisted.value(z)
        worst = max(worst, abs(gt - np.exp(a @ (t - np.asarray(z))) * g) / g)
    return worst


def twisted_green_identity_check(model, a, pairs, box, tol=1e-10, twisted_box=None):
    """Max relative deviation of ``G~_+(z, z') = exp(a.(z' - z)) G_+(z, z')`` over ``pairs``."""
    if twisted_box is not None and twisted_box != box:
        raise DomainError("twisted and untwisted solves must share one box")
    tw = twist(model, a)
    by_target = {}
    for z, zp in pairs:
        by_target.setdefault(tuple(int(c) for c in zp), []).append(tuple(int(c) for c in z))
    worst = 0.0
    for t, sources in by_target.items():
        base = green_killed(model, t, box, tol)
        other = green_killed(tw, t, box, tol)
        worst = max(worst, compare_twisted_fields(base, other, a, sources))
    return worst


def ld_slope(fields, z):
    """``(|z_n|, log G(z, z_n) / |z_n|)`` for each solved field."""
    out = []
    for f in fields:
        g = f.value(z)
        if g <= 0:
            raise DomainError("Green value must be positive for a log slope")
        r = float(np.linalg.norm(f.target))
        out.append((r, math.log(g) / r))
    return out


def shortest_path_length(model, src, dst, killed=True, radius=None):
    """Fewest jumps from ``src`` to ``dst`` (staying in ``y >= 1`` if killed), by BFS."""
    src, dst = tuple(int(c) for c in src), tuple(int(c) for c in dst)
    if radius is None:
        radius = int(np.max(np.abs(np.subtract(src, dst)))) + 4 * model.max_jump_norm() + 4
    lo = np.minimum(src, dst) - radius
    hi = np.maximum(src, dst) + radius
    seen = {src: 0}
    queue = deque([src])
    while queue:
        p = queue.popleft()
        if p == dst:
            return seen[p]
        for j in model.jumps:
            nxt = tuple(int(c) for c in np.add(p, j))
            if nxt in seen or np.any(nxt < lo) or np.any(nxt > hi) or (killed and nxt[-1] < 1):
                continue
            seen[nxt] = seen[p] + 1
            queue.append(nxt)
    raise DomainError(f"{dst} not reachable from {src} within the search region")


def communication_constants(model, points, killed=True):
    """(theta, C): min jump probability and max ratio of path length to distance over ``points``."""
    theta = float(model.probs.min())
    C = float(model.max_jump_norm())
    pts = _as_points(points)
    for p in pts:
        for r in pts:
            if p != r:
                n = shortest_path_length(model, p, r, killed)
                C = max(C, n / float(np.linalg.norm(np.subtract(p, r))))
    return theta, C
