"""Command-line front end.

Exit codes: 0 success, 2 invalid input or failed model hypotheses,
1 numerical non-convergence (diagnostics on stderr).
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import deviations, green, harmonic, ladder
from . import dual_geometry as geo
from .errors import ConvergenceError, DomainError, ModelError
from .jump_model import load_model, twist, validate, y_marginal


def _num(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    if np.ndim(x):
        return ",".join(_num(v) for v in np.ravel(x))
    return format(float(x), ".17g")


def _kv(pairs) -> str:
    return "".join(f"{k}={_num(v)}\n" for k, v in pairs)


def _vec(text):
    try:
        return np.array([float(c) for c in text.split(",")])
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed vector {text!r}") from None


def _ivec(text):
    try:
        return tuple(int(c) for c in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed lattice point {text!r}") from None


def _points(text):
    return [_ivec(chunk) for chunk in text.split(";") if chunk]


def _positive(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed number {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def neyspitzer(model, q, targets, zs, box_policy=green.BoxPolicy(), tol=1e-10):
    """Free-walk kernel ``G(z, z_n) / G(0, z_n)`` against ``exp(a(q).z)``."""
    a = geo.a_of_q(model, q)
    origin = (0,) * model.dim
    zs = [tuple(int(c) for c in z) for z in zs]
    table = green.ConvergenceTable()
    for n, t in targets:
        def probe(f):
            return max(green.martin_kernel(f, z, origin) for z in zs)

        fld, _, change = green.solve_with_policy(model, t, green.FREE, box_policy, probe, tol, zs)
        for z in zs:
            k = green.martin_kernel(fld, z, origin)
            lim = float(np.exp(a @ np.asarray(z, dtype=float)))
            table.rows.append(green.ConvergenceRow(n, float(np.linalg.norm(t)), k, lim, abs(k - lim), z, change))
    return table


# --- subcommands -----------------------------------------------------------


def cmd_validate(args, model):
    rep = validate(model, args.search_bound)
    text = _kv([
        ("irreducible", rep.irreducible),
        ("mean", np.array(rep.mean)),
        ("mean_nonzero", rep.mean_nonzero),
        ("y_aperiodic", rep.y_aperiodic),
        ("left_continuous", rep.left_continuous),
        ("period", rep.period),
    ])
    return text, (0 if rep.ok else 2)


def cmd_geometry(args, model):
    pairs = []
    if args.q is not None:
        q = geo.unit(args.q)
        a = geo.a_of_q(model, q, args.tol)
        pairs += [("q", q), ("a", a)]
    elif args.alpha is not None:
        b0, lam = geo.beta_min(model, args.alpha)
        pairs += [("alpha", args.alpha), ("beta_min", b0), ("lambda_plus", lam)]
        if args.K:
            pairs.append(("lambda_truncated", geo.spectral_radius_truncated(model, args.alpha, args.K)))
        if lam > 1e-8:
            return _kv(pairs), 0
        a = geo.boundary_point_for_alpha(model, args.alpha)
        pairs.append(("a", a))
    else:
        a = args.a
        pairs.append(("a", a))
    pairs += [("phi", geo.phi(model, a)), ("grad_phi", geo.grad_phi(model, a)), ("q_of_a", geo.q_of_a(model, a))]
    if abs(geo.phi(model, a) - 1) <= 1e-8 and geo.grad_phi(model, a)[-1] >= -geo.CLASS_TOL:
        cls = geo.classify(model, a)
        pairs += [("class", cls.value), ("conjugate", geo.conjugate_point(model, a))]
        if geo.q_of_a(model, a)[-1] >= 0:
            pairs.append(("cost", float(a @ geo.q_of_a(model, a))))
    return _kv(pairs), 0


def _point_from(args, model):
    if args.q is not None:
        return geo.a_of_q(model, args.q, args.tol)
    if args.a is None:
        raise DomainError("one of --q or --a is required")
    return args.a


def cmd_harmonic(args, model):
    a = _point_from(args, model)
    zs = _points(args.z)
    y_need = max(z[-1] for z in zs) + int(model.jumps[:, -1].max()) + 1
    ev = harmonic.build(model, a, y_max=y_need)
    left = model.jumps[:, -1].min() >= -1
    header = "z,h,residual" + (",explicit" if left else "")
    lines = [header]
    for z in zs:
        row = [" ".join(map(str, z)), _num(ev(z)), _num(harmonic.harmonic_residual(model, ev, z))]
        if left:
            row.append(_num(harmonic.explicit_left_continuous(model, a, z)))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n", 0


def _box(args, model, target, kind):
    if args.box is None:
        return green.BoxPolicy().box_for(target, kind)
    parts = args.box
    if len(parts) < 2:
        raise DomainError("--box needs w,y_max[,y_min]")
    y_min = parts[2] if len(parts) > 2 else (1 if kind == green.KILLED else -parts[1])
    return green.TruncationBox((parts[0],) * (model.dim - 1), parts[1], y_min)


def cmd_green(args, model):
    box = _box(args, model, args.target, args.kind)
    fn = green.green_killed if args.kind == green.KILLED else green.green_free
    fld = fn(model, args.target, box, args.tol, method=args.method)
    lines = ["z,G"]
    for z in _points(args.z):
        lines.append(f"{' '.join(map(str, z))},{_num(fld.value(z))}")
    print(f"iterations={fld.iterations} residual={fld.residual:.3e}", file=sys.stderr)
    return "\n".join(lines) + "\n", 0


def cmd_ratio(args, model):
    targets = green.parse_schedule(args.targets, model.dim)
    tab = green.ratio_limit_experiment(model, args.q, targets, [args.z], args.z0, tol=args.tol)
    return tab.to_csv(), 0


def cmd_shiftcheck(args, model):
    targets = green.parse_schedule(args.targets, model.dim)
    tab = green.shift_ratio_check(model, targets, args.z, args.w, tol=args.tol)
    return tab.to_csv(), 0


def cmd_neyspitzer(args, model):
    targets = green.parse_schedule(args.targets, model.dim)
    tab = neyspitzer(model, args.q, targets, _points(args.z), tol=args.tol)
    return tab.to_csv(), 0


def cmd_rate(args, model):
    pts = []
    for chunk in args.path.split(";"):
        t, _, x = chunk.partition(":")
        pts.append((float(t), _vec(x)))
    path = deviations.PiecewiseLinearPath.from_points(pts)
    return _kv([("rate_free", deviations.rate_free(model, path)), ("rate_killed", deviations.rate_killed(model, path))]), 0


def cmd_mc(args, model):
    if args.seed is None:
        raise DomainError("--seed is required for Monte Carlo")
    if args.what == "boundary":
        law = y_marginal(twist(model, args.a) if args.a is not None else model)
        est = ladder.mc_boundary_oracle(law, args.y0, args.paths, args.horizon, args.seed)
        pairs = [("estimate", est.estimate), ("std_error", est.std_error), ("unfinished", est.unfinished)]
    else:
        est, se = green.mc_green(model, args.source, args.target, args.kind, args.paths, args.horizon, args.seed)
        pairs = [("estimate", est), ("std_error", se)]
    return _kv(pairs), 0


def build_parser():
    p = argparse.ArgumentParser(prog="killedwalk", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", required=True, help="model file (dim/jump lines)")
    common.add_argument("--tol", type=_positive, default=1e-10)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", default=None, help="output path (default stdout)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", parents=[common], help="check the model hypotheses")
    s.add_argument("--search-bound", type=int, default=None)
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("geometry", parents=[common], help="a(q), beta_min, classification")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--q", type=_vec)
    g.add_argument("--a", type=_vec)
    g.add_argument("--alpha", type=_vec)
    s.add_argument("--K", type=int, default=0, help="also report the KxK truncated spectral radius")
    s.set_defaults(func=cmd_geometry)

    s = sub.add_parser("harmonic", parents=[common], help="CSV z,h,residual[,explicit]")
    s.add_argument("--q", type=_vec)
    s.add_argument("--a", type=_vec)
    s.add_argument("--z", required=True, help="points x,y;x,y")
    s.set_defaults(func=cmd_harmonic)

    s = sub.add_parser("green", parents=[common], help="CSV z,G")
    s.add_argument("--target", type=_ivec, required=True)
    s.add_argument("--z", required=True)
    s.add_argument("--kind", choices=[green.KILLED, green.FREE], default=green.KILLED)
    s.add_argument("--box", type=_ivec, default=None, help="w,y_max[,y_min]")
    s.add_argument("--method", choices=["direct", "sweep"], default="direct")
    s.set_defaults(func=cmd_green)

    header = "CSV n,abs_zn,kernel,limit,abs_err"
    s = sub.add_parser("ratio", parents=[common], help=f"Martin kernel vs h ratio; {header}")
    s.add_argument("--q", type=_vec, required=True)
    s.add_argument("--z", type=_ivec, required=True)
    s.add_argument("--z0", type=_ivec, required=True)
    s.add_argument("--targets", required=True, help="diag:a..b:step | wall:a..b:step | x,y;x,y")
    s.set_defaults(func=cmd_ratio)

    s = sub.add_parser("shiftcheck", parents=[common], help=f"period-shift ratios; {header}")
    s.add_argument("--z", type=_ivec, required=True)
    s.add_argument("--w", type=_ivec, required=True)
    s.add_argument("--targets", required=True)
    s.set_defaults(func=cmd_shiftcheck)

    s = sub.add_parser("neyspitzer", parents=[common], help=f"free-walk kernel vs exp(a.z); {header}")
    s.add_argument("--q", type=_vec, required=True)
    s.add_argument("--z", required=True)
    s.add_argument("--targets", required=True, help="diag:/wall:/axis: schedule or x,y;x,y")
    s.set_defaults(func=cmd_neyspitzer)

    s = sub.add_parser("rate", parents=[common], help="rate of a piecewise-linear path")
    s.add_argument("--path", required=True, help="t:x,y;t:x,y;...")
    s.set_defaults(func=cmd_rate)

    s = sub.add_parser("mc", parents=[common], help="Monte Carlo oracles")
    s.add_argument("what", choices=["boundary", "green"])
    s.add_argument("--a", type=_vec, default=None, help="tilt for the boundary walk")
    s.add_argument("--y0", type=int, default=1)
    s.add_argument("--source", type=_ivec)
    s.add_argument("--target", type=_ivec)
    s.add_argument("--kind", choices=[green.KILLED, green.FREE], default=green.KILLED)
    s.add_argument("--paths", type=int, default=100_000)
    s.add_argument("--horizon", type=int, default=10_000)
    s.set_defaults(func=cmd_mc)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        model = load_model(args.model)
        text, code = args.func(args, model)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ModelError, DomainError, ValueError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


def main():
    sys.exit(run())
