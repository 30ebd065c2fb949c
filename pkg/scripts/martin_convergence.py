"""Martin kernel convergence tables for the reference model.

Writes one CSV per direction (interior diagonal, tangent wall) plus the
period-shift ratios, and prints a short summary.

    python scripts/martin_convergence.py --out results/ --n-max 60
"""

import argparse
import time
from pathlib import Path

from killedwalk import green
from killedwalk.jump_model import load_model

HERE = Path(__file__).resolve().parent


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--model", default=str(HERE.parent / "models" / "m1.model"))
    p.add_argument("--out", default="results")
    p.add_argument("--n-max", type=int, default=60)
    p.add_argument("--step", type=int, default=5)
    args = p.parse_args()

    model = load_model(args.model)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = f"5..{args.n_max}:{args.step}"

    cache = {}
    t0 = time.perf_counter()
    diag = green.parse_schedule(f"diag:{rng}", model.dim)
    tab = green.ratio_limit_experiment(model, [1, 1], diag, [(0, 2)], (0, 1), cache=cache)
    tab.to_csv(out / "interior.csv")
    shift = green.shift_ratio_check(model, diag, (0, 1), (1, 0), cache=cache)
    shift.to_csv(out / "shift.csv")
    print(f"interior: final err {tab.rows[-1].abs_err:.4g}, shift ratio {shift.rows[-1].kernel:.5f} "
          f"({time.perf_counter() - t0:.1f}s)")

    t0 = time.perf_counter()
    wall = green.parse_schedule(f"wall:{rng}", model.dim)
    tab = green.ratio_limit_experiment(model, [1, 0], wall, [(0, 2)], (0, 1))
    tab.to_csv(out / "tangent.csv")
    print(f"tangent: final err {tab.rows[-1].abs_err:.4g} ({time.perf_counter() - t0:.1f}s)")


if __name__ == "__main__":
    main()
