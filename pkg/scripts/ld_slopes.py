"""Log-slopes of the killed Green function along the wall, against -a(q).q.

The slope (1/|z_n|) log G_+(z, z_n) approaches -a(q).q only like log(n)/n,
so this runs further out than the acceptance schedule to show the trend.

    python scripts/ld_slopes.py --n 30 60 120 240
"""

import argparse
from pathlib import Path

import numpy as np

from killedwalk import deviations as dv
from killedwalk import green
from killedwalk.jump_model import load_model

HERE = Path(__file__).resolve().parent


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--model", default=str(HERE.parent / "models" / "m1.model"))
    p.add_argument("--n", type=int, nargs="+", default=[30, 60, 120, 240])
    p.add_argument("--z", default="0,2")
    args = p.parse_args()
    model = load_model(args.model)
    z = tuple(int(c) for c in args.z.split(","))
    cost = dv.optimal_cost(model, [1, 0]).cost
    print("n,slope,neg_cost,prefactor_corrected")
    for n in args.n:
        target = (n, 1)
        box = green.BoxPolicy().box_for(target, green.KILLED, [z])
        f = green.green_killed(model, target, box)
        (r, s), = green.ld_slope([f], z)
        # remove the n^{-3/2} polynomial prefactor expected near the wall
        corrected = s + 1.5 * np.log(r) / r
        print(f"{n},{s:.6f},{-cost:.6f},{corrected:.6f}")


if __name__ == "__main__":
    main()
