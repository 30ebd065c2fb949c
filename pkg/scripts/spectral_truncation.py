"""Truncated Feynman-Kac spectral radii against lambda_+(alpha) from beta_min.

    python scripts/spectral_truncation.py --alpha 0 0.05 0.1
"""

import argparse

from killedwalk import dual_geometry as geo
from killedwalk.jump_model import load_model
from pathlib import Path

HERE = Path(__file__).resolve().parent


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--model", default=str(HERE.parent / "models" / "m1.model"))
    p.add_argument("--alpha", type=float, nargs="+", default=[0.0])
    p.add_argument("--K", type=int, nargs="+", default=[1, 2, 5, 10, 20, 50, 100, 200, 400])
    args = p.parse_args()
    model = load_model(args.model)
    print("alpha,K,lambda_K,lambda_plus,gap")
    for alpha in args.alpha:
        _, lam = geo.beta_min(model, [alpha])
        for K in args.K:
            v = geo.spectral_radius_truncated(model, [alpha], K)
            print(f"{alpha:.17g},{K},{v:.17g},{lam:.17g},{lam - v:.3e}")


if __name__ == "__main__":
    main()
