"""Two-level NARGP stack at Omega = 0.5.

One hundred cheap (2, 4) energies feed fifteen (3, 9) energies. The stack, a direct
Matern-5/2 fit on the fifteen points and the cheap level alone each give a
transition estimate. The (3, 9) solver itself is the reference. About fifteen
seconds on one core.

    python demos/multifidelity_stack.py [--seed 0]
"""

import argparse

from polarongp.harness import PRESETS, run_experiment


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out-dir", default="results/demo_multifid")
    args = ap.parse_args()

    summary = run_experiment(dict(PRESETS["fig8"], seed=args.seed, out_dir=args.out_dir))
    for name in ("stack", "direct", "low", "reference"):
        print(f"{name:>9}: lambda_c = {summary['lambda_c'][name]['0.5']}")
    print("held-out RMSE:", {k: round(v, 4) for k, v in summary["rmse"].items()})


if __name__ == "__main__":
    main()
