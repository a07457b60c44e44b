"""Train on Omega in [1, 1.3] and predict the transition at smaller Omega.

By default this runs a reduced configuration that finishes in seconds: fewer
samples, the (2, 4) basis and a one-round search. Pass ``--full`` for the
``fig3`` preset (415 (3, 9) points and a depth-2 search, a few minutes).

    python demos/extrapolate_in_omega.py [--full] [--out-dir results/demo_extrapolate]
"""

import argparse
import json

from polarongp.harness import PRESETS, run_experiment


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--full", action="store_true")
    ap.add_argument("--out-dir", default="results/demo_extrapolate")
    args = ap.parse_args()

    cfg = json.loads(json.dumps(PRESETS["fig3"]))
    if not args.full:
        cfg.update(n_samples=150, solver={"M": 2, "N": 4}, search_depth=1, restarts=2)
        cfg["predict"].update(lambda_count=16, tol=0.01)
    cfg["out_dir"] = args.out_dir

    summary = run_experiment(cfg)
    print("kernel:", summary.get("kernel_structure"))
    for omega, lam in sorted(summary["lambda_c"].items()):
        print(f"Omega = {omega}: predicted lambda_c = {lam}")
    print(f"outputs in {args.out_dir} (see manifest.json)")


if __name__ == "__main__":
    main()
