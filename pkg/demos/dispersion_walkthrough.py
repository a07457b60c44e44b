"""Solver walkthrough: dispersion, ground-state momentum and a spectral slice.

At Omega = 0.5 t the SSH polaron ground state leaves k = 0 once lambda_ssh
crosses roughly 1.1. This script prints E_P(k) on either side of that point,
locates the crossing by bisection and checks the lowest spectral peak against
the eigensolver.

    python demos/dispersion_walkthrough.py
"""

import math

import numpy as np

from polarongp.model import from_dimensionless
from polarongp.solver import BasisSpec, dispersion, find_lambda_c, greens_function, ground_energy, lowest_peak

OMEGA = 0.5
SPEC = BasisSpec(2, 4)  # cheap basis; (3, 9) is the reference used in the tests


def main():
    for lam in (0.8, 1.4):
        p = from_dimensionless({"lambda_ssh": lam}, omega=OMEGA)
        curve = dispersion(p, SPEC, k_count=9)
        rel = curve.energies - curve.energies.min()
        print(f"lambda_ssh = {lam}: K_GS = {curve.k_gs:.4f}, 1/m* = {curve.inv_mass:.4f}")
        for k, e in zip(curve.k_grid, rel):
            print(f"   k = {k:6.4f}  E - E_min = {e:8.5f}")

    p0 = from_dimensionless({"lambda_ssh": 0.0}, omega=OMEGA)
    lam_c = find_lambda_c(p0, SPEC, 0.25, 1.75, tol=0.005)
    print(f"\ntransition at (M, N) = ({SPEC.M}, {SPEC.N}): lambda_c = {lam_c:.4f}")

    p = from_dimensionless({"lambda_ssh": 0.6}, omega=OMEGA, ring_size=16)
    w = np.linspace(-8, 12, 20001)
    sl = greens_function(p, SPEC, math.pi / 4, w, eta=0.05)
    print(f"\nA(k = pi/4, w): weight {sl.weight():.4f}, lowest peak {lowest_peak(sl):.4f}, "
          f"eigensolver {ground_energy(p, SPEC, math.pi / 4):.4f}")


if __name__ == "__main__":
    main()
