"""Transition curves and physical sanity checks on surrogate dispersions."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..solver import BracketError, DispersionCurve, bisect_transition, curve_from_energies

__all__ = ["TransitionResult", "surrogate_dispersion", "surrogate_transition_curve", "bandwidth_check",
           "as_energy_fn"]


def as_energy_fn(model, inputs=("omega", "lambda_ssh", "k"), fixed: dict | None = None):
    """Adapt a fitted GP or NARGP stack to ``f(omega, lam, k_array) -> energies``.

    ``inputs`` lists the model's input columns in order; omitted physical
    variables are simply not passed to the model.
    """
    predict = model.predict_mean if hasattr(model, "predict_mean") else (lambda X: model.predict(X)[0])

    def energy(omega, lam, ks):
        ks = np.asarray(ks, dtype=float)
        vals = {"omega": np.full_like(ks, omega), "lambda_ssh": np.full_like(ks, lam), "k": ks}
        for name, v in (fixed or {}).items():
            vals[name] = np.full_like(ks, v)
        return predict(np.column_stack([vals[n] for n in inputs]))

    return energy


def surrogate_dispersion(energy_fn, omega: float, lam: float, k_grid) -> DispersionCurve:
    k_grid = np.asarray(k_grid, dtype=float)
    return curve_from_energies(k_grid, energy_fn(omega, lam, k_grid), omega=omega, lambda_ssh=lam)


@dataclass
class TransitionResult:
    omega: float
    lambda_c: float | None
    tol: float
    table: list = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.lambda_c is not None


def surrogate_transition_curve(model, omega_list, lambda_grid, k_grid, tol: float = 0.005,
                               inputs=("omega", "lambda_ssh", "k"), fixed: dict | None = None):
    """lambda_c(omega) read off surrogate dispersions.

    For each omega the band is rebuilt on ``k_grid`` at every ``lambda_grid``
    value, K_GS is refined as for solver curves, and the first grid interval
    where K_GS crosses one k-step is bisected down to ``tol``. ``lambda_c``
    is ``None`` where ``lambda_grid`` brackets no transition.
    ``model`` may be a fitted GP, a NARGP stack or an energy callable.
    """
    energy_fn = model if callable(model) and not hasattr(model, "predict") else as_energy_fn(model, inputs, fixed)
    k_grid = np.asarray(k_grid, dtype=float)
    step = float(k_grid[1] - k_grid[0])
    out = []
    for omega in omega_list:
        table = []
        for lam in lambda_grid:
            c = surrogate_dispersion(energy_fn, omega, lam, k_grid)
            table.append((float(lam), c.k_gs, c.inv_mass))
        lam_c = None
        moved = [row[1] > step + 1e-12 for row in table]
        for i in range(len(moved) - 1):
            if not moved[i] and moved[i + 1]:
                def kgs_of(lam):
                    return surrogate_dispersion(energy_fn, omega, lam, k_grid).k_gs, step
                try:
                    lam_c = bisect_transition(kgs_of, table[i][0], table[i + 1][0], tol)
                except BracketError:
                    lam_c = None
                break
        out.append(TransitionResult(float(omega), lam_c, tol, table))
    return out


def bandwidth_check(curve: DispersionCurve, omega: float, tol: float = 0.05):
    """``max_k |E(k) - E(0)| <= omega + tol``; returns ``(passed, omega - bandwidth)``."""
    margin = float(omega) - curve.bandwidth()
    return margin >= -tol, margin
