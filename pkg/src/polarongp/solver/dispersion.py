"""Polaron band, ground-state momentum, effective mass and the critical coupling."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..model import ModelParams, from_dimensionless, to_dimensionless
from .basis import BasisSpec
from .eigen import lowest_eigenpair
from .hamiltonian import momentum_block, ring_momenta

__all__ = [
    "DispersionCurve",
    "BracketError",
    "ground_energy",
    "dispersion",
    "curve_from_energies",
    "ground_state_momentum",
    "inverse_effective_mass",
    "bisect_transition",
    "find_lambda_c",
    "with_lambda_ssh",
]


@dataclass
class DispersionCurve:
    """E_P(k) on a uniform grid in [0, pi] with derived band-minimum data."""

    k_grid: np.ndarray
    energies: np.ndarray
    k_gs: float = float("nan")
    inv_mass: float = float("nan")
    boundary_stencil: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def step(self) -> float:
        return float(self.k_grid[1] - self.k_grid[0])

    def bandwidth(self) -> float:
        return float(np.max(np.abs(self.energies - self.energies[0])))


class BracketError(ValueError):
    """The requested coupling interval does not bracket the K_GS transition."""


def ground_energy(p: ModelParams, spec: BasisSpec, k: float, tol: float = 1e-9) -> float:
    """Lowest eigenvalue of H(k) in the (M, N) variational space."""
    block = momentum_block(p, spec, k)
    energy, _ = lowest_eigenpair(block.matrix, tol=tol)
    return energy


def _stride(ring_size: int, k_count: int | None) -> int:
    half = ring_size // 2
    if k_count is None:
        return 1
    if k_count < 8:
        raise ValueError(f"k_count must be >= 8, got {k_count}")
    if (k_count - 1) > half or half % (k_count - 1):
        raise ValueError(
            f"k_count={k_count} is incompatible with ring_size={ring_size}: "
            f"k_count - 1 must divide L/2 = {half}"
        )
    return half // (k_count - 1)


def curve_from_energies(k_grid, energies, **meta) -> DispersionCurve:
    """Wrap sampled energies and fill ``k_gs`` / ``inv_mass``."""
    curve = DispersionCurve(np.asarray(k_grid, dtype=float), np.asarray(energies, dtype=float), meta=meta)
    curve.k_gs = ground_state_momentum(curve)
    curve.inv_mass, curve.boundary_stencil = inverse_effective_mass(curve, with_flag=True)
    return curve


def dispersion(p: ModelParams, spec: BasisSpec, k_count: int | None = None, tol: float = 1e-9) -> DispersionCurve:
    """Polaron band on the ring momenta in [0, pi].

    ``k_count`` defaults to ``L/2 + 1`` (every ring momentum); smaller values
    take every ``(L/2)/(k_count-1)``-th momentum and must divide evenly.
    """
    stride = _stride(p.ring_size, k_count)
    ks = ring_momenta(p.ring_size)[::stride]
    energies = [ground_energy(p, spec, k, tol=tol) for k in ks]
    return curve_from_energies(ks, energies, M=spec.cloud_extent, N=spec.max_phonons)


def _nearest_index(curve: DispersionCurve, k: float) -> int:
    return int(np.argmin(np.abs(curve.k_grid - k)))


def _touches(curve: DispersionCurve, k: float) -> bool:
    return abs(curve.k_grid[0] - k) < 1e-12 or abs(curve.k_grid[-1] - k) < 1e-12


def ground_state_momentum(curve: DispersionCurve) -> float:
    """Band minimum refined by a three-point parabola around the grid argmin.

    At k = 0 and k = pi the stencil is completed by inversion symmetry, which
    puts the vertex exactly on the boundary.
    """
    k, e = curve.k_grid, curve.energies
    if len(k) < 5:
        raise ValueError("need at least 5 grid points")
    h = k[1] - k[0]
    i = int(np.argmin(e))
    if i == 0 and abs(k[0]) < 1e-12:
        return 0.0
    if i == len(k) - 1 and abs(k[-1] - np.pi) < 1e-12:
        return float(np.pi)
    if i == 0 or i == len(k) - 1:
        return float(k[i])
    curv = e[i - 1] - 2.0 * e[i] + e[i + 1]
    if curv <= 0:
        return float(k[i])
    shift = 0.5 * h * (e[i - 1] - e[i + 1]) / curv
    return float(np.clip(k[i] + np.clip(shift, -h, h), 0.0, np.pi))


def inverse_effective_mass(curve: DispersionCurve, k_gs: float | None = None, with_flag: bool = False):
    """Second difference d^2E/dk^2 at the grid point nearest the band minimum.

    Returns ``1/m*`` or, with ``with_flag``, ``(1/m*, boundary_stencil_used)``.
    """
    k, e = curve.k_grid, curve.energies
    if k_gs is None:
        k_gs = curve.k_gs if math.isfinite(curve.k_gs) else ground_state_momentum(curve)
    h = k[1] - k[0]
    i = _nearest_index(curve, k_gs)
    flagged = False
    if 0 < i < len(k) - 1:
        val = (e[i - 1] - 2.0 * e[i] + e[i + 1]) / h**2
    elif i == 0 and abs(k[0]) < 1e-12:
        val = 2.0 * (e[1] - e[0]) / h**2
    elif i == len(k) - 1 and abs(k[-1] - np.pi) < 1e-12:
        val = 2.0 * (e[-2] - e[-1]) / h**2
    else:
        # one-sided second difference
        j = 0 if i == 0 else len(k) - 3
        val = (e[j] - 2.0 * e[j + 1] + e[j + 2]) / h**2
        flagged = True
    return (float(val), flagged) if with_flag else float(val)


def with_lambda_ssh(p: ModelParams, lam: float) -> ModelParams:
    """Copy of ``p`` at SSH coupling ``lam``, keeping t, omega and lambda_h."""
    lam_h = to_dimensionless(p).lambda_h
    return from_dimensionless({"lambda_ssh": lam, "lambda_h": lam_h}, t=p.t, omega=p.omega, ring_size=p.ring_size)


def bisect_transition(
    kgs_of: Callable[[float], tuple[float, float]],
    lambda_lo: float,
    lambda_hi: float,
    tol: float,
    trace: list | None = None,
) -> float:
    """Bisect the indicator ``K_GS(lambda) > threshold``.

    ``kgs_of(lam)`` returns ``(K_GS, threshold)``. Every evaluation is
    appended to ``trace`` as ``(lam, K_GS, threshold)`` when given.
    """
    if not tol > 0:
        raise ValueError("tol must be > 0")

    def moved(lam):
        kgs, thr = kgs_of(lam)
        if trace is not None:
            trace.append((lam, kgs, thr))
        return kgs > thr + 1e-12

    if moved(lambda_lo):
        raise BracketError(f"lambda_lo={lambda_lo}: K_GS already above threshold")
    if not moved(lambda_hi):
        raise BracketError(f"lambda_hi={lambda_hi}: K_GS has not moved off zero")
    lo, hi = float(lambda_lo), float(lambda_hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if moved(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def find_lambda_c(
    p_template: ModelParams,
    spec: BasisSpec,
    lambda_lo: float,
    lambda_hi: float,
    tol: float = 0.005,
    k_count: int | None = None,
    trace: list | None = None,
) -> float:
    """Critical SSH coupling where K_GS leaves zero, to bracket width ``tol``.

    The threshold is one k-grid step; ``trace`` collects
    ``(lambda_ssh, K_GS, inv_mass)`` for every dispersion evaluated.
    """

    def kgs_of(lam):
        curve = dispersion(with_lambda_ssh(p_template, lam), spec, k_count=k_count)
        if trace is not None:
            trace.append((lam, curve.k_gs, curve.inv_mass))
        return curve.k_gs, curve.step

    return bisect_transition(kgs_of, lambda_lo, lambda_hi, tol)
