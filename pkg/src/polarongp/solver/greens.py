"""Single-particle Green's function by a Lanczos continued fraction.

G(k, w) = <vac| c_k [(w + i eta) - H]^-1 c_k^dagger |vac>, seeded with the
bare-electron (zero-phonon) state of the momentum block.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..model import ModelParams
from .basis import BasisSpec
from .hamiltonian import momentum_block

__all__ = ["SpectralSlice", "lanczos_coefficients", "continued_fraction", "greens_function", "lowest_peak"]


@dataclass
class SpectralSlice:
    k: float
    omega_grid: np.ndarray
    values: np.ndarray
    eta: float
    greens: np.ndarray = field(repr=False, default=None)
    depth: int = 0
    breakdown: bool = False

    def weight(self) -> float:
        return float(np.trapezoid(self.values, self.omega_grid))


def lanczos_coefficients(matrix, seed: np.ndarray, depth: int = 200, breakdown_tol: float = 1e-10):
    """Tridiagonal coefficients ``(a, b, broke_down)`` of ``matrix`` from ``seed``.

    ``b[j]`` couples Lanczos vectors ``j`` and ``j+1``; ``len(b) == len(a) - 1``.
    """
    v = seed.astype(complex) / np.linalg.norm(seed)
    v_prev = np.zeros_like(v)
    a, b = [], []
    beta = 0.0
    broke = False
    for j in range(min(depth, matrix.shape[0])):
        w = matrix @ v
        alpha = np.vdot(v, w).real
        a.append(alpha)
        w = w - alpha * v - beta * v_prev
        beta = np.linalg.norm(w)
        if j == min(depth, matrix.shape[0]) - 1:
            break
        if beta < breakdown_tol:
            broke = True
            break
        b.append(beta)
        v_prev, v = v, w / beta
    return np.array(a), np.array(b), broke


def continued_fraction(z: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Evaluate ``1 / (z - a0 - b0^2 / (z - a1 - ...))`` bottom-up."""
    z = np.asarray(z, dtype=complex)
    g = np.zeros_like(z)
    for j in range(len(a) - 1, -1, -1):
        tail = b[j] ** 2 * g if j < len(b) else 0.0
        g = 1.0 / (z - a[j] - tail)
    return g


def greens_function(
    p: ModelParams,
    spec: BasisSpec,
    k: float,
    omega_grid,
    eta: float = 0.05,
    depth: int = 200,
) -> SpectralSlice:
    """Spectral slice ``A(k, w) = -Im G / pi`` on ``omega_grid``."""
    if not eta > 0:
        raise ValueError("eta must be > 0")
    w = np.asarray(omega_grid, dtype=float)
    if np.any(np.diff(w) < 0):
        raise ValueError("omega_grid must be sorted")
    block = momentum_block(p, spec, k)
    seed = np.zeros(block.dim)
    seed[0] = 1.0  # basis index 0 is the vacuum
    a, b, broke = lanczos_coefficients(block.matrix, seed, depth=depth)
    g = continued_fraction(w + 1j * eta, a, b)
    values = np.clip(-g.imag / np.pi, 0.0, None)
    return SpectralSlice(k=float(k), omega_grid=w, values=values, eta=float(eta), greens=g,
                         depth=len(a), breakdown=broke)


def lowest_peak(sl: SpectralSlice) -> float:
    """Frequency of the lowest local maximum of A, refined by a parabola."""
    v, w = sl.values, sl.omega_grid
    for i in range(1, len(v) - 1):
        if v[i] >= v[i - 1] and v[i] > v[i + 1]:
            denom = v[i - 1] - 2 * v[i] + v[i + 1]
            shift = 0.5 * (v[i - 1] - v[i + 1]) / denom if denom < 0 else 0.0
            return float(w[i] + shift * (w[i + 1] - w[i]))
    return float(w[int(np.argmax(v))])
