"""Bloch-transformed Hamiltonian blocks in the variational basis.

With the electron at the origin of the relative frame, the momentum-k block
of the Hamiltonian splits into k-independent pieces::

    H(k) = omega * Nph + alpha_h * Xh + exp(-ik) * A + exp(+ik) * A^T
    A    = -t * Hop + alpha_ssh * Bond

where ``Hop`` moves the electron one site to the right, ``Bond`` does so
while displacing the two bond sites by ``X_0 - X_1`` (X = b + b^dagger),
and ``Xh`` is the on-site displacement ``X_0``. Left moves are the
Hermitian conjugates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from ..model import ModelParams
from .basis import BasisSpec, PhononConfig, build_basis, shift_config

__all__ = ["StructureOperators", "MomentumBlock", "structure_operators", "momentum_block", "ring_momenta"]


def ring_momenta(ring_size: int) -> np.ndarray:
    """Momenta ``2 pi m / L`` for ``m = 0..L/2``."""
    return 2.0 * np.pi * np.arange(ring_size // 2 + 1) / ring_size


def _displace(config: PhononConfig, site: int):
    """Yield ``(new_config, amplitude)`` for ``(b_site + b_site^dagger) |config>``."""
    occ = dict(config)
    n = occ.get(site, 0)
    up = dict(occ)
    up[site] = n + 1
    yield tuple(sorted(up.items())), math.sqrt(n + 1)
    if n:
        down = dict(occ)
        if n == 1:
            del down[site]
        else:
            down[site] = n - 1
        yield tuple(sorted(down.items())), math.sqrt(n)


@dataclass(frozen=True)
class StructureOperators:
    """Parameter-free sparse pieces of H(k) for one basis."""

    basis: tuple
    nph: np.ndarray
    xh: sp.csr_matrix
    hop: sp.csr_matrix
    bond: sp.csr_matrix

    @property
    def dim(self) -> int:
        return len(self.basis)


@lru_cache(maxsize=16)
def _structure(M: int, N: int, L: int) -> StructureOperators:
    basis = tuple(build_basis(BasisSpec(M, N), L))
    index = {c: i for i, c in enumerate(basis)}
    dim = len(basis)
    nph = np.array([sum(n for _, n in c) for c in basis], dtype=float)

    rows_h, cols_h, vals_h = [], [], []
    rows_t, cols_t = [], []
    rows_b, cols_b, vals_b = [], [], []
    for j, c in enumerate(basis):
        for c2, amp in _displace(c, 0):
            i = index.get(c2)
            if i is not None:
                rows_h.append(i); cols_h.append(j); vals_h.append(amp)
        # electron moves 0 -> +1; clouds keep their shape, so the shift stays in the basis
        rows_t.append(index[shift_config(c, 1, L)]); cols_t.append(j)
        for site, sign in ((0, 1.0), (1, -1.0)):
            for c2, amp in _displace(c, site):
                i = index.get(shift_config(c2, 1, L))
                if i is not None:
                    rows_b.append(i); cols_b.append(j); vals_b.append(sign * amp)

    def csr(r, c, v):
        return sp.csr_matrix((v, (r, c)), shape=(dim, dim), dtype=float)

    return StructureOperators(
        basis=basis,
        nph=nph,
        xh=csr(rows_h, cols_h, vals_h),
        hop=csr(rows_t, cols_t, np.ones(len(rows_t))),
        bond=csr(rows_b, cols_b, vals_b),
    )


def structure_operators(spec: BasisSpec, ring_size: int) -> StructureOperators:
    if spec.cloud_extent > ring_size:
        raise ValueError(f"cloud_extent M={spec.cloud_extent} exceeds ring_size L={ring_size}")
    return _structure(spec.cloud_extent, spec.max_phonons, int(ring_size))


@dataclass(frozen=True)
class MomentumBlock:
    """The Hamiltonian restricted to crystal momentum ``k`` and the variational basis."""

    k: float
    basis: tuple
    matrix: sp.csr_matrix

    @property
    def dim(self) -> int:
        return len(self.basis)

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v

    def is_real(self) -> bool:
        return self.matrix.dtype.kind == "f"


def momentum_block(p: ModelParams, spec: BasisSpec, k: float) -> MomentumBlock:
    """Assemble H(k). ``k`` must be one of the ring momenta ``2 pi m / L``."""
    L = p.ring_size
    m = k * L / (2.0 * np.pi)
    if abs(m - round(m)) > 1e-9:
        raise ValueError(f"k={k} is not a ring momentum 2*pi*m/{L}")
    ops = structure_operators(spec, L)
    a = (-p.t) * ops.hop + p.alpha_ssh * ops.bond
    diag = sp.diags(p.omega * ops.nph) + p.alpha_h * ops.xh
    m = int(round(m)) % L
    if m == 0:
        mat = diag + a + a.T
    elif 2 * m == L:
        mat = diag - a - a.T
    else:
        phase = np.exp(-1j * k)
        mat = diag + phase * a + np.conj(phase) * a.T.tocsr()
    return MomentumBlock(k=float(k), basis=ops.basis, matrix=sp.csr_matrix(mat))
