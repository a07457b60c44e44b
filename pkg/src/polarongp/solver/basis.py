"""Variational phonon-cloud basis with cloud-extent M and phonon-count N caps."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product

__all__ = ["BasisSpec", "PhononConfig", "VACUUM", "build_basis", "wrap_displacement", "shift_config"]

# A configuration is stored as a sorted tuple of (displacement, count) pairs,
# displacement measured from the electron on the ring, in [-L/2, L/2).
PhononConfig = tuple
VACUUM: PhononConfig = ()


@dataclass(frozen=True)
class BasisSpec:
    """Truncation of the phonon cloud.

    Parameters
    ----------
    cloud_extent : int
        M, the maximum width (in sites) of the window holding every phonon.
    max_phonons : int
        N, the maximum total number of phonons.
    """

    cloud_extent: int
    max_phonons: int

    def __post_init__(self):
        if self.cloud_extent < 0 or self.max_phonons < 0:
            raise ValueError("cloud_extent and max_phonons must be >= 0")

    @property
    def M(self) -> int:
        return self.cloud_extent

    @property
    def N(self) -> int:
        return self.max_phonons


def wrap_displacement(d: int, ring_size: int) -> int:
    half = ring_size // 2
    return (d + half) % ring_size - half


def shift_config(config: PhononConfig, s: int, ring_size: int) -> PhononConfig:
    """Relabel displacements after the electron moves by ``s`` sites."""
    return tuple(sorted((wrap_displacement(d - s, ring_size), n) for d, n in config))


def config_total(config: PhononConfig) -> int:
    return sum(n for _, n in config)


def _shapes(width: int, max_total: int):
    """Occupation vectors of length ``width`` with a nonzero first entry."""
    for first in range(1, max_total + 1):
        if width == 1:
            yield (first,)
            continue
        for rest in product(range(max_total - first + 1), repeat=width - 1):
            if first + sum(rest) <= max_total:
                yield (first, *rest)


@lru_cache(maxsize=64)
def _build_basis_cached(M: int, N: int, L: int) -> tuple:
    configs = {VACUUM}
    if M > 0 and N > 0:
        for shape in _shapes(M, N):
            for anchor in range(L):
                occ = {}
                for j, n in enumerate(shape):
                    if n:
                        occ[wrap_displacement(anchor + j, L)] = n
                configs.add(tuple(sorted(occ.items())))
    return tuple(sorted(configs, key=lambda c: (config_total(c), c)))


def build_basis(spec: BasisSpec, ring_size: int) -> list[PhononConfig]:
    """Enumerate every phonon configuration allowed by ``spec`` on a ring.

    The vacuum comes first; the rest are ordered by total phonon number and
    then lexicographically on their ``(displacement, count)`` pairs.

    >>> len(build_basis(BasisSpec(2, 2), 8))
    25
    """
    L = int(ring_size)
    if L < 4 or L % 2:
        raise ValueError(f"ring_size must be an even integer >= 4, got {ring_size}")
    if spec.cloud_extent > L:
        raise ValueError(f"cloud_extent M={spec.cloud_extent} exceeds ring_size L={L}")
    return list(_build_basis_cached(spec.cloud_extent, spec.max_phonons, L))
