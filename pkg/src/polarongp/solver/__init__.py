"""Variational exact diagonalization for lattice polarons on a ring."""

from .basis import BasisSpec, PhononConfig, VACUUM, build_basis
from .dispersion import (
    BracketError,
    DispersionCurve,
    bisect_transition,
    curve_from_energies,
    dispersion,
    find_lambda_c,
    ground_energy,
    ground_state_momentum,
    inverse_effective_mass,
    with_lambda_ssh,
)
from .eigen import ConvergenceError, lowest_eigenpair
from .greens import SpectralSlice, greens_function, lowest_peak
from .hamiltonian import MomentumBlock, momentum_block, ring_momenta

__all__ = [
    "BasisSpec", "PhononConfig", "VACUUM", "build_basis",
    "BracketError", "DispersionCurve", "bisect_transition", "curve_from_energies", "dispersion",
    "find_lambda_c", "ground_energy", "ground_state_momentum", "inverse_effective_mass", "with_lambda_ssh",
    "ConvergenceError", "lowest_eigenpair",
    "SpectralSlice", "greens_function", "lowest_peak",
    "MomentumBlock", "momentum_block", "ring_momenta",
]
