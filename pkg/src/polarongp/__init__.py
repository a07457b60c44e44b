"""Polaron band structures from variational exact diagonalization, and GP surrogates that extrapolate them.

Subpackages
-----------
solver
    Momentum-resolved ground states of the SSH/Holstein polaron on a ring.
gp
    Exact GP regression with composable kernels.
kernelsearch
    Greedy BIC-scored kernel composition.
multifid
    Nonlinear auto-regressive multi-fidelity stacks.
harness
    Designs, datasets, experiments and file I/O.
"""

__version__ = "0.1.0"

from .model import CouplingPoint, ModelParams, from_dimensionless, to_dimensionless  # noqa: E402

__all__ = ["__version__", "ModelParams", "CouplingPoint", "to_dimensionless", "from_dimensionless"]
