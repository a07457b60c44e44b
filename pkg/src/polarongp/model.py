"""Hamiltonian parameters and dimensionless coupling conversions.

Energies are in units of the hopping ``t`` unless stated otherwise. The
canonical on-disk form is dimensionless::

    {"t": 1.0, "omega": 0.5, "lambda_ssh": 1.1, "lambda_h": 0.0, "ring_size": 32}
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Mapping

__all__ = [
    "ModelParams",
    "CouplingPoint",
    "to_dimensionless",
    "from_dimensionless",
    "params_from_dict",
    "params_to_dict",
    "model_kind",
]


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the electron-phonon Hamiltonian on a ring.

    Parameters
    ----------
    t : float
        Nearest-neighbour hopping amplitude. ``t = 0`` is the atomic limit.
    omega : float
        Dispersionless phonon frequency.
    alpha_ssh : float
        Amplitude of the bond (hopping-modulating) coupling.
    alpha_h : float
        Amplitude of the on-site (Holstein) coupling.
    ring_size : int
        Number of lattice sites L, even and at least 4.
    """

    t: float = 1.0
    omega: float = 1.0
    alpha_ssh: float = 0.0
    alpha_h: float = 0.0
    ring_size: int = 32

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be > 0, got {self.omega}")
        if self.t < 0:
            raise ValueError(f"t must be >= 0, got {self.t}")
        if self.alpha_ssh < 0 or self.alpha_h < 0:
            raise ValueError("coupling amplitudes must be >= 0")
        if int(self.ring_size) != self.ring_size or self.ring_size < 4 or self.ring_size % 2:
            raise ValueError(f"ring_size must be an even integer >= 4, got {self.ring_size}")

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class CouplingPoint:
    """Dimensionless couplings and adiabaticity ratio ``omega / 4t``."""

    lambda_ssh: float = 0.0
    lambda_h: float = 0.0
    adiabaticity: float = field(default=0.0)

    def __post_init__(self):
        if self.lambda_ssh < 0 or self.lambda_h < 0:
            raise ValueError("dimensionless couplings must be >= 0")
        if self.adiabaticity < 0:
            raise ValueError("adiabaticity must be >= 0")


def model_kind(p: ModelParams) -> str:
    """Return ``"ssh"``, ``"holstein"``, ``"mixed"`` or ``"free"``."""
    if p.alpha_ssh > 0 and p.alpha_h > 0:
        return "mixed"
    if p.alpha_ssh > 0:
        return "ssh"
    if p.alpha_h > 0:
        return "holstein"
    return "free"


def to_dimensionless(p: ModelParams) -> CouplingPoint:
    """Convert amplitudes to ``lambda_ssh = 2 a^2/(omega t)``, ``lambda_h = a^2/(2 omega t)``."""
    if p.t == 0:
        raise ZeroDivisionError(
            "dimensionless couplings are undefined at t = 0; "
            "call the solver directly with ModelParams for the atomic limit"
        )
    return CouplingPoint(
        lambda_ssh=2.0 * p.alpha_ssh**2 / (p.omega * p.t),
        lambda_h=p.alpha_h**2 / (2.0 * p.omega * p.t),
        adiabaticity=p.omega / (4.0 * p.t),
    )


def from_dimensionless(
    c: CouplingPoint | Mapping[str, float], t: float = 1.0, omega: float = 1.0, ring_size: int = 32
) -> ModelParams:
    """Inverse of :func:`to_dimensionless` at fixed ``t`` and ``omega``.

    ``c`` may also be a mapping with ``lambda_ssh`` / ``lambda_h`` keys; the
    adiabaticity carried by a :class:`CouplingPoint` is ignored in favour of
    the explicit ``omega``.
    """
    if isinstance(c, Mapping):
        lam_ssh = float(c.get("lambda_ssh", 0.0))
        lam_h = float(c.get("lambda_h", 0.0))
    else:
        lam_ssh, lam_h = c.lambda_ssh, c.lambda_h
    if lam_ssh < 0 or lam_h < 0:
        raise ValueError(f"negative coupling: lambda_ssh={lam_ssh}, lambda_h={lam_h}")
    if not (t > 0 and omega > 0):
        raise ValueError("t and omega must be > 0")
    return ModelParams(
        t=t,
        omega=omega,
        alpha_ssh=math.sqrt(lam_ssh * omega * t / 2.0),
        alpha_h=math.sqrt(2.0 * lam_h * omega * t),
        ring_size=int(ring_size),
    )


def params_from_dict(d: Mapping[str, Any]) -> ModelParams:
    """Read the dimensionless JSON parameter schema."""
    t = float(d.get("t", 1.0))
    omega = float(d["omega"])
    ring = int(d.get("ring_size", 32))
    return from_dimensionless(
        {"lambda_ssh": d.get("lambda_ssh", 0.0), "lambda_h": d.get("lambda_h", 0.0)},
        t=t, omega=omega, ring_size=ring,
    )


def params_to_dict(p: ModelParams) -> dict:
    c = to_dimensionless(p)
    return {
        "t": p.t,
        "omega": p.omega,
        "lambda_ssh": c.lambda_ssh,
        "lambda_h": c.lambda_h,
        "ring_size": p.ring_size,
    }
