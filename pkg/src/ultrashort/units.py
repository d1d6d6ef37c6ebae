"""Physical constants and unit conversions.

Energies are in eV, lengths in nm, decay constants in 1/nm and masses in
multiples of the electron mass. Everything downstream works with the
dimensionless pair

    z   = k * dx
    eps = E / (hbar^2 / (2 m dx^2))

so that ``eps = -z**2`` for a bound state of energy ``E``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# CODATA 2018 exact / recommended values (SI)
HBAR_SI = 1.054_571_817e-34  # J s
M_E_SI = 9.109_383_7015e-31  # kg
EV_SI = 1.602_176_634e-19  # J per eV

#: hbar^2 / (2 m_e) in eV nm^2 (= 0.0380998 eV nm^2)
HBAR2_OVER_2ME = HBAR_SI**2 / (2.0 * M_E_SI) / EV_SI * 1e18


@dataclass(frozen=True)
class PhysicalContext:
    """Particle mass and the derived kinetic scale.

    Parameters
    ----------
    mass : float
        Particle mass in units of the electron mass.
    """

    mass: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.mass) and self.mass > 0):
            raise ValueError(f"mass must be a positive finite number, got {self.mass!r}")

    @property
    def hbar2_over_2m(self) -> float:
        """hbar^2/(2m) in eV nm^2."""
        return HBAR2_OVER_2ME / self.mass


ELECTRON = PhysicalContext(1.0)


def _positive(name: str, value: float) -> None:
    if not (math.isfinite(value) and value > 0):
        raise ValueError(f"{name} must be positive and finite, got {value!r}")


def energy_scale(dx: float, ctx: PhysicalContext = ELECTRON) -> float:
    """Natural energy unit hbar^2/(2 m dx^2) in eV."""
    _positive("dx", dx)
    return ctx.hbar2_over_2m / (dx * dx)


def k_from_energy(energy: float, ctx: PhysicalContext = ELECTRON) -> float:
    """Decay constant sqrt(-2mE)/hbar in 1/nm for a bound energy E < 0 (eV)."""
    if not energy < 0:
        raise ValueError(f"energy must be negative for a bound state, got {energy!r}")
    return math.sqrt(-energy / ctx.hbar2_over_2m)


def energy_from_k(k: float, ctx: PhysicalContext = ELECTRON) -> float:
    """Bound-state energy (eV, negative) with decay constant k (1/nm)."""
    _positive("k", k)
    return -ctx.hbar2_over_2m * k * k


def energy_from_z(z: float, dx: float, ctx: PhysicalContext = ELECTRON) -> float:
    """|E| in eV for dimensionless decay ``z = k dx`` over a width ``dx`` (nm)."""
    _positive("z", z)
    _positive("dx", dx)
    return ctx.hbar2_over_2m * z * z / (dx * dx)


def z_from_energy(energy: float, dx: float, ctx: PhysicalContext = ELECTRON) -> float:
    _positive("dx", dx)
    return k_from_energy(energy, ctx) * dx


def to_dimensionless_energy(energy: float, dx: float, ctx: PhysicalContext = ELECTRON) -> float:
    return energy / energy_scale(dx, ctx)


def from_dimensionless_energy(eps: float, dx: float, ctx: PhysicalContext = ELECTRON) -> float:
    return eps * energy_scale(dx, ctx)
