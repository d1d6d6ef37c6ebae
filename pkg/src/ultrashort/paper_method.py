"""Approximate bound-state method for ultra-short potentials.

The wavefunction is matched to decaying exponentials on both sides of the
interval ``[0, dx]`` and the interior probability is expanded to second order
in ``z = k dx``. Normalization then reduces to a quadratic in ``z``,

    7 P z**2 + (4 P - 2) z + 2 P = 0,    P = psi(0)**2 dx,

whose discriminant caps ``P`` and, through the smaller root, caps ``|E|``.

Two energy caps are exposed and never merged:

* ``energy_bound_paper`` uses the constant ``(sqrt(14) - 1)/(7 - sqrt(14))``
  (~0.8414) as published;
* ``energy_bound_recomputed`` uses ``z_star**2 = 2/7``, which is what
  substituting ``P_max`` into the small root actually gives.

They differ by a factor ~2.945.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .units import ELECTRON, PhysicalContext, energy_scale

SQRT14 = math.sqrt(14.0)

#: Largest admissible P, root of 1 - 4P - 10P^2.
P_MAX = (SQRT14 - 2.0) / 10.0
# magnitude of the other (negative) root of the discriminant
_P_NEG = (SQRT14 + 2.0) / 10.0

#: Energy constant as printed, (sqrt(14) - 1) / (7 - sqrt(14)).
PRINTED_CONSTANT = (SQRT14 - 1.0) / (7.0 - SQRT14)
#: Energy constant from the double root at P_MAX: z_star^2 = 2/7.
RECOMPUTED_CONSTANT = 2.0 / 7.0
#: Double root of the quadratic at P_MAX.
Z_STAR = SQRT14 / 7.0

#: Product of the two roots, independent of P.
ROOT_PRODUCT = 2.0 / 7.0


class AnsatzError(ValueError):
    """The matched-exponential ansatz does not apply."""


class NonBindingError(AnsatzError):
    """Matching gave k <= 0, i.e. no decaying left tail."""

    def __init__(self, k: float):
        super().__init__(f"no decaying left tail (k = {k!r} <= 0)")
        self.k = k


def decay_constant_from_match(psi0: float, dpsi0: float) -> float:
    """Decay constant k = psi'(0)/psi(0) from continuity at x = 0."""
    if psi0 == 0:
        raise AnsatzError("node at origin: ansatz inapplicable (psi(0) = 0)")
    k = dpsi0 / psi0
    if not k > 0:
        raise NonBindingError(k)
    return k


@dataclass(frozen=True)
class PaperAnsatz:
    """Boundary data of the matched solution.

    ``psi0`` and ``dpsi0`` are the interior wavefunction and its slope at
    ``x = 0`` (nm^-1/2 and nm^-3/2), ``dx`` the width and ``k`` the tail decay
    constant.
    """

    psi0: float
    dpsi0: float
    dx: float
    k: float

    def __post_init__(self):
        if not self.dx > 0:
            raise ValueError(f"dx must be positive, got {self.dx!r}")
        if not self.k > 0:
            raise NonBindingError(self.k)
        if self.psi0 == 0:
            raise AnsatzError("node at origin: ansatz inapplicable (psi(0) = 0)")
        expected = self.dpsi0 / self.psi0
        if abs(expected - self.k) > 1e-12 * max(abs(self.k), abs(expected)):
            raise ValueError(
                f"k = {self.k!r} inconsistent with dpsi0/psi0 = {expected!r}"
            )

    @classmethod
    def from_boundary(cls, psi0: float, dpsi0: float, dx: float) -> "PaperAnsatz":
        return cls(psi0, dpsi0, dx, decay_constant_from_match(psi0, dpsi0))

    @classmethod
    def from_decay(cls, psi0: float, k: float, dx: float) -> "PaperAnsatz":
        return cls(psi0, k * psi0, dx, k)

    @property
    def z(self) -> float:
        return self.k * self.dx

    @property
    def P(self) -> float:
        return self.psi0**2 * self.dx


def predicted_right_derivative(psi0: float, k: float, dx: float) -> float:
    """First-order estimate -k psi0 (1 + k dx) of psi'(dx)."""
    return -k * psi0 * (1.0 + k * dx)


def right_boundary_consistency(ansatz: PaperAnsatz) -> float:
    """Predicted psi'(dx) from expanding psi about x = 0 to first order."""
    return predicted_right_derivative(ansatz.psi0, ansatz.k, ansatz.dx)


class AssembledWavefunction:
    """Piecewise wavefunction: exponential tails glued to interior samples.

    The left tail ``psi0 exp(k x)`` is continuous with the interior by
    construction. The right tail is ``psi0 (1 + k dx) exp(-k (x - dx))``,
    which only matches the interior value at ``dx`` to O((k dx)^2); the
    mismatch is kept in :attr:`right_mismatch`.
    """

    def __init__(self, ansatz: PaperAnsatz, x: np.ndarray, psi: np.ndarray):
        self.ansatz = ansatz
        self.x = x
        self.psi = psi
        self.right_value = ansatz.psi0 * (1.0 + ansatz.z)
        self.right_mismatch = float(psi[-1] - self.right_value)

    def __call__(self, x):
        a = self.ansatz
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        left = x < 0
        right = x > a.dx
        inside = ~(left | right)
        out[left] = a.psi0 * np.exp(a.k * x[left])
        out[right] = self.right_value * np.exp(-a.k * (x[right] - a.dx))
        out[inside] = np.interp(x[inside], self.x, self.psi)
        return out if out.ndim else float(out)


def assemble_wavefunction(
    ansatz: PaperAnsatz,
    interior: tuple[np.ndarray, np.ndarray] | Callable[[np.ndarray], np.ndarray],
    n_samples: int = 201,
) -> AssembledWavefunction:
    """Glue exponential tails onto an interior solution on ``[0, dx]``.

    ``interior`` is either a pair ``(x, psi)`` of samples covering the
    interval or a callable evaluated on ``n_samples`` uniform points.
    """
    if callable(interior):
        x = np.linspace(0.0, ansatz.dx, n_samples)
        psi = np.asarray(interior(x), dtype=float)
    else:
        x, psi = (np.asarray(a, dtype=float) for a in interior)
    if x.shape != psi.shape or x.ndim != 1 or x.size < 2:
        raise ValueError("interior samples must be two 1-D arrays of equal length >= 2")
    if np.any(np.diff(x) <= 0):
        raise ValueError("interior sample positions must be strictly increasing")
    span_tol = 1e-9 * ansatz.dx
    if abs(x[0]) > span_tol or abs(x[-1] - ansatz.dx) > span_tol:
        raise ValueError(f"interior samples must cover [0, {ansatz.dx}], got [{x[0]}, {x[-1]}]")
    if abs(psi[0] - ansatz.psi0) > 1e-9 * max(1.0, abs(ansatz.psi0)):
        raise ValueError(
            f"interior(0) = {psi[0]!r} does not match psi0 = {ansatz.psi0!r}"
        )
    return AssembledWavefunction(ansatz, x, psi)


def interior_probability_ibp(psi_dx: float, dpsi_dx: float, dx: float) -> float:
    """dx psi(dx)^2 - dx^2 psi(dx) psi'(dx), integration by parts to second order."""
    if not dx > 0:
        raise ValueError(f"dx must be positive, got {dx!r}")
    return dx * psi_dx**2 - dx**2 * psi_dx * dpsi_dx


def interior_probability_approx(psi0_sq: float, k: float, dx: float) -> float:
    """Second-order interior probability dx psi(0)^2 (1 + 3 k dx)."""
    if not psi0_sq > 0:
        raise ValueError(f"psi0_sq must be positive, got {psi0_sq!r}")
    if not k >= 0:
        raise ValueError(f"k must be non-negative, got {k!r}")
    if not dx > 0:
        raise ValueError(f"dx must be positive, got {dx!r}")
    return dx * psi0_sq * (1.0 + 3.0 * k * dx)


def normalization_residual(P: float, z: float) -> float:
    """Total probability minus one for the matched solution at (P, z).

    Vanishes exactly on the roots of ``7 P z^2 + (4 P - 2) z + 2 P``.
    """
    if not P > 0:
        raise ValueError(f"P must be positive, got {P!r}")
    if not z > 0:
        raise ValueError(f"z must be positive, got {z!r}")
    tails = P / (2.0 * z) * (2.0 + 2.0 * z + z * z)
    return tails + P * (1.0 + 3.0 * z) - 1.0


def discriminant(P):
    """Reduced discriminant 1 - 4P - 10P^2.

    Evaluated in factored form ``10 (P_MAX - P)(P + P_NEG)`` so that it is
    exactly zero at the floating-point ``P_MAX``.
    """
    return 10.0 * (P_MAX - P) * (P + _P_NEG)


@dataclass(frozen=True)
class PaperSolution:
    """Roots of the normalization quadratic for a given P.

    ``z_minus``/``z_plus`` are ``None`` when the discriminant is negative.
    """

    P: float
    discriminant: float
    z_minus: float | None = None
    z_plus: float | None = None

    @property
    def feasible(self) -> bool:
        return self.z_minus is not None


def quadratic_roots(P: float) -> PaperSolution:
    """Both roots of ``7 P z^2 + (4 P - 2) z + 2 P = 0``.

    The larger root is formed without cancellation (``4P - 2 < 0`` on the
    feasible range) and the smaller follows from the product ``2/7``.
    """
    if not P > 0:
        raise ValueError(f"P must be positive, got {P!r}")
    disc = discriminant(P)
    if disc < 0:
        return PaperSolution(P, disc)
    z_plus = (1.0 - 2.0 * P + math.sqrt(disc)) / (7.0 * P)
    z_minus = ROOT_PRODUCT / z_plus
    return PaperSolution(P, disc, z_minus, z_plus)


def physical_branch(P: float) -> float | None:
    """Smaller root z_minus, or ``None`` if P exceeds P_MAX."""
    return quadratic_roots(P).z_minus


def max_probability() -> float:
    return P_MAX


def energy_bound_paper(dx: float, ctx: PhysicalContext = ELECTRON) -> float:
    """|E| cap in eV with the printed constant (sqrt(14)-1)/(7-sqrt(14))."""
    return energy_scale(dx, ctx) * PRINTED_CONSTANT


def energy_bound_recomputed(dx: float, ctx: PhysicalContext = ELECTRON) -> float:
    """|E| cap in eV with the constant 2/7 from the double root."""
    return energy_scale(dx, ctx) * RECOMPUTED_CONSTANT


@dataclass(frozen=True)
class PaperBounds:
    p_max: float
    z_star: float
    e_bound_paper: float
    e_bound_recomputed: float
    dx: float

    @property
    def ratio(self) -> float:
        return self.e_bound_paper / self.e_bound_recomputed


def compute_bounds(dx: float, ctx: PhysicalContext = ELECTRON) -> PaperBounds:
    z_star = physical_branch(P_MAX)
    return PaperBounds(
        p_max=P_MAX,
        z_star=z_star,
        e_bound_paper=energy_bound_paper(dx, ctx),
        e_bound_recomputed=energy_bound_recomputed(dx, ctx),
        dx=dx,
    )
