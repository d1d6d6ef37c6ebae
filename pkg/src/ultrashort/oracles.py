"""Exact reference solvers for bound states of piecewise-constant wells.

Three independent routes:

* :func:`delta_well` -- closed form for an attractive delta potential;
* :func:`square_well_states` -- even/odd transcendental equations of the
  finite square well, solved by bisection;
* :func:`transfer_matrix_states` -- 2x2 transfer matrices across an arbitrary
  staircase, roots of the growing-tail coefficient found by scan + bisection.

Wavefunctions are represented exactly (trigonometric/hyperbolic pieces plus
exponential tails) by :class:`PiecewiseWavefunction`, which also integrates
``|psi|^2`` in closed form.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import simpson

from .potentials import Potential, square_well
from .units import ELECTRON, PhysicalContext, k_from_energy

THRESHOLD_ENERGY = 1e-12  # eV
MATCH_TOL = 1e-6  # relative log-derivative mismatch accepted at x = dx


class NoBoundStateWarning(UserWarning):
    pass


class BracketResolutionWarning(UserWarning):
    pass


# ---------------------------------------------------------------------------
# Segment propagators


def _propagator(energy, value: float, width, c: float):
    """Fundamental solutions across a constant segment.

    Returns ``(C, S, dC, dS)`` with ``psi(t) = psi0 C(t) + dpsi0 S(t)`` and
    ``psi'(t) = psi0 dC(t) + dpsi0 dS(t)``. ``energy`` and ``width`` broadcast.
    """
    s = (value - energy) / c
    kap = np.sqrt(np.abs(s))
    x = kap * width
    with np.errstate(over="ignore", invalid="ignore"):
        osc_C = np.cos(x)
        osc_S = width * np.sinc(x / np.pi)
        osc_dC = -kap * np.sin(x)
        ev_C = np.cosh(x)
        ev_S = np.where(x > 0, np.sinh(x) / np.where(kap > 0, kap, 1.0), width)
        ev_dC = kap * np.sinh(x)
    osc = s < 0
    C = np.where(osc, osc_C, ev_C)
    return C, np.where(osc, osc_S, ev_S), np.where(osc, osc_dC, ev_dC), C


def _scaled_propagator(energy, value: float, width: float, c: float):
    """:func:`_propagator` with evanescent pieces multiplied by exp(-kappa w).

    The positive factor leaves the sign of the propagated state intact while
    keeping deep or wide barriers finite.
    """
    s = (value - energy) / c
    kap = np.sqrt(np.abs(s))
    x = kap * width
    e2 = np.exp(-2.0 * x)
    half_sum = 0.5 * (1.0 + e2)
    half_diff = -0.5 * np.expm1(-2.0 * x)
    with np.errstate(invalid="ignore", divide="ignore"):
        ev_S = np.where(kap > 0, half_diff / np.where(kap > 0, kap, 1.0), width)
    ev_dC = kap * half_diff
    osc = s < 0
    osc_C = np.cos(x)
    C = np.where(osc, osc_C, half_sum)
    S = np.where(osc, width * np.sinc(x / np.pi), ev_S)
    dC = np.where(osc, -kap * np.sin(x), ev_dC)
    return C, S, dC, C


def _sq_moments(kap: float, osc: bool, t):
    """Integrals over [0, t] of C^2, S^2 and C*S for one segment."""
    t = np.asarray(t, dtype=float)
    if kap == 0.0:
        return t, t**3 / 3.0, t**2 / 2.0
    x = 2.0 * kap * t
    if osc:
        cc = t / 2.0 + np.sin(x) / (4.0 * kap)
        cs = np.sin(kap * t) ** 2 / (2.0 * kap**2)
        series = t**3 / 3.0 - kap**2 * t**5 / 15.0
        exact = (x - np.sin(x)) / (4.0 * kap**3)
    else:
        cc = t / 2.0 + np.sinh(x) / (4.0 * kap)
        cs = np.sinh(kap * t) ** 2 / (2.0 * kap**2)
        series = t**3 / 3.0 + kap**2 * t**5 / 15.0
        exact = (np.sinh(x) - x) / (4.0 * kap**3)
    ss = np.where(x < 1e-2, series, exact)
    return cc, ss, cs


# ---------------------------------------------------------------------------
# Wavefunctions


class PiecewiseWavefunction:
    """Exact bound-state wavefunction of a piecewise-constant potential.

    Stores ``psi`` and ``psi'`` at every segment edge. Left of the support the
    solution is ``psi(0) exp(k x)``; right of it, ``psi(dx) exp(-k (x - dx))``.
    A support with no segments (``edges == [0]``) gives the delta-well shape.
    """

    def __init__(self, edges, values, psi, dpsi, k: float, energy: float, c: float):
        self.edges = np.asarray(edges, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.psi = np.asarray(psi, dtype=float)
        self.dpsi = np.asarray(dpsi, dtype=float)
        self.k = float(k)
        self.energy = float(energy)
        self.c = float(c)

    @classmethod
    def from_potential(cls, p: Potential, energy: float,
                       ctx: PhysicalContext = ELECTRON) -> "PiecewiseWavefunction":
        """Propagate a unit decaying left tail across ``p`` and normalize."""
        c = ctx.hbar2_over_2m
        k = k_from_energy(energy, ctx)
        psi = [1.0]
        dpsi = [k]
        for w, v in p.segments:
            C, S, dC, dS = (float(a) for a in _propagator(energy, v, w, c))
            a, b = psi[-1], dpsi[-1]
            psi.append(C * a + S * b)
            dpsi.append(dC * a + dS * b)
        wf = cls(p.boundaries, p.values, psi, dpsi, k, energy, c)
        scale = 1.0 / math.sqrt(wf.norm())
        wf.psi *= scale
        wf.dpsi *= scale
        return wf

    @property
    def dx(self) -> float:
        return float(self.edges[-1])

    def _segment(self, j: int):
        s = (self.values[j] - self.energy) / self.c
        return math.sqrt(abs(s)), s < 0

    def _eval(self, x, derivative: bool):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        k = self.k
        left = x < 0
        right = x >= self.dx
        if derivative:
            out[left] = k * self.psi[0] * np.exp(k * x[left])
            out[right] = -k * self.psi[-1] * np.exp(-k * (x[right] - self.dx))
        else:
            out[left] = self.psi[0] * np.exp(k * x[left])
            out[right] = self.psi[-1] * np.exp(-k * (x[right] - self.dx))
        if len(self.values):
            idx = np.clip(np.searchsorted(self.edges, x, side="right") - 1, 0, len(self.values) - 1)
            inside = ~(left | right)
            for j in np.unique(idx[inside]):
                m = inside & (idx == j)
                t = x[m] - self.edges[j]
                C, S, dC, dS = _propagator(self.energy, self.values[j], t, self.c)
                if derivative:
                    out[m] = dC * self.psi[j] + dS * self.dpsi[j]
                else:
                    out[m] = C * self.psi[j] + S * self.dpsi[j]
        return out if out.ndim else float(out)

    def __call__(self, x):
        return self._eval(x, derivative=False)

    def derivative(self, x):
        return self._eval(x, derivative=True)

    def _segment_integral(self, j: int, t0: float, t1: float) -> float:
        kap, osc = self._segment(j)
        A, B = self.psi[j], self.dpsi[j]
        w = self.edges[j + 1] - self.edges[j]
        if not osc and kap * w > 1.0:
            # psi = g exp(kap (t - w)) + d exp(-kap t): the growing part is read off
            # the right edge and the decaying part off the left edge, so neither
            # coefficient suffers the cancellation of the cosh/sinh moments
            g = 0.5 * (self.psi[j + 1] + self.dpsi[j + 1] / kap)
            d = 0.5 * (A - B / kap)
            grow = g * g * (math.exp(2 * kap * (t1 - w)) - math.exp(2 * kap * (t0 - w)))
            decay = d * d * (math.exp(-2 * kap * t0) - math.exp(-2 * kap * t1))
            cross = 2 * g * d * math.exp(-kap * w) * (t1 - t0)
            return float((grow + decay) / (2 * kap) + cross)
        total = 0.0
        for sign, t in ((1.0, t1), (-1.0, t0)):
            if t <= 0:
                continue
            cc, ss, cs = _sq_moments(kap, osc, t)
            total += sign * float(A * A * cc + B * B * ss + 2.0 * A * B * cs)
        return total

    def integral_sq(self, a: float, b: float) -> float:
        """Closed-form integral of psi^2 over [a, b] (infinite ends allowed)."""
        if b < a:
            raise ValueError(f"empty interval [{a}, {b}]")
        k, dx = self.k, self.dx
        total = 0.0
        if a < 0:
            hi = min(b, 0.0)
            total += self.psi[0] ** 2 * (math.exp(2 * k * hi) - math.exp(2 * k * a)) / (2 * k)
        if b > dx:
            lo = max(a, dx)
            total += self.psi[-1] ** 2 * (math.exp(-2 * k * (lo - dx)) - math.exp(-2 * k * (b - dx))) / (2 * k)
        for j in range(len(self.values)):
            x0, x1 = self.edges[j], self.edges[j + 1]
            lo, hi = max(a, x0), min(b, x1)
            if hi > lo:
                total += self._segment_integral(j, lo - x0, hi - x0)
        return total

    def norm(self) -> float:
        return self.integral_sq(-math.inf, math.inf)

    def count_nodes(self) -> int:
        """Sign changes of psi inside the support (tails have none)."""
        samples = [np.atleast_1d(self.psi[0])]
        for j in range(len(self.values)):
            kap, osc = self._segment(j)
            w = self.edges[j + 1] - self.edges[j]
            m = max(64, int(40 * kap * w / math.pi) + 2) if osc else 64
            x = np.linspace(self.edges[j], self.edges[j + 1], m)
            samples.append(np.atleast_1d(self(x)))
        psi = np.concatenate(samples)
        psi = psi[np.abs(psi) > 1e-12 * np.max(np.abs(psi))]
        return int(np.count_nonzero(np.diff(np.sign(psi)) != 0))


# ---------------------------------------------------------------------------
# States


@dataclass
class OracleState:
    """Exact bound state: energy (eV), ``z = k dx``, interior probability."""

    energy: float
    z: float
    p_inside: float
    parity: str
    method: str
    dx: float
    k: float
    nodes: int = 0
    threshold: bool = False
    wavefunction: Optional[PiecewiseWavefunction] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not self.energy < 0:
            raise ValueError(f"bound-state energy must be negative, got {self.energy!r}")
        if not 0 <= self.p_inside < 1:
            raise ValueError(f"p_inside out of range: {self.p_inside!r}")
        if self.parity not in ("even", "odd", "none"):
            raise ValueError(f"unknown parity {self.parity!r}")

    @property
    def energy_meV(self) -> float:
        return self.energy * 1e3


def delta_well(alpha: float, ctx: PhysicalContext = ELECTRON) -> OracleState:
    """Bound state of ``-alpha * delta(x)``: psi = sqrt(k) exp(-k|x|), k = alpha/(2c)."""
    if not (math.isfinite(alpha) and alpha > 0):
        raise ValueError(f"alpha must be positive, got {alpha!r}")
    c = ctx.hbar2_over_2m
    k = alpha / (2.0 * c)
    energy = -c * k * k
    root_k = math.sqrt(k)
    wf = PiecewiseWavefunction([0.0], [], [root_k], [k * root_k], k, energy, c)
    return OracleState(energy, 0.0, 0.0, "even", "delta", 0.0, k, 0, abs(energy) < THRESHOLD_ENERGY, wf)


def _bisect(f: Callable[[float], float], lo: float, hi: float, rtol: float = 0.0,
            max_iter: int = 400) -> float:
    """Bisection on a sign-changing bracket; stops at ``rtol`` or float resolution."""
    flo = f(lo)
    if flo == 0:
        return lo
    fhi = f(hi)
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ValueError(f"no sign change on [{lo}, {hi}]")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if rtol and hi - lo <= rtol * min(abs(lo), abs(hi)):
            break
    return 0.5 * (lo + hi)


def square_well_count(depth: float, dx: float, ctx: PhysicalContext = ELECTRON) -> int:
    """Number of bound states, 1 + floor(sqrt(v0)/pi) with v0 = depth dx^2/c."""
    v0 = depth * dx * dx / ctx.hbar2_over_2m
    return 1 + int(math.floor(math.sqrt(v0) / math.pi))


def square_well_states(depth: float, dx: float, ctx: PhysicalContext = ELECTRON) -> list[OracleState]:
    """All bound states of a square well of given depth (eV) and width (nm).

    With ``u = q dx/2`` and ``w = k dx/2`` on the circle ``u^2 + w^2 = R^2``,
    ``R^2 = depth dx^2 / (4c)``, even states solve ``u tan u = w`` and odd
    states ``-u cot u = w``. The root is bisected in the polar angle
    ``theta`` (``u = R cos theta``, ``w = R sin theta``) so that neither
    ``u`` nor ``w`` suffers cancellation near threshold.
    """
    if not (math.isfinite(depth) and depth > 0):
        raise ValueError(f"depth must be positive, got {depth!r}")
    if not (math.isfinite(dx) and dx > 0):
        raise ValueError(f"dx must be positive, got {dx!r}")
    c = ctx.hbar2_over_2m
    R = math.sqrt(depth * dx * dx / (4.0 * c))
    potential = square_well(depth, dx)

    def even(theta):
        u, w = R * math.cos(theta), R * math.sin(theta)
        return u * math.tan(u) - w

    def odd(theta):
        u, w = R * math.cos(theta), R * math.sin(theta)
        return -u / math.tan(u) - w

    states = []
    n = 0
    while n * math.pi / 2 < R:
        # u runs over (n pi/2, (n+1) pi/2); the target function is negative at
        # the lower end and positive just below the tan/cot pole (or at u = R)
        func = even if n % 2 == 0 else odd
        u_lo = n * math.pi / 2
        u_hi = (n + 1) * math.pi / 2
        th_hi = math.acos(min(u_lo / R, 1.0))
        if u_hi < R:
            th_lo = math.acos(u_hi / R)
            while func(th_lo) <= 0:
                th_lo = math.nextafter(th_lo, math.inf)
        else:
            th_lo = 0.0
        theta = _bisect(func, th_lo, th_hi)
        u, w = R * math.cos(theta), R * math.sin(theta)
        k = 2.0 * w / dx
        energy = -c * k * k
        a = dx / 2.0
        q = 2.0 * u / dx
        if n % 2 == 0:
            inside = a + math.sin(2 * u) / (2 * q)
            outside = math.cos(u) ** 2 / k
        else:
            inside = a - math.sin(2 * u) / (2 * q)
            outside = math.sin(u) ** 2 / k
        p_inside = inside / (inside + outside)
        wf = PiecewiseWavefunction.from_potential(potential, energy, ctx)
        states.append(OracleState(
            energy=energy, z=2.0 * w, p_inside=p_inside,
            parity="even" if n % 2 == 0 else "odd", method="square-well",
            dx=dx, k=k, nodes=n, threshold=abs(energy) < THRESHOLD_ENERGY,
            wavefunction=wf,
        ))
        n += 1
    states.sort(key=lambda s: s.energy)
    return states


# ---------------------------------------------------------------------------
# Transfer matrix


@dataclass(frozen=True)
class EnergyScan:
    """Bracketing grid for the transfer-matrix root search.

    ``e_min``/``e_max`` bound ``|E|`` in eV; ``None`` picks
    ``c/(1e6 dx^2)`` and the deepest segment depth. ``rtol = 0`` bisects to
    float resolution, which ill-conditioned multi-segment states need for
    the tail log-derivatives to match to 1e-8.
    """

    n_points: int = 4096
    e_min: Optional[float] = None
    e_max: Optional[float] = None
    rtol: float = 0.0
    refine_points: int = 64


def _dip_crossing(g, lo: float, hi: float, n: int) -> Optional[float]:
    """Zoom in on the minimum of ``g`` over ``[lo, hi]``; return a point where
    ``g < 0`` if one is found before the interval reaches float resolution."""
    while True:
        x = np.linspace(lo, hi, n)
        y = g(x)
        j = int(np.argmin(y))
        if y[j] < 0:
            return float(x[j])
        lo, hi = x[max(j - 1, 0)], x[min(j + 1, n - 1)]
        if hi - lo <= 4 * np.finfo(float).eps * max(abs(lo), abs(hi)):
            return None


def matching_function(p: Potential, energies, ctx: PhysicalContext = ELECTRON) -> np.ndarray:
    """Growing-tail coefficient at ``x = dx`` for a unit decaying left tail.

    The state is renormalized after each segment, so only the sign and zeros
    are meaningful; the returned value lies in [-1/sqrt(2), 1/sqrt(2)].
    """
    E = np.atleast_1d(np.asarray(energies, dtype=float))
    c = ctx.hbar2_over_2m
    k = np.sqrt(-E / c)
    psi = np.ones_like(E)
    dpsi = k.copy()
    for w, v in p.segments:
        C, S, dC, dS = _scaled_propagator(E, v, w, c)
        psi, dpsi = C * psi + S * dpsi, dC * psi + dS * dpsi
        scale = np.hypot(psi, dpsi / k)
        psi = psi / scale
        dpsi = dpsi / scale
    return 0.5 * (psi + dpsi / k)


def transfer_matrix_states(p: Potential, ctx: PhysicalContext = ELECTRON,
                           search: EnergyScan = EnergyScan()) -> list[OracleState]:
    """All bound states of a piecewise-constant potential.

    Sign changes of :func:`matching_function` on a log-spaced ``|E|`` grid
    are bisected to ``search.rtol``; local minima of ``|f|`` without a sign
    change are minimized to catch closely spaced pairs, and the interval
    between the smallest scanned ``|E|`` and threshold is checked separately.
    """
    c = ctx.hbar2_over_2m
    depth = -p.min_value
    if depth <= 0:
        return []
    e_lo = search.e_min if search.e_min is not None else c / (1e6 * p.dx**2)
    e_hi = search.e_max if search.e_max is not None else depth
    e_lo = min(e_lo, e_hi / 10)
    mags = np.geomspace(e_lo, e_hi, search.n_points)
    E = -mags[::-1]  # ascending
    f = matching_function(p, E, ctx)

    def fs(e):
        return float(matching_function(p, e, ctx)[0])

    brackets = []
    for i in np.nonzero(np.sign(f[:-1]) * np.sign(f[1:]) <= 0)[0]:
        brackets.append((E[i], E[i + 1]))
    af = np.abs(f)
    for i in range(1, len(E) - 1):
        if af[i] < af[i - 1] and af[i] < af[i + 1] and f[i - 1] * f[i] > 0 and f[i] * f[i + 1] > 0:
            # a close root pair (tunnel splitting) shows up as a dip that
            # does not cross zero on the grid; a crossing minimum splits it
            x = _dip_crossing(lambda e: np.sign(f[i]) * matching_function(p, e, ctx),
                              E[i - 1], E[i + 1], search.refine_points)
            if x is not None:
                brackets.append((E[i - 1], x))
                brackets.append((x, E[i + 1]))
    # states shallower than the scan
    e_tiny = -min(THRESHOLD_ENERGY * 1e-3, e_lo * 1e-3)
    if fs(e_tiny) * f[-1] < 0:
        brackets.append((E[-1], e_tiny))

    roots = []
    for lo, hi in brackets:
        roots.append(_bisect(fs, lo, hi, rtol=search.rtol))
    roots = sorted(set(roots))
    # sign-change detection at a grid point can report a root twice
    dedup = []
    for r in roots:
        if dedup and abs(r - dedup[-1]) <= 1e-10 * abs(r):
            continue
        dedup.append(r)

    if not dedup:
        warnings.warn(f"no bound state found on |E| in [{e_lo:.3g}, {e_hi:.3g}] eV",
                      NoBoundStateWarning, stacklevel=2)
        return []

    symmetric = p.is_symmetric()
    states = []
    unresolved = []
    for energy in map(float, dedup):
        wf = PiecewiseWavefunction.from_potential(p, energy, ctx)
        k = wf.k
        # a root of a pair split below float resolution does not give a decaying
        # right tail; its reconstruction is meaningless
        a, b = wf.psi[-1], wf.dpsi[-1]
        if abs(b + k * a) > MATCH_TOL * math.hypot(k * a, b):
            unresolved.append(energy)
            continue
        nodes = wf.count_nodes()
        parity = ("even" if nodes % 2 == 0 else "odd") if symmetric else "none"
        states.append(OracleState(
            energy=energy, z=k * p.dx, p_inside=wf.integral_sq(0.0, p.dx),
            parity=parity, method="transfer-matrix", dx=p.dx, k=k, nodes=nodes,
            threshold=bool(abs(energy) < THRESHOLD_ENERGY), wavefunction=wf,
        ))
    if unresolved:
        warnings.warn(
            f"dropped {len(unresolved)} root(s) whose right tail does not decay "
            f"(near-degenerate levels below float resolution): {unresolved}",
            BracketResolutionWarning, stacklevel=2,
        )
    if not states:
        return []
    if [s.nodes for s in states] != list(range(len(states))):
        warnings.warn(
            "node counts " + str([s.nodes for s in states]) + " are not consecutive; "
            "adjacent roots may be unresolved, increase EnergyScan.n_points",
            BracketResolutionWarning, stacklevel=2,
        )
    return states


def interior_probability(wavefunction, dx: float, *, norm_tol: float = 1e-8) -> float:
    """Probability of finding the particle in ``[0, dx]``.

    Accepts a :class:`PiecewiseWavefunction` (closed-form integral) or a
    sampled pair ``(x, psi)`` on a uniform grid (composite Simpson). The input
    must be normalized to ``norm_tol``.
    """
    if isinstance(wavefunction, PiecewiseWavefunction):
        total = wavefunction.norm()
        if abs(total - 1.0) > norm_tol:
            raise ValueError(f"wavefunction not normalized: norm = {total!r}")
        return wavefunction.integral_sq(0.0, dx)
    x, psi = (np.asarray(a, dtype=float) for a in wavefunction)
    total = simpson(psi**2, x=x)
    if abs(total - 1.0) > norm_tol:
        raise ValueError(f"wavefunction not normalized: norm = {total!r}")
    h = x[1] - x[0]
    i0 = int(round((0.0 - x[0]) / h))
    i1 = int(round((dx - x[0]) / h))
    if abs(x[i0]) > 1e-9 * h or abs(x[i1] - dx) > 1e-9 * h:
        raise ValueError("sample grid must contain x = 0 and x = dx")
    return float(simpson(psi[i0:i1 + 1] ** 2, x=x[i0:i1 + 1]))
