"""Finite-difference bound states on a truncated domain.

The Hamiltonian ``-c psi'' + U psi`` (``c = hbar^2/2m``) is discretized with
the three-point stencil on a uniform grid with Dirichlet walls at both ends.
Eigenvalues below zero come from Sturm-sequence bisection on the symmetric
tridiagonal matrix, eigenvectors from shifted inverse iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional

import numba
import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from .potentials import Potential
from .units import ELECTRON, PhysicalContext

ALIGN_RTOL = 1e-8  # of h


class GridAlignmentError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual norm {residual:.3e})")
        self.residual = residual


class Tridiagonal(NamedTuple):
    diag: np.ndarray
    off: np.ndarray


@dataclass(frozen=True)
class Grid:
    """Uniform grid ``x_min + i h``, ``i = 0..n-1``; psi vanishes at both ends."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"grid needs at least 3 points, got {self.n}")
        if not self.x_min < self.x_max:
            raise ValueError(f"empty grid [{self.x_min}, {self.x_max}]")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def points(self) -> np.ndarray:
        return self.x_min + self.h * np.arange(self.n)

    def index_of(self, x: float) -> int:
        """Index of the node at ``x``; raises if ``x`` is not on the grid."""
        h = self.h
        i = int(round((x - self.x_min) / h))
        if not 0 <= i < self.n or abs(self.x_min + i * h - x) > ALIGN_RTOL * h:
            raise GridAlignmentError(f"x = {x!r} is not a grid node (h = {h!r})")
        return i

    @classmethod
    def aligned(cls, dx: float, cells: int, pad: float) -> "Grid":
        """Grid with ``cells`` intervals across ``[0, dx]`` and at least
        ``pad`` of free space on each side."""
        h = dx / cells
        n_pad = max(1, math.ceil(pad / h - 1e-9))
        return cls(-n_pad * h, dx + n_pad * h, cells + 2 * n_pad + 1)


@dataclass(frozen=True)
class GridConfig:
    """Grid policy for :func:`solve_bound_states`.

    Defaults: ``h <= dx/points_per_dx`` and ``h <= kh_max/k_est``, padding
    ``max(pad_factor/k_est, pad_factor dx)`` with ``k_est`` from the deepest
    segment. With ``adapt_padding`` the padding is then grown to
    ``pad_factor/k`` of the shallowest state found. ``n`` and ``pad``
    override the policy.
    """

    n: Optional[int] = None
    pad: Optional[float] = None
    points_per_dx: int = 200
    kh_max: float = 0.05
    pad_factor: float = 10.0
    adapt_padding: bool = True
    tol: Optional[float] = None
    seed: int = 0


@dataclass
class BoundState:
    """Finite-difference eigenpair.

    ``samples`` is psi on ``x`` with trapezoid norm 1; ``k_fit`` is the decay
    constant fitted to the right tail.
    """

    index: int
    energy: float
    x: np.ndarray = field(repr=False)
    samples: np.ndarray = field(repr=False)
    p_inside: float
    k_fit: float
    dx: float
    hbar2_over_2m: float = field(default=ELECTRON.hbar2_over_2m, repr=False)

    @property
    def k(self) -> float:
        return math.sqrt(-self.energy / self.hbar2_over_2m)

    @property
    def z(self) -> float:
        return self.k * self.dx

    @property
    def psi0(self) -> float:
        h = self.x[1] - self.x[0]
        return float(self.samples[int(round(-self.x[0] / h))])


# ---------------------------------------------------------------------------
# Sturm sequences


@numba.njit(cache=True)
def _sturm_count(diag, off2, sigma, pivmin):
    count = 0
    d = diag[0] - sigma
    if abs(d) <= pivmin:
        d = -pivmin
    if d < 0:
        count += 1
    for i in range(1, diag.shape[0]):
        d = diag[i] - sigma - off2[i - 1] / d
        if abs(d) <= pivmin:
            d = -pivmin
        if d < 0:
            count += 1
    return count


@numba.njit(cache=True)
def _bisect_eigenvalues(diag, off2, count, lo, hi, tol, pivmin):
    out = np.empty(count)
    for j in range(count):
        a = lo
        b = hi
        while b - a > tol:
            mid = 0.5 * (a + b)
            if mid <= a or mid >= b:
                break
            if _sturm_count(diag, off2, mid, pivmin) > j:
                b = mid
            else:
                a = mid
        out[j] = 0.5 * (a + b)
        lo = a  # eigenvalues are ascending
    return out


def _pivmin(off: np.ndarray) -> float:
    return np.finfo(float).tiny * max(1.0, float(np.max(off**2)) if off.size else 1.0)


def gershgorin(tri: Tridiagonal) -> tuple[float, float]:
    d, e = tri.diag, np.abs(tri.off)
    r = np.zeros_like(d)
    r[:-1] += e
    r[1:] += e
    return float(np.min(d - r)), float(np.max(d + r))


def default_tolerance(tri: Tridiagonal) -> float:
    lo, hi = gershgorin(tri)
    return 4.0 * np.finfo(float).eps * max(abs(lo), abs(hi))


def sturm_count(tri: Tridiagonal, sigma: float) -> int:
    """Number of eigenvalues strictly below ``sigma``."""
    diag = np.ascontiguousarray(tri.diag, dtype=float)
    off = np.ascontiguousarray(tri.off, dtype=float)
    return int(_sturm_count(diag, off**2, float(sigma), _pivmin(off)))


def lowest_eigenvalues(tri: Tridiagonal, count: int, tol: Optional[float] = None) -> np.ndarray:
    """The ``count`` smallest eigenvalues by Sturm bisection to absolute ``tol``."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if count > len(tri.diag):
        raise ValueError(f"matrix of order {len(tri.diag)} has fewer than {count} eigenvalues")
    if tol is None:
        tol = default_tolerance(tri)
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol!r}")
    lo, hi = gershgorin(tri)
    diag = np.ascontiguousarray(tri.diag, dtype=float)
    off = np.ascontiguousarray(tri.off, dtype=float)
    return _bisect_eigenvalues(diag, off**2, count, lo, hi, float(tol), _pivmin(off))


def eigenvector(tri: Tridiagonal, energy: float, *, seed: int = 0, max_iter: int = 50,
                tol: float = 1e-10) -> np.ndarray:
    """Unit 2-norm eigenvector for an eigenvalue estimate, by inverse iteration.

    Starts from a seeded random vector; stops when successive normalized
    iterates differ by at most ``tol``. The sign is fixed so that the
    largest-magnitude component is positive.
    """
    m = len(tri.diag)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(m)
    v /= np.linalg.norm(v)
    shift = float(energy)
    ab = np.zeros((3, m))
    ab[0, 1:] = tri.off
    ab[2, :-1] = tri.off
    eps_shift = np.finfo(float).eps * max(1.0, float(np.max(np.abs(tri.diag))))
    diff = math.inf
    for _ in range(max_iter):
        ab[1] = tri.diag - shift
        try:
            y = solve_banded((1, 1), ab, v, check_finite=False)
        except LinAlgError:
            shift += eps_shift
            continue
        if not np.all(np.isfinite(y)):
            shift += eps_shift
            continue
        y /= np.linalg.norm(y)
        if np.dot(y, v) < 0:
            y = -y
        diff = float(np.linalg.norm(y - v))
        v = y
        if diff <= tol:
            break
    else:
        raise ConvergenceError("inverse iteration did not converge", _residual(tri, v, energy))
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    return v


def _residual(tri: Tridiagonal, v: np.ndarray, energy: float) -> float:
    return float(np.linalg.norm(apply(tri, v) - energy * v) / np.linalg.norm(v))


def apply(tri: Tridiagonal, v: np.ndarray) -> np.ndarray:
    """Matrix-vector product with the tridiagonal operator."""
    out = tri.diag * v
    out[:-1] += tri.off * v[1:]
    out[1:] += tri.off * v[:-1]
    return out


# ---------------------------------------------------------------------------
# Hamiltonian


def build_hamiltonian(p: Potential, g: Grid, ctx: PhysicalContext = ELECTRON) -> Tridiagonal:
    """Three-point Hamiltonian on the interior nodes of ``g``.

    The end nodes carry the Dirichlet condition and are not unknowns. Every
    segment edge of ``p`` must sit on a node; a node on an edge takes the mean
    of the two adjacent potential values.
    """
    if not (g.x_min < 0 and p.dx < g.x_max):
        raise GridAlignmentError(
            f"grid [{g.x_min}, {g.x_max}] must strictly contain [0, {p.dx}]"
        )
    edges = p.boundaries
    idx = [g.index_of(x) for x in edges]
    c = ctx.hbar2_over_2m
    h = g.h
    x = g.points
    U = np.asarray(p(x), dtype=float)
    vals = np.concatenate(([0.0], p.values, [0.0]))
    for j, i in enumerate(idx):
        U[i] = 0.5 * (vals[j] + vals[j + 1])
    diag = 2.0 * c / h**2 + U[1:-1]
    off = np.full(g.n - 3, -c / h**2)
    return Tridiagonal(diag, off)


def _cells_multiple(p: Potential) -> int:
    """Smallest number of cells across ``dx`` that puts every edge on a node."""
    lcm = 1
    for b in p.boundaries[1:-1]:
        frac = Fraction(b / p.dx).limit_denominator(10**6)
        if abs(float(frac) * p.dx - b) > 1e-12 * p.dx:
            raise GridAlignmentError(f"segment edge {b!r} is not commensurate with dx = {p.dx!r}")
        lcm = math.lcm(lcm, frac.denominator)
    return lcm


def default_grid(p: Potential, ctx: PhysicalContext = ELECTRON, config: GridConfig = GridConfig(),
                 pad: Optional[float] = None) -> Grid:
    c = ctx.hbar2_over_2m
    depth = max(-p.min_value, 0.0)
    k_est = math.sqrt(depth / c) if depth > 0 else 1.0 / p.dx
    if config.n is not None:
        pad = config.pad if config.pad is not None else pad
        if pad is None:
            pad = max(config.pad_factor / k_est, config.pad_factor * p.dx)
        g = Grid(-pad, p.dx + pad, config.n)
        for b in p.boundaries:
            g.index_of(b)
        return g
    if pad is None:
        pad = config.pad if config.pad is not None else max(config.pad_factor / k_est,
                                                            config.pad_factor * p.dx)
    h_target = min(p.dx / config.points_per_dx, config.kh_max / k_est)
    step = _cells_multiple(p)
    cells = step * math.ceil(math.ceil(p.dx / h_target - 1e-9) / step)
    return Grid.aligned(p.dx, cells, pad)


def _fit_tail(x: np.ndarray, psi: np.ndarray, dx: float) -> float:
    floor = 1e-10 * np.max(np.abs(psi))
    h = x[1] - x[0]
    start = int(round((dx - x[0]) / h)) + 1
    above = np.abs(psi[start:]) > floor
    stop = start + (int(np.argmin(above)) if not above.all() else above.size)
    length = stop - start
    lo = start + length // 3
    hi = start + 2 * length // 3
    if hi - lo < 3:
        return math.nan
    slope = np.polyfit(x[lo:hi], np.log(np.abs(psi[lo:hi])), 1)[0]
    return float(-slope)


def solve_bound_states(p: Potential, ctx: PhysicalContext = ELECTRON,
                       config: GridConfig = GridConfig()) -> list[BoundState]:
    """All negative-energy eigenpairs, ordered by energy."""
    c = ctx.hbar2_over_2m
    grid = default_grid(p, ctx, config)
    for _ in range(8):
        tri = build_hamiltonian(p, grid, ctx)
        n_bound = sturm_count(tri, 0.0)
        if n_bound == 0:
            return []
        tol = config.tol if config.tol is not None else default_tolerance(tri)
        energies = lowest_eigenvalues(tri, n_bound, tol)
        if not config.adapt_padding or config.pad is not None or config.n is not None:
            break
        k_min = math.sqrt(-energies[-1] / c)
        need = config.pad_factor / k_min
        if need <= -grid.x_min * (1 + 1e-9):
            break
        grid = default_grid(p, ctx, config, pad=need * 1.05)

    x = grid.points
    h = grid.h
    i0, i1 = grid.index_of(0.0), grid.index_of(p.dx)
    states = []
    for index, energy in enumerate(energies):
        v = eigenvector(tri, energy, seed=config.seed)
        psi = np.zeros(grid.n)
        psi[1:-1] = v
        psi /= math.sqrt(np.trapezoid(psi**2, dx=h))
        p_in = float(np.trapezoid(psi[i0:i1 + 1] ** 2, dx=h))
        states.append(BoundState(index, float(energy), x, psi, p_in,
                                 _fit_tail(x, psi, p.dx), p.dx, c))
    return states
