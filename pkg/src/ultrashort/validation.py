"""Compare the approximate bounds against exact ground states.

Each configuration yields a :class:`SweepRecord` holding the exact
``(E, z, P)`` of the ground state, the probability and energy caps, the
normalization residual of the approximate method evaluated at the exact
``(P, z)`` and the three pass/fail flags.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import fd_solver, oracles, paper_method
from .potentials import Potential, square_well
from .units import ELECTRON, PhysicalContext

CSV_COLUMNS = (
    "family", "depth_eV", "dx_nm", "mass_me", "method", "z_exact", "P_exact",
    "E_exact_meV", "P_max", "E_bound_paper_meV", "E_bound_recomp_meV",
    "residual_eq11", "p_bound_ok", "e_paper_ok", "e_recomp_ok",
)

METHODS = ("transfer-matrix", "finite-difference", "square-well")
_ALIASES = {"tm": "transfer-matrix", "fd": "finite-difference", "analytic": "square-well"}

#: z above which each energy cap fails, from |E| = c z^2/dx^2.
Z_LIMIT_RECOMPUTED = math.sqrt(paper_method.RECOMPUTED_CONSTANT)
Z_LIMIT_PAPER = math.sqrt(paper_method.PRINTED_CONSTANT)


class NoBoundStateError(RuntimeError):
    pass


@dataclass(frozen=True)
class StateSummary:
    """Exact data of one bound state, with the three flags."""

    index: int
    energy: float
    z: float
    p_inside: float
    p_bound_ok: bool
    e_paper_ok: bool
    e_recomp_ok: bool


@dataclass
class SweepRecord:
    family: str
    depth_eV: float
    dx_nm: float
    mass_me: float
    method: str
    z_exact: float = math.nan
    P_exact: float = math.nan
    E_exact_meV: float = math.nan
    P_max: float = paper_method.P_MAX
    E_bound_paper_meV: float = math.nan
    E_bound_recomp_meV: float = math.nan
    residual_eq11: float = math.nan
    p_bound_ok: bool = False
    e_paper_ok: bool = False
    e_recomp_ok: bool = False
    # not part of the CSV
    has_state: bool = True
    psi0_sq_dx: float = math.nan
    P_second_order: float = math.nan
    excited: tuple[StateSummary, ...] = field(default=(), repr=False)

    def row(self) -> dict:
        return {name: getattr(self, name) for name in CSV_COLUMNS}


def _method(name: str) -> str:
    name = _ALIASES.get(name, name)
    if name not in METHODS:
        raise ValueError(f"unknown solver {name!r}; choose from {METHODS + tuple(_ALIASES)}")
    return name


def _flags(energy: float, p_inside: float, bounds: paper_method.PaperBounds):
    return (
        p_inside <= bounds.p_max,
        abs(energy) <= bounds.e_bound_paper,
        abs(energy) <= bounds.e_bound_recomputed,
    )


def _exact_states(p: Potential, ctx: PhysicalContext, method: str, grid, scan):
    """List of (energy, z, p_inside, psi0) from the chosen solver."""
    if method == "transfer-matrix":
        states = oracles.transfer_matrix_states(p, ctx, scan)
        return [(s.energy, s.z, s.p_inside, float(s.wavefunction(0.0))) for s in states]
    if method == "square-well":
        if len(p.segments) != 1 or p.segments[0][1] >= 0:
            raise ValueError("square-well solver needs a single attractive segment")
        states = oracles.square_well_states(-p.segments[0][1], p.dx, ctx)
        return [(s.energy, s.z, s.p_inside, float(s.wavefunction(0.0))) for s in states]
    states = fd_solver.solve_bound_states(p, ctx, grid)
    return [(s.energy, s.z, s.p_inside, s.psi0) for s in states]


def evaluate_configuration(p: Potential, ctx: PhysicalContext = ELECTRON, method: str = "tm",
                           *, family: str = "custom", depth: Optional[float] = None,
                           grid: fd_solver.GridConfig = fd_solver.GridConfig(),
                           scan: oracles.EnergyScan = oracles.EnergyScan()) -> SweepRecord:
    """Ground-state record for one potential.

    Raises :class:`NoBoundStateError` if the solver finds no bound state.
    """
    method = _method(method)
    depth = -p.min_value if depth is None else depth
    states = _exact_states(p, ctx, method, grid, scan)
    if not states:
        raise NoBoundStateError(f"no bound state for {family} depth={depth} dx={p.dx}")
    bounds = paper_method.compute_bounds(p.dx, ctx)
    energy, z, p_in, psi0 = states[0]
    p_ok, paper_ok, recomp_ok = _flags(energy, p_in, bounds)
    k = z / p.dx
    excited = tuple(
        StateSummary(i, e, zz, pp, *_flags(e, pp, bounds))
        for i, (e, zz, pp, _) in enumerate(states[1:], start=1)
    )
    return SweepRecord(
        family=family, depth_eV=depth, dx_nm=p.dx, mass_me=ctx.mass, method=method,
        z_exact=z, P_exact=p_in, E_exact_meV=energy * 1e3, P_max=bounds.p_max,
        E_bound_paper_meV=bounds.e_bound_paper * 1e3,
        E_bound_recomp_meV=bounds.e_bound_recomputed * 1e3,
        residual_eq11=paper_method.normalization_residual(p_in, z),
        p_bound_ok=p_ok, e_paper_ok=paper_ok, e_recomp_ok=recomp_ok,
        psi0_sq_dx=psi0 * psi0 * p.dx,
        P_second_order=paper_method.interior_probability_approx(psi0 * psi0, k, p.dx),
        excited=excited,
    )


def value_grid(lo: float, hi: float, count: int, spacing: str = "log") -> np.ndarray:
    if count < 0:
        raise ValueError(f"count must be non-negative, got {count}")
    if count == 0:
        return np.empty(0)
    if spacing == "log":
        if not (lo > 0 and hi > 0):
            raise ValueError("log spacing needs positive endpoints")
        return np.geomspace(lo, hi, count)
    if spacing == "lin":
        return np.linspace(lo, hi, count)
    raise ValueError(f"spacing must be 'log' or 'lin', got {spacing!r}")


def parse_range(text: str) -> np.ndarray:
    """``"lo:hi:log:count"`` (or ``lin``) into an array of values."""
    parts = text.split(":")
    if len(parts) != 4:
        raise ValueError(f"range {text!r} must look like lo:hi:log|lin:count")
    lo, hi, spacing, count = parts
    try:
        lo_f, hi_f, n = float(lo), float(hi), int(count)
    except ValueError as exc:
        raise ValueError(f"range {text!r}: {exc}") from None
    return value_grid(lo_f, hi_f, n, spacing)


@dataclass(frozen=True)
class SweepSpec:
    """Configurations to evaluate.

    ``square-well``: every ``(depth, dx)`` pair from ``depths x dxs``.
    ``delta-limit``: fixed area ``alpha`` (eV nm), depth ``alpha/dx`` for
    each ``dx``.
    """

    family: str = "square-well"
    depths: Sequence[float] = ()
    dxs: Sequence[float] = (5.0,)
    alpha: Optional[float] = None

    def configurations(self) -> list[tuple[float, float]]:
        if self.family == "square-well":
            return [(float(d), float(w)) for w in self.dxs for d in self.depths]
        if self.family == "delta-limit":
            if self.alpha is None or not self.alpha > 0:
                raise ValueError("delta-limit sweep needs a positive alpha")
            return [(self.alpha / float(w), float(w)) for w in self.dxs]
        raise ValueError(f"unknown family {self.family!r}")


def default_sweep_spec() -> SweepSpec:
    return SweepSpec("square-well", tuple(value_grid(1e-4, 1.0, 20, "log")), (5.0,))


def delta_limit_spec(k_target: float, dxs: Iterable[float], ctx: PhysicalContext = ELECTRON) -> SweepSpec:
    """Narrowing wells whose delta limit has decay constant ``k_target``."""
    return SweepSpec("delta-limit", (), tuple(dxs), alpha=2.0 * ctx.hbar2_over_2m * k_target)


def sweep(spec: SweepSpec, ctx: PhysicalContext = ELECTRON, method: str = "tm", *,
          workers: int = 1, grid: fd_solver.GridConfig = fd_solver.GridConfig(),
          scan: oracles.EnergyScan = oracles.EnergyScan()) -> list[SweepRecord]:
    """One record per configuration, in input order."""
    method = _method(method)

    def run(cfg):
        depth, dx = cfg
        try:
            return evaluate_configuration(square_well(depth, dx), ctx, method,
                                          family=spec.family, depth=depth, grid=grid, scan=scan)
        except NoBoundStateError:
            return SweepRecord(spec.family, depth, dx, ctx.mass, method, has_state=False)

    configs = spec.configurations()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run, configs))
    return [run(cfg) for cfg in configs]


def convergence_order(pairs: Sequence[tuple[float, float]]) -> float:
    """Least-squares slope of log(error) against log(scale)."""
    if len(pairs) < 3:
        raise ValueError(f"need at least 3 (scale, error) pairs, got {len(pairs)}")
    arr = np.asarray(pairs, dtype=float)
    if not np.all(arr > 0):
        raise ValueError("scales and errors must be positive")
    return float(np.polyfit(np.log(arr[:, 0]), np.log(arr[:, 1]), 1)[0])


@dataclass(frozen=True)
class ValidityBoundary:
    """First z at which an energy cap fails, bracketed by the last z where it holds.

    ``found`` is False when the sweep does not straddle the transition.
    """

    found: bool
    bound: str
    z_star: float = math.nan
    z_below: float = math.nan

    @property
    def bracket(self) -> float:
        return self.z_star - self.z_below

    def describe(self) -> str:
        label = {"recomputed": "recomputed 2/7 bound", "paper": "printed-constant bound"}[self.bound]
        if not self.found:
            return f"{label}: boundary outside sweep"
        return (f"{label}: fails from z* = {self.z_star:.6g} "
                f"(holds at z = {self.z_below:.6g})")


def validity_boundary(records: Iterable[SweepRecord], bound: str = "recomputed") -> ValidityBoundary:
    attr = {"recomputed": "e_recomp_ok", "paper": "e_paper_ok"}[bound]
    recs = sorted((r for r in records if r.has_state), key=lambda r: r.z_exact)
    for prev, cur in zip(recs, recs[1:]):
        if getattr(prev, attr) and not getattr(cur, attr):
            return ValidityBoundary(True, bound, cur.z_exact, prev.z_exact)
    return ValidityBoundary(False, bound)


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".9g")
    return str(value)


def records_to_csv(records: Iterable[SweepRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow([_fmt(r.row()[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def write_csv(records: Iterable[SweepRecord], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(records_to_csv(records))


@dataclass(frozen=True)
class SweepSummary:
    count: int
    recomputed: ValidityBoundary
    paper: ValidityBoundary
    worst_residual: float


def summarize(records: Sequence[SweepRecord]) -> SweepSummary:
    residuals = [abs(r.residual_eq11) for r in records if r.has_state]
    return SweepSummary(
        count=len(records),
        recomputed=validity_boundary(records, "recomputed"),
        paper=validity_boundary(records, "paper"),
        worst_residual=max(residuals) if residuals else math.nan,
    )
