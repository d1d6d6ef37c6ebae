"""Piecewise-constant potential profiles supported on ``[0, dx]``.

Values are energies in eV (wells negative), widths in nm. The potential is
zero everywhere outside the support.

File format (JSON)::

    {"dx_nm": 5.0, "segments": [{"width_nm": 5.0, "value_eV": -0.3}]}
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

WIDTH_RTOL = 1e-9


class PotentialFormatError(ValueError):
    """Malformed potential file content."""


@dataclass(frozen=True, init=False)
class Potential:
    """Ordered ``(width, value)`` segments starting at x = 0."""

    segments: tuple[tuple[float, float], ...]
    dx: float

    def __init__(self, segments: Iterable[Sequence[float]], dx: float | None = None):
        segs = tuple((float(w), float(v)) for w, v in segments)
        if not segs:
            raise ValueError("potential needs at least one segment")
        for i, (w, v) in enumerate(segs):
            if not (math.isfinite(w) and w > 0):
                raise ValueError(f"segment {i}: width must be positive and finite, got {w!r}")
            if not math.isfinite(v):
                raise ValueError(f"segment {i}: value must be finite, got {v!r}")
        total = math.fsum(w for w, _ in segs)
        if dx is None:
            dx = total
        dx = float(dx)
        if not (math.isfinite(dx) and dx > 0):
            raise ValueError(f"dx must be positive and finite, got {dx!r}")
        if abs(total - dx) > WIDTH_RTOL * dx:
            raise ValueError(f"segment widths sum to {total!r}, expected dx = {dx!r}")
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "dx", dx)

    @property
    def widths(self) -> np.ndarray:
        return np.array([w for w, _ in self.segments])

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.segments])

    @property
    def boundaries(self) -> np.ndarray:
        """Segment edges ``0 = x_0 < x_1 < ... < x_n`` with ``x_n`` forced to dx."""
        edges = np.concatenate(([0.0], np.cumsum(self.widths)))
        edges[-1] = self.dx
        return edges

    @property
    def min_value(self) -> float:
        return min(v for _, v in self.segments)

    @property
    def area(self) -> float:
        """Integral of the potential, eV nm."""
        return math.fsum(w * v for w, v in self.segments)

    def is_symmetric(self, rtol: float = 1e-12) -> bool:
        segs = self.segments
        for (w1, v1), (w2, v2) in zip(segs, reversed(segs)):
            if abs(w1 - w2) > rtol * self.dx:
                return False
            if abs(v1 - v2) > rtol * max(abs(v1), abs(v2), 1e-300):
                return False
        return True

    def __call__(self, x):
        """Potential value at ``x``; segment edges take the right-hand value."""
        x = np.asarray(x, dtype=float)
        edges = self.boundaries
        idx = np.searchsorted(edges, x, side="right") - 1
        inside = (x >= 0) & (x < self.dx)
        vals = self.values[np.clip(idx, 0, len(self.segments) - 1)]
        out = np.where(inside, vals, 0.0)
        return out if out.ndim else float(out)


def square_well(depth: float, dx: float) -> Potential:
    """Single segment of value ``-depth`` over width ``dx``."""
    if not (math.isfinite(depth) and depth > 0):
        raise ValueError(f"depth must be positive, got {depth!r}")
    if not (math.isfinite(dx) and dx > 0):
        raise ValueError(f"dx must be positive, got {dx!r}")
    return Potential([(dx, -depth)], dx)


def delta_like_well(alpha: float, dx: float) -> Potential:
    """Narrow square well of fixed area ``alpha`` (eV nm), depth ``alpha/dx``."""
    if not (math.isfinite(alpha) and alpha > 0):
        raise ValueError(f"alpha must be positive, got {alpha!r}")
    return square_well(alpha / dx, dx)


def discretize_profile(samples: Sequence[Sequence[float]], n_segments: int) -> Potential:
    """Staircase approximation of a sampled profile ``f(x)`` on ``[0, dx]``.

    ``samples`` is a sequence of ``(x, f(x))`` sorted by ``x`` with the first
    point at 0; the last point sets ``dx``. Each of the ``n_segments`` equal
    steps takes the linearly interpolated value at its midpoint.
    """
    if n_segments < 1:
        raise ValueError(f"n_segments must be >= 1, got {n_segments!r}")
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 2:
        raise ValueError("samples must be a sequence of at least two (x, f(x)) pairs")
    x, f = arr[:, 0], arr[:, 1]
    if not np.all(np.isfinite(arr)):
        raise ValueError("samples must be finite")
    if np.any(np.diff(x) <= 0):
        raise ValueError("samples must be sorted by strictly increasing x")
    if x[0] != 0:
        raise ValueError(f"samples must start at x = 0, got x = {x[0]!r}")
    dx = float(x[-1])
    width = dx / n_segments
    mids = (np.arange(n_segments) + 0.5) * width
    vals = np.interp(mids, x, f)
    return Potential([(width, v) for v in vals], dx)


def from_function(f: Callable[[np.ndarray], np.ndarray], dx: float, n_segments: int,
                  n_samples: int | None = None) -> Potential:
    """Staircase of a callable profile, sampled densely then discretized."""
    n_samples = n_samples or max(4 * n_segments + 1, 257)
    x = np.linspace(0.0, dx, n_samples)
    return discretize_profile(np.column_stack([x, f(x)]), n_segments)


def potential_to_dict(p: Potential) -> dict:
    return {
        "dx_nm": p.dx,
        "segments": [{"width_nm": w, "value_eV": v} for w, v in p.segments],
    }


def serialize_potential(p: Potential) -> str:
    return json.dumps(potential_to_dict(p), indent=2)


def _number(obj, key: str, where: str) -> float:
    if key not in obj:
        raise PotentialFormatError(f"{where}: missing key {key!r}")
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise PotentialFormatError(f"{where}.{key}: expected a number, got {val!r}")
    val = float(val)
    if not math.isfinite(val):
        raise PotentialFormatError(f"{where}.{key}: value must be finite, got {val!r}")
    return val


def potential_from_dict(obj) -> Potential:
    if not isinstance(obj, dict):
        raise PotentialFormatError("top level: expected an object")
    unknown = set(obj) - {"dx_nm", "segments"}
    if unknown:
        raise PotentialFormatError(f"top level: unknown key(s) {sorted(unknown)}")
    dx = _number(obj, "dx_nm", "top level")
    if not dx > 0:
        raise PotentialFormatError(f"dx_nm: must be positive, got {dx!r}")
    if "segments" not in obj:
        raise PotentialFormatError("top level: missing key 'segments'")
    raw = obj["segments"]
    if not isinstance(raw, list):
        raise PotentialFormatError("segments: expected a list")
    if not raw:
        raise PotentialFormatError("segments: list is empty")
    segs = []
    for i, seg in enumerate(raw):
        where = f"segments[{i}]"
        if not isinstance(seg, dict):
            raise PotentialFormatError(f"{where}: expected an object")
        unknown = set(seg) - {"width_nm", "value_eV"}
        if unknown:
            raise PotentialFormatError(f"{where}: unknown key(s) {sorted(unknown)}")
        w = _number(seg, "width_nm", where)
        if not w > 0:
            raise PotentialFormatError(f"{where}.width_nm: must be positive, got {w!r}")
        segs.append((w, _number(seg, "value_eV", where)))
    total = math.fsum(w for w, _ in segs)
    if abs(total - dx) > WIDTH_RTOL * dx:
        raise PotentialFormatError(
            f"dx_nm: {dx!r} does not match the sum of segment widths {total!r}"
        )
    return Potential(segs, dx)


def parse_potential(content: str) -> Potential:
    try:
        obj = json.loads(content)
    except json.JSONDecodeError as exc:
        raise PotentialFormatError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return potential_from_dict(obj)


def load_potential(path) -> Potential:
    with open(path, encoding="utf-8") as fh:
        return parse_potential(fh.read())
