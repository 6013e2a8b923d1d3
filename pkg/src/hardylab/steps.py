"""Nonnegative step functions with finitely many cells."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .weights import Pieces, Weight


@dataclass(frozen=True, eq=False)
class StepFunction:
    """``values[i]`` on ``(edges[i], edges[i+1]]``, zero outside.

    The first edge may be 0; all other edges are positive and finite.
    """

    edges: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if e.ndim != 1 or e.size < 2 or v.size != e.size - 1:
            raise ValueError("need len(values) == len(edges) - 1 >= 1")
        if e[0] < 0 or not np.all(np.isfinite(e)) or np.any(np.diff(e) <= 0):
            raise ValueError("edges must be finite, nonnegative and strictly increasing")
        if np.any(~np.isfinite(v)) or np.any(v < 0):
            raise ValueError("values must be finite and nonnegative")
        for name, arr in (("edges", e), ("values", v)):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def support(self) -> tuple[float, float]:
        nz = np.nonzero(self.values > 0)[0]
        if nz.size == 0:
            return (0.0, 0.0)
        return float(self.edges[nz[0]]), float(self.edges[nz[-1] + 1])

    @property
    def is_zero(self) -> bool:
        return not np.any(self.values > 0)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        i = np.searchsorted(self.edges, t, side="left") - 1
        inside = (i >= 0) & (i < self.values.size)
        out = np.where(inside, self.values[np.clip(i, 0, self.values.size - 1)], 0.0)
        return out if out.ndim else float(out)

    @property
    def cumulative_at_edges(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(self.values * self.widths)])

    def primitive(self, t):
        """``int_0^t f`` (exact)."""
        t = np.asarray(t, dtype=float)
        F = self.cumulative_at_edges
        i = np.clip(np.searchsorted(self.edges, t, side="right") - 1, 0, self.values.size - 1)
        inside = np.clip(t, self.edges[0], self.edges[-1])
        out = F[i] + self.values[i] * (inside - self.edges[i])
        out = np.where(t <= self.edges[0], 0.0, np.where(t >= self.edges[-1], F[-1], out))
        return out if out.ndim else float(out)

    def cell_masses(self, v: Weight | Pieces) -> np.ndarray:
        """``int_cell v`` for each cell (exact for piecewise weights)."""
        pc = v.pieces if isinstance(v, Weight) else v
        return _cell_masses(pc, self.edges)

    def lp_weighted(self, p: float, v: Weight | Pieces) -> float:
        """``int f**p v`` (exact); zero cells contribute nothing."""
        m = self.cell_masses(v)
        pos = self.values > 0
        with np.errstate(invalid="ignore", over="ignore"):
            terms = self.values[pos] ** p * m[pos]
        return float(np.sum(terms))

    def scaled(self, c: float) -> "StepFunction":
        return StepFunction(self.edges, self.values * c)

    def to_json(self) -> dict:
        return {"edges": self.edges.tolist(), "values": self.values.tolist()}


def _cell_masses(pc: Pieces, edges: np.ndarray) -> np.ndarray:
    s = pc.split(edges)
    j0 = np.searchsorted(s.lo, edges[:-1], side="left")
    j1 = np.searchsorted(s.lo, edges[-1], side="left")
    return np.add.reduceat(s.full[:j1], j0)


def log_cells(lo: float, hi: float, n: int, include_zero: bool = False) -> np.ndarray:
    """Edges of ``n`` log-spaced cells on ``[lo, hi]`` (optionally from 0)."""
    if not (0 < lo < hi < math.inf) or n < 1:
        raise ValueError("need 0 < lo < hi < inf and n >= 1")
    e = np.geomspace(lo, hi, n + 1)
    return np.concatenate([[0.0], e]) if include_zero else e
