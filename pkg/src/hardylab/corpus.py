"""Seeded random weights and step functions for the verification suites."""

from __future__ import annotations

import math

import numpy as np

from .functionals import compute_V
from .steps import StepFunction
from .weights import Exponential, Exponents, PiecewisePower, Power


def random_piecewise_power(rng: np.random.Generator, p: float, max_pieces: int = 4) -> PiecewisePower:
    """A piecewise power weight whose ``V`` is finite near 0.

    The first piece has exponent in ``[-1, 0]``, which keeps ``v^(1-p')``
    integrable at 0 for every ``p > 1`` and ``1/v`` bounded there for ``p = 1``.
    """
    n = int(rng.integers(1, max_pieces + 1))
    cuts = np.sort(np.exp(rng.uniform(math.log(1e-2), math.log(1e2), n - 1)))
    edges = np.concatenate([[0.0], cuts, [math.inf]])
    rows = []
    for j in range(n):
        a = float(rng.uniform(-1.0, 0.0)) if j == 0 else float(rng.uniform(-2.0, 2.0))
        c = float(math.exp(rng.uniform(math.log(0.1), math.log(10.0))))
        rows.append((float(edges[j]), float(edges[j + 1]), c, a))
    return PiecewisePower(tuple(rows))


def random_step(rng: np.random.Generator, max_cells: int = 6) -> StepFunction:
    n = int(rng.integers(1, max_cells + 1))
    edges = np.sort(np.exp(rng.uniform(math.log(1e-2), math.log(1e2), n + 1)))
    while np.any(np.diff(edges) <= 0):
        edges = np.sort(np.exp(rng.uniform(math.log(1e-2), math.log(1e2), n + 1)))
    vals = rng.uniform(0.0, 2.0, n) * (rng.uniform(size=n) > 0.2)
    if not vals.any():
        vals[0] = 1.0
    return StepFunction(edges, vals)


def log_uniform(rng: np.random.Generator, lo: float, hi: float, size=None):
    return np.exp(rng.uniform(math.log(lo), math.log(hi), size))


def supremum_cases():
    """``(v, p, t)`` triples with ``0 < V(t) < inf``; several have ``p = 1``."""
    vs = {
        "one": Power(0.0),
        "sqrt": Power(0.5),
        "quarter": Power(0.25),
        "inv_sqrt": Power(-0.5),
        "decay": Exponential(-1.0),
        "piecewise": PiecewisePower(((0.0, 1.0, 1.0, 0.0), (1.0, math.inf, 2.0, 1.0))),
    }
    out = []
    for name, v in vs.items():
        for p in (1.0, 1.5, 2.0, 3.0):
            t = 2.0 if p != 3 else 0.5
            Vt = compute_V(v, Exponents(p, 1.0), t)
            if Vt.is_finite and Vt.value > 0:
                out.append((name, v, p, t))
    return out


def theta_cases():
    """``(label, v, w, p, q, theta, window)`` with finite ``B``."""
    chi = PiecewisePower(((1.0, 2.0, 1.0, 0.0),))
    out = []
    for p, q in ((2.0, 1.0), (3.0, 2.0), (3.0, 1.0), (4.0, 2.0), (2.0, 0.5)):
        for v, lab in ((Power(0.0), "one"), (Power(0.5), "sqrt")):
            r = p * q / (p - q)
            theta = r / (p / (p - 1)) + (1.0 if lab == "one" else 0.5)
            out.append((f"p{p:g}_q{q:g}_{lab}", v, chi, p, q, theta, (1e-3, 1e3)))
    return out
