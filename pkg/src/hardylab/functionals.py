"""The primitives V, W and the characterization functional A.

Conventions
-----------
* ``V(0) := 0``.  For ``p = 1`` the running supremum ``V`` may start at a
  positive value ``V(0+)``; the Stieltjes measure ``dV**r`` then has an atom
  of size ``V(0+)**r`` at 0, weighted by ``W(0) = int w``.
* ``0 * inf = 0`` wherever a zero weight meets an infinite primitive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import minimize_scalar

from .calculus import DivergenceSite, ExtendedValue, MonotoneEnvelope, integrate, stieltjes_integrate
from .errors import ConfigError, DegenerateWeight, RegimeMismatch, WindowTooSmall
from .steps import StepFunction
from .weights import Exponents, Pieces, Regime, Weight, weight_from_spec

__all__ = [
    "HardyInstance",
    "FunctionalResult",
    "PointwiseCheck",
    "compute_V",
    "compute_W",
    "envelope_V",
    "envelope_W",
    "compute_A",
    "mazya_rozin_A",
    "check_pointwise_bound",
    "check_change_of_variables",
]

DEFAULT_WINDOW = (1e-6, 1e6)
DEFAULT_SAMPLES = 512


@dataclass(frozen=True, eq=False)
class HardyInstance:
    v: Weight
    w: Weight
    e: Exponents

    @property
    def regime(self) -> Regime:
        return self.e.regime

    @classmethod
    def from_spec(cls, v, w, p, q) -> "HardyInstance":
        return cls(weight_from_spec(v), weight_from_spec(w), Exponents(p, q))

    @cached_property
    def prim(self) -> "Primitives":
        return Primitives(self.v, self.e)

    def V(self, t):
        return self.prim.V(t)

    def W(self, t):
        return _tail(self.w.pieces, t)

    @property
    def breakpoints(self) -> np.ndarray:
        return np.union1d(self.v.breakpoints, self.w.breakpoints)


def _tail(pc: Pieces, t):
    return pc.tail(t)


class Primitives:
    """V for a fixed ``(v, p)``: ``(int_0^t v^(1-p'))^(1/p')`` or a running sup."""

    def __init__(self, v: Weight, e: Exponents):
        self.e = e
        self.p1 = e.p == 1
        if self.p1:
            self.g = v.pieces.power(-1.0)
        else:
            self.u = v.pieces.power(1.0 - e.p_prime)

    def U(self, t):
        return self.u.cumulative(t)

    def V(self, t):
        if self.p1:
            t = np.asarray(t, dtype=float)
            out = np.where(t == 0, 0.0, self.g.running_sup(np.maximum(t, 0.0)))
            return out if out.ndim else float(out)
        with np.errstate(over="ignore"):
            return self.U(t) ** (1.0 / self.e.p_prime)

    def V_power(self, t, s: float):
        """``V(t)**s`` with ``V(0) = 0``."""
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            if self.p1:
                out = np.asarray(self.V(t), float) ** s
            else:
                out = np.asarray(self.U(t), float) ** (s / self.e.p_prime)
        return out if out.ndim else float(out)

    def V_power_density(self, t, s: float):
        """Density of the absolutely continuous part of ``d(V**s)``."""
        t = np.asarray(t, dtype=float)
        if self.p1:
            V = np.asarray(self.g.running_sup(t), float)
            d = self.g.running_sup_derivative(t)
            with np.errstate(all="ignore"):
                out = s * V ** (s - 1) * d
            return np.where((d == 0) | ~np.isfinite(V), 0.0, out)
        k = s / self.e.p_prime
        U = np.asarray(self.U(t), float)
        u = self.u(t)
        with np.errstate(all="ignore"):
            out = k * U ** (k - 1) * u
        return np.where((u == 0) | ~np.isfinite(U), 0.0, out)

    def V_power_jumps(self, s: float) -> list[tuple[float, float]]:
        if self.p1:
            return [(x, after**s - before**s) for x, before, after in self.g.running_sup_jumps()]
        out = []
        site = self.u.divergence_site(0.0, float(self.u.lo[-1]) + 1.0)
        if site == "AtZero":
            return [(0.0, math.inf)]
        # an infinite piece of u makes V jump to infinity at its start
        for j in np.nonzero(np.isinf(self.u.c))[0]:
            out.append((float(self.u.lo[j]), math.inf))
            break
        return out

    @property
    def kinks(self) -> np.ndarray:
        if self.p1:
            return np.union1d(self.g.breakpoints, self.g.running_sup_kinks())
        return self.u.breakpoints

    def site(self, t: float) -> DivergenceSite | None:
        if self.p1:
            head = self.g.running_sup(min(t, float(self.g.hi[0])) * 0.5)
            if math.isinf(head):
                return DivergenceSite.AT_ZERO
            return DivergenceSite.INTERIOR if math.isinf(self.g.running_sup(t)) else None
        s = self.u.divergence_site(0.0, t)
        return None if s is None else DivergenceSite(s)


def compute_V(v: Weight, e: Exponents, t: float) -> ExtendedValue:
    """``V(t)``; divergence is reported as an infinite value."""
    if not t > 0:
        raise ValueError("t must be positive")
    pr = Primitives(v, e)
    val = float(pr.V(t))
    if math.isinf(val):
        return ExtendedValue.infinite(pr.site(t) or DivergenceSite.INTERIOR)
    return ExtendedValue(val, 4 * np.finfo(float).eps * val)


def compute_W(w: Weight, t: float) -> ExtendedValue:
    """``W(t) = int_t^inf w``."""
    if not t >= 0:
        raise ValueError("t must be nonnegative")
    val = float(w.pieces.tail(t))
    if math.isinf(val):
        return ExtendedValue.infinite(w.pieces.divergence_site(t, math.inf) or "AtInfinity")
    return ExtendedValue(val, 4 * np.finfo(float).eps * val)


def _check_window(window, n_samples):
    lo, hi = (float(x) for x in window)
    if not (0 < lo < hi < math.inf):
        raise ConfigError(f"window must satisfy 0 < lo < hi < inf, got {window}")
    if n_samples < 16:
        raise ConfigError("n_samples must be at least 16")
    return lo, hi


def envelope_V(v: Weight, e: Exponents, window=DEFAULT_WINDOW, n_samples: int = DEFAULT_SAMPLES,
               power: float = 1.0) -> MonotoneEnvelope:
    """Left-continuous non-decreasing envelope of ``V**power`` (``power > 0``)."""
    lo, hi = _check_window(window, n_samples)
    if not power > 0:
        raise ValueError("power must be positive")
    pr = Primitives(v, e)
    t = np.geomspace(lo, hi, n_samples)
    exact = lambda x: pr.V_power(x, power)  # noqa: E731
    return MonotoneEnvelope(
        t, np.asarray(exact(t), float), True, exact,
        lambda x: pr.V_power_density(x, power),
        tuple(pr.V_power_jumps(power)), tuple(pr.kinks.tolist()),
        "V" if power == 1 else f"V^{power:g}")


def envelope_W(w: Weight, window=DEFAULT_WINDOW, n_samples: int = DEFAULT_SAMPLES,
               power: float = 1.0) -> MonotoneEnvelope:
    """Non-increasing envelope of ``W**power``."""
    lo, hi = _check_window(window, n_samples)
    pc = w.pieces
    t = np.geomspace(lo, hi, n_samples)

    def exact(x):
        with np.errstate(divide="ignore", over="ignore"):
            return np.asarray(pc.tail(x), float) ** power

    return MonotoneEnvelope(t, exact(t), False, exact, None, (), tuple(pc.breakpoints.tolist()),
                            "W" if power == 1 else f"W^{power:g}")


# ---------------------------------------------------------------------------
# endpoint asymptotics:  f ~ coef * exp(rate t) * t**pow * (ln t)**lp  (t -> inf)
#                        f ~ coef * t**pow * (ln 1/t)**lp                (t -> 0)


@dataclass(frozen=True)
class _Asym:
    coef: float
    pow: float = 0.0
    lp: float = 0.0
    rate: float = 0.0

    @staticmethod
    def const(c):
        return _Asym(c)

    def __pow__(self, s):
        if self.coef == 0:
            return _Asym(0.0) if s > 0 else _Asym(math.inf)
        return _Asym(self.coef**s, self.pow * s, self.lp * s, self.rate * s)

    def __mul__(self, o):
        if self.coef == 0 or o.coef == 0:
            return _Asym(0.0)
        return _Asym(self.coef * o.coef, self.pow + o.pow, self.lp + o.lp, self.rate + o.rate)


def _asym_U_zero(u: Pieces) -> _Asym:
    c, a, ex = u.head()
    if c == 0:
        return _Asym(0.0)
    if math.isinf(c):
        return _Asym(math.inf)
    if ex:
        return _Asym(c, 1.0)
    if a > -1:
        return _Asym(c / (a + 1), a + 1)
    return _Asym(math.inf)


def _asym_U_inf(u: Pieces) -> _Asym:
    c, a, ex = u.end()
    total_before = float(u.prefix[-2])
    if math.isinf(total_before):
        return _Asym(math.inf)
    if c == 0:
        return _Asym(total_before)
    if ex:
        if a > 0:
            return _Asym(c / a, rate=a)
        if a == 0:
            return _Asym(c, 1.0)
        return _Asym(float(u.prefix[-1]))
    if a < -1:
        return _Asym(float(u.prefix[-1]))
    if a == -1:
        return _Asym(c, 0.0, 1.0)
    return _Asym(c / (a + 1), a + 1)


def _asym_runsup_zero(g: Pieces) -> _Asym:
    c, a, ex = g.head()
    if math.isinf(c) or (not ex and a < 0 and c > 0):
        return _Asym(math.inf)
    if c == 0:
        return _Asym(0.0)
    if ex or a == 0:
        return _Asym(c)
    return _Asym(c, a)


def _asym_runsup_inf(g: Pieces) -> _Asym:
    c, a, ex = g.end()
    if math.isinf(float(g._M[-2])) or math.isinf(c):
        return _Asym(math.inf)
    if c > 0 and a > 0:
        return _Asym(c, rate=a) if ex else _Asym(c, a)
    return _Asym(float(g._M[-1]))


def _asym_W_zero(w: Pieces) -> _Asym:
    c, a, ex = w.head()
    rest = float(w.suffix[1])
    total = float(w.tail(0.0))
    if math.isinf(rest):
        return _Asym(math.inf)
    if c == 0 or ex or a > -1:
        return _Asym(total)
    if a == -1:
        return _Asym(c, 0.0, 1.0)
    return _Asym(c / (-(a + 1)), a + 1)


def _asym_W_inf(w: Pieces) -> _Asym:
    c, a, ex = w.end()
    if c == 0:
        return _Asym(0.0)
    if ex:
        return _Asym(c / (-a), rate=a) if a < 0 else _Asym(math.inf)
    if a < -1:
        return _Asym(c / (-(a + 1)), a + 1)
    return _Asym(math.inf)


def _limit_zero(a: _Asym) -> float:
    if a.coef == 0:
        return 0.0
    if math.isinf(a.coef):
        return math.inf
    # t**pow -> inf as t -> 0 iff pow < 0;  (ln 1/t)**lp -> inf iff lp > 0
    for k in (-a.pow, a.lp):
        if abs(k) > 1e-12:
            return math.inf if k > 0 else 0.0
    return a.coef


def _limit_inf(a: _Asym) -> float:
    if a.coef == 0:
        return 0.0
    if math.isinf(a.coef):
        return math.inf
    for k in (a.rate, a.pow, a.lp):
        if abs(k) > 1e-12:
            return math.inf if k > 0 else 0.0
    return a.coef


# ---------------------------------------------------------------------------
# A


@dataclass(frozen=True)
class FunctionalResult:
    A: ExtendedValue
    regime: Regime
    witness: float | None = None
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"A": self.A.to_json(), "regime": self.regime.value, "witness": self.witness,
                "diagnostics": self.diagnostics}


def _product(V, W, q):
    V = np.asarray(V, float)
    W = np.asarray(W, float)
    with np.errstate(all="ignore"):
        out = V * W ** (1.0 / q)
    return np.where((V == 0) | (W == 0), 0.0, out)


def compute_A(instance: HardyInstance, window=DEFAULT_WINDOW, n_samples: int = DEFAULT_SAMPLES,
              rel_tol: float = 1e-8) -> FunctionalResult:
    """The characterization functional.

    Convex regime: ``sup_t V(t) W(t)**(1/q)``, searched on a log grid with
    local refinement plus exact endpoint limits.  Otherwise:
    ``int_[0, inf) W**(r/q) dV**r`` as a Lebesgue-Stieltjes integral.
    """
    lo, hi = _check_window(window, n_samples)
    w = instance.w.pieces
    total_w = float(w.tail(0.0))
    if total_w == 0:
        return FunctionalResult(ExtendedValue(0.0), instance.regime, lo, {"reason": "w vanishes"})
    if instance.regime is Regime.CONVEX:
        return _convex_A(instance, lo, hi, n_samples, rel_tol)
    return _nonconvex_A(instance, lo, hi, n_samples, rel_tol)


def _nonconvex_A(inst, lo, hi, n_samples, rel_tol):
    e = inst.e
    r = e.r
    w = inst.w.pieces
    F = envelope_V(inst.v, e, (lo, hi), n_samples, power=r)
    diag = {
        "r": r,
        "atoms": [[x, "inf" if math.isinf(s) else s] for x, s in F.jumps],
        "kinks": len(F.kinks),
    }
    if math.isinf(float(w.tail(lo))) and math.isinf(float(w.tail(hi))):
        return FunctionalResult(ExtendedValue.infinite(DivergenceSite.AT_INFINITY), inst.regime, None,
                                diag | {"reason": "W is infinite"})

    def g(t):
        with np.errstate(over="ignore"):
            return np.asarray(w.tail(t), float) ** (r / e.q)

    bps = np.union1d(w.breakpoints, inst.v.breakpoints)
    res = stieltjes_integrate(g, F, 0.0, math.inf, rel_tol, bps)
    diag["integration_range"] = [0.0, "inf"]
    return FunctionalResult(res, inst.regime, None, diag)


def _convex_A(inst, lo, hi, n_samples, rel_tol):
    e = inst.e
    q = e.q
    w = inst.w.pieces
    pr = inst.prim
    V = pr.V
    W = w.tail

    if pr.p1:
        av0, avi = _asym_runsup_zero(pr.g), _asym_runsup_inf(pr.g)
    else:
        s = 1.0 / e.p_prime
        av0, avi = _asym_U_zero(pr.u) ** s, _asym_U_inf(pr.u) ** s
    aw0, awi = _asym_W_zero(w), _asym_W_inf(w)
    lim0 = _limit_zero(av0 * (aw0 ** (1.0 / q)))
    limi = _limit_inf(avi * (awi ** (1.0 / q)))
    # W infinite everywhere: the tail of w is not integrable
    if math.isinf(float(W(hi))):
        return FunctionalResult(ExtendedValue.infinite(DivergenceSite.AT_INFINITY), inst.regime, hi,
                                {"reason": "W is infinite", "limit_zero": _js(lim0), "limit_inf": "inf"})

    bps = np.union1d(inst.breakpoints, pr.kinks)
    bps = bps[(bps > 0) & np.isfinite(bps)]
    g_lo = min(lo, bps.min() / 10) if bps.size else lo
    g_hi = max(hi, bps.max() * 10) if bps.size else hi
    jumps = [x for x, _ in pr.V_power_jumps(1.0) if x > 0]
    grid = np.geomspace(g_lo, g_hi, n_samples)
    extra = np.concatenate([bps, bps * (1 + 1e-12), np.asarray(jumps) * (1 + 1e-12)]) if bps.size or jumps else []
    grid = np.union1d(grid, np.asarray(extra, float))
    P = lambda t: _product(V(t), W(t), q)  # noqa: E731
    vals = P(grid)

    # extend outward while the maximum sits on the boundary
    extensions = 0
    for _ in range(40):
        i = int(np.argmax(vals))
        if not np.isfinite(vals[i]):
            break
        at_lo = i == 0 and vals[0] > vals[1] * (1 + 1e-12)
        at_hi = i == vals.size - 1 and vals[-1] > vals[-2] * (1 + 1e-12)
        if at_lo and grid[0] > 1e-290:
            new = np.geomspace(max(grid[0] * 1e-8, 1e-300), grid[0], 65)[:-1]
            grid, vals = np.concatenate([new, grid]), np.concatenate([P(new), vals])
        elif at_hi and grid[-1] < 1e290:
            new = np.geomspace(grid[-1], min(grid[-1] * 1e8, 1e300), 65)[1:]
            grid, vals = np.concatenate([grid, new]), np.concatenate([vals, P(new)])
        else:
            break
        extensions += 1

    i = int(np.argmax(vals))
    best, arg = float(vals[i]), float(grid[i])
    diag = {"grid_points": int(grid.size), "extensions": extensions,
            "limit_zero": _js(lim0), "limit_inf": _js(limi)}
    if math.isinf(best) or math.isinf(lim0) or math.isinf(limi):
        if math.isinf(lim0):
            site = DivergenceSite.AT_ZERO
        elif math.isinf(limi):
            site = DivergenceSite.AT_INFINITY
        else:
            site = pr.site(arg) or DivergenceSite.INTERIOR
        return FunctionalResult(ExtendedValue.infinite(site), inst.regime, min(max(arg, lo), hi), diag)

    if 0 < i < grid.size - 1 and best > 0:
        a, b = math.log(grid[i - 1]), math.log(grid[i + 1])
        res = minimize_scalar(lambda s: -float(P(math.exp(s))), bounds=(a, b), method="bounded",
                              options={"xatol": 1e-12})
        if -res.fun > best:
            best, arg = float(-res.fun), math.exp(res.x)
    at_edge = (i == 0 and grid[0] <= 1e-290 and vals[0] > vals[1] * (1 + 1e-12)) or \
              (i == grid.size - 1 and grid[-1] >= 1e290 and vals[-1] > vals[-2] * (1 + 1e-12))
    if at_edge:
        lim = lim0 if i == 0 else limi
        if abs(best - lim) > 1e-6 * max(best, lim):
            raise WindowTooSmall(f"the supremum of V W^(1/q) escapes the search range near t={arg:.3g}")
    A = max(best, lim0, limi)
    if A > best:
        arg = lo if lim0 >= limi else hi
    diag["argmax"] = arg
    return FunctionalResult(ExtendedValue(A, rel_tol * A), inst.regime, min(max(arg, lo), hi), diag)


def _js(x):
    return "inf" if math.isinf(x) else x


# ---------------------------------------------------------------------------


def mazya_rozin_A(instance: HardyInstance, window=None, rel_tol: float = 1e-8) -> ExtendedValue:
    """``int W^(r/q) U^(r/q') u`` with ``u = v^(1-p')`` and ``U = int_0^t u``.

    For ``p > 1`` this equals ``(p' / r)`` times the Stieltjes form of A.
    """
    e = instance.e
    if not (1 <= e.q < e.p):
        raise RegimeMismatch("the Maz'ya-Rozin functional needs 1 <= q < p")
    r, q = e.r, e.q
    k = 0.0 if q == 1 else r * (1 - 1 / q)
    w = instance.w.pieces
    if float(w.tail(0.0)) == 0:
        return ExtendedValue(0.0)
    u = instance.prim.u

    def f(t):
        W = np.asarray(w.tail(t), float)
        U = np.asarray(u.cumulative(t), float)
        uu = u(t)
        with np.errstate(all="ignore"):
            out = W ** (r / q) * (U**k if k else 1.0) * uu
        return np.where((W == 0) | (uu == 0), 0.0, out)

    bps = np.union1d(w.breakpoints, u.breakpoints)
    return integrate(f, 0.0, math.inf, rel_tol, bps)


# ---------------------------------------------------------------------------
# the pointwise estimate and its change-of-variables identity


@dataclass(frozen=True)
class PointwiseCheck:
    holds: bool
    slack: float
    lhs: float
    rhs: float

    def to_json(self):
        return {"holds": self.holds, "slack": _js(self.slack), "lhs": self.lhs, "rhs": _js(self.rhs)}


def check_pointwise_bound(f: StepFunction, v: Weight, e: Exponents, eps: float, t: float,
                          constant_factor: float = 1.0, rel_tol: float = 1e-11,
                          tol: float = 1e-9) -> PointwiseCheck:
    """``int_0^t f <= K (int_0^t f^p V^(eps p) v)^(1/p) V(t)^(1-eps)``.

    ``K = (1-eps)^(-1/p')`` for ``p > 1`` and ``1`` for ``p = 1``, multiplied by
    ``constant_factor`` (which exists so that a wrong constant can be injected).
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if not t > 0:
        raise ValueError("t must be positive")
    p = e.p
    K = constant_factor * (1.0 if p == 1 else (1 - eps) ** (-1 / e.p_prime))
    lhs = float(f.primitive(t))
    pr = Primitives(v, e)
    Vt = float(pr.V(t))
    vp = v.pieces

    def integrand(s):
        fs = np.asarray(f(s), float)
        Vs = np.asarray(pr.V(s), float)
        vs = vp(s)
        with np.errstate(all="ignore"):
            out = fs**p * Vs ** (eps * p) * vs
        return np.where((fs == 0) | (vs == 0) | (Vs == 0), 0.0, out)

    edges = f.edges[(f.edges > 0) & (f.edges < t)]
    bps = np.concatenate([edges, vp.breakpoints, pr.kinks])
    lo = float(f.edges[0])
    I = integrate(integrand, lo, t, rel_tol, bps).value if t > lo else 0.0
    if p == 1:
        core = I
    else:
        core = I ** (1 / p)
    with np.errstate(invalid="ignore"):
        rhs = K * core * Vt ** (1 - eps) if core > 0 else (0.0 if math.isfinite(Vt) else math.nan)
    if math.isnan(rhs):
        rhs = math.inf if lhs > 0 else 0.0
    if (lhs == 0 and rhs == 0) or (math.isinf(lhs) and math.isinf(rhs)):
        return PointwiseCheck(True, 0.0, lhs, rhs)
    slack = rhs - lhs
    holds = lhs <= rhs * (1 + tol) or math.isinf(rhs)
    return PointwiseCheck(bool(holds), float(slack), lhs, float(rhs))


def check_change_of_variables(v: Weight, e: Exponents, eps: float, t: float,
                              rel_tol: float = 1e-11) -> tuple[float, float, float]:
    """``int_0^t V^(-eps p') v^(1-p')`` against ``V(t)^((1-eps)p') / (1-eps)``.

    Returns ``(lhs, rhs, rel_gap)``.
    """
    if e.p == 1:
        raise RegimeMismatch("the change-of-variables identity needs p > 1")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    pr = Primitives(v, e)
    U_t = float(pr.U(t))
    if not (0 < U_t < math.inf):
        raise DegenerateWeight(f"V({t}) must be finite and positive, got {U_t ** (1 / e.p_prime)}")
    u = pr.u

    def integrand(s):
        U = np.asarray(u.cumulative(s), float)
        uu = u(s)
        with np.errstate(all="ignore"):
            out = U ** (-eps) * uu
        return np.where(uu == 0, 0.0, out)

    lhs = integrate(integrand, 0.0, t, rel_tol, u.breakpoints).value
    rhs = U_t ** (1 - eps) / (1 - eps)
    return lhs, rhs, abs(lhs - rhs) / rhs
