"""Weights, exponents and regime classification.

Every supported weight is reduced to a :class:`Pieces` tiling of ``(0, inf)``.
On piece ``j`` (covering ``(lo_j, hi_j]``) the weight is either a power
``c * (t / tau)**a`` or an exponential ``c * exp(a * (t - tau))``.  Both forms
are monotone on each piece, integrate in closed form and stay closed under
``w -> w**s``; this is what lets V, W and their running suprema be computed
exactly instead of by sampling.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import ConfigError, NonPositiveArgument

__all__ = [
    "Regime",
    "Exponents",
    "classify_regime",
    "Pieces",
    "Weight",
    "Power",
    "PiecewisePower",
    "Tabulated",
    "Exponential",
    "indicator",
    "evaluate",
    "weight_from_spec",
]


class Regime(str, enum.Enum):
    CONVEX = "Convex"
    NONCONVEX = "NonConvex"
    NONCONVEX_P1 = "NonConvexP1"


@dataclass(frozen=True)
class Exponents:
    """Validated pair ``(p, q)`` with ``p >= 1`` and ``q > 0``."""

    p: float
    q: float

    def __post_init__(self):
        p, q = self.p, self.q
        for name, x in (("p", p), ("q", q)):
            if isinstance(x, bool) or not isinstance(x, (int, float, np.floating, np.integer)):
                raise ConfigError(f"{name} must be a real number, got {x!r}")
            if not math.isfinite(x):
                raise ConfigError(f"{name} must be finite, got {x}")
        if p < 1:
            raise ConfigError(f"p must be >= 1, got {p}")
        if q <= 0:
            raise ConfigError(f"q must be > 0, got {q}")
        object.__setattr__(self, "p", float(p))
        object.__setattr__(self, "q", float(q))

    @property
    def p_prime(self) -> float:
        return math.inf if self.p == 1 else self.p / (self.p - 1)

    @property
    def r(self) -> float | None:
        """``pq / (p - q)``, defined only when ``p > q``."""
        if self.p > self.q:
            return self.p * self.q / (self.p - self.q)
        return None

    @property
    def regime(self) -> Regime:
        return classify_regime(self)


def classify_regime(e: Exponents) -> Regime:
    if e.p <= e.q:
        return Regime.CONVEX
    if e.p > 1:
        return Regime.NONCONVEX
    return Regime.NONCONVEX_P1


# ---------------------------------------------------------------------------
# piecewise closed forms


def _formula(c, a, tau, expo, t):
    """Value of the piece formula at ``t``; ``t`` may be 0 or inf (limits)."""
    c, a, tau, t = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (c, a, tau, t)))
    expo = np.broadcast_to(np.asarray(expo, dtype=bool), c.shape)
    with np.errstate(all="ignore"):
        pw = c * np.where(a == 0, 1.0, (t / tau) ** a)
        arg = np.where(a == 0, 0.0, a * (t - tau))
        ex = c * np.exp(arg)
        out = np.where(expo, ex, pw)
    return np.where(c == 0, 0.0, out)


def _formula_derivative(c, a, tau, expo, t):
    with np.errstate(all="ignore"):
        pw = c * a * (t / tau) ** (a - 1) / tau
        ex = c * a * np.exp(a * (t - tau))
        out = np.where(expo, ex, pw)
    return np.where((c == 0) | (a == 0), 0.0, out)


def _partial(c, a, tau, expo, x, y):
    """Integral of the piece formula over ``(x, y)``, ``0 <= x <= y <= inf``."""
    c, a, tau, x, y = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (c, a, tau, x, y)))
    expo = np.broadcast_to(np.asarray(expo, dtype=bool), c.shape)
    out = np.zeros(c.shape)
    with np.errstate(all="ignore"):
        # power pieces
        al = a + 1.0
        xs = x / tau
        ys = y / tau
        L = np.log(y / x)
        # alpha > 0: write in terms of the upper end, alpha < 0: the lower end
        up = c * tau * ys**al * (-np.expm1(-al * L)) / al
        dn = c * tau * xs**al * np.expm1(al * L) / al
        lg = c * tau * L
        finite = np.where(al > 0, up, np.where(al < 0, dn, lg))
        from_zero = np.where(al > 0, c * tau * ys**al / al, np.inf)
        to_inf = np.where(al < 0, c * tau * xs**al / (-al), np.inf)
        pw = np.where(x == 0, np.where(np.isinf(y), np.inf, from_zero),
                      np.where(np.isinf(y), to_inf, finite))
        # exponential pieces
        d = y - x
        ex_up = c * np.exp(a * (y - tau)) * (-np.expm1(-a * d)) / a
        ex_dn = c * np.exp(a * (x - tau)) * np.expm1(a * d) / a
        ex_fin = np.where(a > 0, ex_up, np.where(a < 0, ex_dn, c * d))
        ex_inf = np.where(a < 0, c * np.exp(a * (x - tau)) / (-a), np.inf)
        ex = np.where(np.isinf(y), ex_inf, ex_fin)
        out = np.where(expo, ex, pw)
    out = np.where((c == 0) | (y <= x), 0.0, out)
    out = np.where(np.isinf(c) & (y > x), np.inf, out)
    return out


@dataclass(frozen=True, eq=False)
class Pieces:
    """Tiling of ``(0, inf)``: piece ``j`` covers ``(lo[j], hi[j]]``."""

    lo: np.ndarray
    hi: np.ndarray
    c: np.ndarray
    a: np.ndarray
    tau: np.ndarray
    expo: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        if lo.size == 0 or lo[0] != 0 or not np.isinf(hi[-1]) or np.any(lo[1:] != hi[:-1]):
            raise ConfigError("pieces must tile (0, inf)")
        if np.any(hi <= lo):
            raise ConfigError("pieces must have positive length")
        c = np.asarray(self.c, dtype=float)
        if np.any(c < 0) or np.any(np.isnan(c)):
            raise ConfigError("weights must be nonnegative")
        for name, arr in (("lo", lo), ("hi", hi), ("c", c), ("a", np.asarray(self.a, float)),
                          ("tau", np.asarray(self.tau, float)), ("expo", np.asarray(self.expo, bool))):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    # -- construction -----------------------------------------------------

    @classmethod
    def constant(cls, value: float) -> "Pieces":
        return cls([0.0], [np.inf], [value], [0.0], [1.0], [False])

    @property
    def n(self) -> int:
        return self.lo.size

    @property
    def breakpoints(self) -> np.ndarray:
        return self.lo[1:]

    def _idx(self, t):
        return np.clip(np.searchsorted(self.lo, t, side="left") - 1, 0, self.n - 1)

    def split(self, points) -> "Pieces":
        """Same function, with extra breakpoints inserted."""
        pts = np.unique(np.asarray(points, dtype=float))
        pts = pts[(pts > 0) & np.isfinite(pts)]
        pts = np.setdiff1d(pts, self.lo)
        if pts.size == 0:
            return self
        edges = np.union1d(self.lo, pts)
        owner = np.searchsorted(self.lo, edges, side="right") - 1
        hi = np.append(edges[1:], np.inf)
        return Pieces(edges, hi, self.c[owner], self.a[owner], self.tau[owner], self.expo[owner])

    def restrict(self, lo: float, hi: float) -> "Pieces":
        """Zero outside ``(lo, hi]``."""
        s = self.split([lo, hi])
        keep = (s.lo >= lo) & (s.hi <= hi)
        c = np.where(keep, s.c, 0.0)
        return Pieces(s.lo, s.hi, c, s.a, s.tau, s.expo).simplify()

    def simplify(self) -> "Pieces":
        """Merge adjacent zero pieces."""
        zero = self.c == 0
        drop = np.zeros(self.n, bool)
        drop[1:] = zero[1:] & zero[:-1]
        if not drop.any():
            return self
        keep = ~drop
        lo = self.lo[keep]
        hi = np.append(lo[1:], np.inf)
        return Pieces(lo, hi, self.c[keep], self.a[keep], self.tau[keep], self.expo[keep])

    def power(self, s: float) -> "Pieces":
        """Pointwise ``self**s`` with ``0**neg = inf`` and ``inf**neg = 0``."""
        with np.errstate(divide="ignore"):
            c = np.where(self.c == 0, 0.0 if s > 0 else (1.0 if s == 0 else np.inf), self.c**s)
        return Pieces(self.lo, self.hi, c, self.a * s, self.tau, self.expo)

    def scale(self, k: float) -> "Pieces":
        return Pieces(self.lo, self.hi, self.c * k, self.a, self.tau, self.expo)

    # -- evaluation -------------------------------------------------------

    def _at(self, j, t):
        return _formula(self.c[j], self.a[j], self.tau[j], self.expo[j], t)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(~(t > 0)):
            raise NonPositiveArgument("weights are defined on (0, inf) only")
        out = self._at(self._idx(t), t)
        return out if out.ndim else float(out)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        j = self._idx(t)
        return _formula_derivative(self.c[j], self.a[j], self.tau[j], self.expo[j], t)

    # -- integrals --------------------------------------------------------

    def _part(self, j, x, y):
        return _partial(self.c[j], self.a[j], self.tau[j], self.expo[j], x, y)

    @cached_property
    def full(self) -> np.ndarray:
        return self._part(np.arange(self.n), self.lo, self.hi)

    @cached_property
    def prefix(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(self.full)])

    @cached_property
    def suffix(self) -> np.ndarray:
        return np.concatenate([np.cumsum(self.full[::-1])[::-1], [0.0]])

    def cumulative(self, t):
        """``int_0^t``; ``t >= 0``."""
        t = np.asarray(t, dtype=float)
        j = self._idx(t)
        out = self.prefix[j] + self._part(j, self.lo[j], np.maximum(t, self.lo[j]))
        return out if out.ndim else float(out)

    def tail(self, t):
        """``int_t^inf``; ``t >= 0``."""
        t = np.asarray(t, dtype=float)
        j = self._idx(t)
        out = self._part(j, np.minimum(t, self.hi[j]), self.hi[j]) + self.suffix[j + 1]
        return out if out.ndim else float(out)

    def integral(self, x: float, y: float) -> float:
        if y <= x:
            return 0.0
        i, k = int(self._idx(x)), int(self._idx(y))
        if i == k:
            return float(self._part(i, x, y))
        return float(self._part(i, x, self.hi[i]) + self.full[i + 1:k].sum() + self._part(k, self.lo[k], y))

    def divergence_site(self, x: float, y: float) -> str | None:
        """Where ``int_x^y`` diverges, or ``None`` when it is finite."""
        if y <= x:
            return None
        i, k = int(self._idx(x)), int(self._idx(y))
        for j in range(i, k + 1):
            a = max(x, self.lo[j])
            b = min(y, self.hi[j])
            if b > a and not np.isfinite(self._part(j, a, b)):
                if a == 0 and np.isfinite(self.c[j]):
                    return "AtZero"
                if np.isinf(b) and np.isfinite(self.c[j]):
                    return "AtInfinity"
                return "Interior"
        return None

    # -- running supremum (ess sup over (0, t)) -------------------------

    def _sup_on(self, j, x, y):
        """ess sup of piece ``j`` over ``(x, y)`` (0 when empty)."""
        v = np.maximum(self._at(j, x), self._at(j, y))
        return np.where(y > x, v, 0.0)

    @cached_property
    def _M(self) -> np.ndarray:
        s = self._sup_on(np.arange(self.n), self.lo, self.hi)
        return np.concatenate([[0.0], np.maximum.accumulate(s)])

    def running_sup(self, t):
        """``ess sup_{(0, t)}``, left-continuous in ``t``."""
        t = np.asarray(t, dtype=float)
        j = self._idx(t)
        out = np.maximum(self._M[j], self._sup_on(j, self.lo[j], t))
        return out if out.ndim else float(out)

    def _increasing(self) -> np.ndarray:
        return (self.a > 0) & (self.c > 0) & np.isfinite(self.c)

    @cached_property
    def _follow(self) -> np.ndarray:
        """Per piece, where the running sup starts following the formula."""
        out = np.full(self.n, np.inf)
        for j in range(self.n):
            if not self._increasing()[j]:
                continue
            M = self._M[j]
            start = float(self._at(j, self.lo[j]))
            if start >= M:
                out[j] = self.lo[j]
            else:
                x = self._solve(j, M)
                if x < self.hi[j]:
                    out[j] = x
        return out

    def _solve(self, j: int, y: float) -> float:
        """Point where the (monotone) formula of piece ``j`` equals ``y``."""
        c, a, tau = self.c[j], self.a[j], self.tau[j]
        if y <= 0:
            return self.lo[j]
        if self.expo[j]:
            x = tau + math.log(y / c) / a
        else:
            x = tau * (y / c) ** (1.0 / a)
        return min(max(x, self.lo[j]), self.hi[j])

    def running_sup_jumps(self) -> list[tuple[float, float, float]]:
        """``(x, before, after)`` for each jump; the first may sit at ``x = 0``."""
        out = []
        for j in range(self.n):
            after = max(self._M[j], float(self._at(j, self.lo[j])))
            if after > self._M[j] and self.hi[j] > self.lo[j]:
                out.append((float(self.lo[j]), float(self._M[j]), after))
        return out

    def running_sup_kinks(self) -> np.ndarray:
        f = self._follow
        return np.unique(f[np.isfinite(f) & (f > self.lo)])

    def running_sup_derivative(self, t):
        """Density of the running sup (0 on flat stretches)."""
        t = np.asarray(t, dtype=float)
        j = self._idx(t)
        follow = t > self._follow[j]
        d = _formula_derivative(self.c[j], self.a[j], self.tau[j], self.expo[j], t)
        return np.where(follow & self._increasing()[j], d, 0.0)

    def running_sup_inverse(self, y: float) -> float:
        """``inf {t : running_sup(t) > y}`` (``inf`` if never exceeded)."""
        M = self._M
        above = np.nonzero(M[1:] > y)[0]
        if above.size == 0:
            return math.inf
        j = int(above[0])
        if float(self._at(j, self.lo[j])) > y:
            return float(self.lo[j])
        return self._solve(j, y)

    def superlevel(self, y: float, x0: float, x1: float) -> list[tuple[float, float]]:
        """Maximal intervals inside ``(x0, x1)`` where the weight exceeds ``y``."""
        out: list[tuple[float, float]] = []
        i, k = int(self._idx(x0)), int(self._idx(x1))
        for j in range(i, k + 1):
            a, b = max(x0, self.lo[j]), min(x1, self.hi[j])
            if b <= a:
                continue
            fa, fb = float(self._at(j, a)), float(self._at(j, b))
            if fa > y and fb > y:
                seg = (a, b)
            elif fa <= y and fb <= y:
                continue
            else:
                if np.isinf(self.c[j]):
                    seg = (a, b)
                else:
                    x = self._solve(j, y)
                    seg = (x, b) if fb > fa else (a, x)
            if seg[1] > seg[0]:
                if out and out[-1][1] >= seg[0]:
                    out[-1] = (out[-1][0], seg[1])
                else:
                    out.append(seg)
        return out

    # -- endpoint asymptotics --------------------------------------------

    def head(self) -> tuple[float, float, bool]:
        """``(c, a, is_exp)`` of the first piece, normalized to ``tau = 1``."""
        return self._normalized(0)

    def end(self) -> tuple[float, float, bool]:
        return self._normalized(self.n - 1)

    def _normalized(self, j):
        c, a, tau, ex = float(self.c[j]), float(self.a[j]), float(self.tau[j]), bool(self.expo[j])
        if ex:
            return c * math.exp(-a * tau) if c > 0 else c, a, True
        with np.errstate(all="ignore"):
            return (c * tau ** (-a) if 0 < c < math.inf else c), a, False


# ---------------------------------------------------------------------------
# weight kinds


class Weight:
    """Nonnegative function on ``(0, inf)``."""

    kind: str = ""

    @cached_property
    def pieces(self) -> Pieces:
        return self._build()

    def _build(self) -> Pieces:
        raise NotImplementedError

    def __call__(self, t):
        return self.pieces(t)

    @property
    def breakpoints(self) -> np.ndarray:
        return self.pieces.breakpoints

    def to_spec(self) -> dict:
        raise NotImplementedError


def _check_real(name, x, positive=False, nonneg=False):
    if isinstance(x, bool) or not isinstance(x, (int, float, np.floating, np.integer)):
        raise ConfigError(f"{name} must be a real number, got {x!r}")
    x = float(x)
    if math.isnan(x):
        raise ConfigError(f"{name} is NaN")
    if positive and not x > 0:
        raise ConfigError(f"{name} must be positive, got {x}")
    if nonneg and not x >= 0:
        raise ConfigError(f"{name} must be nonnegative, got {x}")
    return x


@dataclass(frozen=True)
class Power(Weight):
    """``c * t**a``."""

    a: float
    c: float = 1.0
    kind: str = field(default="power", init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "a", _check_real("a", self.a))
        object.__setattr__(self, "c", _check_real("c", self.c, nonneg=True))
        if not (math.isfinite(self.a) and math.isfinite(self.c)):
            raise ConfigError("power weight parameters must be finite")

    def _build(self):
        return Pieces([0.0], [np.inf], [self.c], [self.a], [1.0], [False])

    def to_spec(self):
        d = {"kind": "power", "a": self.a}
        if self.c != 1.0:
            d["c"] = self.c
        return d


@dataclass(frozen=True)
class PiecewisePower(Weight):
    """``c_i * t**a_i`` on ``(lo_i, hi_i]``; zero outside all pieces."""

    pieces_spec: tuple
    kind: str = field(default="piecewise_power", init=False, repr=False)

    def __post_init__(self):
        rows = []
        for i, pc in enumerate(self.pieces_spec):
            if isinstance(pc, dict):
                try:
                    lo, hi, c, a = pc["lo"], pc["hi"], pc["c"], pc["a"]
                except KeyError as exc:
                    raise ConfigError(f"piece {i} is missing {exc}") from None
            else:
                lo, hi, c, a = pc
            hi = math.inf if hi is None or hi == "inf" else hi
            lo = _check_real(f"piece {i} lo", lo, nonneg=True)
            hi = _check_real(f"piece {i} hi", hi)
            c = _check_real(f"piece {i} c", c, nonneg=True)
            a = _check_real(f"piece {i} a", a)
            if not (hi > lo):
                raise ConfigError(f"piece {i}: hi must exceed lo")
            if not (math.isfinite(c) and math.isfinite(a) and math.isfinite(lo)):
                raise ConfigError(f"piece {i}: parameters must be finite")
            if rows and lo < rows[-1][1]:
                raise ConfigError("pieces must be sorted and non-overlapping")
            rows.append((lo, hi, c, a))
        object.__setattr__(self, "pieces_spec", tuple(rows))

    def _build(self):
        lo, hi, c, a, tau = [], [], [], [], []
        cursor = 0.0
        for plo, phi, pc, pa in self.pieces_spec:
            if plo > cursor:
                lo.append(cursor), hi.append(plo), c.append(0.0), a.append(0.0), tau.append(1.0)
            ref = plo if plo > 0 else (phi if math.isfinite(phi) else 1.0)
            lo.append(plo), hi.append(phi), c.append(pc * ref**pa), a.append(pa), tau.append(ref)
            cursor = phi
        if math.isfinite(cursor):
            lo.append(cursor), hi.append(math.inf), c.append(0.0), a.append(0.0), tau.append(1.0)
        return Pieces(lo, hi, c, a, tau, [False] * len(lo)).simplify()

    def to_spec(self):
        return {
            "kind": "piecewise_power",
            "pieces": [
                {"lo": lo, "hi": "inf" if math.isinf(hi) else hi, "c": c, "a": a}
                for lo, hi, c, a in self.pieces_spec
            ],
        }


@dataclass(frozen=True)
class Tabulated(Weight):
    """Log-log linear interpolation through ``(t_i, v_i)``.

    The first and last segments are extended as power laws.  A segment with a
    zero endpoint is treated as identically zero.
    """

    t: tuple
    v: tuple
    kind: str = field(default="tabulated", init=False, repr=False)

    def __post_init__(self):
        t = [_check_real("t", x, positive=True) for x in self.t]
        v = [_check_real("v", x, nonneg=True) for x in self.v]
        if len(t) != len(v):
            raise ConfigError("t and v must have the same length")
        if len(t) < 2:
            raise ConfigError("a tabulated weight needs at least two points")
        if any(b <= a for a, b in zip(t, t[1:])):
            raise ConfigError("abscissae must be strictly increasing")
        if not all(math.isfinite(x) for x in t + v):
            raise ConfigError("tabulated values must be finite")
        object.__setattr__(self, "t", tuple(t))
        object.__setattr__(self, "v", tuple(v))

    def _build(self):
        t = np.asarray(self.t)
        v = np.asarray(self.v)
        zero = (v[:-1] == 0) | (v[1:] == 0)
        with np.errstate(all="ignore"):
            slope = np.where(zero, 0.0, np.log(v[1:] / v[:-1]) / np.log(t[1:] / t[:-1]))
        c = np.where(zero, 0.0, v[:-1])
        # interior segments (t_i, t_{i+1}], plus power-law ends
        lo = np.concatenate([[0.0], t[1:-1], [t[-1]]])
        hi = np.append(lo[1:], np.inf)
        cc = np.concatenate([c, [c[-1]]])
        aa = np.concatenate([slope, [slope[-1]]])
        tau = np.concatenate([t[:-1], [t[-2]]])
        return Pieces(lo, hi, cc, aa, tau, np.zeros(lo.size, bool)).simplify()

    def to_spec(self):
        return {"kind": "tabulated", "t": list(self.t), "v": list(self.v)}


@dataclass(frozen=True)
class Exponential(Weight):
    """``c * exp(rate * t)``."""

    rate: float
    c: float = 1.0
    kind: str = field(default="exponential", init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "rate", _check_real("rate", self.rate))
        object.__setattr__(self, "c", _check_real("c", self.c, nonneg=True))
        if not (math.isfinite(self.rate) and math.isfinite(self.c)):
            raise ConfigError("exponential weight parameters must be finite")

    def _build(self):
        return Pieces([0.0], [np.inf], [self.c], [self.rate], [0.0], [True])

    def to_spec(self):
        d = {"kind": "exponential", "rate": self.rate}
        if self.c != 1.0:
            d["c"] = self.c
        return d


@dataclass(frozen=True, eq=False)
class _FromPieces(Weight):
    """Internal weight wrapping an arbitrary tiling (e.g. a restriction)."""

    table: Pieces
    kind: str = field(default="pieces", init=False, repr=False)

    def _build(self):
        return self.table

    def to_spec(self):
        raise ConfigError("derived weights are not serializable")


def from_pieces(p: Pieces) -> Weight:
    return _FromPieces(p)


def restrict(w: Weight, lo: float, hi: float) -> Weight:
    """``w * 1_{(lo, hi]}``."""
    return _FromPieces(w.pieces.restrict(lo, hi))


def indicator(lo: float, hi: float) -> PiecewisePower:
    """Characteristic function of ``(lo, hi)``."""
    return PiecewisePower(({"lo": lo, "hi": hi, "c": 1.0, "a": 0.0},))


def evaluate(weight: Weight, t):
    """Value of ``weight`` at ``t > 0``."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(~(t_arr > 0)):
        raise NonPositiveArgument(f"weights are defined for t > 0, got {t}")
    return weight(t_arr if t_arr.ndim else float(t_arr))


def weight_from_spec(spec) -> Weight:
    """Build a weight from its config dictionary."""
    if isinstance(spec, Weight):
        return spec
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(f"weight spec must be an object with a 'kind', got {spec!r}")
    kind = spec["kind"]
    extra = set(spec) - {"kind", "a", "c", "pieces", "t", "v", "rate"}
    if extra:
        raise ConfigError(f"unknown weight fields: {sorted(extra)}")
    try:
        if kind == "power":
            return Power(spec["a"], spec.get("c", 1.0))
        if kind == "piecewise_power":
            return PiecewisePower(tuple(spec["pieces"]))
        if kind == "tabulated":
            return Tabulated(tuple(spec["t"]), tuple(spec["v"]))
        if kind == "exponential":
            return Exponential(spec["rate"], spec.get("c", 1.0))
    except KeyError as exc:
        raise ConfigError(f"{kind} weight is missing {exc}") from None
    except TypeError as exc:
        raise ConfigError(f"malformed {kind} weight: {exc}") from None
    raise ConfigError(f"unknown weight kind {kind!r}")


def as_sequence(x) -> Sequence[float]:
    return list(np.atleast_1d(np.asarray(x, dtype=float)))
