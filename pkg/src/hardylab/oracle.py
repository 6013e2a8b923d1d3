"""Brute-force estimation of the best constant by ratio maximization.

Test functions are step functions on a log grid.  The ascent maximizes

    Phi(f) = log L(f) / q - log N(f) / p,   N(f) = sum f_i^p m_i,

with the damped multiplicative update ``f_i <- f_i * rho_i^eta`` where
``rho_i`` is the ratio of the two halves of the first-order condition.
For ``p > 1`` and ``eta = 1/(p-1)`` this is the nonlinear power iteration;
steps that do not increase ``Phi`` are halved until they do.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .calculus import ExtendedValue
from .errors import ConfigError, DegenerateInstance, DegenerateWeight, HardyLabError, RatioOverflow
from .extremals import build_h, rayleigh_ratio, refined_grid, saturating_step, sigma_levels, theta_test_function
from .functionals import HardyInstance, compute_A, compute_V
from .steps import StepFunction
from .weights import Exponents, Regime, Weight

__all__ = [
    "SearchConfig",
    "SearchResult",
    "best_constant_search",
    "supremum_identity_check",
    "equivalence_audit",
    "grid_edges",
    "window_stability",
    "DEFAULT_WINDOWS",
]

_XI, _OMEGA = np.polynomial.legendre.leggauss(5)
_XI = 0.5 * (_XI + 1)
_OMEGA = 0.5 * _OMEGA


@dataclass(frozen=True)
class SearchConfig:
    n_cells: int = 2000
    window: tuple = (1e-4, 1e4)
    restarts: int = 8
    max_iters: int = 3000
    ascent_tol: float = 1e-10
    seed: int = 42
    rel_tol: float = 1e-9

    def __post_init__(self):
        if int(self.n_cells) != self.n_cells or self.n_cells < 2:
            raise ConfigError("n_cells must be an integer >= 2")
        lo, hi = (float(x) for x in self.window)
        if not 0 < lo < hi < math.inf:
            raise ConfigError("window must satisfy 0 < lo < hi < inf")
        object.__setattr__(self, "window", (lo, hi))
        if self.restarts < 1 or self.max_iters < 1:
            raise ConfigError("restarts and max_iters must be positive")
        if not self.ascent_tol > 0:
            raise ConfigError("ascent_tol must be positive")
        if not 0 < self.rel_tol < 1:
            raise ConfigError("rel_tol must lie in (0, 1)")

    def to_json(self):
        return {"n_cells": self.n_cells, "window": list(self.window), "restarts": self.restarts,
                "max_iters": self.max_iters, "ascent_tol": self.ascent_tol, "seed": self.seed}


@dataclass
class SearchResult:
    C_est: float
    argmax_f: StepFunction | None
    iterations: int
    history: list = field(default_factory=list)
    seeds: dict = field(default_factory=dict)
    degenerate: str | None = None

    @property
    def value(self) -> ExtendedValue:
        if math.isinf(self.C_est):
            return ExtendedValue.infinite("AtInfinity" if self.degenerate == "lhs_infinite" else "Interior")
        return ExtendedValue(self.C_est, 0.0)

    def to_json(self):
        c = "inf" if math.isinf(self.C_est) else self.C_est
        return {"C_est": c, "iterations": self.iterations, "seeds": {k: ("inf" if math.isinf(x) else x)
                                                                     for k, x in self.seeds.items()},
                "history": self.history, "degenerate": self.degenerate}


def grid_edges(lo: float, hi: float, n: int, extra=()) -> np.ndarray:
    e = np.geomspace(lo, hi, n + 1)
    e[0], e[-1] = lo, hi
    extra = [x for x in extra if lo < x < hi]
    if extra:
        e = np.union1d(e, extra)
        keep = np.concatenate([[True], np.diff(e) > 1e-12 * e[1:]])
        e = e[keep]
    return e


# ---------------------------------------------------------------------------
# discrete problems


class _HardyProblem:
    """``L(f) = int (int_0^t f)^q w`` for step ``f`` on fixed edges.

    Everything is kept in log form: the weights may span hundreds of decades.
    """

    def __init__(self, instance: HardyInstance, edges: np.ndarray):
        self.p, self.q = instance.e.p, instance.e.q
        self.edges = edges
        self.d = np.diff(edges)
        w = instance.w.pieces
        s = edges[:-1, None] + self.d[:, None] * _XI[None, :]
        with np.errstate(invalid="ignore", divide="ignore"):
            self.wn = self.d[:, None] * _OMEGA[None, :] * np.asarray(w(s), float)
            self.log_wn = np.log(self.wn)
        self.W_end = float(w.tail(edges[-1]))
        self.log_W_end = math.log(self.W_end) if self.W_end > 0 else -math.inf
        self.m = StepFunction(edges, np.zeros(self.d.size)).cell_masses(instance.v)
        # log of the w-mass to the right of each left edge
        cell = logsumexp(self.log_wn, axis=1)
        acc = np.logaddexp.accumulate(np.concatenate([[self.log_W_end], cell[::-1]]))
        self.log_right = acc[::-1][:-1]

    @property
    def useful(self):
        """Cells from which some w-mass lies to the right."""
        return self.log_right > -np.inf

    def _terms(self, f):
        F = np.concatenate([[0.0], np.cumsum(f * self.d)])
        Fn = F[:-1, None] + (f * self.d)[:, None] * _XI[None, :]
        with np.errstate(divide="ignore"):
            lFn = np.log(Fn)
            lFe = math.log(F[-1]) if F[-1] > 0 else -math.inf
        return lFn, lFe

    def _linear(self, f):
        """Fast path: ``(L, G)`` in linear arithmetic, or None on over/underflow."""
        q = self.q
        F = np.concatenate([[0.0], np.cumsum(f * self.d)])
        Fn = F[:-1, None] + (f * self.d)[:, None] * _XI[None, :]
        with np.errstate(all="ignore"):
            Fq1 = np.where(Fn > 0, Fn ** (q - 1), 0.0) * self.wn
            L = float(np.sum(Fq1 * Fn))
            end = F[-1] ** q * self.W_end if F[-1] > 0 and self.W_end > 0 else 0.0
            L += end
        if not (1e-290 < L < 1e290) or not np.all(np.isfinite(Fq1)):
            return None
        return L, Fq1, F[-1]

    def log_L(self, f):
        lin = self._linear(f)
        if lin is not None:
            return math.log(lin[0])
        lFn, lFe = self._terms(f)
        with np.errstate(invalid="ignore"):
            body = np.where(np.isneginf(lFn) | np.isneginf(self.log_wn), -np.inf, self.q * lFn + self.log_wn)
        end = self.q * lFe + self.log_W_end if lFe > -np.inf and self.log_W_end > -np.inf else -np.inf
        return float(logsumexp(np.append(body.ravel(), end)))

    def log_L_grad(self, f):
        """``log L`` and ``grad L / L``."""
        q = self.q
        lin = self._linear(f)
        if lin is not None:
            L, Fq1, Fe = lin
            G = q * Fq1 / L
            S = G.sum(axis=1)
            T = (G * _XI[None, :]).sum(axis=1)
            end = q * Fe ** (q - 1) * self.W_end / L if Fe > 0 and self.W_end > 0 else 0.0
            tail = np.concatenate([np.cumsum(S[::-1])[::-1][1:], [0.0]]) + end
            return math.log(L), self.d * (tail + T)
        lFn, lFe = self._terms(f)
        logL = self.log_L(f)
        ok = ~(np.isneginf(lFn) | np.isneginf(self.log_wn))
        with np.errstate(invalid="ignore", over="ignore"):
            G = np.where(ok, q * np.exp(np.where(ok, (q - 1) * lFn + self.log_wn - logL, 0.0)), 0.0)
        S = G.sum(axis=1)
        T = (G * _XI[None, :]).sum(axis=1)
        end = 0.0
        if lFe > -np.inf and self.log_W_end > -np.inf:
            end = q * math.exp(min((q - 1) * lFe + self.log_W_end - logL, 700.0))
        tail = np.concatenate([np.cumsum(S[::-1])[::-1][1:], [0.0]]) + end
        return logL, self.d * (tail + T)

    def log_vertex_values(self):
        """``log L(e_i / m_i)`` for each single-cell function."""
        q = self.q
        with np.errstate(divide="ignore", invalid="ignore"):
            inner = logsumexp(self.log_wn + q * np.log(self.d[:, None] * _XI[None, :]), axis=1)
            right = np.append(self.log_right[1:], self.log_W_end)
            return np.logaddexp(inner, q * np.log(self.d) + right) - q * np.log(self.m)


class _LinearProblem:
    """``L(f) = sum c_i f_i`` with q = 1."""

    def __init__(self, c, m, p):
        self.c = np.asarray(c, float)
        self.m = np.asarray(m, float)
        self.p, self.q = p, 1.0

    @property
    def useful(self):
        return self.c > 0

    def log_L(self, f):
        L = float(np.dot(self.c, f))
        return math.log(L) if L > 0 else -math.inf

    def log_L_grad(self, f):
        logL = self.log_L(f)
        return logL, self.c / math.exp(logL)

    def log_vertex_values(self):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(self.c / self.m)


def _N(prob, f):
    pos = f > 0
    with np.errstate(over="ignore"):
        return float(np.sum(f[pos] ** prob.p * prob.m[pos]))


def _phi(prob, f):
    N = _N(prob, f)
    if not 0 < N < math.inf:
        return -math.inf
    logL = prob.log_L(f)
    if np.isnan(logL):
        return -math.inf
    return logL / prob.q - math.log(N) / prob.p


def _exp(phi):
    if phi == -math.inf:
        return 0.0
    return math.exp(phi) if phi < 709 else math.inf


def _normalize(prob, f):
    N = _N(prob, f)
    return f / N ** (1 / prob.p) if N > 0 else f


def _ascent(prob, f0, max_iters, tol):
    """Monotone multiplicative ascent; returns ``(f, phi, iterations)``."""
    active = np.isfinite(prob.m) & (prob.m > 0) & prob.useful
    f = np.where(active, f0, 0.0)
    if not np.any(f > 0):
        return f, -math.inf, 0
    f = _normalize(prob, f)
    phi = _phi(prob, f)
    eta0 = 1.0 / (prob.p - 1) if prob.p > 1 else 8.0
    eta = min(eta0, 1.0)
    quiet = 0
    mark = phi
    it = 0
    for it in range(1, max_iters + 1):
        _, gL = prob.log_L_grad(f)
        N = _N(prob, f)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            rho = gL / prob.q / (f ** (prob.p - 1) * prob.m / N)
        rho = np.where((f > 0) & np.isfinite(rho) & (rho > 0), rho, 1.0)
        accepted = False
        for _ in range(40):
            with np.errstate(over="ignore"):
                cand = f * rho**eta
            if np.all(np.isfinite(cand)):
                cand = _normalize(prob, cand)
                new = _phi(prob, cand)
                if new >= phi:
                    accepted = True
                    break
            eta *= 0.5
        if not accepted:
            break
        gain = new - phi
        f, phi = cand, new
        eta = min(eta0, eta * 1.5)
        quiet = quiet + 1 if gain < tol else 0
        if quiet >= 10:
            break
        if it % 100 == 0:
            # slow creep: stop when a hundred steps gained less than 1e-7 in log-ratio
            if phi - mark < 1e-7:
                break
            mark = phi
    return f, phi, it


# ---------------------------------------------------------------------------
# seeds


def _seed_saturating(instance, edges, prob):
    """Saturating profile cut at the argmax of ``V W^(1/q)`` over the edges."""
    e = instance.e
    V = np.asarray(instance.prim.V(edges[1:]), float)
    W = np.asarray(instance.W(edges[1:]), float)
    with np.errstate(invalid="ignore", over="ignore"):
        prod = V * W ** (1 / e.q)
    prod = np.where(np.isfinite(prod), prod, -1.0)
    # ties are common (V W^(1/q) constant for balanced powers): take the middle one
    if prod.max() > 0:
        top = np.nonzero(prod >= prod.max() * (1 - 1e-9))[0]
        j = int(top[top.size // 2])
    else:  # V W^(1/q) is 0 or infinite on every edge
        j = prod.size - 1
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ratio = prob.d / prob.m
    f = np.zeros(prob.d.size)
    sel = slice(0, j + 1)
    if e.p > 1:
        with np.errstate(over="ignore", invalid="ignore"):
            f[sel] = ratio[sel] ** (e.p_prime - 1)
    else:
        r = np.where(np.isfinite(ratio[sel]), ratio[sel], 0.0)
        f[sel] = np.where(r >= r.max() * (1 - 1e-3), r, 0.0)
    return np.where(np.isfinite(f), f, 0.0)


def _resample(step: StepFunction, edges):
    """Cell averages of ``step`` on ``edges``."""
    P = np.asarray(step.primitive(edges), float)
    return np.maximum(np.diff(P) / np.diff(edges), 0.0)


def _seed_theta(instance, edges, cfg):
    f = theta_test_function(instance.v, instance.w, instance.e, window=cfg.window,
                            n_cells=min(cfg.n_cells, 1024))
    return _resample(f, edges)


def _seed_sigma(instance, edges, cfg):
    dec = sigma_levels(instance, math.e)
    h = build_h(dec)
    q = instance.e.q
    r = q / (1 - q)
    mid = np.sqrt(edges[:-1] * edges[1:])
    g = instance.v.pieces.power(-1.0)
    hv = _resample(h, edges)
    with np.errstate(all="ignore"):
        f = hv * np.asarray(g(mid), float) * np.asarray(g.running_sup(mid), float) ** r * \
            np.asarray(instance.w.pieces.tail(mid), float) ** (1 / (1 - q))
    return np.where(np.isfinite(f), f, 0.0)


# ---------------------------------------------------------------------------


def best_constant_search(instance: HardyInstance, cfg: SearchConfig = SearchConfig(),
                         strict: bool = False) -> SearchResult:
    """Lower bound (and estimate) of the best constant ``C`` on ``cfg.window``."""
    lo, hi = cfg.window
    bps = np.union1d(instance.v.pieces.breakpoints, instance.w.pieces.breakpoints)
    edges = grid_edges(lo, hi, cfg.n_cells, bps)
    prob = _HardyProblem(instance, edges)
    if not np.any(prob.wn > 0) and prob.W_end == 0:
        return SearchResult(0.0, None, 0, [], {}, None)
    active = np.isfinite(prob.m) & (prob.m > 0)

    def degenerate(kind, f):
        res = SearchResult(math.inf, StepFunction(edges, f), 0, [], {}, kind)
        if strict:
            raise DegenerateInstance(f"{kind}: the ratio is unbounded")
        return res

    if math.isinf(prob.W_end):
        f = np.where(active, 1.0, 0.0)
        return degenerate("lhs_infinite", f)
    zero_mass = (prob.m == 0) & prob.useful
    if zero_mass.any():
        f = np.zeros(prob.d.size)
        f[int(np.argmax(zero_mass))] = 1.0
        return degenerate("rhs_zero", f)
    if not active.any():
        return SearchResult(0.0, None, 0, [], {}, "rhs_infinite")

    seeds = {}
    try:
        seeds["saturating"] = _seed_saturating(instance, edges, prob)
    except HardyLabError:
        pass
    if instance.regime is Regime.NONCONVEX:
        try:
            seeds["theta"] = _seed_theta(instance, edges, cfg)
        except HardyLabError:
            pass
    if instance.regime is Regime.NONCONVEX_P1:
        try:
            seeds["sigma"] = _seed_sigma(instance, edges, cfg)
        except HardyLabError:
            pass
    if instance.e.p == 1:
        vv = prob.log_vertex_values()
        vv = np.where(active & ~np.isnan(vv), vv, -np.inf)
        f = np.zeros(prob.d.size)
        f[int(np.argmax(vv))] = 1.0
        seeds["vertex"] = f
    starts = dict(seeds)
    for j in range(cfg.restarts):
        rng = np.random.default_rng([cfg.seed, j])
        starts[f"random_{j}"] = np.exp(rng.uniform(math.log(1e-3), math.log(1e3), prob.d.size))

    best_f, best_phi, total_it = None, -math.inf, 0
    history = []
    seed_phi = {}
    for name, f0 in starts.items():
        f0 = np.where(active, f0, 0.0)
        if name in seeds:
            seed_phi[name] = _phi(prob, _normalize(prob, f0)) if np.any(f0 > 0) else -math.inf
            if name in ("vertex",) or instance.e.p == 1 and instance.e.q >= 1:
                # linear-fractional case: the vertex is optimal, ascent cannot leave it
                f, phi, it = _normalize(prob, f0), seed_phi[name], 0
            else:
                floor = 1e-9 * float(np.max(f0)) if np.any(f0 > 0) else 1.0
                f, phi, it = _ascent(prob, np.where(active, np.maximum(f0, floor), 0.0), cfg.max_iters, cfg.ascent_tol)
                if seed_phi[name] > phi:
                    f, phi = _normalize(prob, f0), seed_phi[name]
        else:
            f, phi, it = _ascent(prob, f0, cfg.max_iters, cfg.ascent_tol)
        total_it += it
        history.append({"start": name, "iterations": it, "ratio": _exp(phi)})
        if phi > best_phi:
            best_f, best_phi = f, phi

    # certified values: every candidate is re-evaluated by adaptive quadrature
    cand = {}
    for name, f0 in seeds.items():
        f0 = np.where(active, f0, 0.0)
        if np.any(f0 > 0):
            cand[name] = _certified(StepFunction(edges, _normalize(prob, f0)), instance, cfg.rel_tol)
    best_step = StepFunction(edges, best_f)
    c_best = _certified(best_step, instance, cfg.rel_tol)
    C = max([c_best] + list(cand.values()))
    if C > c_best:
        name = max(cand, key=cand.get)
        best_step = StepFunction(edges, _normalize(prob, np.where(active, seeds[name], 0.0)))
    return SearchResult(C, best_step, total_it, history, cand, None)


def _certified(f: StepFunction, instance, rel_tol):
    if f.is_zero:
        return 0.0
    try:
        return float(rayleigh_ratio(f, instance, rel_tol).value)
    except RatioOverflow:
        return math.inf
    except HardyLabError:
        return 0.0


# ---------------------------------------------------------------------------


def supremum_identity_check(v: Weight, e: Exponents, t: float, cfg: SearchConfig = SearchConfig()):
    """Maximize ``int_0^t f / (int f^p v)^(1/p)`` and compare with ``V(t)``.

    Returns ``(oracle_sup, V_t, rel_gap)``.
    """
    Vt = compute_V(v, e, t)
    if not (Vt.is_finite and Vt.value > 0):
        raise DegenerateWeight(f"V({t:g}) must be finite and positive")
    lo = min(cfg.window[0], t * 1e-6)
    focus = [x for x in v.pieces.breakpoints if lo < x < t] + [t]
    edges = np.concatenate([[0.0], refined_grid(lo, t, cfg.n_cells - 1, focus)])
    m = StepFunction(edges, np.zeros(edges.size - 1)).cell_masses(v)
    d = np.diff(edges)
    prob = _LinearProblem(d, m, e.p)
    active = np.isfinite(m) & (m > 0)
    if e.p == 1:
        vv = np.where(active, prob.log_vertex_values(), -np.inf)
        best = _exp(float(vv.max()))
    else:
        best = 0.0
        for j in range(max(1, min(cfg.restarts, 3))):
            rng = np.random.default_rng([cfg.seed, j])
            f0 = np.exp(rng.uniform(math.log(1e-3), math.log(1e3), d.size))
            f, phi, _ = _ascent(prob, f0, cfg.max_iters, cfg.ascent_tol)
            best = max(best, _exp(phi))
    return best, Vt.value, abs(best - Vt.value) / Vt.value


# ---------------------------------------------------------------------------


def equivalence_audit(instance: HardyInstance, cfg: SearchConfig = SearchConfig(), theta=None, sigma=math.e) -> dict:
    """``A``, the construction ratios, the oracle estimate and their quotients."""
    res_A = compute_A(instance, window=cfg.window)
    A = res_A.A
    lowers = {}
    e = instance.e
    if res_A.witness is not None and math.isfinite(res_A.witness) and res_A.witness > 0:
        try:
            f = saturating_step(instance.v, e, res_A.witness)
            lowers["saturating"] = {"t": res_A.witness, "ratio": _ev(rayleigh_ratio(f, instance))}
        except HardyLabError as exc:
            lowers["saturating"] = {"error": type(exc).__name__}
    if instance.regime is Regime.NONCONVEX:
        try:
            f = theta_test_function(instance.v, instance.w, e, theta, cfg.window)
            lowers["theta"] = {"theta": theta, "window": list(cfg.window), "ratio": _ev(rayleigh_ratio(f, instance))}
        except HardyLabError as exc:
            lowers["theta"] = {"error": type(exc).__name__}
    if instance.regime is Regime.NONCONVEX_P1:
        try:
            lo, hi = cfg.window
            edges = grid_edges(lo, hi, cfg.n_cells)
            f = StepFunction(edges, _seed_sigma(instance, edges, cfg))
            lowers["sigma"] = {"sigma": sigma, "ratio": _ev(rayleigh_ratio(f, instance))}
        except HardyLabError as exc:
            lowers["sigma"] = {"error": type(exc).__name__}
    search = best_constant_search(instance, cfg)
    finite_lowers = [x["ratio"] for x in lowers.values() if "ratio" in x]
    C_lower = max([float(x) if x != "inf" else math.inf for x in finite_lowers] + [0.0])
    C_est = max(search.C_est, C_lower)

    def quot(x):
        if A.is_finite and A.value > 0 and math.isfinite(x):
            return x / A.value
        return None

    return {
        "A": A.to_json(),
        "regime": instance.regime.value,
        "C_lower": C_lower,
        "constructions": lowers,
        "C_est": "inf" if math.isinf(C_est) else C_est,
        "C_over_A": quot(C_est),
        "C_lower_over_A": quot(C_lower),
        "finiteness_disagreement": bool(A.is_finite != math.isfinite(C_est)),
        "search": search.to_json(),
    }


def _ev(x: ExtendedValue):
    return "inf" if math.isinf(x.value) else x.value


# ---------------------------------------------------------------------------


DEFAULT_WINDOWS = ((1e-8, 1e8), (1e-24, 1e24), (1e-72, 1e72))


def window_stability(instance: HardyInstance, windows=DEFAULT_WINDOWS, cells_per_decade: float = 10,
                     restarts: int = 2, seed: int = 42, threshold: float = 1.1, max_iters: int = 1500) -> dict:
    """Classify finiteness of ``C`` by widening the search window.

    Stable means a finite estimate on every window and a growth factor
    ``max_k C(window_k+1) / C(window_k)`` below ``threshold``.  Wider windows
    are skipped once the verdict is settled (an infinite estimate or a step
    already above the threshold).
    """
    ests = []
    for lo, hi in windows:
        n = max(16, int(round(cells_per_decade * math.log10(hi / lo))))
        cfg = SearchConfig(n_cells=n, window=(lo, hi), restarts=restarts, max_iters=max_iters, seed=seed)
        res = best_constant_search(instance, cfg)
        ests.append(res.C_est)
        if math.isinf(res.C_est):
            break
        if len(ests) > 1 and ests[-1] >= threshold * ests[-2] > 0:
            break
    if any(math.isinf(c) for c in ests):
        growth = math.inf
    elif ests[0] == 0:
        growth = 1.0 if ests[-1] == 0 else math.inf
    else:
        growth = max(b / a if a > 0 else (1.0 if b == 0 else math.inf) for a, b in zip(ests, ests[1:]))
    return {"C": ["inf" if math.isinf(c) else c for c in ests], "growth": growth,
            "stable": bool(growth < threshold)}
