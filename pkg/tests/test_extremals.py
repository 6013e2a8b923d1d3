"""Test-function constructions, the Rayleigh ratio and the p = 1 chain.

Reference values are closed forms or ``scipy.integrate.quad`` applied to the
defining integrals of the continuous profiles.
"""

import math

import numpy as np
import pytest
from scipy import integrate as sint

from hardylab.calculus import MonotoneEnvelope
from hardylab.errors import (
    DegenerateWeight,
    IndeterminateRatio,
    PreconditionViolated,
    RegimeMismatch,
    ThetaOutOfRange,
    ZeroFunction,
)
from hardylab.extremals import (
    build_h,
    hardy_lemma_check,
    rayleigh_ratio,
    refined_grid,
    saturating_step,
    sharp_upper_constant,
    sigma_chain,
    sigma_levels,
    sigma_sensitivity,
    theta_B,
    theta_default,
    theta_test_function,
    truncated_ratio,
    upper_estimate_constant,
)
from hardylab.functionals import HardyInstance, compute_V
from hardylab.steps import StepFunction
from hardylab.weights import Exponential, Exponents, Power, indicator

CHI12 = indicator(1.0, 2.0)
CHAIN = HardyInstance(Exponential(-1.0), CHI12, Exponents(1.0, 0.5))


def test_refined_grid_contains_focus():
    g = refined_grid(1e-3, 10.0, 50, focus=[2.0])
    assert g[0] == 1e-3 and g[-1] == 10.0
    assert 2.0 in g
    assert np.all(np.diff(g) > 0)
    assert np.min(np.abs(g[g != 2.0] - 2.0)) < 1e-10


# ---------------------------------------------------------------------------
# saturating step

_SAT = [(v, p) for v in (Power(0.0), Power(0.5), Power(-0.5), Exponential(-1.0)) for p in (1.5, 2.0, 3.0)
        if getattr(v, "a", 0.0) < p - 1]  # V(t) finite


@pytest.mark.parametrize("v,p", _SAT)
def test_saturating_step_reaches_V(v, p):
    e = Exponents(p, 1.0)
    t = 2.0
    Vt = compute_V(v, e, t).value
    f = saturating_step(v, e, t)
    ratio = truncated_ratio(f, v, p, t)
    assert ratio <= Vt * (1 + 1e-9)  # Holder
    assert ratio >= 0.999 * Vt


@pytest.mark.parametrize("v", [Power(0.0), Power(-1.0), Exponential(-1.0)])
def test_saturating_step_p1(v):
    e = Exponents(1.0, 1.0)
    Vt = compute_V(v, e, 2.0).value
    f = saturating_step(v, e, 2.0)
    assert truncated_ratio(f, v, 1.0, 2.0) == pytest.approx(Vt, rel=1e-4)


def test_saturating_step_constant_weight_is_indicator():
    f = saturating_step(Power(0.0), Exponents(2.0, 1.0), 3.0, n_cells=64)
    np.testing.assert_allclose(f.values, 1.0)
    assert f.support == (0.0, 3.0)


def test_saturating_step_infinite_V():
    with pytest.raises(DegenerateWeight):
        saturating_step(Power(2.0), Exponents(2.0, 1.0), 1.0)


# ---------------------------------------------------------------------------
# Rayleigh ratio

def test_rayleigh_ratio_indicator_classical():
    # f = 1_(0,1): int_0^1 t^2 t^-2 + int_1^inf t^-2 = 2, ratio = sqrt 2
    inst = HardyInstance(Power(0.0), Power(-2.0), Exponents(2.0, 2.0))
    f = StepFunction(np.array([0.0, 1.0]), np.array([1.0]))
    assert rayleigh_ratio(f, inst).value == pytest.approx(math.sqrt(2), rel=1e-9)


def test_rayleigh_ratio_against_quad():
    inst = HardyInstance(Power(0.5), Exponential(-1.0), Exponents(3.0, 1.5))
    f = StepFunction(np.array([0.2, 1.0, 2.5, 4.0]), np.array([1.0, 0.3, 2.0]))
    L = sint.quad(lambda t: f.primitive(t) ** 1.5 * math.exp(-t), 0.2, np.inf, points=None,
                  epsabs=0, epsrel=1e-12, limit=400)[0]
    N = sum(v**3 * sint.quad(lambda t: t**0.5, a, b)[0] for a, b, v in
            zip(f.edges[:-1], f.edges[1:], f.values))
    assert rayleigh_ratio(f, inst).value == pytest.approx(L ** (1 / 1.5) / N ** (1 / 3), rel=1e-8)


@pytest.mark.parametrize("c", [1e-3, 0.5, 7.0, 1e4])
def test_rayleigh_ratio_homogeneous(c):
    inst = HardyInstance(Power(0.0), CHI12, Exponents(2.0, 1.0))
    f = StepFunction(np.array([0.0, 0.5, 1.5]), np.array([1.0, 2.0]))
    assert rayleigh_ratio(f.scaled(c), inst).value == pytest.approx(rayleigh_ratio(f, inst).value, rel=1e-10)


def test_rayleigh_ratio_guards():
    inst = HardyInstance(Power(0.0), CHI12, Exponents(2.0, 1.0))
    with pytest.raises(ZeroFunction):
        rayleigh_ratio(StepFunction(np.array([0.0, 1.0]), np.array([0.0])), inst)
    vanishing = HardyInstance(indicator(5.0, 6.0), CHI12, Exponents(2.0, 1.0))
    with pytest.raises(IndeterminateRatio):
        rayleigh_ratio(StepFunction(np.array([0.0, 1.0]), np.array([1.0])), vanishing)


def test_rayleigh_ratio_infinite_tail():
    inst = HardyInstance(Power(0.0), Power(-0.5), Exponents(2.0, 1.0))
    f = StepFunction(np.array([0.0, 1.0]), np.array([1.0]))
    assert not rayleigh_ratio(f, inst).is_finite


# ---------------------------------------------------------------------------
# theta family

def _B_quad(v_a, p, q, lo, hi):
    """``int V^r W^(r/p) w`` for ``v = t^a`` and ``w = 1_(1,2)`` by quad."""
    pp = p / (p - 1)
    r = p * q / (p - q)
    k = 1 + v_a * (1 - pp)
    V = lambda t: (t**k / k) ** (1 / pp)  # noqa: E731
    W = lambda t: max(min(2.0, hi) - max(t, 1.0), 0.0)  # noqa: E731
    return sint.quad(lambda t: V(t) ** r * W(t) ** (r / p), max(1.0, lo), min(2.0, hi),
                     epsabs=0, epsrel=1e-12)[0]


@pytest.mark.parametrize("p,q", [(2.0, 1.0), (3.0, 2.0), (4.0, 1.0), (2.0, 0.5)])
@pytest.mark.parametrize("a", [0.0, 0.5])
def test_theta_energy_identity(p, q, a):
    e = Exponents(p, q)
    inst = HardyInstance(Power(a), CHI12, e)
    window = (1e-3, 1e3)
    theta = theta_default(e) + 0.5
    f = theta_test_function(inst.v, inst.w, e, theta, window)
    B_ref = _B_quad(a, p, q, *window)
    assert theta_B(inst, window).value == pytest.approx(B_ref, rel=1e-9)
    assert f.lp_weighted(p, inst.v) == pytest.approx(B_ref / theta, rel=1e-6)


def test_theta_ratio_bounded_by_A_scale():
    # finite A: the ratio is bounded and positive
    inst = HardyInstance(Power(0.0), CHI12, Exponents(2.0, 1.0))
    f = theta_test_function(inst.v, inst.w, inst.e, None, (1e-3, 1e3))
    R = rayleigh_ratio(f, inst).value
    assert 0.5 < R < 10


def test_theta_guards():
    e = Exponents(2.0, 1.0)
    with pytest.raises(RegimeMismatch):
        theta_test_function(Power(0.0), CHI12, Exponents(2.0, 2.0))
    with pytest.raises(RegimeMismatch):
        theta_test_function(Power(0.0), CHI12, Exponents(1.0, 0.5))
    with pytest.raises(ThetaOutOfRange):
        theta_test_function(Power(0.0), CHI12, e, theta=e.r / e.p_prime)
    with pytest.raises(DegenerateWeight):
        theta_test_function(Power(2.0), CHI12, e)


def test_theta_zero_w():
    w = indicator(1e7, 1e8)  # outside the window
    f = theta_test_function(Power(0.0), w, Exponents(2.0, 1.0), window=(1e-3, 1e3))
    assert f.is_zero


# ---------------------------------------------------------------------------
# sigma decomposition

def test_sigma_levels_exponential():
    # V = e^t and sigma = e put the levels at (k, k + 1]
    dec = sigma_levels(CHAIN, math.e)
    ks = dec.index_set
    assert ks == [0, 1, 2, 3]
    for lv in dec.levels:
        assert lv.a == pytest.approx(lv.k, abs=1e-12)
        assert lv.b == pytest.approx(min(lv.k + 1, 4.0), abs=1e-12)
        assert 0 < lv.delta <= (lv.b - lv.a) / 2
        assert lv.G_measure == pytest.approx(lv.delta, rel=1e-9)


def test_build_h_unit_mass_per_level():
    dec = sigma_levels(CHAIN, math.e)
    h = build_h(dec)
    for lv in dec.levels:
        mass = sum(h.primitive(y) - h.primitive(x) for x, y in lv.G)
        assert mass == pytest.approx(1.0, rel=1e-12)


def test_sigma_levels_regime():
    with pytest.raises(RegimeMismatch):
        sigma_levels(HardyInstance(Power(0.0), CHI12, Exponents(2.0, 1.0)), math.e)
    with pytest.raises(ValueError):
        sigma_levels(CHAIN, 1.0)


@pytest.mark.parametrize("sigma,q", [(math.e, 0.5), (2.0, 0.25), (3.0, 0.75)])
def test_upper_constants(sigma, q):
    x = sigma ** (q / (1 - q))
    assert upper_estimate_constant(sigma, q) == pytest.approx(sigma ** (2 * q / (1 - q)) / (1 - 1 / x))
    assert sharp_upper_constant(sigma, q) <= upper_estimate_constant(sigma, q)
    # geometric sum sum_{j <= k} x^(j + 2) bounded by K_sharp x^k
    k = 12
    assert sum(x ** (j + 2) for j in range(-200, k + 1)) <= sharp_upper_constant(sigma, q) * x ** (k + 1) * (1 + 1e-12)


# ---------------------------------------------------------------------------
# Hardy's lemma

def _env(F, lo=1e-3, hi=10.0, n=200, dens=None):
    t = np.geomspace(lo, hi, n)
    return MonotoneEnvelope(t, F(t), True, F, dens)


def test_hardy_lemma_identical_measures():
    F = lambda t: np.asarray(t, float) ** 2  # noqa: E731
    env = _env(F, dens=lambda t: 2 * np.asarray(t, float))
    h = lambda t: np.exp(-np.asarray(t, float))  # noqa: E731
    res = hardy_lemma_check(env, env, h, 0.0, 10.0)
    assert res.holds and res.lhs == res.rhs


def test_hardy_lemma_dominated():
    F1 = _env(lambda t: np.asarray(t, float), dens=lambda t: np.ones_like(np.asarray(t, float)))
    F2 = _env(lambda t: 2 * np.asarray(t, float), dens=lambda t: 2 * np.ones_like(np.asarray(t, float)))
    h = lambda t: 1 / (1 + np.asarray(t, float))  # noqa: E731
    res = hardy_lemma_check(F1, F2, h, 0.0, 10.0)
    assert res.holds
    assert res.lhs == pytest.approx(math.log(11.0), rel=1e-8)
    assert res.rhs == pytest.approx(2 * math.log(11.0), rel=1e-8)


def test_hardy_lemma_preconditions():
    F1 = _env(lambda t: 2 * np.asarray(t, float))
    F2 = _env(lambda t: np.asarray(t, float))
    with pytest.raises(PreconditionViolated):
        hardy_lemma_check(F1, F2, lambda t: np.ones_like(np.asarray(t, float)), 0.0, 10.0)
    with pytest.raises(PreconditionViolated):
        hardy_lemma_check(F2, F1, lambda t: np.asarray(t, float), 0.0, 10.0)


# ---------------------------------------------------------------------------
# the full chain

def test_sigma_chain_holds():
    out = sigma_chain(CHAIN, math.e)
    assert out["all_hold"]
    assert out["A"] == pytest.approx(3.90498, rel=1e-5)
    names = [s["name"] for s in out["steps"]]
    assert names[0] == "integration_by_parts" and names[-1] == "hardy_lemma"
    assert all(s["holds"] for s in out["steps"])
    assert all(x["slack"] >= 0 for x in out["estimate_of_h"])
    assert out["upper_estimate"]["max_ratio"] <= out["upper_estimate"]["K_sharp"]


def test_sigma_sensitivity():
    rows = sigma_sensitivity(CHAIN, (1.5, math.e, 6.0))
    assert [r["sigma"] for r in rows] == [1.5, math.e, 6.0]
    assert all(r["all_hold"] and r["bound_over_value"] >= 1 for r in rows)
    # the product of the sigma-dependent constants grows with sigma here
    consts = [r["chain_constant"] for r in rows]
    assert consts == sorted(consts)
