"""Primitives V, W, the functional A and the pointwise estimate.

Every finite reference value is a closed form or an independent
``scipy.integrate.quad`` evaluation of the defining integral.
"""

import math

import numpy as np
import pytest
from scipy import integrate as sint

from hardylab.errors import ConfigError, DegenerateWeight, RegimeMismatch
from hardylab.functionals import (
    HardyInstance,
    check_change_of_variables,
    check_pointwise_bound,
    compute_A,
    compute_V,
    compute_W,
    envelope_V,
    envelope_W,
    mazya_rozin_A,
)
from hardylab.steps import StepFunction
from hardylab.weights import Exponential, Exponents, PiecewisePower, Power, Regime, indicator

CHI12 = indicator(1.0, 2.0)


def _quad(f, a, b, points=None):
    return sint.quad(f, a, b, points=points, epsabs=0, epsrel=1e-12, limit=400)[0]


# ---------------------------------------------------------------------------
# primitives

@pytest.mark.parametrize("a,p,t", [(0.0, 2.0, 3.0), (0.5, 2.0, 0.7), (-0.5, 3.0, 2.0), (1.5, 4.0, 5.0)])
def test_V_power_closed_form(a, p, t):
    pp = p / (p - 1)
    # u = t^(a(1-p')), U = t^(1 + a(1-p')) / (1 + a(1-p'))
    k = 1 + a * (1 - pp)
    expected = (t**k / k) ** (1 / pp)
    assert compute_V(Power(a), Exponents(p, 1.0), t).value == pytest.approx(expected, rel=1e-12)


def test_V_p1_is_running_sup_of_reciprocal():
    e = Exponents(1.0, 1.0)
    assert compute_V(Exponential(-1.0), e, 2.0).value == pytest.approx(math.e**2)
    assert compute_V(Power(1.0), e, 3.0).value == math.inf  # 1/t blows up at 0
    assert compute_V(Power(-1.0), e, 3.0).value == pytest.approx(3.0)


def test_V_divergent_reports_site():
    r = compute_V(Power(2.0), Exponents(2.0, 1.0), 1.0)  # u = t^-2
    assert not r.is_finite and r.divergence_site.value == "AtZero"


def test_W_tail():
    assert compute_W(Power(-2.0), 4.0).value == pytest.approx(0.25)
    assert compute_W(CHI12, 1.5).value == pytest.approx(0.5)
    assert compute_W(CHI12, 3.0).value == 0.0
    r = compute_W(Power(-1.0), 1.0)
    assert not r.is_finite and r.divergence_site.value == "AtInfinity"


def test_envelopes_monotone_and_exact():
    e = Exponents(2.0, 2.0)
    env = envelope_V(Power(0.0), e, (1e-3, 1e3), 64)
    np.testing.assert_allclose(env.values, np.sqrt(env.t), rtol=1e-12)
    assert env.increasing
    envW = envelope_W(Power(-2.0), (1e-3, 1e3), 64, power=0.5)
    np.testing.assert_allclose(envW.values, envW.t**-0.5, rtol=1e-12)
    assert not envW.increasing
    with pytest.raises(ConfigError):
        envelope_V(Power(0.0), e, (1.0, 0.5))
    with pytest.raises(ConfigError):
        envelope_V(Power(0.0), e, (1e-3, 1e3), 4)


# ---------------------------------------------------------------------------
# the functional A: convex regime

def test_classical_hardy_A():
    inst = HardyInstance(Power(0.0), Power(-2.0), Exponents(2.0, 2.0))
    res = compute_A(inst)
    assert res.regime is Regime.CONVEX
    assert res.A.value == pytest.approx(1.0, rel=1e-6)


def test_convex_sup_closed_form():
    # V = sqrt t, W = (1 - t)_+, sup sqrt(t (1 - t)) = 1/2 at t = 1/2
    inst = HardyInstance(Power(0.0), indicator(0.0, 1.0), Exponents(2.0, 2.0))
    res = compute_A(inst)
    assert res.A.value == pytest.approx(0.5, rel=1e-9)
    assert res.witness == pytest.approx(0.5, rel=1e-4)


def test_convex_p1():
    # V = e^t, W = (2 - t)_+ on (1, 2), 1 before: sup e^t W^(1/2) by a dense scan
    inst = HardyInstance(Exponential(-1.0), CHI12, Exponents(1.0, 2.0))
    t = np.linspace(1e-6, 2.0, 2_000_001)
    W = np.where(t < 1, 1.0, 2.0 - t)
    assert compute_A(inst).A.value == pytest.approx(np.max(np.exp(t) * np.sqrt(W)), rel=1e-9)


def test_convex_infinite():
    # V = sqrt t, W = 1/sqrt t at infinity: product grows like t^(1/4)
    inst = HardyInstance(Power(0.0), Power(-1.5), Exponents(2.0, 2.0))
    assert not compute_A(inst).A.is_finite


def test_zero_w_gives_zero():
    inst = HardyInstance(Power(0.0), PiecewisePower(((1.0, 2.0, 0.0, 0.0),)), Exponents(2.0, 1.0))
    assert compute_A(inst).A.value == 0.0


# ---------------------------------------------------------------------------
# the functional A: non-convex regimes

def test_nonconvex_closed_form():
    # dV^2 = dt, so A = int_0^2 W^2 = 1 + 1/3
    inst = HardyInstance(Power(0.0), CHI12, Exponents(2.0, 1.0))
    assert compute_A(inst).A.value == pytest.approx(4 / 3, rel=1e-6)


def test_nonconvex_against_quad():
    # p = 3, q = 2, r = 6: V^6 = (t)^(6/p') = t^4, A = int W^3 d(t^4)
    inst = HardyInstance(Power(0.0), CHI12, Exponents(3.0, 2.0))
    W = lambda t: 1.0 if t <= 1 else max(2.0 - t, 0.0)  # noqa: E731
    ref = _quad(lambda t: W(t) ** 3 * 4 * t**3, 0.0, 2.0, points=[1.0])
    assert compute_A(inst).A.value == pytest.approx(ref, rel=1e-7)


def test_nonconvex_p1_includes_atom_at_zero():
    # V = e^t has V(0+) = 1, so dV^r carries a unit atom at 0 where W = 1
    inst = HardyInstance(Exponential(-1.0), CHI12, Exponents(1.0, 0.5))
    assert inst.regime is Regime.NONCONVEX_P1
    W = lambda t: 1.0 if t <= 1 else max(2.0 - t, 0.0)  # noqa: E731
    ref = 1.0 + _quad(lambda t: W(t) ** 2 * math.exp(t), 0.0, 2.0, points=[1.0])
    assert compute_A(inst).A.value == pytest.approx(ref, rel=1e-7)


def test_nonconvex_infinite():
    inst = HardyInstance(Power(0.0), Power(-1.25), Exponents(2.0, 1.0))
    assert not compute_A(inst).A.is_finite


# ---------------------------------------------------------------------------
# Maz'ya-Rozin form

@pytest.mark.parametrize("p,q", [(2.0, 1.0), (3.0, 2.0), (4.0, 1.0), (3.0, 1.5)])
def test_mazya_rozin_proportional(p, q):
    inst = HardyInstance(Power(0.5), CHI12, Exponents(p, q))
    e = inst.e
    A = compute_A(inst).A.value
    MR = mazya_rozin_A(inst).value
    assert MR == pytest.approx(e.p_prime / e.r * A, rel=1e-6)


def test_mazya_rozin_regime():
    with pytest.raises(RegimeMismatch):
        mazya_rozin_A(HardyInstance(Power(0.0), CHI12, Exponents(2.0, 0.5)))
    with pytest.raises(RegimeMismatch):
        mazya_rozin_A(HardyInstance(Power(0.0), CHI12, Exponents(2.0, 2.0)))


# ---------------------------------------------------------------------------
# pointwise estimate

def _step():
    return StepFunction(np.array([0.1, 0.5, 1.0, 3.0]), np.array([2.0, 0.0, 1.0]))


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0])
@pytest.mark.parametrize("eps", [0.1, 0.5, 0.9])
@pytest.mark.parametrize("t", [0.3, 1.0, 2.5, 10.0])
def test_pointwise_bound_holds(p, eps, t):
    r = check_pointwise_bound(_step(), Power(0.3), Exponents(p, 1.0), eps, t)
    assert r.holds and r.slack >= -1e-12 * r.rhs


def test_pointwise_saturation_and_injected_constant():
    # f = v^(1-p') on (0, t) is nearly extremal for small eps; halving K must break it
    e = Exponents(2.0, 1.0)
    edges = np.concatenate([[0.0], np.geomspace(1e-8, 1.0, 400)])
    f = StepFunction(edges, np.ones(400))
    ok = check_pointwise_bound(f, Power(0.0), e, 0.1, 1.0)
    assert ok.holds
    assert ok.lhs / ok.rhs > 0.9
    bad = check_pointwise_bound(f, Power(0.0), e, 0.1, 1.0, constant_factor=0.5)
    assert not bad.holds


def test_pointwise_arguments():
    with pytest.raises(ValueError):
        check_pointwise_bound(_step(), Power(0.0), Exponents(2.0, 1.0), 1.0, 1.0)
    with pytest.raises(ValueError):
        check_pointwise_bound(_step(), Power(0.0), Exponents(2.0, 1.0), 0.5, 0.0)


# ---------------------------------------------------------------------------
# change of variables

_COV = [(a, p) for a in (-0.5, 0.0, 0.5, 1.5) for p in (1.5, 2.0, 3.0) if a < p - 1]  # V finite


@pytest.mark.parametrize("a,p", _COV)
@pytest.mark.parametrize("eps", [0.1, 0.5, 0.9])
def test_change_of_variables(a, p, eps):
    lhs, rhs, gap = check_change_of_variables(Power(a), Exponents(p, 1.0), eps, 2.0)
    assert gap < 1e-8


def test_change_of_variables_guards():
    with pytest.raises(RegimeMismatch):
        check_change_of_variables(Power(0.0), Exponents(1.0, 1.0), 0.5, 1.0)
    with pytest.raises(DegenerateWeight):
        check_change_of_variables(Power(2.0), Exponents(2.0, 1.0), 0.5, 1.0)
