"""Improper quadrature, Stieltjes integrals, envelopes and ess sup.

References are closed-form antiderivatives or ``scipy.integrate.quad``.
"""

import math

import numpy as np
import pytest
from scipy import integrate as sint

from hardylab.calculus import (
    DivergenceSite,
    ExtendedValue,
    MonotoneEnvelope,
    ess_sup,
    integrate,
    integrate_cells,
    stieltjes_integrate,
)
from hardylab.errors import MonotonicityViolated, NotMonotone
from hardylab.weights import PiecewisePower, Power

# ---------------------------------------------------------------------------
# ExtendedValue

def test_extended_value_invariants():
    assert ExtendedValue(1.0, 1e-9).is_finite
    x = ExtendedValue.infinite(DivergenceSite.AT_ZERO)
    assert not x.is_finite and x.to_json() == {"value": "inf", "divergence_site": "AtZero"}
    with pytest.raises(ValueError):
        ExtendedValue(-1.0)
    with pytest.raises(ValueError):
        ExtendedValue(math.nan)
    with pytest.raises(ValueError):
        ExtendedValue(math.inf)  # infinite values need a site
    with pytest.raises(ValueError):
        ExtendedValue(1.0, divergence_site=DivergenceSite.INTERIOR)


# ---------------------------------------------------------------------------
# improper integrals with closed forms

@pytest.mark.parametrize("f,lo,hi,exact", [
    (lambda t: t**-0.5, 0.0, 1.0, 2.0),
    (lambda t: t**-0.99, 0.0, 1.0, 100.0),
    (lambda t: t**-2.0, 1.0, math.inf, 1.0),
    (lambda t: np.exp(-t), 0.0, math.inf, 1.0),
    (lambda t: t**-1.5, 4.0, math.inf, 1.0),
    (lambda t: np.log(1 / t), 0.0, 1.0, 1.0),
    (lambda t: 1 / (1 + t**2), 0.0, math.inf, math.pi / 2),
    (lambda t: t**0.5 * np.exp(-t), 0.0, math.inf, math.sqrt(math.pi) / 2),
])
def test_integrate_closed_forms(f, lo, hi, exact):
    r = integrate(f, lo, hi, rel_tol=1e-10)
    assert r.is_finite
    assert r.value == pytest.approx(exact, rel=1e-8)


@pytest.mark.parametrize("f,lo,hi,site", [
    (lambda t: 1 / t, 0.0, 1.0, DivergenceSite.AT_ZERO),
    (lambda t: t**-1.5, 0.0, 1.0, DivergenceSite.AT_ZERO),
    (lambda t: 1 / t, 1.0, math.inf, DivergenceSite.AT_INFINITY),
    (lambda t: t**-0.9, 1.0, math.inf, DivergenceSite.AT_INFINITY),
    (lambda t: np.ones_like(t), 0.0, math.inf, DivergenceSite.AT_INFINITY),
])
def test_integrate_divergent(f, lo, hi, site):
    r = integrate(f, lo, hi)
    assert not r.is_finite
    assert r.divergence_site is site


def test_integrate_with_breakpoints_matches_quad():
    f = lambda t: np.where(t < 1, t**-0.3, np.where(t < 3, 2.0 / t, np.exp(-t)))  # noqa: E731
    ref = sum(sint.quad(lambda s: float(f(np.array(s))), a, b, epsabs=0, epsrel=1e-12, limit=200)[0]
              for a, b in ((0, 1), (1, 3), (3, np.inf)))
    r = integrate(f, 0.0, math.inf, 1e-10, breakpoints=[1.0, 3.0])
    assert r.value == pytest.approx(ref, rel=1e-8)


def test_integrate_empty_and_bad_range():
    assert integrate(lambda t: t, 2.0, 1.0).value == 0.0
    with pytest.raises(ValueError):
        integrate(lambda t: t, -1.0, 1.0)
    with pytest.raises(ValueError):
        integrate(lambda t: t, 0.0, 1.0, rel_tol=0.0)


def test_integrate_cells_sums_to_total():
    f = lambda t: t**-0.5 * np.exp(-t)  # noqa: E731
    edges = np.concatenate([[0.0], np.geomspace(1e-3, 30.0, 20)])
    v, e = integrate_cells(f, edges, 1e-11)
    assert v.shape == (20,) and np.all(e >= 0)
    ref = sint.quad(f, 0, 30.0, epsabs=0, epsrel=1e-12, limit=400)[0]
    assert v.sum() == pytest.approx(ref, rel=1e-9)
    # each cell against its own closed form  int t^-1/2 e^-t = -sqrt(pi) erfc(sqrt t)
    from scipy.special import erfc
    exact = -math.sqrt(math.pi) * np.diff(erfc(np.sqrt(edges)))
    np.testing.assert_allclose(v, exact, rtol=1e-8)


# ---------------------------------------------------------------------------
# envelopes

def test_envelope_rejects_non_monotone():
    t = np.array([1.0, 2.0, 3.0])
    with pytest.raises(MonotonicityViolated):
        MonotoneEnvelope(t, np.array([1.0, 3.0, 2.0]), True)
    with pytest.raises(MonotonicityViolated):
        MonotoneEnvelope(t, np.array([3.0, 1.0, 2.0]), False)
    # rounding-level wiggles are absorbed
    env = MonotoneEnvelope(t, np.array([1.0, 2.0, 2.0 - 1e-13]), True)
    assert np.all(np.diff(env.values) >= 0)


def test_envelope_interpolates_in_log_t():
    env = MonotoneEnvelope(np.array([1.0, 100.0]), np.array([0.0, 2.0]), True)
    assert env(10.0) == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# Stieltjes integrals

def _sampled(F, lo=1e-3, hi=1e3, n=257, **kw):
    t = np.geomspace(lo, hi, n)
    return MonotoneEnvelope(t, F(t), True, F, **kw)


def test_stieltjes_density_route_matches_quad():
    F = lambda t: np.asarray(t, float) ** 2  # noqa: E731
    env = _sampled(F, density=lambda t: 2 * np.asarray(t, float))
    g = lambda t: np.exp(-np.asarray(t, float))  # noqa: E731
    r = stieltjes_integrate(g, env, 0.0, math.inf, 1e-10)
    assert r.value == pytest.approx(2.0, rel=1e-8)  # int e^-t 2t dt


def test_stieltjes_sums_agree_with_density_route():
    F = lambda t: np.sqrt(np.asarray(t, float))  # noqa: E731
    g = lambda t: 1 / (1 + np.asarray(t, float))  # noqa: E731
    with_density = stieltjes_integrate(g, _sampled(F, density=lambda t: 0.5 / np.sqrt(t)), 0.5, 8.0, 1e-10)
    sums_only = stieltjes_integrate(g, _sampled(F), 0.5, 8.0, 1e-8)
    ref = sint.quad(lambda t: g(t) * 0.5 / math.sqrt(t), 0.5, 8.0, epsabs=0, epsrel=1e-12)[0]
    assert with_density.value == pytest.approx(ref, rel=1e-9)
    assert sums_only.value == pytest.approx(ref, rel=1e-6)


def test_stieltjes_atoms():
    # F = 1_{t > 2}: the measure is a unit atom at 2
    F = lambda t: np.where(np.asarray(t, float) > 2.0, 1.0, 0.0)  # noqa: E731
    env = _sampled(F, density=lambda t: np.zeros_like(np.asarray(t, float)), jumps=((2.0, 1.0),))
    g = lambda t: 1 / np.asarray(t, float)  # noqa: E731
    assert stieltjes_integrate(g, env, 0.0, math.inf).value == pytest.approx(0.5)
    assert stieltjes_integrate(g, env, 3.0, math.inf).value == 0.0


def test_stieltjes_needs_nondecreasing():
    t = np.geomspace(1, 10, 5)
    env = MonotoneEnvelope(t, 1 / t, False)
    with pytest.raises(NotMonotone):
        stieltjes_integrate(lambda s: s, env, 1.0, 10.0)


# ---------------------------------------------------------------------------
# ess sup

def test_ess_sup_pieces_exact():
    g = PiecewisePower(((0.0, 1.0, 1.0, -1.0), (1.0, math.inf, 5.0, 0.0)))
    assert ess_sup(g, 0.5) == math.inf
    h = PiecewisePower(((0.0, 1.0, 1.0, 1.0), (1.0, math.inf, 5.0, 0.0)))
    assert ess_sup(h, 0.5) == pytest.approx(0.5)
    assert ess_sup(h, 3.0) == pytest.approx(5.0)


def test_ess_sup_callable():
    f = lambda t: np.sin(np.asarray(t, float))  # noqa: E731
    assert ess_sup(f, 3.0) == pytest.approx(1.0, rel=1e-8)
    assert ess_sup(lambda t: 1 / np.asarray(t, float), 1.0) == math.inf
    assert ess_sup(Power(2.0), 3.0) == pytest.approx(9.0)
