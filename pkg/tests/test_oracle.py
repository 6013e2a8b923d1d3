"""The best-constant search and the checks built on it.

Anchors: for ``p = 1 <= q`` the best constant equals ``A`` exactly, and any
certified ratio is a lower bound for the true constant.
"""

import json
import math

import numpy as np
import pytest

from hardylab.errors import ConfigError, DegenerateWeight
from hardylab.extremals import rayleigh_ratio
from hardylab.functionals import HardyInstance, compute_A
from hardylab.oracle import (
    SearchConfig,
    best_constant_search,
    equivalence_audit,
    grid_edges,
    supremum_identity_check,
    window_stability,
)
from hardylab.weights import Exponential, Exponents, PiecewisePower, Power, indicator

CHI12 = indicator(1.0, 2.0)
SMALL = SearchConfig(n_cells=300, window=(1e-3, 1e3), restarts=2, max_iters=1500)


@pytest.mark.parametrize("kw", [
    {"n_cells": 1},
    {"window": (1.0, 0.5)},
    {"window": (0.0, 1.0)},
    {"restarts": 0},
    {"max_iters": 0},
    {"ascent_tol": 0.0},
    {"rel_tol": 2.0},
])
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        SearchConfig(**kw)


def test_grid_edges():
    e = grid_edges(1e-2, 1e2, 40, extra=[3.0])
    assert e[0] == pytest.approx(1e-2) and e[-1] == pytest.approx(1e2)
    assert 3.0 in e and np.all(np.diff(e) > 0)


# ---------------------------------------------------------------------------
# p = 1 <= q: the constant is exactly A

@pytest.mark.parametrize("inst", [
    HardyInstance(Power(0.0), CHI12, Exponents(1.0, 1.0)),
    HardyInstance(Exponential(-1.0), CHI12, Exponents(1.0, 2.0)),
    HardyInstance(Power(-0.5), Exponential(-1.0), Exponents(1.0, 1.5)),
])
def test_p1_matches_A(inst):
    A = compute_A(inst).A.value
    res = best_constant_search(inst, SMALL)
    assert res.C_est <= A * (1 + 1e-9)
    assert res.C_est >= 0.98 * A


# ---------------------------------------------------------------------------
# lower-bound certification

@pytest.mark.parametrize("inst", [
    HardyInstance(Power(0.0), Power(-2.0), Exponents(2.0, 2.0)),
    HardyInstance(Power(0.0), CHI12, Exponents(2.0, 1.0)),
    HardyInstance(Power(0.5), CHI12, Exponents(3.0, 2.0)),
    HardyInstance(Exponential(-1.0), CHI12, Exponents(1.0, 0.5)),
])
def test_estimate_is_certified_ratio(inst):
    res = best_constant_search(inst, SMALL)
    assert math.isfinite(res.C_est) and res.C_est > 0
    assert rayleigh_ratio(res.argmax_f, inst).value == pytest.approx(res.C_est, rel=1e-7)


def test_classical_hardy_below_p_prime():
    inst = HardyInstance(Power(0.0), Power(-2.0), Exponents(2.0, 2.0))
    res = best_constant_search(inst, SMALL)
    assert 1.5 < res.C_est <= 2.0


def test_deterministic():
    inst = HardyInstance(Power(0.5), CHI12, Exponents(3.0, 2.0))
    a = best_constant_search(inst, SMALL)
    b = best_constant_search(inst, SMALL)
    assert a.C_est == b.C_est
    assert np.array_equal(a.argmax_f.values, b.argmax_f.values)
    assert json.dumps(a.to_json()) == json.dumps(b.to_json())


def test_degenerate_instances():
    zero_w = HardyInstance(Power(0.0), PiecewisePower(((1.0, 2.0, 0.0, 0.0),)), Exponents(2.0, 1.0))
    assert best_constant_search(zero_w, SMALL).C_est == 0.0
    heavy = HardyInstance(Power(0.0), Power(-0.5), Exponents(2.0, 2.0))  # W = inf everywhere
    res = best_constant_search(heavy, SMALL)
    assert math.isinf(res.C_est) and res.degenerate


# ---------------------------------------------------------------------------
# supremum identity

@pytest.mark.parametrize("v,p", [(Power(0.0), 2.0), (Power(0.5), 3.0), (Exponential(-1.0), 1.0),
                                 (Power(-1.0), 1.0), (Exponential(-1.0), 1.5)])
def test_supremum_identity(v, p):
    sup, Vt, gap = supremum_identity_check(v, Exponents(p, 1.0), 2.0, SearchConfig(n_cells=400, restarts=2))
    assert sup <= Vt * (1 + 1e-6)  # roundoff in the narrowest cells near t
    assert gap < 1e-2


@pytest.mark.parametrize("p,t,V", [(2.0, 4.0, 2.0), (1.0, 1.0, 1.0)])
def test_supremum_identity_constant_weight(p, t, V):
    sup, Vt, gap = supremum_identity_check(Power(0.0), Exponents(p, 1.0), t, SearchConfig(n_cells=400, restarts=2))
    assert Vt == pytest.approx(V, rel=1e-12)
    assert sup == pytest.approx(V, rel=1e-2) and gap < 1e-2


def test_supremum_identity_infinite_V():
    with pytest.raises(DegenerateWeight):
        supremum_identity_check(Power(2.0), Exponents(2.0, 1.0), 1.0, SMALL)


# ---------------------------------------------------------------------------
# audit and window stability

def test_equivalence_audit_nonconvex():
    inst = HardyInstance(Power(0.0), CHI12, Exponents(2.0, 1.0))
    out = equivalence_audit(inst, SMALL)
    assert out["A"]["value"] == pytest.approx(4 / 3, rel=1e-6)
    assert out["constructions"]["theta"]["ratio"] > 0
    assert not out["finiteness_disagreement"]
    # the oracle estimate is at least every construction ratio
    assert out["C_est"] >= out["C_lower"]
    assert 0.1 < out["C_over_A"] < 10


_FEW = ((1e-4, 1e4), (1e-12, 1e12))


def test_window_stability_finite():
    inst = HardyInstance(Power(0.0), Power(-2.0), Exponents(2.0, 2.0))
    out = window_stability(inst, _FEW)
    assert out["stable"] and out["growth"] < 1.1


def test_window_stability_infinite():
    # A = inf for pure powers in the non-convex regime
    inst = HardyInstance(Power(0.0), Power(-1.25), Exponents(2.0, 1.0))
    out = window_stability(inst, _FEW)
    assert not out["stable"]
