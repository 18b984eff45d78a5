import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from infoclock.errors import ConfigError
from infoclock.model import (CARA, CRRA, IllPosed, Log, MarketParams, QuadraticCost, TabulatedCost,
                             WellPosed, classify, derive_t0, load_config, parse_config)


def market(**kw):
    base = dict(r=0.02, sigma=0.2, mu0=0.08, sigma0_sq=0.01, T=2.0, x0=1000.0)
    base.update(kw)
    return MarketParams(**base)


@pytest.mark.parametrize("sigma,s0,t0", [(0.2, 0.01, 4.0), (1.0, 1.0, 1.0), (0.3, 0.045, 2.0)])
def test_derive_t0(sigma, s0, t0):
    assert derive_t0(market(sigma=sigma, sigma0_sq=s0)) == pytest.approx(t0, rel=1e-14)


@pytest.mark.parametrize("kw", [dict(sigma=0.0), dict(sigma=-1.0), dict(sigma0_sq=0.0),
                                dict(T=0.0), dict(T=math.inf), dict(r=math.nan)])
def test_invalid_market_rejected(kw):
    with pytest.raises(ConfigError):
        market(**kw)


def test_classify_examples():
    assert isinstance(classify(MarketParams.from_t0(4.0), CRRA(2.0)), WellPosed)
    assert classify(MarketParams.from_t0(4.0), CRRA(0.5)).ok
    bad = classify(MarketParams.from_t0(1.0), CRRA(0.2))
    assert isinstance(bad, IllPosed) and not bad.ok
    assert "(1-gamma)/gamma" in bad.reason


def test_classify_boundary_is_illposed():
    # t0 / T = 1 = (1 - 0.5) / 0.5 exactly
    assert not classify(MarketParams.from_t0(2.0), CRRA(0.5)).ok


def test_cara_and_log_always_wellposed():
    p = MarketParams.from_t0(1e-3, T=100.0)
    assert classify(p, CARA(5.0)).ok and classify(p, Log()).ok and classify(p, CRRA(3.0)).ok


@given(st.floats(0.05, 0.95), st.floats(0.05, 20.0), st.floats(0.01, 1.0))
def test_classify_monotone_in_t0(gamma, t0, shrink):
    u = CRRA(gamma)
    if not classify(MarketParams.from_t0(t0), u).ok:
        assert not classify(MarketParams.from_t0(t0 * shrink), u).ok


def test_utilities():
    assert CARA(0.5)(0.0) == pytest.approx(-2.0)
    assert CRRA(2.0)(2.0) == pytest.approx(-0.5)
    assert Log()(math.e) == pytest.approx(1.0)
    for u in (CARA(0.01), CRRA(3.0), CRRA(0.4), Log()):
        assert u.inverse(u(7.5)) == pytest.approx(7.5, rel=1e-12)
    with pytest.raises(ConfigError):
        CRRA(1.0)
    with pytest.raises(ConfigError):
        CARA(0.0)


def test_quadratic_cost_shape():
    c = QuadraticCost(2.5)
    x = np.linspace(1.0, 100.0, 1000)
    assert c(1.0) == 0.0
    assert np.all(c.derivative(x) >= 0) and np.all(c.second_derivative(x) >= 0)
    assert c(3.0) == pytest.approx(10.0)


def test_tabulated_cost():
    x = np.array([1.0, 2.0, 3.0, 5.0])
    c = TabulatedCost(x, x**2 - 1.0)
    assert c(1.0) == 0.0
    assert c(2.5) == pytest.approx(0.5 * (3.0 + 8.0))
    with pytest.raises(ConfigError):
        TabulatedCost(x, np.array([0.0, 2.0, 3.0, 3.5]))  # concave
    with pytest.raises(ConfigError):
        TabulatedCost(x, np.array([0.1, 2.0, 5.0, 12.0]))  # cost(1) != 0


CFG = {"market": {"r": 0.02, "sigma": 0.2, "mu0": 0.08, "sigma0_sq": 0.01, "T": 2, "x0": 1000},
       "utility": {"kind": "crra", "gamma": 2},
       "cost": {"kind": "quadratic", "lambda": 1}}


def test_parse_config_roundtrip(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps(CFG))
    params, u, cost = load_config(path)
    assert params.t0 == pytest.approx(4.0) and u == CRRA(2.0) and cost.lam == 1.0


@pytest.mark.parametrize("mutate,key", [
    (lambda c: c["market"].update(extra=1), "market.extra"),
    (lambda c: c["market"].pop("sigma"), "market.sigma"),
    (lambda c: c["market"].update(sigma="x"), "market.sigma"),
    (lambda c: c["market"].update(sigma=-0.2), "market.sigma"),
    (lambda c: c["utility"].update(kind="power"), "utility.kind"),
    (lambda c: c["cost"].update(kind="linear"), "cost.kind"),
    (lambda c: c.update(bogus={}), "bogus"),
    (lambda c: c["market"].update(x0=-1), "market.x0"),
])
def test_parse_config_names_key(mutate, key):
    cfg = json.loads(json.dumps(CFG))
    mutate(cfg)
    with pytest.raises(ConfigError) as exc:
        parse_config(cfg)
    assert exc.value.key == key


def test_cara_accepts_negative_wealth():
    cfg = json.loads(json.dumps(CFG))
    cfg["utility"] = {"kind": "cara", "beta": 0.001}
    cfg["market"]["x0"] = -5
    params, _, _ = parse_config(cfg)
    assert params.x0 == -5
