import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from infoclock.clock import (ClockInducedProfile, ConstantProfile, GridClock, GridProfile,
                             InsiderClock, LinearClock, check_admissible, clock_from_correlation,
                             correlation_from_clock, eval_clock, eval_derivative, eval_inverse,
                             natural_clock, parse_clock_spec)
from infoclock.errors import (ConfigError, InadmissibleClockError, InadmissibleProfileError,
                              OutOfDomainError)


def ramp_profile(T=1.0, n=2001):
    t = np.linspace(0.0, T, n)
    return GridProfile(t, 0.5 * t)


def test_natural_from_zero_correlation():
    c = clock_from_correlation(ConstantProfile(0.0), 4.0, 2.0)
    assert c.is_natural and eval_clock(c, 2.0) == 6.0


def test_constant_correlation_gives_linear_clock():
    c = clock_from_correlation(ConstantProfile(math.sqrt(3) / 2), 4.0, 2.0)
    assert eval_clock(c, 1.0) == pytest.approx(8.0, rel=1e-14)


def test_ramp_correlation_matches_artanh_oracle():
    # int_0^1 1 / (1 - t^2 / 4) dt = ln 3
    c = clock_from_correlation(ramp_profile(), 4.0)
    assert eval_clock(c, 1.0) == pytest.approx(4.0 + math.log(3.0), rel=1e-9)


def test_ramp_to_one_is_inadmissible():
    t = np.linspace(0.0, 2.0, 101)
    with pytest.raises(InadmissibleProfileError):
        GridProfile(t, 0.5 * t)


def test_negative_correlation_sign_dropped():
    assert ConstantProfile(-0.6).value == 0.6
    t = np.linspace(0, 1, 5)
    np.testing.assert_array_equal(GridProfile(t, -0.3 * t).rho, 0.3 * t)


@pytest.mark.parametrize("k,rho", [(4.0, math.sqrt(3) / 2), (1.0, 0.0), (2.0, math.sqrt(0.5))])
def test_correlation_from_linear_clock(k, rho):
    prof = correlation_from_clock(LinearClock(4.0, k, 2.0))
    assert prof(np.array([0.3]))[0] == pytest.approx(rho, abs=1e-15)


def test_correlation_roundtrip_on_grid():
    prof = ramp_profile()
    back = correlation_from_clock(clock_from_correlation(prof, 4.0))
    np.testing.assert_allclose(back(prof.t), prof.rho, atol=1e-8)


def test_linear_eval_and_inverse():
    c = LinearClock(4.0, 2.0, 2.0)
    assert eval_clock(c, 1.0) == 6.0 and eval_inverse(c, 6.0) == 1.0
    assert eval_derivative(c, 0.7) == 2.0
    with pytest.raises(OutOfDomainError):
        eval_clock(c, 2.5)
    with pytest.raises(OutOfDomainError):
        eval_inverse(c, 3.9)


def test_grid_inverse_matches_bisection_oracle():
    c = clock_from_correlation(ramp_profile(), 4.0)
    t = eval_inverse(c, 5.0)
    assert eval_clock(c, t) == pytest.approx(5.0, abs=1e-10)
    # tau(t) = 4 + ln((1 + t/2) / (1 - t/2)) so tau = 5 at t = 2 tanh(1/2)
    assert t == pytest.approx(2.0 * math.tanh(0.5), abs=1e-8)


@given(st.floats(1.0, 50.0), st.floats(0.0, 1.0))
def test_roundtrip_linear(k, s):
    c = LinearClock(3.0, k, 1.0)
    u = 3.0 + s * k
    assert eval_clock(c, eval_inverse(c, u)) == pytest.approx(u, abs=1e-10 * u)


def test_grid_roundtrip_many_points():
    t = np.linspace(0, 2, 257)
    c = GridClock(4.0, t, 3.0 - t)
    u = np.linspace(4.0, float(c(2.0)), 101)
    np.testing.assert_allclose(c(c.inverse(u)), u, atol=1e-10)


def test_grid_clock_exact_integral():
    t = np.linspace(0.0, 2.0, 9)
    c = GridClock(4.0, t, 1.0 + t)
    assert c(2.0) == pytest.approx(4.0 + 2.0 + 2.0, rel=1e-15)
    assert c.derivative(1.3) == pytest.approx(2.3, rel=1e-15)


def test_grid_clock_rejects_slow_derivative():
    with pytest.raises(InadmissibleClockError):
        GridClock(4.0, np.linspace(0, 1, 5), np.array([1.0, 1.0, 0.9, 1.0, 1.0]))


def test_admissibility():
    assert check_admissible(natural_clock(4.0, 2.0), 2.0).tau_T == 6.0
    big = check_admissible(LinearClock(4.0, 1e6, 2.0), 2.0)
    assert big.finite and big.tau_T > 1e6
    assert not check_admissible(InsiderClock(4.0, 2.0), 2.0).finite


@given(st.lists(st.floats(0.0, 0.99), min_size=3, max_size=12), st.floats(0.0, 0.5))
def test_ordered_profiles_give_ordered_clocks(rho, bump):
    t = np.linspace(0.0, 1.0, len(rho))
    lo = np.asarray(rho)
    hi = np.minimum(lo + bump, 0.995)
    c_lo = clock_from_correlation(GridProfile(t, lo), 2.0, n=64)
    c_hi = clock_from_correlation(GridProfile(t, hi), 2.0, n=64)
    s = np.linspace(0, 1, 50)
    assert np.all(c_hi(s) >= c_lo(s) - 1e-12)
    assert np.all(c_lo(s) - 2.0 >= s - 1e-12)


def test_clock_induced_profile():
    c = LinearClock(4.0, 4.0, 2.0)
    prof = ClockInducedProfile(c)
    assert prof(0.5) == pytest.approx(math.sqrt(0.75))
    assert clock_from_correlation(prof, 4.0) is c


def test_parse_clock_spec(tmp_path):
    assert parse_clock_spec("natural", 4.0, 2.0).is_natural
    assert parse_clock_spec("linear:k=2.5", 4.0, 2.0).k == 2.5
    f = tmp_path / "g.csv"
    f.write_text("t,tau_prime\n0,3\n1,2\n2,1\n")
    g = parse_clock_spec(f"grid:{f}", 4.0, 2.0)
    assert g(2.0) == pytest.approx(8.0)
    f2 = tmp_path / "g2.csv"
    f2.write_text("t,tau,tau_prime\n0,4,3\n1,6.5,2\n2,8,1\n")
    assert parse_clock_spec(f"grid:{f2}", 4.0, 2.0)(2.0) == pytest.approx(8.0)
    for bad in ("linear:q=2", "linear:k=0.5", "polynomial", f"grid:{tmp_path / 'missing.csv'}"):
        with pytest.raises(ConfigError):
            parse_clock_spec(bad, 4.0, 2.0)


def test_parse_grid_wrong_horizon(tmp_path):
    f = tmp_path / "g.csv"
    f.write_text("t,tau_prime\n0,1\n1,1\n")
    with pytest.raises(ConfigError):
        parse_clock_spec(f"grid:{f}", 4.0, 2.0)
