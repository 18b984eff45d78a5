"""Closed-form value functions and optimal strategies given a clock.

For every utility the value function is built from

    psi(t, z) = a(t) (z - r)^2 / 2 + c(t)

with ``a`` explicit in ``tau(t)`` and ``c`` an integral of ``tau`` over
``[t, T]``. Composition with the utility:

* CARA:  V = U(e^{r(T-t)} x + psi)
* CRRA:  V = U(e^{r(T-t)} x) exp(gamma psi)
* log:   V = U(e^{r(T-t)} x) + psi
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .clock import InformativeClock, InsiderClock
from .errors import DomainError, IllPosedProblemError, InadmissibleClockError, NearSingularError
from .model import CARA, CRRA, Log, MarketParams, UtilitySpec, check_wealth_domain, classify
from .numerics import QuadratureSpec, integrate

DEFAULT_GRID = 1024
NEAR_SINGULAR_RTOL = 1e-9


def c_integrand(utility: UtilitySpec, clock: InformativeClock, T: float):
    """Vectorised integrand whose integral over ``[t, T]`` is ``c(t)``."""
    if isinstance(utility, CARA):
        k = 1.0 / (2.0 * utility.beta)

        def f(s):
            tau = clock(s)
            rem = T - s
            return k * clock.derivative(s) * rem / (tau * (tau + rem))
    elif isinstance(utility, CRRA):
        g, kap = utility.gamma, utility.kappa

        def f(s):
            tau = clock(s)
            rem = T - s
            return clock.derivative(s) * kap * rem / (2.0 * g * tau * (tau - kap * rem))
    else:
        def f(s):
            tau = clock(s)
            return 0.5 * clock.derivative(s) * (T - s) / (tau * tau)
    return f


def a_coefficient(utility: UtilitySpec, sigma: float, tau, rem):
    """a(t) from tau(t) and the remaining time T - t."""
    tau = np.asarray(tau, dtype=float)
    rem = np.asarray(rem, dtype=float)
    s2 = sigma * sigma
    if isinstance(utility, CARA):
        return tau * rem / (utility.beta * s2 * (tau + rem))
    if isinstance(utility, CRRA):
        kap = utility.kappa
        return tau * kap * rem / (utility.gamma * s2 * (tau - kap * rem))
    return rem / s2


def strategy_multiplier(utility: UtilitySpec, tau, rem):
    """Factor multiplying the myopic position (z - r) / sigma^2.

    CARA: tau / (tau + T - t); CRRA: tau / (gamma tau - (1 - gamma)(T - t));
    log: 1.
    """
    tau = np.asarray(tau, dtype=float)
    rem = np.asarray(rem, dtype=float)
    if isinstance(utility, CARA):
        return tau / (tau + rem)
    if isinstance(utility, CRRA):
        g = utility.gamma
        return tau / (g * tau - (1.0 - g) * rem)
    return np.ones(np.broadcast(tau, rem).shape)


def _require_solvable(params, utility, clock):
    status = classify(params, utility)
    if not status.ok:
        raise IllPosedProblemError(status.reason)
    check_wealth_domain(params, utility)
    if isinstance(clock, InsiderClock):
        raise InadmissibleClockError(
            "tau(T) is infinite; use info_econ.insider_bound for the insider limit"
        )
    if clock.T is not None and clock.T < params.T * (1 - 1e-12):
        raise InadmissibleClockError(f"clock horizon {clock.T} shorter than T = {params.T}")


@dataclass(frozen=True, eq=False)
class ValueCoefficients:
    """a(t), c(t) on a uniform grid plus exact off-grid evaluation."""

    params: MarketParams
    utility: UtilitySpec
    clock: InformativeClock
    t: np.ndarray
    a: np.ndarray
    c: np.ndarray
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)

    def __post_init__(self):
        object.__setattr__(self, "_c_cache", {})

    @property
    def T(self) -> float:
        return self.params.T

    def a_at(self, t):
        t = np.asarray(t, dtype=float)
        return a_coefficient(self.utility, self.params.sigma, self.clock(t), self.T - t)

    def c_at(self, t: float) -> float:
        """c(t) by adaptive quadrature over [t, T] (cached per t)."""
        t = float(t)
        cache = self._c_cache
        if t not in cache:
            cache[t] = integrate(c_integrand(self.utility, self.clock, self.T), t, self.T,
                                 self.quad)
        return cache[t]

    def psi(self, t: float, z):
        z = np.asarray(z, dtype=float)
        return 0.5 * self.a_at(t) * (z - self.params.r) ** 2 + self.c_at(t)


def coefficients(params: MarketParams, utility: UtilitySpec, clock: InformativeClock,
                 n_grid: int = DEFAULT_GRID, quad: QuadratureSpec | None = None
                 ) -> ValueCoefficients:
    """Tabulate a(t) and c(t) on ``n_grid + 1`` uniform points of [0, T]."""
    _require_solvable(params, utility, clock)
    quad = quad or QuadratureSpec()
    T = params.T
    t = np.linspace(0.0, T, n_grid + 1)
    tau = clock(t)
    if isinstance(utility, CRRA) and utility.gamma < 1.0:
        gap = tau - utility.kappa * (T - t)
        if np.min(gap) < NEAR_SINGULAR_RTOL * tau[0]:
            raise NearSingularError(
                f"tau(s) - ((1-gamma)/gamma)(T-s) falls to {np.min(gap):.3g}"
            )
    a = a_coefficient(utility, params.sigma, tau, T - t)
    # per-segment Simpson integrals, accumulated from the right
    f = c_integrand(utility, clock, T)
    seg = np.empty(n_grid)
    m = 8
    prev = None
    while True:
        u = np.linspace(0.0, 1.0, 2 * m + 1)
        nodes = t[:-1, None] + (t[1:] - t[:-1])[:, None] * u[None, :]
        y = f(nodes.ravel()).reshape(nodes.shape)
        w = np.ones(2 * m + 1)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        seg = (y @ w) * (t[1:] - t[:-1]) / (6.0 * m)
        if prev is not None:
            tot = np.sum(np.abs(seg))
            if np.sum(np.abs(seg - prev)) <= quad.rtol * max(tot, 1e-300) or m >= 1024:
                break
        prev = seg
        m *= 2
    c = np.zeros(n_grid + 1)
    c[:-1] = np.cumsum(seg[::-1])[::-1]
    return ValueCoefficients(params, utility, clock, t, a, c, quad)


def _check_query(coeffs: ValueCoefficients, t, x):
    T = coeffs.T
    if not (-1e-12 <= t <= T * (1 + 1e-12)):
        raise ValueError(f"t = {t} outside [0, {T}]")
    if isinstance(coeffs.utility, (CRRA, Log)) and np.any(np.asarray(x) <= 0):
        raise DomainError("wealth must be > 0 for CRRA and log utility")


def value(coeffs: ValueCoefficients, t: float, x, z):
    """V(t, x, z)."""
    _check_query(coeffs, t, x)
    p, u = coeffs.params, coeffs.utility
    grow = math.exp(p.r * (p.T - t))
    psi = coeffs.psi(t, z)
    x = np.asarray(x, dtype=float)
    if isinstance(u, CARA):
        return u(grow * x + psi)
    if isinstance(u, CRRA):
        return u(grow * x) * np.exp(u.gamma * psi)
    return u(grow * x) + psi


def optimal_strategy(coeffs: ValueCoefficients, t: float, x, z):
    """Optimal amount held in the risky asset."""
    _check_query(coeffs, t, x)
    p, u = coeffs.params, coeffs.utility
    rem = p.T - t
    mult = strategy_multiplier(u, coeffs.clock(t), rem)
    myopic = (np.asarray(z, dtype=float) - p.r) / p.sigma**2
    if isinstance(u, CARA):
        return math.exp(-p.r * rem) / u.beta * mult * myopic * np.ones_like(np.asarray(x, float))
    return mult * myopic * np.asarray(x, dtype=float)


def optimal_fraction(utility: UtilitySpec, params: MarketParams, tau, t, z):
    """Optimal fraction of wealth (CRRA and log only), vectorised in z."""
    if isinstance(utility, CARA):
        raise TypeError("CARA optimum is an amount, not a fraction")
    mult = strategy_multiplier(utility, tau, params.T - t)
    return mult * (np.asarray(z, dtype=float) - params.r) / params.sigma**2


def classical_limit(params: MarketParams, utility: UtilitySpec, t: float, x, z):
    """(value, strategy) with the drift known exactly and equal to ``z``."""
    status = classify(params, utility)
    if not status.ok:
        raise IllPosedProblemError(status.reason)
    rem = params.T - t
    s2 = params.sigma**2
    ex = np.asarray(z, dtype=float) - params.r
    x = np.asarray(x, dtype=float)
    grow = math.exp(params.r * rem)
    if isinstance(utility, CARA):
        b = utility.beta
        v = utility(grow * x + rem * ex**2 / (2.0 * b * s2))
        return v, math.exp(-params.r * rem) * ex / (b * s2) * np.ones_like(x)
    if isinstance(utility, CRRA):
        g = utility.gamma
        v = utility(grow * x) * np.exp((1.0 - g) * rem * ex**2 / (2.0 * g * s2))
        return v, ex * x / (g * s2)
    return utility(grow * x) + rem * ex**2 / (2.0 * s2), ex * x / s2


def illposed_divergence_witness(params: MarketParams, utility: CRRA, k_list):
    """E[U(X_T)] / U(e^{rT} x0) for constant-fraction strategies pi = k X.

    Valid for any CRRA parameters; in the ill-posed regime the k^2
    coefficient is positive and the ratio diverges as k grows.
    """
    if not isinstance(utility, CRRA):
        raise TypeError("witness is defined for CRRA utility")
    g = utility.gamma
    k = np.asarray(k_list, dtype=float)
    T, t0 = params.T, params.t0
    expo = ((1.0 - g) * k * (params.mu0 - params.r) * T
            + 0.5 * (1.0 - g) ** 2 * params.sigma**2 * k**2 * T * (T / t0 - g / (1.0 - g)))
    return np.exp(expo)


def witness_k2_coefficient(params: MarketParams, utility: CRRA) -> float:
    g = utility.gamma
    return 0.5 * (1.0 - g) ** 2 * params.sigma**2 * params.T * (params.T / params.t0
                                                                - g / (1.0 - g))


# ------------------------------------------------------------ verification


def c0_clock_domain(utility: UtilitySpec, clock: InformativeClock, T: float,
                    quad: QuadratureSpec | None = None) -> float:
    """c(0) after substituting u = tau(s); integrates u over [t0, tau(T)]."""
    lo = float(clock(0.0))
    hi = float(clock(T))
    if isinstance(utility, CARA):
        k = 1.0 / (2.0 * utility.beta)

        def f(u):
            return k * (1.0 / u - 1.0 / (u + T - clock.inverse(u)))
    elif isinstance(utility, CRRA):
        k = 1.0 / (2.0 * utility.gamma)
        kap = utility.kappa

        def f(u):
            return k * (1.0 / (u - kap * (T - clock.inverse(u))) - 1.0 / u)
    else:
        def f(u):
            return 0.5 * (T - clock.inverse(u)) / (u * u)
    return integrate(f, lo, hi, quad)


def c0_linear_exact(utility: UtilitySpec, t0: float, k: float, T: float) -> float:
    """c(0) for tau = t0 + k t from elementary antiderivatives."""
    hi = t0 + k * T
    if isinstance(utility, CARA):
        pre = 1.0 / (2.0 * utility.beta)
        if k == 1.0:
            return pre * (math.log(hi / t0) - T / (t0 + T))
        return pre * (math.log(hi / t0) - math.log(hi / (t0 + T)) / (1.0 - 1.0 / k))
    if isinstance(utility, CRRA):
        kap = utility.kappa
        return (math.log(hi / (t0 - kap * T)) / (1.0 + kap / k) - math.log(hi / t0)) / (
            2.0 * utility.gamma)
    return 0.5 * ((T + t0 / k) * (1.0 / t0 - 1.0 / hi) - math.log(hi / t0) / k)


def riccati_residual(coeffs: ValueCoefficients) -> np.ndarray:
    """Relative residual of the Riccati ODE for a(t) on the coefficient grid.

    a'(t) is taken by fourth-order central differences (second-order one-sided
    at the two nodes next to each end, which are excluded). Each residual is
    divided by the sum of the magnitudes of the ODE's terms.
    """
    p, u = coeffs.params, coeffs.utility
    t, a = coeffs.t, coeffs.a
    h = t[1] - t[0]
    da = (a[:-4] - 8 * a[1:-3] + 8 * a[3:-1] - a[4:]) / (12.0 * h)
    ti = t[2:-2]
    ai = a[2:-2]
    tau = coeffs.clock(ti)
    dtau = coeffs.clock.derivative(ti)
    s2 = p.sigma**2
    inv_tau_prime = dtau / tau**2  # (-1/tau)'
    if isinstance(u, CARA):
        b = u.beta
        terms = (0.5 * da, b * (1.0 / b - s2 * ai / tau) ** 2 / (2.0 * s2),
                 -0.5 * s2 * inv_tau_prime * b * ai**2)
    elif isinstance(u, CRRA):
        g = u.gamma
        terms = (0.5 * da, (1.0 - g) * (s2 * ai / tau + 1.0 / g) ** 2 / (2.0 * s2),
                 0.5 * s2 * inv_tau_prime * g * ai**2)
    else:
        terms = (0.5 * da, np.full_like(ai, 1.0 / (2.0 * s2)))
    num = sum(terms)
    den = sum(np.abs(x) for x in terms)
    return np.abs(num) / den


def hjb_generator(coeffs: ValueCoefficients, t: float, x: float, z: float, pi: float,
                  h: float) -> float:
    """L^pi V(t, x, z) with every derivative of V by central differences.

    Step sizes are ``h`` scaled per coordinate (time by T, wealth by x, drift
    by sigma). Returns the generator normalised by |V_x| times the wealth
    scale, so residuals of different utilities are comparable.
    """
    p = coeffs.params
    ht = h * p.T
    hx = h * max(abs(x), 1.0)
    hz = h * p.sigma

    def V(tt, xx, zz):
        return float(value(coeffs, tt, xx, zz))

    V0 = V(t, x, z)
    Vt = (V(t + ht, x, z) - V(t - ht, x, z)) / (2 * ht)
    Vx = (V(t, x + hx, z) - V(t, x - hx, z)) / (2 * hx)
    Vxx = (V(t, x + hx, z) - 2 * V0 + V(t, x - hx, z)) / hx**2
    Vzz = (V(t, x, z + hz) - 2 * V0 + V(t, x, z - hz)) / hz**2
    Vxz = (V(t, x + hx, z + hz) - V(t, x + hx, z - hz)
           - V(t, x - hx, z + hz) + V(t, x - hx, z - hz)) / (4 * hx * hz)
    clock = coeffs.clock
    tau = float(clock(t))
    d_inv_tau = float(clock.derivative(t)) / tau**2
    s2 = p.sigma**2
    L = (Vt + (p.r * x + pi * (z - p.r)) * Vx + 0.5 * s2 * pi**2 * Vxx
         + s2 * pi / tau * Vxz + 0.5 * s2 * d_inv_tau * Vzz)
    return L / (abs(Vx) * max(abs(x), 1.0))


__all__ = [
    "ValueCoefficients", "coefficients", "value", "optimal_strategy", "optimal_fraction",
    "classical_limit", "illposed_divergence_witness", "witness_k2_coefficient",
    "c_integrand", "a_coefficient", "strategy_multiplier", "c0_clock_domain",
    "c0_linear_exact", "riccati_residual", "hjb_generator",
]
