"""Certainty-equivalent value of extra information, its cost, and net value.

Value(tau) is defined by V_tau(0, x0, mu0) = V_nat(0, x0 + Value, mu0), where
``nat`` is the clock obtained from prices alone. Because a(0) depends only on
t0 and T, only the c(0) term differs between the two sides:

* CARA: Value = c_tau(0) - c_nat(0)
* CRRA: Value = x0 (exp(I_tau - I_nat) - 1), I = gamma / (1 - gamma) c(0)
* log:  Value = x0 (exp(c_tau(0) - c_nat(0)) - 1)

Both sides always go through the same quadrature so the natural clock values
to exactly zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .clock import InformativeClock, InsiderClock, LinearClock, natural_clock
from .closed_form import c_integrand
from .errors import IllPosedProblemError, InadmissibleClockError
from .model import CARA, CRRA, CostSpec, MarketParams, UtilitySpec, check_wealth_domain, classify
from .numerics import QuadratureSpec, integrate


@dataclass(frozen=True)
class InfoValuation:
    value: float
    cost: float
    net: float
    bound: float


def _require(params, utility):
    status = classify(params, utility)
    if not status.ok:
        raise IllPosedProblemError(status.reason)
    check_wealth_domain(params, utility)


def _require_clock(params, clock):
    if isinstance(clock, InsiderClock):
        raise InadmissibleClockError("insider clock: use insider_bound")
    if clock.T is not None and clock.T < params.T * (1 - 1e-12):
        raise InadmissibleClockError(f"clock horizon {clock.T} shorter than T = {params.T}")
    if abs(float(clock(0.0)) - params.t0) > 1e-12 * params.t0:
        raise InadmissibleClockError(f"clock starts at {float(clock(0.0))}, t0 = {params.t0}")


def value_integral(utility: UtilitySpec, clock: InformativeClock, T: float,
                   quad: QuadratureSpec | None = None) -> float:
    """The tau-dependent integral entering Value.

    c(0) for CARA and log; gamma / (1 - gamma) c(0) for CRRA, which is the
    exponent appearing in the CRRA certainty equivalent.
    """
    c0 = integrate(c_integrand(utility, clock, T), 0.0, T, quad)
    if isinstance(utility, CRRA):
        return utility.gamma / (1.0 - utility.gamma) * c0
    return c0


def natural_integral(params: MarketParams, utility: UtilitySpec,
                     quad: QuadratureSpec | None = None) -> float:
    """C1 (CARA) or ln C2 (CRRA, log): the natural-clock value integral."""
    return value_integral(utility, natural_clock(params.t0, params.T), params.T, quad)


def value_from_integrals(params: MarketParams, utility: UtilitySpec, i_tau: float,
                         i_nat: float) -> float:
    if isinstance(utility, CARA):
        return i_tau - i_nat
    return params.x0 * math.expm1(i_tau - i_nat)


def value_of_information(params: MarketParams, utility: UtilitySpec, clock: InformativeClock,
                         quad: QuadratureSpec | None = None) -> float:
    _require(params, utility)
    _require_clock(params, clock)
    if clock.is_natural:
        # same object as the reference side, so the difference cancels exactly
        clock = natural_clock(params.t0, params.T)
    i_tau = value_integral(utility, clock, params.T, quad)
    i_nat = natural_integral(params, utility, quad)
    return value_from_integrals(params, utility, i_tau, i_nat)


def insider_c0(params: MarketParams, utility: UtilitySpec) -> float:
    """c(0) when the drift is revealed immediately (tau = infinity at 0+)."""
    t0, T = params.t0, params.T
    if isinstance(utility, CARA):
        return math.log((t0 + T) / t0) / (2.0 * utility.beta)
    if isinstance(utility, CRRA):
        gap = t0 - utility.kappa * T
        if gap <= 0:
            raise IllPosedProblemError("t0 - ((1-gamma)/gamma) T must be > 0")
        return math.log(t0 / gap) / (2.0 * utility.gamma)
    return 0.5 * T / t0


def insider_bound(params: MarketParams, utility: UtilitySpec,
                  quad: QuadratureSpec | None = None) -> float:
    """Supremum of Value over all admissible clocks."""
    _require(params, utility)
    c_ins = insider_c0(params, utility)
    i_ins = utility.gamma / (1.0 - utility.gamma) * c_ins if isinstance(utility, CRRA) else c_ins
    return value_from_integrals(params, utility, i_ins, natural_integral(params, utility, quad))


def cost_of_information(cost: CostSpec, clock: InformativeClock, T: float,
                        quad: QuadratureSpec | None = None) -> float:
    """Integral of cost(tau'(t)) over [0, T]."""
    if isinstance(clock, InsiderClock):
        return math.inf
    return integrate(lambda t: cost(clock.derivative(t)), 0.0, T, quad)


def net_value(params: MarketParams, utility: UtilitySpec, cost: CostSpec,
              clock: InformativeClock, quad: QuadratureSpec | None = None) -> InfoValuation:
    v = value_of_information(params, utility, clock, quad)
    c = cost_of_information(cost, clock, params.T, quad)
    return InfoValuation(v, c, v - c, insider_bound(params, utility, quad))


def value_sweep(params: MarketParams, utility: UtilitySpec, ks, cost: CostSpec | None = None,
                quad: QuadratureSpec | None = None):
    """Value (and cost, net) of linear clocks tau = t0 + k t for each k."""
    ks = np.asarray(ks, dtype=float)
    _require(params, utility)
    i_nat = natural_integral(params, utility, quad)
    values = np.empty_like(ks)
    costs = np.zeros_like(ks)
    for j, k in enumerate(ks):
        clock = LinearClock(params.t0, float(k), params.T)
        values[j] = value_from_integrals(
            params, utility, value_integral(utility, clock, params.T, quad), i_nat)
        if cost is not None:
            costs[j] = cost_of_information(cost, clock, params.T, quad)
    return values, costs, values - costs
