"""Optimal information acquisition under quadratic cost lam (tau' - 1)^2.

Every utility leads to an Euler-Lagrange equation of the form

    tau''(t) = -A / (tau(t) + B (T - t))^2

CARA:  A = 1 / (4 beta lam),  B = 1
CRRA:  A = y / (4 gamma lam), B = -(1 - gamma) / gamma   (y > 0 dual variable)
log:   A = y / (4 lam),       B = 0

The right endpoint is free, so the natural boundary condition closes the
problem: the value integrand's tau'-coefficient vanishes at t = T and the
condition reduces to cost'(tau'(T)) = 0, i.e. tau'(T) = 1. We shoot on
s = tau'(0) with tau(0) = t0 and bisect until tau'(T) = 1.

For CRRA and log the certainty equivalent is exponential in the value
integral I(tau); it is linearised by

    (x0 / C2) e^I = sup_{y > 0} { y - y ln(C2 y / x0) + y I }

and the outer problem over y is solved by golden section in ln y, followed
by bisection on the stationarity condition ln(C2 y / x0) = I(tau_y).

Only a stationary point is claimed, not a global maximum.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numba
import numpy as np

from .clock import GridClock
from .errors import IllPosedProblemError, NearSingularError, NoBracketError, SolverError
from .info_econ import (cost_of_information, natural_integral, net_value, value_from_integrals,
                        value_integral)
from .model import CARA, CRRA, Log, MarketParams, QuadraticCost, UtilitySpec, classify
from .numerics import ODE_STEPS, ROOT_TOL, QuadratureWarning, QuadratureSpec, find_root, maximize_1d

S_MAX_CAP = 1e12
Y_RANGE = 1e6
EL_RTOL = 1e-6
STATIONARY = "stationary solution"


@numba.njit(cache=True)
def _rk4_el(A, B, t0, s, T, n, tau_out, dtau_out):
    """Integrate tau'' = -A / (tau + B (T - t))^2; returns steps completed."""
    h = T / n
    tau = t0
    d = s
    tau_out[0] = tau
    dtau_out[0] = d
    for i in range(n):
        t = i * h
        g1 = tau + B * (T - t)
        if g1 <= 0.0:
            return i
        k1x = d
        k1v = -A / (g1 * g1)
        g2 = tau + 0.5 * h * k1x + B * (T - t - 0.5 * h)
        if g2 <= 0.0:
            return i
        k2x = d + 0.5 * h * k1v
        k2v = -A / (g2 * g2)
        g3 = tau + 0.5 * h * k2x + B * (T - t - 0.5 * h)
        if g3 <= 0.0:
            return i
        k3x = d + 0.5 * h * k2v
        k3v = -A / (g3 * g3)
        g4 = tau + h * k3x + B * (T - t - h)
        if g4 <= 0.0:
            return i
        k4x = d + h * k3v
        k4v = -A / (g4 * g4)
        tau = tau + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        d = d + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        if not (math.isfinite(tau) and math.isfinite(d)):
            return i
        tau_out[i + 1] = tau
        dtau_out[i + 1] = d
    return n


def el_coefficients(utility: UtilitySpec, lam: float, y: Optional[float] = None):
    """(A, B) of the Euler-Lagrange forcing for the given utility."""
    if isinstance(utility, CARA):
        return 1.0 / (4.0 * utility.beta * lam), 1.0
    if y is None or not y > 0:
        raise ValueError("CRRA and log need a positive dual variable y")
    if isinstance(utility, CRRA):
        return y / (4.0 * utility.gamma * lam), -utility.kappa
    return y / (4.0 * lam), 0.0


def el_forcing(A: float, B: float, t, tau, T: float):
    return A / (np.asarray(tau) + B * (T - np.asarray(t))) ** 2


@dataclass(frozen=True)
class ShootResult:
    s: float
    t: np.ndarray
    tau: np.ndarray
    dtau: np.ndarray


def integrate_el(A, B, t0, s, T, steps=ODE_STEPS):
    """Trajectory of the EL initial value problem; ``ok`` False on blow-up."""
    tau = np.empty(steps + 1)
    dtau = np.empty(steps + 1)
    done = _rk4_el(float(A), float(B), float(t0), float(s), float(T), int(steps), tau, dtau)
    return tau, dtau, done == steps


def shoot(A: float, B: float, t0: float, T: float, steps: int = ODE_STEPS,
          tol: float = ROOT_TOL) -> ShootResult:
    """Find s = tau'(0) >= 1 with tau'(T) = 1 by bracketing and bisection."""
    buf_tau = np.empty(steps + 1)
    buf_d = np.empty(steps + 1)

    def gap(s):
        done = _rk4_el(A, B, t0, s, T, steps, buf_tau, buf_d)
        if done < steps:
            return -math.inf  # collapsed before T: slope far too low
        return buf_d[-1] - 1.0

    lo = 1.0
    if gap(lo) >= 0.0:
        s = lo
    else:
        hi = 2.0
        while gap(hi) <= 0.0:
            lo = hi
            hi *= 2.0
            if hi > S_MAX_CAP:
                raise NoBracketError(f"no slope up to {S_MAX_CAP:g} reaches tau'(T) = 1")
        s = find_root(gap, lo, hi, tol=tol)
    tau, dtau, ok = integrate_el(A, B, t0, s, T, steps)
    if not ok:
        raise SolverError("trajectory blew up at the converged slope")
    return ShootResult(s, np.linspace(0.0, T, steps + 1), tau, dtau)


@dataclass(frozen=True)
class ConditionReport:
    residual_max: float
    passed: bool
    residual: np.ndarray = field(repr=False)
    forcing: np.ndarray = field(repr=False)


def verify_necessary_condition(clock: GridClock, params: MarketParams, utility: UtilitySpec,
                               lam: float, y: Optional[float] = None,
                               rtol: float = EL_RTOL) -> ConditionReport:
    """Check tau'' + forcing = 0 at interior nodes by finite differences.

    On a uniform grid tau'' comes from the fourth-order central stencil on the
    tau' samples (interior nodes 2..n-2); otherwise from second differences
    of tau. Passes iff every residual is <= rtol (1 + |forcing|).
    """
    if clock.t.size < 256:
        raise ValueError("need a grid clock with at least 256 points")
    t = clock.t
    tau = clock.tau_nodes
    h = np.diff(t)
    if np.ptp(h) <= 1e-12 * h.mean():
        # treat the tau' samples as a smooth function: fourth-order tau'' and
        # end-corrected trapezoid tau (the clock's own tau is only O(h^2) here)
        d = clock.dtau
        hh = h.mean()
        d2_all = np.gradient(d, hh, edge_order=2)
        tau = tau + hh * hh / 12.0 * (d2_all[0] - d2_all)
        d2 = (-d[4:] + 8.0 * d[3:-1] - 8.0 * d[1:-3] + d[:-4]) / (12.0 * hh)
        sl = slice(2, -2)
    else:
        d2 = 2.0 * ((tau[2:] - tau[1:-1]) / h[1:] - (tau[1:-1] - tau[:-2]) / h[:-1]) / (h[1:] + h[:-1])
        sl = slice(1, -1)
    A, B = el_coefficients(utility, lam, y)
    forcing = el_forcing(A, B, t[sl], tau[sl], params.T)
    res = np.abs(d2 + forcing)
    passed = bool(np.all(res <= rtol * (1.0 + np.abs(forcing))))
    return ConditionReport(float(res.max()), passed, res, forcing)


@dataclass(frozen=True)
class AcquisitionSolution:
    """Stationary information-acquisition schedule and its diagnostics."""

    clock: GridClock
    t: np.ndarray
    tau: np.ndarray
    dtau: np.ndarray
    shoot_param: float
    y_star: Optional[float]
    value: float
    cost: float
    net: float
    diagnostics: dict
    status: str = STATIONARY


def _lam(cost):
    if isinstance(cost, QuadraticCost):
        return cost.lam
    return QuadraticCost(float(cost)).lam


def _finish(params, utility, lam, res: ShootResult, y, quad, extra):
    clock = GridClock(params.t0, res.t, res.dtau)
    cost = QuadraticCost(lam)
    val = net_value(params, utility, cost, clock, quad)
    report = verify_necessary_condition(clock, params, utility, lam, y)
    d2 = np.diff(res.dtau)
    diagnostics = {
        "ode_residual_max": report.residual_max,
        "el_condition_pass": report.passed,
        "transversality_gap": abs(res.dtau[-1] - 1.0),
        "concave": bool(np.all(d2 < 0.0)),
        "min_tau_prime": float(res.dtau.min()),
        "el_gateaux_check": None,
    }
    diagnostics.update(extra)
    if diagnostics["min_tau_prime"] < 1.0 - 1e-9:
        raise SolverError(f"solution violates tau' >= 1 (min {diagnostics['min_tau_prime']})")
    return AcquisitionSolution(clock, res.t, res.tau, res.dtau, res.s, y, val.value, val.cost,
                               val.net, diagnostics)


def solve_cara(params: MarketParams, beta: float, lam: float, steps: int = ODE_STEPS,
               quad: QuadratureSpec | None = None) -> AcquisitionSolution:
    utility = CARA(beta)
    lam = _lam(lam)
    A, B = el_coefficients(utility, lam)
    res = shoot(A, B, params.t0, params.T, steps)
    return _finish(params, utility, lam, res, None, quad, {})


def _dual_problem(params, utility, lam, steps, quad):
    i_nat = natural_integral(params, utility, quad)
    x0 = params.x0
    cache = {}

    def inner(w):
        # w = ln(C2 y / x0)
        if w not in cache:
            y = x0 * math.exp(w - i_nat)
            A, B = el_coefficients(utility, lam, y)
            res = shoot(A, B, params.t0, params.T, steps)
            clock = GridClock(params.t0, res.t, res.dtau)
            i_tau = value_integral(utility, clock, params.T, quad)
            c = cost_of_information(QuadraticCost(lam), clock, params.T, quad)
            cache[w] = (y, res, i_tau, c)
        return cache[w]

    def objective(w):
        try:
            y, _, i_tau, c = inner(w)
        except (NoBracketError, SolverError, NearSingularError, ArithmeticError):
            return -math.inf
        return y - y * w - x0 + y * i_tau - c

    return i_nat, inner, objective


def solve_crra(params: MarketParams, gamma: float, x0: Optional[float] = None,
               lam: float = 1.0, steps: int = ODE_STEPS,
               quad: QuadratureSpec | None = None) -> AcquisitionSolution:
    """Stationary schedule for CRRA (``gamma == 1`` selects log utility)."""
    if x0 is not None and x0 != params.x0:
        params = MarketParams(params.r, params.sigma, params.mu0, params.sigma0_sq, params.T,
                              x0)
    utility = Log() if gamma == 1.0 else CRRA(gamma)
    return _solve_dual(params, utility, _lam(lam), steps, quad)


def _solve_dual(params, utility, lam, steps, quad):
    status = classify(params, utility)
    if not status.ok:
        raise IllPosedProblemError(status.reason)
    if params.x0 <= 0:
        raise IllPosedProblemError("x0 must be > 0")
    if isinstance(utility, CRRA) and params.t0 - utility.kappa * params.T <= 0:
        raise NearSingularError("tau(0) - ((1-gamma)/gamma) T is not positive")
    i_nat, inner, objective = _dual_problem(params, utility, lam, steps, quad)
    span = math.log(Y_RANGE)
    with warnings.catch_warnings():
        # extreme y on the search range gives very steep schedules
        warnings.simplefilter("ignore", QuadratureWarning)
        best = maximize_1d(objective, -span, span, tol=1e-6)
    if not math.isfinite(best.fx):
        raise SolverError("dual objective is not finite anywhere on the search range")

    def stationarity(w):
        return inner(w)[2] - w

    w = best.x
    delta = 1e-4
    lo, hi = w - delta, w + delta
    while stationarity(lo) * stationarity(hi) > 0:
        delta *= 4.0
        lo, hi = w - delta, w + delta
        if delta > 2 * span:
            raise SolverError("could not bracket the dual stationarity condition")
    w_star = find_root(stationarity, lo, hi, tol=1e-13)
    y, res, i_tau, _ = inner(w_star)
    dual_net = objective(w_star)
    fixed_point = params.x0 * math.exp(i_tau - i_nat)
    extra = {
        "dual_net": dual_net,
        "fixed_point_gap": abs(y - fixed_point) / fixed_point,
        "golden_w": best.x,
        "w_star": w_star,
        "unimodal": best.unimodal,
    }
    sol = _finish(params, utility, lam, res, y, quad, extra)
    direct = value_from_integrals(params, utility, i_tau, i_nat)
    sol.diagnostics["dual_net_gap"] = abs(dual_net - sol.net)
    sol.diagnostics["fixed_point_pass"] = sol.diagnostics["fixed_point_gap"] <= 1e-6
    sol.diagnostics["direct_value_check"] = abs(direct - sol.value)
    return sol


def solve(params: MarketParams, utility: UtilitySpec, cost, steps: int = ODE_STEPS,
          quad: QuadratureSpec | None = None) -> AcquisitionSolution:
    lam = _lam(cost)
    if isinstance(utility, CARA):
        return solve_cara(params, utility.beta, lam, steps, quad)
    return _solve_dual(params, utility, lam, steps, quad)


# ----------------------------------------------------------- local checks


def perturbation_clocks(solution: AcquisitionSolution, n: int = 10, eps: float = 1e-3,
                        seed: int = 0, modes: int = 4):
    """Admissible smooth perturbations tau* + eps b with b(0) = 0.

    b' is a random sine series vanishing at both ends; tau' is floored at 1.
    Yields ``(sign * eps, clock)`` for both signs of each bump.
    """
    rng = np.random.default_rng(seed)
    t = solution.t
    T = t[-1]
    j = np.arange(1, modes + 1)
    for _ in range(n):
        coef = rng.standard_normal(modes)
        db = np.sin(np.pi * np.outer(t / T, j)) @ coef
        db /= np.max(np.abs(db))
        for e in (eps, -eps):
            d = np.maximum(solution.dtau + e * db, 1.0)
            yield e, GridClock(solution.clock.t0, t, d)


def permuted_clocks(solution: AcquisitionSolution, n: int = 5, blocks: int = 16, seed: int = 0):
    """Clocks whose tau' samples are block-permutations of the solution's."""
    rng = np.random.default_rng(seed)
    m = solution.dtau.size
    edges = np.linspace(0, m, blocks + 1).astype(int)
    pieces = [solution.dtau[a:b] for a, b in zip(edges[:-1], edges[1:])]
    for _ in range(n):
        order = rng.permutation(blocks)
        while np.all(order == np.arange(blocks)):
            order = rng.permutation(blocks)
        d = np.concatenate([pieces[i] for i in order])
        yield GridClock(solution.clock.t0, solution.t, d)


def gateaux_check(solution: AcquisitionSolution, params: MarketParams, utility: UtilitySpec,
                  cost, n: int = 10, eps: float = 1e-3, seed: int = 0, tol: float = 1e-9,
                  quad: QuadratureSpec | None = None) -> dict:
    """Net of the solution against random admissible perturbations."""
    cost = QuadraticCost(_lam(cost))
    base = net_value(params, utility, cost, solution.clock, quad).net
    deltas = [net_value(params, utility, cost, c, quad).net - base
              for _, c in perturbation_clocks(solution, n, eps, seed)]
    out = {"base_net": base, "max_delta": max(deltas), "passed": max(deltas) <= tol}
    solution.diagnostics["el_gateaux_check"] = out["passed"]
    return out
