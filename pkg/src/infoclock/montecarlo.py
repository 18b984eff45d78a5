"""Monte Carlo simulation of the market, the filter and the wealth process.

Each path draws its own drift from the prior and is driven by its own
random stream, keyed by ``(master_seed, path_index)``. Paths are processed
in fixed-size blocks and results are written by path index, so the output
does not depend on the number of workers or on scheduling.

Discretisation
--------------
On a uniform grid with step ``dt`` the correlation used over step ``i`` is
the step average implied by the clock, ``q_i^2 = (tau(t_{i+1}) - tau(t_i)) / dt``,
so the filter reproduces ``tau`` exactly at the grid points. Amount
strategies (CARA) advance wealth by an Euler step with exact riskless
growth; fraction strategies (CRRA, log, constant fractions) use the exact
exponential step for a fraction frozen over the step.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .clock import InformativeClock, InsiderClock
from .closed_form import coefficients, strategy_multiplier, value
from .errors import ConfigError, IllPosedProblemError, InadmissibleClockError
from .filtering import ObservationIncrement, PosteriorState, update
from .model import CARA, MarketParams, UtilitySpec, classify

SEED_ENV = "INFOCLOCK_SEED"
DEFAULT_SEED = 20240101
DEFAULT_BUDGET = 10**9
BLOCK_SIZE = 1024
WEALTH_FLOOR_REL = 1e-9


# ---------------------------------------------------------------- strategies


@dataclass(frozen=True)
class OptimalClosedForm:
    name = "optimal"


@dataclass(frozen=True)
class ScaledOptimal:
    factor: float
    name = "scaled"


@dataclass(frozen=True)
class ConstantFraction:
    """Hold the fraction ``k`` of wealth in the risky asset."""

    k: float
    name = "constant_fraction"


@dataclass(frozen=True)
class Zero:
    name = "zero"


Strategy = Union[OptimalClosedForm, ScaledOptimal, ConstantFraction, Zero]


def describe(strategy: Strategy) -> str:
    if isinstance(strategy, ScaledOptimal):
        return f"scaled:{strategy.factor!r}"
    if isinstance(strategy, ConstantFraction):
        return f"constant_fraction:{strategy.k!r}"
    return strategy.name


@dataclass(frozen=True)
class SimConfig:
    """Simulation size, seed and strategy.

    ``master_seed=None`` uses ``INFOCLOCK_SEED`` if set, else a fixed
    default. With ``honor_env`` the environment variable overrides an
    explicit seed as well.
    """

    n_paths: int = 100_000
    n_steps: int = 1000
    master_seed: Optional[int] = None
    strategy: Strategy = field(default_factory=OptimalClosedForm)
    workers: Optional[int] = None
    block_size: int = BLOCK_SIZE
    budget: int = DEFAULT_BUDGET
    honor_env: bool = True

    def __post_init__(self):
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise ConfigError("n_paths must be an integer >= 1", key="n_paths")
        if int(self.n_steps) != self.n_steps or self.n_steps < 2:
            raise ConfigError("n_steps must be an integer >= 2", key="n_steps")
        if self.n_paths * self.n_steps > self.budget:
            raise ConfigError(
                f"n_paths * n_steps = {self.n_paths * self.n_steps} exceeds budget {self.budget}",
                key="n_paths")
        if self.block_size < 1:
            raise ConfigError("block_size must be >= 1", key="block_size")
        if self.workers is not None and self.workers < 1:
            raise ConfigError("workers must be >= 1", key="workers")


def resolve_seed(sim: SimConfig) -> int:
    env = os.environ.get(SEED_ENV)
    if env is not None and (sim.honor_env or sim.master_seed is None):
        try:
            seed = int(env, 0)
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV}={env!r} is not an integer", key=SEED_ENV) from exc
    elif sim.master_seed is None:
        seed = DEFAULT_SEED
    else:
        seed = int(sim.master_seed)
    if not 0 <= seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer", key="seed")
    return seed


def path_rng(seed: int, path: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(path,))))


def _draw(seed, path, n_steps):
    """Standard normals of one path: prior draw, then (n_steps, 2) for (xi, eta)."""
    g = path_rng(seed, path)
    return g.standard_normal(), g.standard_normal((n_steps, 2))


@dataclass(frozen=True)
class StepGrid:
    """Per-step quantities implied by the clock on a uniform grid."""

    t: np.ndarray
    dt: float
    tau: np.ndarray  # tau at the n + 1 grid points
    rho: np.ndarray  # step correlation, n entries


def step_grid(params: MarketParams, clock: InformativeClock, n_steps: int) -> StepGrid:
    if isinstance(clock, InsiderClock):
        raise InadmissibleClockError("insider clock cannot be simulated")
    if clock.T is not None and clock.T < params.T * (1 - 1e-12):
        raise InadmissibleClockError(f"clock horizon {clock.T} shorter than T = {params.T}")
    t = np.linspace(0.0, params.T, n_steps + 1)
    dt = params.T / n_steps
    tau = np.asarray(clock(t), dtype=float)
    if abs(tau[0] - params.t0) > 1e-12 * params.t0:
        raise InadmissibleClockError(f"clock starts at {tau[0]}, t0 = {params.t0}")
    if clock.is_natural:
        q2 = np.ones(n_steps)
    else:
        q2 = np.diff(tau) / dt
        if np.any(q2 < 1.0 - 1e-9):
            raise InadmissibleClockError("clock increases slower than the natural clock")
        q2 = np.maximum(q2, 1.0)
    rho = np.sqrt(1.0 - 1.0 / q2)
    return StepGrid(t, dt, tau, rho)


def path_increments(params: MarketParams, grid: StepGrid, seed: int, path: int):
    """(mu, dW, dm) of one path, the same numbers :func:`simulate` uses."""
    e0, xi = _draw(seed, path, grid.rho.size)
    mu = params.mu0 + math.sqrt(params.sigma0_sq) * e0
    sdt = math.sqrt(grid.dt)
    dW = sdt * xi[:, 0]
    dm = grid.rho * dW + np.sqrt(1.0 - grid.rho**2) * sdt * xi[:, 1]
    return mu, dW, dm


# ------------------------------------------------------------------ engine


@dataclass(frozen=True)
class _Plan:
    kind: str  # "amount", "fraction" or "zero"
    coef: np.ndarray  # position per unit (z - r) at each step
    const: float = 0.0


def _plan(params, utility, grid, strategy) -> _Plan:
    n = grid.rho.size
    if isinstance(strategy, Zero):
        return _Plan("zero", np.zeros(n))
    if isinstance(strategy, ConstantFraction):
        return _Plan("fraction", np.zeros(n), float(strategy.k))
    factor = 1.0 if isinstance(strategy, OptimalClosedForm) else float(strategy.factor)
    status = classify(params, utility)
    if not status.ok:
        raise IllPosedProblemError(status.reason)
    rem = params.T - grid.t[:-1]
    mult = strategy_multiplier(utility, grid.tau[:-1], rem)
    s2 = params.sigma**2
    if isinstance(utility, CARA):
        return _Plan("amount", factor * np.exp(-params.r * rem) / utility.beta * mult / s2)
    return _Plan("fraction", factor * mult / s2)


@dataclass
class _Out:
    utility: np.ndarray
    sq_err: np.ndarray
    wealth: np.ndarray
    floored: np.ndarray


def _run_block(params, utility, grid, plan, seed, lo, hi, out: _Out):
    b = hi - lo
    n = grid.rho.size
    dt = grid.dt
    sdt = math.sqrt(dt)
    s = params.sigma
    r = params.r
    e0 = np.empty(b)
    xi = np.empty((b, n, 2))
    for j in range(b):
        e0[j], xi[j] = _draw(seed, lo + j, n)
    mu = params.mu0 + math.sqrt(params.sigma0_sq) * e0
    growth = math.exp(r * dt)
    x = np.full(b, float(params.x0))
    state = PosteriorState(0.0, np.full(b, float(params.mu0)), float(grid.tau[0]))
    floored = np.zeros(b, dtype=bool)
    floor = WEALTH_FLOOR_REL * params.x0
    positive_only = not isinstance(utility, CARA)
    drift = (mu - 0.5 * s * s) * dt
    for i in range(n):
        rho = grid.rho[i]
        dW = sdt * xi[:, i, 0]
        dm = rho * dW + math.sqrt(1.0 - rho * rho) * sdt * xi[:, i, 1]
        if plan.kind == "zero":
            x = x * growth
        elif plan.kind == "amount":
            pi = plan.coef[i] * (state.z - r)
            x = growth * x + pi * ((mu - r) * dt + s * dW)
        else:
            phi = plan.coef[i] * (state.z - r) + plan.const
            x = x * growth * np.exp(phi * (mu - r) * dt - 0.5 * phi * phi * s * s * dt
                                    + phi * s * dW)
        if positive_only:
            low = ~(x > floor)
            if low.any():
                floored |= low
                x = np.where(low, floor, x)
        state = update(state, ObservationIncrement(drift + s * dW, dm, dt), params, rho)
    out.utility[lo:hi] = utility(x)
    out.sq_err[lo:hi] = (mu - state.z) ** 2
    out.wealth[lo:hi] = x
    out.floored[lo:hi] = floored


@dataclass(frozen=True)
class SimReport:
    mean_utility: float
    std_error: float
    mean_sq_drift_error: float
    drift_error_se: float
    terminal_wealth_summary: dict
    n_paths: int
    n_steps: int
    seed: int
    floored_paths: int
    strategy: str

    def to_dict(self) -> dict:
        return asdict(self)


def _workers(sim):
    if sim.workers is not None:
        return sim.workers
    return min(8, os.cpu_count() or 1)


def simulate(params: MarketParams, utility: UtilitySpec, clock: InformativeClock,
             sim: SimConfig) -> SimReport:
    """Estimate E[U(X_T)] under ``sim.strategy``."""
    seed = resolve_seed(sim)
    grid = step_grid(params, clock, sim.n_steps)
    plan = _plan(params, utility, grid, sim.strategy)
    n = sim.n_paths
    out = _Out(np.empty(n), np.empty(n), np.empty(n), np.empty(n, dtype=bool))
    starts = range(0, n, sim.block_size)

    def job(lo):
        _run_block(params, utility, grid, plan, seed, lo, min(lo + sim.block_size, n), out)

    workers = _workers(sim)
    if workers == 1:
        for lo in starts:
            job(lo)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(job, starts))

    u = out.utility
    se = float(np.std(u, ddof=1) / math.sqrt(n)) if n > 1 else math.nan
    d_se = float(np.std(out.sq_err, ddof=1) / math.sqrt(n)) if n > 1 else math.nan
    w = out.wealth
    summary = {"mean": float(np.mean(w)), "variance": float(np.var(w, ddof=1)) if n > 1 else 0.0,
               "min": float(np.min(w))}
    return SimReport(float(np.mean(u)), se, float(np.mean(out.sq_err)), d_se, summary, n,
                     sim.n_steps, seed, int(out.floored.sum()), describe(sim.strategy))


def combined_se(a: SimReport, b: SimReport) -> float:
    return math.hypot(a.std_error, b.std_error)


# ------------------------------------------------------------- experiments


@dataclass(frozen=True)
class CompareReport:
    factors: list
    reports: list
    best_factor: float

    def to_dict(self) -> dict:
        return {"factors": self.factors, "best_factor": self.best_factor,
                "reports": [r.to_dict() for r in self.reports]}


def compare_strategies(params: MarketParams, utility: UtilitySpec, clock: InformativeClock,
                       factors: Sequence[float], sim: SimConfig) -> CompareReport:
    """ScaledOptimal runs with common random numbers, in the order given."""
    factors = [float(f) for f in factors]
    reports = [simulate(params, utility, clock,
                        SimConfig(sim.n_paths, sim.n_steps, resolve_seed(sim), ScaledOptimal(f),
                                  sim.workers, sim.block_size, sim.budget, honor_env=False))
               for f in factors]
    best = factors[int(np.argmax([r.mean_utility for r in reports]))]
    return CompareReport(factors, reports, best)


@dataclass(frozen=True)
class MonotonicityReport:
    closed_form: list
    reports: list
    closed_form_ordered: bool
    mc_consistent: bool


def monotonicity_experiment(params: MarketParams, utility: UtilitySpec,
                            clocks: Sequence[InformativeClock], sim: SimConfig,
                            n_check: int = 257) -> MonotonicityReport:
    """Optimal-strategy utilities for clocks ordered tau_1 >= tau_2 >= ...

    ``mc_consistent`` holds when every consecutive MC difference agrees in
    sign with the closed form up to 3 combined standard errors.
    """
    t = np.linspace(0.0, params.T, n_check)
    taus = [np.asarray(c(t), dtype=float) for c in clocks]
    for a, b in zip(taus, taus[1:]):
        if np.any(a < b - 1e-12 * np.abs(b)):
            raise ValueError("clocks must be pointwise ordered, largest first")
    seed = resolve_seed(sim)
    cf = [float(value(coefficients(params, utility, c), 0.0, params.x0, params.mu0))
          for c in clocks]
    reports = [simulate(params, utility, c,
                        SimConfig(sim.n_paths, sim.n_steps, seed, OptimalClosedForm(),
                                  sim.workers, sim.block_size, sim.budget, honor_env=False))
               for c in clocks]
    ordered = all(a >= b for a, b in zip(cf, cf[1:]))
    consistent = all(r1.mean_utility - r2.mean_utility >= -3.0 * combined_se(r1, r2)
                     for r1, r2 in zip(reports, reports[1:]))
    return MonotonicityReport(cf, reports, ordered, consistent)


# ----------------------------------------------------------- single path


def simulate_path(params: MarketParams, clock: InformativeClock, n_steps: int = 1000,
                  seed: Optional[int] = None, path: int = 0) -> dict:
    """One path with the step-by-step filter.

    Returns arrays ``t, Y, m, Z, true_mu, var`` on the n_steps + 1 grid
    plus the increments ``dY, dm`` and step correlations ``rho``.
    """
    seed = resolve_seed(SimConfig(1, n_steps, seed, honor_env=seed is None))
    grid = step_grid(params, clock, n_steps)
    mu, dW, dm = path_increments(params, grid, seed, path)
    s = params.sigma
    dY = (mu - 0.5 * s * s) * grid.dt + s * dW
    z = np.empty(n_steps + 1)
    tau = np.empty(n_steps + 1)
    state = PosteriorState(0.0, float(params.mu0), float(grid.tau[0]))
    z[0], tau[0] = state.z, state.tau
    for i in range(n_steps):
        state = update(state, ObservationIncrement(dY[i], dm[i], grid.dt), params, grid.rho[i])
        z[i + 1], tau[i + 1] = state.z, state.tau
    return {
        "t": grid.t,
        "Y": np.concatenate([[0.0], np.cumsum(dY)]),
        "m": np.concatenate([[0.0], np.cumsum(dm)]),
        "Z": z,
        "true_mu": np.full(n_steps + 1, mu),
        "var": s * s / tau,
        "dY": dY,
        "dm": dm,
        "rho": grid.rho,
        "seed": seed,
    }
