"""
Checking the closed form by simulation
======================================

The optimal strategy and its expected utility are known in closed form.
Simulating wealth under that strategy should reproduce the formula within
Monte Carlo error, and scaling the strategy up or down should do worse.
"""

from infoclock import CARA, Log, MarketParams
from infoclock.clock import LinearClock
from infoclock.closed_form import coefficients, value
from infoclock.montecarlo import SimConfig, compare_strategies, simulate

params = MarketParams.from_t0(4.0)
clock = LinearClock(params.t0, 2.0, params.T)

# %%
for u in (CARA(0.001), Log()):
    v = float(value(coefficients(params, u, clock), 0.0, params.x0, params.mu0))
    rep = simulate(params, u, clock, SimConfig(20_000, 200, master_seed=1))
    print(f"{u!r:28s} closed form {v:.5f}  MC {rep.mean_utility:.5f} +/- {rep.std_error:.5f}")

# %%
# Common random numbers make the comparison between factors sharp.
cmp = compare_strategies(params, CARA(0.001), clock, [0.5, 0.8, 1.0, 1.2, 1.5],
                         SimConfig(20_000, 200, master_seed=1))
for f, r in zip(cmp.factors, cmp.reports):
    print(f"factor {f:3.1f}: {r.mean_utility:9.3f} +/- {r.std_error:.3f}")
print("best factor:", cmp.best_factor)
