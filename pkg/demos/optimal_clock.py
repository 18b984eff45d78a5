"""
Choosing how fast to learn
==========================

When information costs lambda * (tau'(t) - 1)^2 per unit time, the best
clock solves an Euler-Lagrange boundary value problem. We solve it by
shooting and look at the shape of the answer.
"""

import numpy as np

from infoclock import CARA, CRRA, Log, MarketParams, QuadraticCost
from infoclock.acquisition import gateaux_check, solve

params = MarketParams.from_t0(4.0)
cost = QuadraticCost(1.0)

# %%
# The optimal learning speed tau' starts high and falls to exactly one at
# the horizon: information bought late has little time to pay off.
sol = solve(params, CARA(0.001), cost)
for t in (0.0, 0.5, 1.0, 1.5, 2.0):
    i = int(np.searchsorted(sol.t, t))
    print(f"t={sol.t[i]:.2f}  tau={sol.tau[i]:8.4f}  tau'={sol.dtau[i]:7.4f}")
print(f"value {sol.value:.3f} - cost {sol.cost:.3f} = net {sol.net:.3f}")

# %%
# Small random changes to the schedule only lower the net value.
print(gateaux_check(sol, params, CARA(0.001), cost, n=10))

# %%
# Power utility needs an extra dual variable y*; its fixed point is solved
# alongside the clock.
for u in (CRRA(2.0), CRRA(4.0), Log()):
    s = solve(params, u, cost)
    d = s.diagnostics
    print(f"{u!r:30s} tau'(0)={s.shoot_param:6.3f} net={s.net:8.3f} "
          f"fixed-point gap={d['fixed_point_gap']:.1e}")

# %%
# Less risk-averse investors buy more information, pointwise in time.
bold = solve(params, CARA(0.0005), cost)
print("beta halved, tau larger everywhere:", bool(np.all(bold.tau >= sol.tau)))
