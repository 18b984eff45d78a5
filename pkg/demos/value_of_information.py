"""
How much is extra information worth?
====================================

An investor learns the drift of a risky asset from prices alone, or from
prices plus a second signal whose noise is correlated with the price noise.
A linear clock tau(t) = t0 + k t summarises how fast learning proceeds:
k = 1 is learning from prices only, larger k is faster learning.

The value of the extra signal is the cash amount that, given to an investor
without the signal, makes them as well off as the informed investor.
"""

import numpy as np

from infoclock import CARA, CRRA, Log, MarketParams, QuadraticCost
from infoclock.info_econ import insider_bound, value_sweep

# t0 = 4 is a prior worth four years of price data; horizon two years
params = MarketParams.from_t0(4.0)
ks = np.arange(1.0, 11.0)

# %%
# Value grows with k but each extra unit buys less: the increments shrink.
values, costs, nets = value_sweep(params, CARA(0.001), ks, QuadraticCost(1.0))
print(" k    value     cost      net")
for row in zip(ks, values, costs, nets):
    print("{:2.0f} {:8.3f} {:8.3f} {:8.3f}".format(*row))
print("increments:", np.round(np.diff(values), 3))

# %%
# Even perfect knowledge of the drift has finite worth. For CARA the bound
# is inversely proportional to risk aversion.
for beta in (0.0005, 0.001, 0.002):
    print(f"beta={beta}: insider bound {insider_bound(params, CARA(beta)):.3f}")

# %%
# Power and log investors value information in proportion to wealth.
for u in (CRRA(2.0), CRRA(0.5), Log()):
    v, _, _ = value_sweep(params, u, [2.0, 10.0])
    print(f"{u!r:30s} k=2: {v[0]:7.3f}  k=10: {v[1]:7.3f}  bound: {insider_bound(params, u):7.3f}")
