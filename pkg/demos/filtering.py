"""
Learning the drift along one path
=================================

The posterior of the drift stays Gaussian. Its variance is sigma^2 / tau(t),
so a faster clock shrinks uncertainty faster. We simulate one path with and
without a correlated side signal using the same random numbers.
"""

import numpy as np

from infoclock import MarketParams
from infoclock.clock import LinearClock, natural_clock
from infoclock.montecarlo import simulate_path

params = MarketParams.from_t0(4.0)
rho = 0.9
fast_clock = LinearClock(params.t0, 1.0 / (1.0 - rho**2), params.T)

slow = simulate_path(params, natural_clock(params.t0, params.T), 1000, seed=3)
fast = simulate_path(params, fast_clock, 1000, seed=3)

# %%
# The true drift is the same on both paths; only the estimate differs.
print(f"true drift {slow['true_mu'][0]:.4f}")
print("   t   Z(prices)  Z(+signal)  sd(prices)  sd(+signal)")
for i in range(0, 1001, 200):
    print(f"{slow['t'][i]:4.1f}  {slow['Z'][i]:9.4f}  {fast['Z'][i]:10.4f}"
          f"  {np.sqrt(slow['var'][i]):10.4f}  {np.sqrt(fast['var'][i]):11.4f}")
