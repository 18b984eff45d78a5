"""
When expected utility blows up
==============================

For power utility with gamma < 1 and a diffuse prior (t0 small relative to
the horizon) the investor can get unbounded expected utility. A constant
fraction k of wealth in the risky asset shows this: the expectation grows
without bound in k, so no optimal strategy exists.
"""

import math

from infoclock import CRRA, MarketParams
from infoclock.closed_form import illposed_divergence_witness
from infoclock.clock import natural_clock
from infoclock.errors import IllPosedProblemError
from infoclock.model import classify
from infoclock.montecarlo import ConstantFraction, SimConfig, simulate

params = MarketParams.from_t0(1.0)
u = CRRA(0.2)
print(classify(params, u))

# %%
# E[U(X_T)] relative to the riskless outcome, for fractions 1, 10, 100
for k, w in zip((1, 10, 100), illposed_divergence_witness(params, u, [1.0, 10.0, 100.0])):
    print(f"k={k:3d}: {w:.4g}")

# %%
# The optimal-strategy machinery refuses the problem, but a fixed fraction
# can still be simulated and checked against the formula.
try:
    simulate(params, u, natural_clock(1.0, params.T), SimConfig(10, 10, 1))
except IllPosedProblemError as exc:
    print("refused:", exc)
rep = simulate(params, u, natural_clock(1.0, params.T),
               SimConfig(20_000, 100, 1, ConstantFraction(1.0)))
target = float(u(params.x0 * math.exp(params.r * params.T))) * illposed_divergence_witness(
    params, u, [1.0])[0]
print(f"k=1: MC {rep.mean_utility:.3f} +/- {rep.std_error:.3f}, formula {target:.3f}")
