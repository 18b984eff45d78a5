"""Informative clocks: value and optimal acquisition of drift information.

The posterior precision of an unknown Gaussian drift, in units of the price
volatility, is the *informative clock* ``tau(t)``. This package provides the
filter that produces it, closed-form value functions and strategies given a
clock, the certainty-equivalent value of extra information, the optimal
acquisition schedule under a quadratic cost, and a Monte Carlo engine that
checks all of them.
"""

from .acquisition import AcquisitionSolution, solve, solve_cara, solve_crra, verify_necessary_condition
from .clock import (ClockInducedProfile, ConstantProfile, GridClock, GridProfile, InformativeClock,
                    InsiderClock, LinearClock, clock_from_correlation, correlation_from_clock,
                    natural_clock, parse_clock_spec)
from .closed_form import coefficients, optimal_fraction, optimal_strategy, value
from .errors import *  # noqa: F401,F403
from .filtering import PosteriorState, estimate_correlation, init_posterior, update
from .info_econ import cost_of_information, insider_bound, net_value, value_of_information, value_sweep
from .model import CARA, CRRA, Log, MarketParams, QuadraticCost, TabulatedCost, classify, parse_config
from .montecarlo import (ConstantFraction, OptimalClosedForm, ScaledOptimal, SimConfig, SimReport, Zero,
                         compare_strategies, monotonicity_experiment, simulate)

__version__ = "0.1.0"
