"""Market parameters, utility and cost families, and config parsing."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from .errors import ConfigError, DomainError


@dataclass(frozen=True)
class MarketParams:
    """Constants of the one-risky-asset market with a Gaussian drift prior.

    Parameters
    ----------
    r : risk-free rate per unit time
    sigma : volatility of the risky asset (> 0)
    mu0, sigma0_sq : mean and variance of the Gaussian prior on the drift
    T : investment horizon (> 0)
    x0 : initial wealth
    """

    r: float
    sigma: float
    mu0: float
    sigma0_sq: float
    T: float
    x0: float = 1.0

    def __post_init__(self):
        for name in ("r", "sigma", "mu0", "sigma0_sq", "T", "x0"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ConfigError(f"{name} must be finite, got {v!r}", key=name)
        if self.sigma <= 0:
            raise ConfigError("sigma must be > 0", key="sigma")
        if self.sigma0_sq <= 0:
            raise ConfigError("sigma0_sq must be > 0", key="sigma0_sq")
        if self.T <= 0:
            raise ConfigError("T must be > 0", key="T")
        t0 = self.sigma**2 / self.sigma0_sq
        if not (math.isfinite(t0) and t0 > 0):
            raise ConfigError("sigma^2 / sigma0_sq must be finite and positive", key="sigma0_sq")

    @property
    def t0(self) -> float:
        return self.sigma**2 / self.sigma0_sq

    @classmethod
    def from_t0(cls, t0, *, sigma=0.2, r=0.02, mu0=0.08, T=2.0, x0=1000.0):
        """Build parameters realising a given prior clock value ``t0``."""
        return cls(r=r, sigma=sigma, mu0=mu0, sigma0_sq=sigma**2 / t0, T=T, x0=x0)


def derive_t0(params: MarketParams) -> float:
    return params.t0


# ---------------------------------------------------------------- utilities


@dataclass(frozen=True)
class CARA:
    """U(x) = -exp(-beta x) / beta."""

    beta: float

    def __post_init__(self):
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise ConfigError("CARA beta must be > 0", key="beta")

    def __call__(self, x):
        return -np.exp(-self.beta * np.asarray(x, dtype=float)) / self.beta

    def inverse(self, u):
        return -np.log(-self.beta * np.asarray(u, dtype=float)) / self.beta


@dataclass(frozen=True)
class CRRA:
    """U(x) = x^(1-gamma) / (1-gamma), gamma > 0 and gamma != 1."""

    gamma: float

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ConfigError("CRRA gamma must be > 0", key="gamma")
        if self.gamma == 1.0:
            raise ConfigError("CRRA gamma must differ from 1; use Log", key="gamma")

    @property
    def kappa(self) -> float:
        """(1 - gamma) / gamma, the shift appearing in every CRRA formula."""
        return (1.0 - self.gamma) / self.gamma

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return x ** (1.0 - self.gamma) / (1.0 - self.gamma)

    def inverse(self, u):
        u = np.asarray(u, dtype=float)
        return ((1.0 - self.gamma) * u) ** (1.0 / (1.0 - self.gamma))


@dataclass(frozen=True)
class Log:
    """U(x) = ln x, the gamma -> 1 member of the CRRA family."""

    gamma: float = field(default=1.0, init=False)
    kappa: float = field(default=0.0, init=False)

    def __call__(self, x):
        return np.log(np.asarray(x, dtype=float))

    def inverse(self, u):
        return np.exp(np.asarray(u, dtype=float))


UtilitySpec = Union[CARA, CRRA, Log]


# ------------------------------------------------------------ well-posedness


@dataclass(frozen=True)
class WellPosed:
    @property
    def ok(self) -> bool:
        return True


@dataclass(frozen=True)
class IllPosed:
    reason: str

    @property
    def ok(self) -> bool:
        return False


WellPosedness = Union[WellPosed, IllPosed]


def classify(params: MarketParams, utility: UtilitySpec) -> WellPosedness:
    """Expected utility is unbounded for CRRA with t0/T <= (1-gamma)/gamma.

    The comparison is exact; the boundary itself is ill-posed.
    """
    if isinstance(utility, CRRA) and utility.gamma < 1.0:
        lhs = params.t0 / params.T
        rhs = utility.kappa
        if lhs <= rhs:
            return IllPosed(
                f"t0/T = {lhs:.6g} <= (1-gamma)/gamma = {rhs:.6g}: "
                "expected utility is unbounded"
            )
    return WellPosed()


def check_wealth_domain(params: MarketParams, utility: UtilitySpec) -> None:
    if isinstance(utility, (CRRA, Log)) and params.x0 <= 0:
        raise DomainError("x0 must be > 0 for CRRA and log utility")


# --------------------------------------------------------------------- costs


@dataclass(frozen=True)
class QuadraticCost:
    """cost(x) = lam (x - 1)^2 on x >= 1."""

    lam: float

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise ConfigError("cost lambda must be > 0", key="lambda")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.lam * (x - 1.0) ** 2

    def derivative(self, x):
        return 2.0 * self.lam * (np.asarray(x, dtype=float) - 1.0)

    def second_derivative(self, x):
        return np.full_like(np.asarray(x, dtype=float), 2.0 * self.lam)


@dataclass(frozen=True, eq=False)
class TabulatedCost:
    """Piecewise-linear cost through ``(x, values)``, extrapolated linearly.

    Nodes must start at x = 1 with value 0 and describe a nondecreasing
    convex function; checked on construction.
    """

    x: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if x.ndim != 1 or x.shape != v.shape or x.size < 2:
            raise ConfigError("tabulated cost needs matching 1-D arrays of length >= 2")
        if x[0] != 1.0 or v[0] != 0.0:
            raise ConfigError("tabulated cost must satisfy cost(1) = 0 at its first node")
        if np.any(np.diff(x) <= 0):
            raise ConfigError("tabulated cost nodes must be strictly increasing")
        slopes = np.diff(v) / np.diff(x)
        if np.any(slopes < 0):
            raise ConfigError("tabulated cost must be nondecreasing")
        if np.any(np.diff(slopes) < -1e-12 * np.maximum(1.0, np.abs(slopes[1:]))):
            raise ConfigError("tabulated cost must be convex")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", v)

    def __call__(self, xq):
        xq = np.asarray(xq, dtype=float)
        out = np.interp(xq, self.x, self.values)
        s_last = (self.values[-1] - self.values[-2]) / (self.x[-1] - self.x[-2])
        beyond = xq > self.x[-1]
        return np.where(beyond, self.values[-1] + s_last * (xq - self.x[-1]), out)


CostSpec = Union[QuadraticCost, TabulatedCost]


# -------------------------------------------------------------------- config

_MARKET_KEYS = {"r", "sigma", "mu0", "sigma0_sq", "T", "x0"}
_TOP_KEYS = {"market", "utility", "cost"}


def _number(obj, key, section):
    if key not in obj:
        raise ConfigError(f"missing {section}.{key}", key=f"{section}.{key}")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{section}.{key} must be a number", key=f"{section}.{key}")
    return float(v)


def _reject_unknown(obj, allowed, section):
    if not isinstance(obj, dict):
        raise ConfigError(f"{section} must be an object", key=section)
    extra = sorted(set(obj) - allowed)
    if extra:
        name = f"{section}.{extra[0]}" if section else extra[0]
        raise ConfigError(f"unknown key {name!r}", key=name)


def parse_utility(obj) -> UtilitySpec:
    _reject_unknown(obj, {"kind", "beta", "gamma"}, "utility")
    kind = obj.get("kind")
    if kind == "cara":
        _reject_unknown(obj, {"kind", "beta"}, "utility")
        return CARA(_number(obj, "beta", "utility"))
    if kind == "crra":
        _reject_unknown(obj, {"kind", "gamma"}, "utility")
        return CRRA(_number(obj, "gamma", "utility"))
    if kind == "log":
        _reject_unknown(obj, {"kind"}, "utility")
        return Log()
    raise ConfigError(f"utility.kind must be cara, crra or log, got {kind!r}", key="utility.kind")


def parse_cost(obj) -> CostSpec:
    _reject_unknown(obj, {"kind", "lambda"}, "cost")
    if obj.get("kind") != "quadratic":
        raise ConfigError("cost.kind must be 'quadratic'", key="cost.kind")
    return QuadraticCost(_number(obj, "lambda", "cost"))


def parse_config(obj: dict) -> tuple[MarketParams, UtilitySpec, CostSpec | None]:
    """Validate a config mapping; errors name the offending key."""
    _reject_unknown(obj, _TOP_KEYS, "")
    if "market" not in obj:
        raise ConfigError("missing 'market'", key="market")
    market = obj["market"]
    _reject_unknown(market, _MARKET_KEYS, "market")
    try:
        params = MarketParams(**{k: _number(market, k, "market") for k in sorted(_MARKET_KEYS)})
    except ConfigError as exc:
        if exc.key and "." not in exc.key:
            exc.key = f"market.{exc.key}"
        raise
    if "utility" not in obj:
        raise ConfigError("missing 'utility'", key="utility")
    utility = parse_utility(obj["utility"])
    cost = parse_cost(obj["cost"]) if "cost" in obj else None
    try:
        check_wealth_domain(params, utility)
    except DomainError as exc:
        raise ConfigError(str(exc), key="market.x0") from exc
    return params, utility, cost


def load_config(path) -> tuple[MarketParams, UtilitySpec, CostSpec | None]:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(obj)


def utility_to_dict(utility: UtilitySpec) -> dict:
    if isinstance(utility, CARA):
        return {"kind": "cara", "beta": utility.beta}
    if isinstance(utility, CRRA):
        return {"kind": "crra", "gamma": utility.gamma}
    return {"kind": "log"}
