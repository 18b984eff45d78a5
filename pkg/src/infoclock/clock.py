"""Informative clocks and correlation profiles.

An informative clock ``tau`` is sigma^2 over the posterior variance of the
drift. It starts at ``t0`` and grows with slope ``1 / (1 - rho(t)^2) >= 1``,
where ``rho`` is the correlation between the extra signal and the price
noise.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .errors import (ConfigError, InadmissibleClockError, InadmissibleProfileError,
                     OutOfDomainError)

RHO_EPS = 1e-6
_DOMAIN_SLACK = 1e-12
_DTAU_SLACK = 1e-9


def _check_t(t, T):
    t = np.asarray(t, dtype=float)
    lo_bad = t < -_DOMAIN_SLACK * max(1.0, T or 1.0)
    hi_bad = (t > T * (1.0 + _DOMAIN_SLACK) + _DOMAIN_SLACK) if T is not None else False
    if np.any(lo_bad | hi_bad):
        raise OutOfDomainError(f"time outside [0, {T}]")
    return t


class InformativeClock:
    """Common interface. ``T`` is the horizon the clock is defined on."""

    t0: float
    T: Optional[float]

    def __call__(self, t):
        raise NotImplementedError

    def eval(self, t):
        return self(t)

    def derivative(self, t):
        raise NotImplementedError

    def inverse(self, u):
        raise NotImplementedError

    @property
    def is_natural(self) -> bool:
        return False


@dataclass(frozen=True)
class LinearClock(InformativeClock):
    """tau(t) = t0 + k t with k >= 1; k = 1 is the natural clock."""

    t0: float
    k: float = 1.0
    T: Optional[float] = None

    def __post_init__(self):
        if not (math.isfinite(self.t0) and self.t0 > 0):
            raise InadmissibleClockError("t0 must be finite and > 0")
        if not (math.isfinite(self.k) and self.k >= 1.0):
            raise InadmissibleClockError(f"clock slope must be >= 1, got {self.k!r}")

    @property
    def is_natural(self) -> bool:
        return self.k == 1.0

    def __call__(self, t):
        t = _check_t(t, self.T)
        return self.t0 + self.k * t

    def derivative(self, t):
        t = _check_t(t, self.T)
        return np.full_like(t, self.k, dtype=float)

    def inverse(self, u):
        u = np.asarray(u, dtype=float)
        hi = self.t0 + self.k * self.T if self.T is not None else np.inf
        if np.any(u < self.t0 * (1 - _DOMAIN_SLACK)) or np.any(u > hi * (1 + _DOMAIN_SLACK)):
            raise OutOfDomainError(f"clock value outside [{self.t0}, {hi}]")
        return (u - self.t0) / self.k


def natural_clock(t0: float, T: Optional[float] = None) -> LinearClock:
    return LinearClock(t0, 1.0, T)


@dataclass(frozen=True, eq=False)
class GridClock(InformativeClock):
    """Clock given by samples of tau' on a grid, linearly interpolated.

    tau is the exact integral of that interpolant, so tau' >= 1 at the nodes
    implies it everywhere.
    """

    t0: float
    t: np.ndarray
    dtau: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        d = np.asarray(self.dtau, dtype=float)
        if t.ndim != 1 or t.shape != d.shape or t.size < 2:
            raise InadmissibleClockError("grid clock needs matching 1-D arrays, length >= 2")
        if t[0] != 0.0 or np.any(np.diff(t) <= 0):
            raise InadmissibleClockError("grid must start at 0 and increase strictly")
        if not np.all(np.isfinite(d)):
            raise InadmissibleClockError("tau' samples must be finite")
        if np.any(d < 1.0 - _DTAU_SLACK):
            raise InadmissibleClockError(f"tau' must be >= 1, min sample {d.min()!r}")
        if not (math.isfinite(self.t0) and self.t0 > 0):
            raise InadmissibleClockError("t0 must be finite and > 0")
        h = np.diff(t)
        nodes = np.empty_like(t)
        nodes[0] = self.t0
        nodes[1:] = self.t0 + np.cumsum(0.5 * h * (d[:-1] + d[1:]))
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "dtau", d)
        object.__setattr__(self, "_h", h)
        object.__setattr__(self, "_slope", np.diff(d) / h)
        object.__setattr__(self, "tau_nodes", nodes)

    @property
    def T(self) -> float:
        return float(self.t[-1])

    @property
    def is_natural(self) -> bool:
        return bool(np.all(self.dtau == 1.0))

    def _segment(self, x):
        return np.clip(np.searchsorted(self.t, x, side="right") - 1, 0, self.t.size - 2)

    def __call__(self, t):
        t = _check_t(t, self.T)
        i = self._segment(t)
        dt = t - self.t[i]
        return self.tau_nodes[i] + self.dtau[i] * dt + 0.5 * self._slope[i] * dt * dt

    def derivative(self, t):
        t = _check_t(t, self.T)
        i = self._segment(t)
        return self.dtau[i] + self._slope[i] * (t - self.t[i])

    def inverse(self, u):
        u = np.asarray(u, dtype=float)
        hi = self.tau_nodes[-1]
        if np.any(u < self.t0 * (1 - _DOMAIN_SLACK)) or np.any(u > hi * (1 + _DOMAIN_SLACK)):
            raise OutOfDomainError(f"clock value outside [{self.t0}, {hi}]")
        i = np.clip(np.searchsorted(self.tau_nodes, u, side="right") - 1, 0, self.t.size - 2)
        du = u - self.tau_nodes[i]
        d = self.dtau[i]
        s = self._slope[i]
        disc = np.maximum(d * d + 2.0 * s * du, 0.0)
        return self.t[i] + 2.0 * du / (d + np.sqrt(disc))

    @classmethod
    def from_function(cls, t0, dtau_fn, T, n=4096):
        t = np.linspace(0.0, T, n + 1)
        return cls(t0, t, np.asarray(dtau_fn(t), dtype=float))


@dataclass(frozen=True)
class InsiderClock(InformativeClock):
    """Marker for tau = infinity just after time 0 (drift revealed)."""

    t0: float
    T: Optional[float] = None

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t > 0, np.inf, self.t0)

    def derivative(self, t):
        return np.full_like(np.asarray(t, dtype=float), np.inf)

    def inverse(self, u):
        raise OutOfDomainError("insider clock has no finite inverse")


def eval_clock(clock: InformativeClock, t):
    return clock(t)


def eval_derivative(clock: InformativeClock, t):
    return clock.derivative(t)


def eval_inverse(clock: InformativeClock, u):
    return clock.inverse(u)


@dataclass(frozen=True)
class Admissibility:
    finite: bool
    tau_T: float


def check_admissible(clock: InformativeClock, T: float) -> Admissibility:
    """Finite iff tau(T) < infinity."""
    if isinstance(clock, InsiderClock):
        return Admissibility(False, math.inf)
    tau_T = float(clock(T))
    return Admissibility(math.isfinite(tau_T), tau_T)


# ------------------------------------------------------ correlation profiles


def _check_rho(values, eps):
    r = np.abs(np.asarray(values, dtype=float))
    if not np.all(np.isfinite(r)):
        raise InadmissibleProfileError("correlation samples must be finite")
    if np.any(r >= 1.0 - eps):
        raise InadmissibleProfileError(
            f"correlation reaches {r.max():.9g} >= 1 - {eps:g}; "
            "the informative clock would not stay finite"
        )
    return r


@dataclass(frozen=True)
class ConstantProfile:
    value: float
    eps: float = RHO_EPS

    def __post_init__(self):
        object.__setattr__(self, "value", float(_check_rho(self.value, self.eps)))

    def __call__(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.value)


@dataclass(frozen=True, eq=False)
class GridProfile:
    """Samples of rho on a grid with linear interpolation; signs are dropped."""

    t: np.ndarray
    rho: np.ndarray
    eps: float = RHO_EPS

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        if t.ndim != 1 or t.size < 2 or np.any(np.diff(t) <= 0) or t[0] != 0.0:
            raise InadmissibleProfileError("profile grid must start at 0 and increase strictly")
        r = _check_rho(self.rho, self.eps)
        if r.shape != t.shape:
            raise InadmissibleProfileError("profile arrays must have matching shapes")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "rho", r)

    @property
    def T(self) -> float:
        return float(self.t[-1])

    def __call__(self, t):
        return np.interp(np.asarray(t, dtype=float), self.t, self.rho)


@dataclass(frozen=True)
class ClockInducedProfile:
    clock: InformativeClock

    def __call__(self, t):
        d = np.asarray(self.clock.derivative(t), dtype=float)
        return np.sqrt(np.maximum(1.0 - 1.0 / d, 0.0))


CorrelationProfile = Union[ConstantProfile, GridProfile, ClockInducedProfile]


def clock_from_correlation(profile: CorrelationProfile, t0: float, T: Optional[float] = None,
                           n: int = 4096) -> InformativeClock:
    """Build tau(t) = t0 + int_0^t 1 / (1 - rho(s)^2) ds."""
    if isinstance(profile, ClockInducedProfile):
        return profile.clock
    if isinstance(profile, ConstantProfile):
        return LinearClock(t0, 1.0 / (1.0 - profile.value**2), T)
    T = profile.T if T is None else T
    grid = np.union1d(np.linspace(0.0, T, n + 1), profile.t[profile.t <= T])
    rho = profile(grid)
    return GridClock(t0, grid, 1.0 / (1.0 - rho * rho))


def correlation_from_clock(clock: InformativeClock) -> CorrelationProfile:
    """rho(t) = sqrt(1 - 1 / tau'(t))."""
    if isinstance(clock, LinearClock):
        return ConstantProfile(math.sqrt(1.0 - 1.0 / clock.k))
    if isinstance(clock, GridClock):
        return GridProfile(clock.t, np.sqrt(np.maximum(1.0 - 1.0 / clock.dtau, 0.0)))
    raise InadmissibleClockError("insider clock has no finite correlation profile")


# ------------------------------------------------------------ mini-language


def read_grid_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read ``t`` and ``tau_prime`` columns (an optional ``tau`` column is ignored)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        names = [h.strip() for h in header] if header else []
        if names not in (["t", "tau_prime"], ["t", "tau", "tau_prime"]):
            raise ConfigError(f"{path}: header must be 't,tau_prime' or 't,tau,tau_prime'",
                              key="clock")
        rows = [r for r in reader if r]
    try:
        data = np.array([[float(r[0]), float(r[-1])] for r in rows])
    except ValueError as exc:
        raise ConfigError(f"{path}: non-numeric entry ({exc})", key="clock") from exc
    if data.shape[0] < 2:
        raise ConfigError(f"{path}: need at least two rows", key="clock")
    return data[:, 0], data[:, 1]


def parse_clock_spec(spec: str, t0: float, T: float) -> InformativeClock:
    """Parse ``natural``, ``linear:k=<float>`` or ``grid:<path.csv>``."""
    spec = spec.strip()
    try:
        if spec == "natural":
            return natural_clock(t0, T)
        if spec.startswith("linear:"):
            key, _, val = spec[len("linear:"):].partition("=")
            if key.strip() != "k":
                raise ConfigError(f"bad clock spec {spec!r}; expected linear:k=<float>",
                                  key="clock")
            return LinearClock(t0, float(val), T)
        if spec.startswith("grid:"):
            t, d = read_grid_csv(Path(spec[len("grid:"):]))
            if abs(t[-1] - T) > 1e-12 * max(1.0, T):
                raise ConfigError(f"grid clock ends at {t[-1]}, horizon is {T}", key="clock")
            return GridClock(t0, t, d)
    except (ValueError, InadmissibleClockError, OSError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad clock spec {spec!r}: {exc}", key="clock") from exc
    raise ConfigError(f"unknown clock spec {spec!r}", key="clock")
