"""Conjugate-Gaussian filter for the unknown drift.

Given log-price increments ``dY`` and extra-signal increments ``dm`` with
correlation ``rho`` to the price noise, the posterior of the drift stays
Gaussian with mean ``z`` and variance ``sigma^2 / tau``. The discrete update
below is the exact Bayes step for the discretised observation model, so it
can be compounded without drift.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .clock import RHO_EPS, GridProfile
from .errors import ConfigError, DegenerateWindowError, NonFiniteError
from .model import MarketParams


@dataclass(frozen=True)
class PosteriorState:
    """Posterior summary at time ``t``; ``z`` may be an array (one per path)."""

    t: float
    z: float | np.ndarray
    tau: float

    def variance(self, sigma: float) -> float:
        return sigma**2 / self.tau


@dataclass(frozen=True)
class ObservationIncrement:
    dY: float | np.ndarray
    dm: float | np.ndarray
    dt: float

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be > 0")


def init_posterior(params: MarketParams) -> PosteriorState:
    return PosteriorState(0.0, float(params.mu0), params.t0)


def _q2(rho_t: float) -> float:
    rho_t = abs(float(rho_t))
    if not rho_t < 1.0:
        raise ValueError("rho must be < 1")
    return 1.0 / (1.0 - rho_t * rho_t)


def update(state: PosteriorState, obs: ObservationIncrement, params: MarketParams,
           rho_t: float) -> PosteriorState:
    """One conjugate step; ``rho_t`` is the correlation over the step.

    When ``rho_t == 0`` the ``dm`` input does not enter the computation.
    """
    q2 = _q2(rho_t)
    half_s2 = 0.5 * params.sigma**2
    tau_new = state.tau + q2 * obs.dt
    if rho_t == 0:
        signal = obs.dY
    else:
        signal = obs.dY - params.sigma * abs(rho_t) * obs.dm
    z_new = half_s2 + ((state.z - half_s2) * state.tau + q2 * signal) / tau_new
    if not np.all(np.isfinite(z_new)) or not np.isfinite(tau_new):
        raise NonFiniteError("filter update produced a non-finite state")
    return PosteriorState(state.t + obs.dt, z_new, tau_new)


def innovation(state: PosteriorState, obs: ObservationIncrement, params: MarketParams,
               rho_t: float):
    """Increment of the innovation Brownian motion over the step."""
    q2 = _q2(rho_t)
    q = np.sqrt(q2)
    s = params.sigma
    return (q / s) * (obs.dY - s * abs(rho_t) * obs.dm - (state.z - 0.5 * s * s) * obs.dt)


def posterior_mean_from_path(dY, dm, rho, dt, params: MarketParams):
    """Posterior mean at the end of a path from the closed integral formula.

    ``dY``, ``dm`` have shape ``(..., n_steps)``; ``rho`` has ``n_steps``
    entries (one per step). Returns ``(z, tau)``.
    """
    rho = np.abs(np.asarray(rho, dtype=float))
    q2 = 1.0 / (1.0 - rho * rho)
    tau = params.t0 + np.sum(q2 * dt)
    y0 = (params.mu0 - 0.5 * params.sigma**2) * params.t0
    acc = np.sum(q2 * (np.asarray(dY) - params.sigma * rho * np.asarray(dm)), axis=-1)
    return 0.5 * params.sigma**2 + (y0 + acc) / tau, tau


def estimate_correlation(Y_path, m_path, window: int, t=None, eps: float = RHO_EPS) -> GridProfile:
    """Rolling realised correlation of the increments of ``Y`` and ``m``.

    The estimate at an increment uses the trailing ``window`` increments;
    earlier increments reuse the first full-window estimate. Values are
    mapped to ``|rho|`` and clamped to ``[0, 1 - eps]``.
    """
    Y = np.asarray(Y_path, dtype=float)
    m = np.asarray(m_path, dtype=float)
    if Y.shape != m.shape or Y.ndim != 1:
        raise ValueError("Y and m must be 1-D paths of the same length")
    if window < 8:
        raise ValueError("window must be >= 8")
    dY = np.diff(Y)
    dm = np.diff(m)
    if dY.size < window:
        raise ValueError("path shorter than the window")
    kernel = np.ones(window)
    sxy = np.convolve(dY * dm, kernel, mode="valid")
    sxx = np.convolve(dY * dY, kernel, mode="valid")
    syy = np.convolve(dm * dm, kernel, mode="valid")
    if np.any(sxx <= 0) or np.any(syy <= 0):
        raise DegenerateWindowError("a window has zero realised variance")
    rho = np.abs(sxy) / np.sqrt(sxx * syy)
    rho = np.clip(rho, 0.0, 1.0 - eps)
    per_step = np.concatenate([np.full(window - 1, rho[0]), rho])
    if t is None:
        t = np.arange(Y.size, dtype=float)
    t = np.asarray(t, dtype=float)
    # value at node i describes the increment starting there
    node_rho = np.append(per_step, per_step[-1])
    return GridProfile(t - t[0], node_rho, eps=eps / 2)


def read_path_csv(path):
    """Read the ``t``, ``Y`` and ``m`` columns of a CSV on a uniform grid.

    Other columns are ignored, so the output of ``filter-demo`` reads back.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        try:
            cols = [header.index(name) for name in ("t", "Y", "m")]
        except ValueError:
            raise ConfigError(f"{path}: header needs columns t, Y, m", key="path") from None
        try:
            data = np.array([[float(row[j]) for j in cols] for row in reader if row])
        except (ValueError, IndexError) as exc:
            raise ConfigError(f"{path}: bad entry ({exc})", key="path") from exc
    if data.ndim != 2 or data.shape[0] < 2:
        raise ConfigError(f"{path}: need at least two rows", key="path")
    dt = np.diff(data[:, 0])
    if np.any(dt <= 0) or np.ptp(dt) > 1e-9 * max(abs(dt.mean()), 1e-300):
        raise ConfigError(f"{path}: time grid must be uniform and increasing", key="path")
    return data[:, 0], data[:, 1], data[:, 2]
