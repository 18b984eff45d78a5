"""Deterministic numerical kernels with fixed accuracy contracts.

All default tolerances live here so callers and tests share one source.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NonFiniteError, NoSignChangeError

QUAD_RTOL = 1e-10
QUAD_INITIAL_PANELS = 64
QUAD_MAX_PANELS = 2**20
ODE_STEPS = 4096
ODE_MIN_STEPS = 16
ROOT_TOL = 1e-10
GOLDEN_TOL = 1e-9

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class QuadratureWarning(RuntimeWarning):
    """Panel cap reached before the refinement tolerance was met."""


class UnimodalityWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class QuadratureSpec:
    panels: int = QUAD_INITIAL_PANELS
    rtol: float = QUAD_RTOL
    max_panels: int = QUAD_MAX_PANELS
    atol: float = 0.0

    def __post_init__(self):
        if self.panels < 2 or self.panels % 2:
            raise ValueError("panels must be an even integer >= 2")
        if self.max_panels < self.panels:
            raise ValueError("max_panels must be >= panels")


@dataclass(frozen=True)
class OdeSpec:
    steps: int = ODE_STEPS

    def __post_init__(self):
        if self.steps < ODE_MIN_STEPS:
            raise ValueError(f"steps must be >= {ODE_MIN_STEPS}")


def _eval(f, x):
    y = np.asarray(f(x), dtype=float)
    if y.shape != x.shape:
        y = np.broadcast_to(y, x.shape)
    if not np.all(np.isfinite(y)):
        bad = x[~np.isfinite(y)][0]
        raise NonFiniteError(f"integrand is not finite at x = {bad!r}")
    return y


def integrate(f: Callable, a: float, b: float, spec: QuadratureSpec | None = None) -> float:
    """Composite Simpson rule with panel doubling.

    ``f`` must accept a numpy array of nodes. Refinement stops when the
    relative change between successive estimates is <= ``spec.rtol``; if
    ``spec.max_panels`` is reached first the last estimate is returned with
    a :class:`QuadratureWarning`.
    """
    spec = spec or QuadratureSpec()
    a = float(a)
    b = float(b)
    if b < a:
        raise ValueError("integrate requires a <= b")
    if a == b:
        return 0.0
    n = spec.panels
    x = np.linspace(a, b, n + 1)
    y = _eval(f, x)
    ends = y[0] + y[-1]
    odd = np.sum(y[1:-1:2])
    even = np.sum(y[2:-1:2])
    h = (b - a) / n
    est = h / 3.0 * (ends + 4.0 * odd + 2.0 * even)
    while n < spec.max_panels:
        n *= 2
        h = (b - a) / n
        mid = a + h * np.arange(1, n, 2)
        even = even + odd
        odd = np.sum(_eval(f, mid))
        new = h / 3.0 * (ends + 4.0 * odd + 2.0 * even)
        if abs(new - est) <= spec.rtol * abs(new) + spec.atol:
            return float(new)
        est = new
    warnings.warn(
        f"integrate: {spec.max_panels} panels reached before rtol={spec.rtol:g}",
        QuadratureWarning,
        stacklevel=2,
    )
    return float(est)


def solve_ivp(rhs: Callable, y0, t_span, spec: OdeSpec | None = None):
    """Classical fourth-order Runge-Kutta on a uniform grid.

    Returns ``(t, y)`` with ``y[i]`` the state at ``t[i]``.
    """
    spec = spec or OdeSpec()
    a, b = map(float, t_span)
    n = spec.steps
    h = (b - a) / n
    t = a + h * np.arange(n + 1)
    t[-1] = b
    y0 = np.atleast_1d(np.asarray(y0, dtype=float))
    out = np.empty((n + 1,) + y0.shape)
    out[0] = y = y0
    for i in range(n):
        ti = t[i]
        k1 = np.asarray(rhs(ti, y), dtype=float)
        k2 = np.asarray(rhs(ti + 0.5 * h, y + 0.5 * h * k1), dtype=float)
        k3 = np.asarray(rhs(ti + 0.5 * h, y + 0.5 * h * k2), dtype=float)
        k4 = np.asarray(rhs(ti + h, y + h * k3), dtype=float)
        y = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise NonFiniteError(f"ODE solution blew up near t = {t[i + 1]!r}")
        out[i + 1] = y
    return t, out


def find_root(f: Callable[[float], float], lo: float, hi: float, tol: float = ROOT_TOL,
              ftol: float = 0.0, max_iter: int = 400) -> float:
    """Bisection on a sign-changing bracket ``[lo, hi]``."""
    flo = f(lo)
    if flo == 0:
        return lo
    fhi = f(hi)
    if fhi == 0:
        return hi
    if flo * fhi > 0:
        raise NoSignChangeError(f"f({lo!r}) and f({hi!r}) have the same sign")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol or mid in (lo, hi):
            return mid
        fm = f(mid)
        if abs(fm) <= ftol:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class MaxResult:
    x: float
    fx: float
    unimodal: bool = True


def maximize_1d(f: Callable[[float], float], lo: float, hi: float,
                tol: float = GOLDEN_TOL) -> MaxResult:
    """Golden-section search for the maximum of ``f`` on ``[lo, hi]``.

    Unimodality is the caller's responsibility. If the interior search ends
    below an endpoint value the better sample is returned and the result is
    flagged with ``unimodal=False``.
    """
    lo, hi = min(lo, hi), max(lo, hi)
    if hi - lo <= tol:
        x = 0.5 * (lo + hi)
        return MaxResult(x, f(x))
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    x, fx = (c, fc) if fc >= fd else (d, fd)
    flo, fhi = f(lo), f(hi)
    if max(flo, fhi) > fx:
        if (hi - x) <= tol or (x - lo) <= tol:
            # converged onto an endpoint; that is a legitimate boundary max
            return MaxResult(*((lo, flo) if flo >= fhi else (hi, fhi)))
        warnings.warn("maximize_1d: endpoint beats interior optimum", UnimodalityWarning,
                      stacklevel=2)
        return MaxResult(*((lo, flo) if flo >= fhi else (hi, fhi)), unimodal=False)
    return MaxResult(x, fx)
