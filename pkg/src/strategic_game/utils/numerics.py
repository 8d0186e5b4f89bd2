"""Numerical kernels shared by the equilibrium and subsidy modules.

Monotone inversion is a vectorized bisection so that analytic and tabulated
costs go through the same code path. Argmins combine a dense grid with a
golden-section refinement; quadrature goes through ``scipy.integrate.quad``
with a fixed Gauss-Legendre rule for vectorized grid scans.
"""

import logging
import math
import warnings
from typing import Callable, Iterable, Optional

import numpy as np
from scipy import integrate

from ..errors import NumericalError

logger = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5) - 1) / 2  # 1 / phi
INV_PHI_SQUARE = (3 - math.sqrt(5)) / 2  # 1 / phi^2

_LEGENDRE_NODES, _LEGENDRE_WEIGHTS = np.polynomial.legendre.leggauss(48)


def bisect_increasing(
    func: Callable[[np.ndarray], np.ndarray],
    targets,
    lo: float = 0.0,
    hi: float = 1.0,
    tol: float = 1e-9,
    max_iter: int = 200,
) -> np.ndarray:
    """
    Invert a strictly increasing function by bisection, elementwise.

    Args:
        func: Vectorized increasing function on [lo, hi]
        targets: Values in [func(lo), func(hi)] to invert
        lo: Left end of the search interval
        hi: Right end of the search interval
        tol: Absolute tolerance on |func(x) - target|
        max_iter: Iteration cap

    Returns:
        Array of x values with the shape of ``targets``

    Raises:
        NumericalError: If some target is not resolved within ``tol``
    """
    v = np.asarray(targets, dtype=float)
    a = np.full(v.shape, lo, dtype=float)
    b = np.full(v.shape, hi, dtype=float)
    mid = 0.5 * (a + b)

    for _ in range(max_iter):
        mid = 0.5 * (a + b)
        fm = func(mid)
        if np.all(np.abs(fm - v) <= 0.01 * tol):
            return mid
        below = fm < v
        a = np.where(below, mid, a)
        b = np.where(below, b, mid)

    mid = 0.5 * (a + b)
    residual = np.abs(func(mid) - v)
    if np.any(residual > tol):
        worst = float(np.max(residual))
        logger.error(f"Bisection left residual {worst:.3e} after {max_iter} iterations")
        raise NumericalError(f"Monotone inversion did not converge (residual {worst:.3e})")
    return mid


def golden_section_min(
    func: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-7,
    max_iter: int = 200,
) -> tuple[float, float]:
    """
    Golden-section search for a minimum of ``func`` on [a, b].

    Returns the midpoint of the final bracket (width <= tol) and its value.
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol:
        x = 0.5 * (a + b)
        return x, _checked(func, x)

    n = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))
    if n > max_iter:
        raise NumericalError(f"Golden-section search needs {n} steps, cap is {max_iter}")

    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc = _checked(func, c)
    yd = _checked(func, d)

    for _ in range(n - 1):
        if yc < yd:
            b, d, yd = d, c, yc
            h = INV_PHI * h
            c = a + INV_PHI_SQUARE * h
            yc = _checked(func, c)
        else:
            a, c, yc = c, d, yd
            h = INV_PHI * h
            d = a + INV_PHI * h
            yd = _checked(func, d)

    if yc < yd:
        x = 0.5 * (a + d)
    else:
        x = 0.5 * (c + b)
    return x, _checked(func, x)


def _checked(func: Callable[[float], float], x: float) -> float:
    value = float(func(x))
    if not math.isfinite(value):
        raise NumericalError(f"Objective is not finite at {x!r}")
    return value


def first_argmin(values, tie_tol: float = 1e-12) -> int:
    """Index of the first entry within ``tie_tol`` (relative to scale) of the minimum."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0 or np.all(np.isnan(arr)):
        raise NumericalError("Cannot take the argmin of an empty or all-NaN grid")
    best = float(np.nanmin(arr))
    slack = tie_tol * max(1.0, abs(best))
    return int(np.flatnonzero(arr <= best + slack)[0])


def quad(
    func: Callable[[float], float],
    a: float,
    b: float,
    points: Optional[Iterable[float]] = None,
    epsabs: float = 1e-9,
    limit: int = 200,
) -> float:
    """
    Adaptive quadrature of ``func`` over [a, b]; empty or inverted intervals give 0.

    Interior ``points`` (density knots, clamp points) are passed to QUADPACK
    as known discontinuities of the integrand or its derivative.
    """
    if not b > a:
        return 0.0
    inner = sorted({float(p) for p in (points or ()) if a < p < b})

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        value, abserr = integrate.quad(
            func, a, b,
            points=inner or None,
            epsabs=epsabs,
            epsrel=1e-10,
            limit=limit,
        )
    for w in caught:
        logger.warning(f"Quadrature on [{a:.6g}, {b:.6g}]: {w.message} (abserr {abserr:.2e})")
    return float(value)


def gauss_legendre(func: Callable[[np.ndarray], np.ndarray], lo, hi) -> np.ndarray:
    """
    Fixed-order Gauss-Legendre rule applied to many intervals at once.

    ``func`` receives an array of shape ``lo.shape + (nodes,)``. Intervals with
    hi <= lo integrate to 0.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    half = 0.5 * np.maximum(hi - lo, 0.0)
    centre = 0.5 * (hi + lo)
    x = centre[..., None] + half[..., None] * _LEGENDRE_NODES
    return half * np.sum(_LEGENDRE_WEIGHTS * func(x), axis=-1)
