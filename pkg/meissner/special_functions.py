"""
Modified Bessel functions I0, I1 of real non-negative argument.

Power series below SWITCH_POINT, large-argument expansion above it
(Abramowitz & Stegun 9.7.1). Every function accepts a float or a numpy array
and returns the same shape.
"""

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.optimize import bisect

from .exceptions import DomainError

LOG = logging.getLogger(__name__)

SWITCH_POINT = 20.0
SERIES_MAX_TERMS = 200
ASYMPTOTIC_MAX_TERMS = 30
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class BesselEval:
    """A single evaluation together with the branch that produced it"""
    value: float
    method: Literal["series", "asymptotic"]


def _as_argument(z):
    arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("Bessel argument must be finite")
    if np.any(arr < 0):
        raise DomainError(f"Bessel argument must be non-negative, got min {arr.min()}")
    return arr


def _wrap(result, like):
    # hand back a python float for scalar input
    if np.ndim(like) == 0:
        return float(result)
    return result


def _series(z: np.ndarray, order: int) -> np.ndarray:
    """sum_k (z/2)^(2k+order) / (k! (k+order)!) for order 0 or 1"""
    q = 0.25 * z * z
    term = np.ones_like(z) if order == 0 else 0.5 * z
    total = term.copy()
    for k in range(1, SERIES_MAX_TERMS):
        term = term * q / (k * (k + order))
        total = total + term
        if np.all(term <= _EPS * total):
            break
    return total


def _asymptotic_sum(z: np.ndarray, order: int) -> np.ndarray:
    """1 - (mu-1)/(8z) + (mu-1)(mu-9)/(2!(8z)^2) - ... with mu = 4 order^2"""
    mu = 4.0 * order * order
    term = np.ones_like(z)
    total = term.copy()
    for k in range(1, ASYMPTOTIC_MAX_TERMS + 1):
        term = term * ((2 * k - 1) ** 2 - mu) / (8.0 * k * z)
        total = total + term
        if np.all(np.abs(term) <= _EPS * np.abs(total)):
            break
    return total


def _log_bessel(z: np.ndarray, order: int) -> np.ndarray:
    out = np.empty_like(z)
    small = z < SWITCH_POINT
    if np.any(small):
        with np.errstate(divide="ignore"):
            out[small] = np.log(_series(z[small], order))
    large = ~small
    if np.any(large):
        zl = z[large]
        out[large] = zl - 0.5 * np.log(2.0 * np.pi * zl) + np.log(_asymptotic_sum(zl, order))
    return out


def _bessel(z: np.ndarray, order: int) -> np.ndarray:
    out = np.empty_like(z)
    small = z < SWITCH_POINT
    if np.any(small):
        out[small] = _series(z[small], order)
    large = ~small
    if np.any(large):
        zl = z[large]
        with np.errstate(over="ignore"):
            out[large] = np.exp(zl) / np.sqrt(2.0 * np.pi * zl) * _asymptotic_sum(zl, order)
    return out


def bessel_i0(z):
    """
    I0(z) for z >= 0.

    Overflows to inf beyond z ~ 713; use bessel_i0_log for ratios there.
    """
    arr = _as_argument(z)
    return _wrap(_bessel(np.atleast_1d(arr), 0).reshape(arr.shape), z)


def bessel_i1(z):
    """I1(z) for z >= 0"""
    arr = _as_argument(z)
    return _wrap(_bessel(np.atleast_1d(arr), 1).reshape(arr.shape), z)


def bessel_i0_log(z):
    """
    ln I0(z), safe for arguments far beyond the overflow of I0 itself.

    Args:
        z: Non-negative argument(s)

    Returns:
        ln I0(z) with the shape of z
    """
    arr = _as_argument(z)
    return _wrap(_log_bessel(np.atleast_1d(arr), 0).reshape(arr.shape), z)


def bessel_ratio(z):
    """I1(z)/I0(z), evaluated without forming either function at large z"""
    arr = np.atleast_1d(_as_argument(z))
    out = np.empty_like(arr)
    small = arr < SWITCH_POINT
    if np.any(small):
        out[small] = _series(arr[small], 1) / _series(arr[small], 0)
    large = ~small
    if np.any(large):
        zl = arr[large]
        out[large] = _asymptotic_sum(zl, 1) / _asymptotic_sum(zl, 0)
    return _wrap(out.reshape(np.shape(z)), z)


def bessel_i0_eval(z: float) -> BesselEval:
    """Scalar I0 evaluation tagged with the branch used"""
    value = bessel_i0(float(z))
    method = "series" if float(z) < SWITCH_POINT else "asymptotic"
    return BesselEval(value=value, method=method)


def bessel_i1_eval(z: float) -> BesselEval:
    """Scalar I1 evaluation tagged with the branch used"""
    value = bessel_i1(float(z))
    method = "series" if float(z) < SWITCH_POINT else "asymptotic"
    return BesselEval(value=value, method=method)


def ratio_threshold(target: float, xtol: float = 1e-10) -> float:
    """
    Smallest p with I1(z)/I0(z) >= target for every z >= p.

    I1/I0 increases monotonically from 0 towards 1, so the threshold is the
    unique root of I1(p)/I0(p) = target, bracketed by doubling and then
    bisected.

    Args:
        target: Ratio level in (0, 1)
        xtol: Absolute bisection tolerance on p

    Returns:
        The threshold p
    """
    if not 0.0 < target < 1.0:
        raise DomainError(f"ratio target must lie in (0, 1), got {target}")

    def excess(p: float) -> float:
        return bessel_ratio(p) - target

    hi = 1.0
    while excess(hi) < 0.0:
        hi *= 2.0
        if hi > 1e12:
            raise DomainError(f"ratio target {target} too close to 1")
    p = bisect(excess, 0.0, hi, xtol=xtol)
    LOG.debug(f"ratio threshold for {target}: p = {p:.10f}")
    return float(p)
