"""Gamma and two-parameter Mittag-Leffler functions on the non-positive real axis.

E_{alpha,beta}(z) is evaluated with three approximations chosen by |z|:
a Taylor series near the origin, the algebraic asymptotic expansion far out,
and a real-axis integral representation in between. All functions are pure.
"""

from __future__ import annotations

import logging
import math

import mpmath
import numpy as np
from scipy.integrate import quad
from scipy.special import gamma as _sc_gamma
from scipy.special import gammaln, rgamma

from fracfem.core.exceptions import DomainError, UnsupportedDomainError
from fracfem.core.models import MlParams

logger = logging.getLogger("fracfem.special_functions")

_EPS = np.finfo(float).eps
_TAYLOR_MAX_TERMS = 4000
_ASYM_MAX_TERMS = 600
_UNIT_ALPHA_SWITCH = 50.0


def gamma(x: float) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float, np.floating, np.integer)):
        raise DomainError("x", x, "gamma expects a real number")
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError("x", x, "gamma is only provided for finite positive arguments")
    return float(_sc_gamma(x))


def taylor_radius(alpha: float) -> float:
    return 1.0 + 2.0 * alpha


def asymptotic_radius(alpha: float) -> float:
    if alpha >= 1.0:
        return _UNIT_ALPHA_SWITCH
    return max(10.0, 10.0 ** (2.0 * alpha))


def _as_checked_array(z) -> np.ndarray:
    arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("z", "non-finite", "Mittag-Leffler arguments must be finite")
    if np.any(arr > 0.0):
        raise UnsupportedDomainError("z", float(np.max(arr)), "only z <= 0 is supported")
    return arr


def _taylor(alpha: float, beta: float, z: np.ndarray) -> np.ndarray:
    s = np.zeros_like(z)
    comp = np.zeros_like(z)
    zk = np.ones_like(z)
    small_run = 0
    for k in range(_TAYLOR_MAX_TERMS):
        term = zk * rgamma(alpha * k + beta)
        y = term - comp
        t = s + y
        comp = (t - s) - y
        s = t
        if k > 0 and np.all(np.abs(term) <= _EPS * np.abs(s)):
            small_run += 1
            if small_run >= 2:
                break
        else:
            small_run = 0
        zk = zk * z
    return s


def _asymptotic(alpha: float, beta: float, z: np.ndarray) -> np.ndarray:
    # -sum_{k>=1} z^{-k} / Gamma(beta - alpha k), cut where the term envelope
    # |z|^{-k} Gamma(1 - beta + alpha k) / pi stops decreasing
    s = np.zeros_like(z)
    comp = np.zeros_like(z)
    inv = 1.0 / z
    log_az = np.log(np.abs(z))
    zk = np.ones_like(z)
    prev_env = np.full_like(z, np.inf)
    active = np.ones(z.shape, dtype=bool)
    for k in range(1, _ASYM_MAX_TERMS):
        zk = zk * inv
        arg = 1.0 - beta + alpha * k
        if arg > 0.0:
            env = np.exp(gammaln(arg) - k * log_az) / math.pi
            active &= env <= prev_env
            prev_env = env
        coef = float(rgamma(beta - alpha * k))
        if coef != 0.0:
            term = np.where(active, -zk * coef, 0.0)
            y = term - comp
            t = s + y
            comp = (t - s) - y
            s = t
        if arg > 0.0:
            active &= env > _EPS * np.abs(s)
        if not active.any():
            break
    return s


def _integral(alpha: float, beta: float, z: float) -> float:
    # valid for 0 < alpha < 1, beta < 1 + alpha and z < 0
    x = -z
    c1 = math.sin(math.pi * (1.0 - beta))
    c2 = math.sin(math.pi * (1.0 - beta + alpha))
    ca = math.cos(alpha * math.pi)
    expo = (1.0 - beta) / alpha
    inv_alpha = 1.0 / alpha

    def kernel(chi: float) -> float:
        return chi**expo * math.exp(-(chi**inv_alpha)) * (chi * c1 - z * c2) / (chi * chi - 2.0 * chi * z * ca + z * z)

    breaks = sorted({1.0, x})
    total = 0.0
    lower = 0.0
    for b in breaks:
        total += quad(kernel, lower, b, epsabs=0.0, epsrel=1e-13, limit=500)[0]
        lower = b
    total += quad(kernel, lower, np.inf, epsabs=0.0, epsrel=1e-13, limit=500)[0]
    return total / (alpha * math.pi)


def _taylor_extended(alpha: float, beta: float, z: float) -> float:
    dps = 30 + int(abs(z) / 2.0)
    with mpmath.workdps(dps):
        zz = mpmath.mpf(z)
        tol = mpmath.mpf(10) ** (-dps + 5)
        s = mpmath.mpf(0)
        zk = mpmath.mpf(1)
        k = 0
        while True:
            term = zk * mpmath.rgamma(alpha * k + beta)
            s += term
            if k > abs(z) and abs(term) <= tol * abs(s):
                break
            zk *= zz
            k += 1
        return float(s)


def _middle(alpha: float, beta: float, z: float) -> float:
    if alpha >= 1.0:
        return _taylor_extended(alpha, beta, z)
    if beta >= 1.0 + alpha:
        return (_middle(alpha, beta - alpha, z) - float(rgamma(beta - alpha))) / z
    return _integral(alpha, beta, z)


def _region_masks(params: MlParams, z: np.ndarray) -> dict[str, np.ndarray]:
    a = np.abs(z)
    if params.alpha == 1.0 and params.beta == 1.0:
        full = np.ones(z.shape, dtype=bool)
        none = np.zeros(z.shape, dtype=bool)
        return {"exp": full, "taylor": none, "integral": none, "asymptotic": none}
    taylor = a <= taylor_radius(params.alpha)
    asym = (a >= asymptotic_radius(params.alpha)) & ~taylor
    middle = ~(taylor | asym)
    return {"exp": np.zeros(z.shape, dtype=bool), "taylor": taylor, "integral": middle, "asymptotic": asym}


def mittag_leffler_array(params: MlParams, z) -> np.ndarray:
    """Vectorized E_{alpha,beta}(z) for an array of z <= 0."""
    arr = _as_checked_array(z)
    flat = arr.reshape(-1)
    masks = _region_masks(params, flat)
    out = np.empty_like(flat)

    if masks["exp"].any():
        out[masks["exp"]] = np.exp(flat[masks["exp"]])
    if masks["taylor"].any():
        out[masks["taylor"]] = _taylor(params.alpha, params.beta, flat[masks["taylor"]])
    if masks["asymptotic"].any():
        out[masks["asymptotic"]] = _asymptotic(params.alpha, params.beta, flat[masks["asymptotic"]])
    middle = np.flatnonzero(masks["integral"])
    if middle.size:
        logger.debug(f"ML integral region alpha={params.alpha} beta={params.beta} points={middle.size}")
    for i in middle:
        out[i] = _middle(params.alpha, params.beta, float(flat[i]))

    return out.reshape(arr.shape)


def mittag_leffler(params: MlParams, z: float) -> float:
    if isinstance(z, bool) or not isinstance(z, (int, float, np.floating, np.integer)):
        raise DomainError("z", z, "expected a real number")
    return float(mittag_leffler_array(params, np.array([float(z)]))[0])


def mittag_leffler_regions(params: MlParams, z) -> dict[str, int]:
    """How many of the arguments fall into each evaluation region."""
    arr = _as_checked_array(z).reshape(-1)
    return {name: int(np.count_nonzero(mask)) for name, mask in _region_masks(params, arr).items()}
