"""Two-parameter Mittag-Leffler function and its monotone/oscillatory split.

``ml`` evaluates E_{alpha,beta}(z) = sum_k z^k / Gamma(alpha k + beta) for
real z, switching between a direct series, an arbitrary-precision series,
and the large-argument asymptotic expansion.

For 1 < alpha < 2 the relaxation function E_alpha(-t^alpha) splits into an
exponentially damped oscillation g_{alpha,k} (pole-pair contribution, in
closed form) and a completely monotone remainder f_{alpha,k} (a cut
integral, evaluated by quadrature).  The index k counts antiderivatives:
d/dt f_{alpha,k} = f_{alpha,k-1} and likewise for g.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy.special import gamma, rgamma

from .errors import AccuracyLossError, FracDomainError

__all__ = ["MLParams", "SERIES_SWITCH", "ml", "ml_decomp_f", "ml_decomp_g"]

# |z| at or below which the plain floating-point series is always used
# (subject to the cancellation guard below).
SERIES_SWITCH = 5.0

# largest |z|^(1/alpha) for which float series cancellation stays harmless
_FLOAT_SERIES_PEAK = 8.0

_ABS_TOL = 1e-13


@dataclass(frozen=True)
class MLParams:
    """Parameter pair (alpha, beta) of E_{alpha,beta}."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not self.alpha > 0.0:
            raise FracDomainError(f"alpha must be positive, got {self.alpha}")
        if not self.beta > 0.0:
            raise FracDomainError(f"beta must be positive, got {self.beta}")


def _series_float(alpha: float, beta: float, z: float) -> float:
    x_peak = abs(z) ** (1.0 / alpha)
    terms = []
    running = 0.0
    term = rgamma(beta)
    zk = 1.0
    for k in range(1, 200000):
        terms.append(term)
        running += term
        if math.isinf(zk) or math.isinf(running):
            return running
        zk *= z
        term = zk * rgamma(alpha * k + beta)
        if abs(term) < 1e-18 * max(1.0, abs(running)) and k * alpha > x_peak:
            break
    terms.append(term)
    return math.fsum(terms)


def _series_mp(alpha: float, beta: float, z: float, x_peak: float) -> float:
    dps = 30 + int(0.45 * x_peak)
    if dps > 3000:
        raise AccuracyLossError(
            f"series needs ~{dps} digits for alpha={alpha}, z={z}",
            achieved=float("nan"),
        )
    with mpmath.workdps(dps):
        za = mpmath.mpf(z)
        # the Gamma argument must be formed in working precision: a float
        # alpha*k+beta near the series peak wrecks all trailing digits
        am = mpmath.mpf(alpha)
        bm = mpmath.mpf(beta)
        s = mpmath.mpf(0)
        term = 1 / mpmath.gamma(bm)
        k = 0
        while True:
            s += term
            k += 1
            term = za**k / mpmath.gamma(am * k + bm)
            if abs(term) < mpmath.mpf(10) ** (-dps) and k * alpha > x_peak:
                break
            if k > 100000:
                raise AccuracyLossError(
                    "series did not converge", achieved=float(abs(term))
                )
        return float(s)


def _asymptotic_tail(alpha: float, beta: float, z: float) -> float | None:
    """Power tail -sum_{k>=1} z^(-k)/Gamma(beta - alpha k), or None.

    The expansion is asymptotic, not convergent: it is accepted only when
    some term falls below the absolute tolerance before the terms turn
    around and grow (optimal truncation reached the target).
    """
    total = 0.0
    smallest = math.inf
    zk = 1.0
    for k in range(1, 80):
        zk *= z
        arg = beta - alpha * k
        if arg <= 0.5 and abs(arg - round(arg)) < 1e-9:
            # Gamma pole (possibly missed by rounding in beta - alpha*k):
            # the term is zero and carries no truncation information
            continue
        term = -rgamma(arg) / zk
        total += term
        mag = abs(term)
        if mag == 0.0:
            continue
        if mag < _ABS_TOL * max(1.0, abs(total)):
            return total
        if mag > 1e4 * smallest:
            return None
        smallest = min(smallest, mag)
    return None


def _asymptotic_exp(alpha: float, beta: float, z: float) -> float:
    """Saddle/pole exponential contribution for negative z, 1 < alpha < 2."""
    r = abs(z) ** (1.0 / alpha)
    theta = math.pi / alpha
    amp = (2.0 / alpha) * r ** (1.0 - beta) * math.exp(r * math.cos(theta))
    return amp * math.cos(r * math.sin(theta) + (1.0 - beta) * theta)


@lru_cache(maxsize=65536)
def _ml(alpha: float, beta: float, z: float) -> float:
    if z == 0.0:
        return float(rgamma(beta))
    x_peak = abs(z) ** (1.0 / alpha)
    if z > 0.0:
        # all series terms are positive: no cancellation at any magnitude,
        # so the plain float series holds until exp(x_peak) overflows
        if x_peak > 700.0:
            return math.inf
        return _series_float(alpha, beta, z)
    # negative z, small argument: always the series, in plain floats while
    # the alternating cancellation is harmless and in extended precision
    # otherwise
    if -z <= SERIES_SWITCH:
        if x_peak <= _FLOAT_SERIES_PEAK:
            return _series_float(alpha, beta, z)
        return _series_mp(alpha, beta, z, x_peak)
    # negative z, large argument: plain series while cancellation is
    # harmless, then the asymptotic expansion, with the slow
    # arbitrary-precision series as the catch-all for the intermediate band
    if x_peak <= _FLOAT_SERIES_PEAK:
        return _series_float(alpha, beta, z)
    if alpha < 2.0:
        tail = _asymptotic_tail(alpha, beta, z)
        if tail is not None:
            res = tail
            if alpha > 1.0:
                res += _asymptotic_exp(alpha, beta, z)
            return res
    return _series_mp(alpha, beta, z, x_peak)


def ml(params: MLParams, z: float) -> float:
    """E_{alpha,beta}(z) for real z; absolute accuracy ~1e-10 on the tested
    domain (|z| <= 50, alpha in [0.3, 3])."""
    return _ml(params.alpha, params.beta, float(z))


# ---------------------------------------------------------------------------
# decomposition pair, 1 < alpha < 2

def _check_decomp_domain(alpha: float, k: int) -> None:
    if not 1.0 < alpha < 2.0:
        raise FracDomainError(f"decomposition needs alpha in (1,2), got {alpha}")
    if k not in (-1, 0, 1):
        raise FracDomainError(f"index k must be -1, 0 or 1, got {k}")


def ml_decomp_g(alpha: float, k: int, t: float) -> float:
    """Damped-oscillation part (2/alpha) e^{t cos(pi/a)} cos[t sin(pi/a) - pi k/a]."""
    _check_decomp_domain(alpha, k)
    if t < 0.0:
        raise FracDomainError("t must be >= 0")
    th = math.pi / alpha
    return (2.0 / alpha) * math.exp(t * math.cos(th)) * math.cos(
        t * math.sin(th) - k * th
    )


def _f_integrand(u: np.ndarray, alpha: float, k: int, t: float) -> np.ndarray:
    # cut integral over r in (0,inf), substituted r = e^u
    ea = np.exp(alpha * u)
    denom = ea * ea + 2.0 * math.cos(math.pi * alpha) * ea + 1.0
    return (
        ((-1.0) ** k / math.pi)
        * np.exp(-t * np.exp(u) + (alpha - k) * u)
        * math.sin(math.pi * alpha)
        / denom
    )


def ml_decomp_f(alpha: float, k: int, t: float) -> float:
    """Completely monotone part of the split: the branch-cut integral
    ((-1)^k/pi) int_0^inf e^{-rt} r^{alpha-1-k} sin(pi alpha)
    / (r^{2 alpha} + 2 r^alpha cos(pi alpha) + 1) dr,
    by Gauss-Legendre panels after r = e^u.  Absolute error <= ~1e-9.
    """
    _check_decomp_domain(alpha, k)
    if t <= 0.0:
        raise FracDomainError("t must be > 0")
    return _decomp_f_cached(alpha, k, t)


@lru_cache(maxsize=16384)
def _decomp_f_cached(alpha: float, k: int, t: float) -> float:
    # locate the peak, then truncate where the integrand drops below 1e-16 of it
    u = np.linspace(-80.0, max(10.0, -math.log(t) + 8.0), 3000)
    w = np.abs(_f_integrand(u, alpha, k, t))
    peak = w.max()
    keep = np.nonzero(w >= 1e-16 * peak)[0]
    lo = u[max(keep[0] - 1, 0)]
    hi = u[min(keep[-1] + 1, len(u) - 1)]

    nodes, weights = np.polynomial.legendre.leggauss(20)
    prev = None
    panels = 8
    while panels <= 2048:
        edges = np.linspace(lo, hi, panels + 1)
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * (edges[1] - edges[0])
        pts = (mid[:, None] + half * nodes[None, :]).ravel()
        vals = _f_integrand(pts, alpha, k, t).reshape(panels, -1)
        est = float(half * np.sum(vals @ weights))
        if prev is not None and abs(est - prev) < 1e-9 * max(1.0, abs(est)):
            return est
        prev = est
        panels *= 2
    raise AccuracyLossError(
        "cut-integral quadrature did not settle", achieved=abs(est - prev)
    )
