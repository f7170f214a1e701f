"""Discrete fractional-calculus operators on uniformly sampled data.

Two discretizations are used throughout:

* a product-trapezoidal rule for the fractional integral
  (J^eps f)(t) = 1/Gamma(eps) * int_a^t (t-tau)^(eps-1) f(tau) dtau,
  exact for piecewise-linear f and second-order accurate otherwise;
* the causal L1 scheme (piecewise-linear history interpolation) for
  in-simulation evaluation of left Caputo derivatives, of order 2-alpha.

Left/right Caputo derivatives of order alpha, with m-1 < alpha < m, are
computed as J^(m-alpha) applied to samples of the m-th integer derivative;
Riemann-Liouville derivatives apply the integer derivative after the
fractional integral instead.  Where the continuous result is singular at an
interval endpoint, the corresponding slot carries NaN.
"""

from __future__ import annotations

import numpy as np
from scipy.special import gamma

from .errors import (
    AccuracyLossError,
    FracDomainError,
    SingularPointError,
    UnsupportedOrderError,
)
from .series import FracOrder, Grid, SampleSeries

__all__ = [
    "fractional_integral",
    "fractional_integral_values",
    "fractional_integral_last",
    "caputo_left",
    "caputo_left_auto",
    "caputo_left_history",
    "caputo_right",
    "riemann_liouville_left",
    "riemann_liouville_right",
    "commutation_defect",
    "prop1_shift",
    "l1_caputo_last",
    "l1_caputo_series",
    "derivative_samples",
]


# ---------------------------------------------------------------------------
# fractional integral (product trapezoidal)

def fractional_integral_values(values: np.ndarray, eps: float, h: float) -> np.ndarray:
    """Product-trapezoidal J^eps on raw samples; returns one value per node."""
    if not 0.0 < eps <= 1.0:
        raise FracDomainError(f"eps must be in (0, 1], got {eps}")
    f = np.asarray(values, dtype=float)
    n = len(f) - 1
    out = np.zeros(n + 1)
    if n == 0:
        return out
    k = np.arange(0, n + 1, dtype=float)
    kp = k ** (eps + 1.0)
    # interior convolution weights c_k = (k+1)^(eps+1) - 2k^(eps+1) + (k-1)^(eps+1)
    c = np.zeros(n + 1)
    if n >= 2:
        c[1:n] = kp[2 : n + 1] - 2.0 * kp[1:n] + kp[0 : n - 1]
    if n >= 1:
        c[n] = (n + 1.0) ** (eps + 1.0) - 2.0 * kp[n] + kp[n - 1]
    conv = np.convolve(f, c)[: n + 1]
    ns = np.arange(1, n + 1, dtype=float)
    a0 = (ns - 1.0) ** (eps + 1.0) - (ns - 1.0 - eps) * ns**eps
    coef = h**eps / gamma(eps + 2.0)
    out[1:] = coef * (a0 * f[0] + (conv[1:] - c[1 : n + 1] * f[0]) + f[1:])
    return out


def fractional_integral_last(values: np.ndarray, eps: float, h: float) -> float:
    """Product-trapezoidal J^eps at the final node only (O(n) cost)."""
    if not 0.0 < eps <= 1.0:
        raise FracDomainError(f"eps must be in (0, 1], got {eps}")
    f = np.asarray(values, dtype=float)
    n = len(f) - 1
    if n == 0:
        return 0.0
    k = np.arange(0, n + 1, dtype=float)
    kp = k ** (eps + 1.0)
    a0 = (n - 1.0) ** (eps + 1.0) - (n - 1.0 - eps) * n**eps
    total = a0 * f[0] + f[n]
    if n >= 2:
        c = kp[2 : n + 1] - 2.0 * kp[1:n] + kp[0 : n - 1]
        total += np.dot(c, f[n - 1 : 0 : -1])
    return float(h**eps / gamma(eps + 2.0) * total)


def fractional_integral(f: SampleSeries, eps: float) -> SampleSeries:
    """Fractional integral J^eps of a sampled function; zero at the left end."""
    return SampleSeries(f.grid, fractional_integral_values(f.values, eps, f.grid.h))


# ---------------------------------------------------------------------------
# Caputo derivatives from samples of the m-th integer derivative

def caputo_left(f_m: SampleSeries, order: FracOrder) -> SampleSeries:
    """Left Caputo derivative from samples of f^(m): J^(m-alpha) f^(m)."""
    order.require_fractional()
    return fractional_integral(f_m, order.epsilon)


def caputo_right(f_m: SampleSeries, order: FracOrder) -> SampleSeries:
    """Right Caputo derivative from samples of f^(m), by reflection.

    Uses (-1)^m * (J^eps [f^(m) o reflect]) evaluated at the reflected node,
    which mirrors the left-sided quadrature onto [t, b].
    """
    order.require_fractional()
    rev = f_m.values[::-1]
    j = fractional_integral_values(rev, order.epsilon, f_m.grid.h)
    sign = -1.0 if order.m % 2 else 1.0
    return SampleSeries(f_m.grid, sign * j[::-1])


def derivative_samples(f: SampleSeries, m: int) -> SampleSeries:
    """m-fold integer derivative by repeated central differences.

    Convenience only: each application loses an order of accuracy at the
    ends, so prefer analytic derivative samples where available.
    """
    vals = f.values.copy()
    for _ in range(m):
        vals = np.gradient(vals, f.grid.h)
    return SampleSeries(f.grid, vals)


def caputo_left_auto(f: SampleSeries, order: FracOrder) -> SampleSeries:
    """Left Caputo of raw samples, differentiating internally (see above)."""
    order.require_fractional()
    return caputo_left(derivative_samples(f, order.m), order)


# ---------------------------------------------------------------------------
# causal L1 evaluation on history prefixes

def _l1_first_weights(n: int, alpha: float) -> np.ndarray:
    k = np.arange(0, n + 1, dtype=float)
    return k[1:] ** (1.0 - alpha) - k[:-1] ** (1.0 - alpha)


def _second_differences(q: np.ndarray, h: float) -> np.ndarray:
    """Per-panel second differences; panel 0 reuses panel 1 (one-sided)."""
    n = len(q) - 1
    d2 = np.zeros(n)
    if n >= 2:
        d2[1:] = (q[2:] - 2.0 * q[1:-1] + q[:-2]) / h**2
        d2[0] = d2[1]
    return d2


def l1_caputo_last(q: np.ndarray, h: float, alpha: float) -> float:
    """L1-scheme left Caputo derivative at the final node of the prefix ``q``.

    For 0 < alpha < 1 the scheme acts on first differences; for
    1 < alpha < 2 on second differences (panel 0 one-sided).  Strictly
    causal: only the supplied samples enter.
    """
    n = len(q) - 1
    if n < 1:
        return 0.0
    if 0.0 < alpha < 1.0:
        w = _l1_first_weights(n, alpha)[::-1]
        return float(np.dot(w, np.diff(q)) * h ** (-alpha) / gamma(2.0 - alpha))
    if 1.0 < alpha < 2.0:
        d2 = _second_differences(np.asarray(q, dtype=float), h)
        k = np.arange(0, n + 1, dtype=float)
        w = (k[1:] ** (2.0 - alpha) - k[:-1] ** (2.0 - alpha))[::-1]
        return float(np.dot(w, d2) * h ** (2.0 - alpha) / gamma(3.0 - alpha))
    raise UnsupportedOrderError(
        f"history scheme supports orders in (0,1) or (1,2), got {alpha}"
    )


def l1_caputo_series(q: np.ndarray, h: float, alpha: float) -> np.ndarray:
    """L1-scheme left Caputo derivative at every node of ``q`` at once."""
    q = np.asarray(q, dtype=float)
    n = len(q) - 1
    out = np.zeros(n + 1)
    if n < 1:
        return out
    if 0.0 < alpha < 1.0:
        diffs = np.diff(q)
        c = np.concatenate(([0.0], _l1_first_weights(n, alpha)))
        conv = np.convolve(diffs, c)[: n + 1]
        out[1:] = conv[1:] * h ** (-alpha) / gamma(2.0 - alpha)
        return out
    if 1.0 < alpha < 2.0:
        d2 = _second_differences(q, h)
        k = np.arange(0, n + 1, dtype=float)
        w = np.concatenate(([0.0], k[1:] ** (2.0 - alpha) - k[:-1] ** (2.0 - alpha)))
        conv = np.convolve(d2, w)[: n + 1]
        out[1:] = conv[1:] * h ** (2.0 - alpha) / gamma(3.0 - alpha)
        return out
    raise UnsupportedOrderError(
        f"history scheme supports orders in (0,1) or (1,2), got {alpha}"
    )


def caputo_left_history(q_history: SampleSeries, order: FracOrder) -> float:
    """Causal left Caputo derivative at the last node of a history prefix."""
    order.require_fractional()
    if len(q_history) < 2:
        raise FracDomainError("history needs at least 2 samples")
    if order.alpha >= 2.0:
        raise UnsupportedOrderError(
            f"order {order.alpha} >= 2: reformulate via state augmentation"
        )
    return l1_caputo_last(q_history.values, q_history.grid.h, order.alpha)


# ---------------------------------------------------------------------------
# Riemann-Liouville derivatives

def riemann_liouville_left(f: SampleSeries, order: FracOrder) -> SampleSeries:
    """Left Riemann-Liouville derivative D^m J^(m-alpha) f.

    The outer integer derivative is taken by central finite differences
    (one-sided at the ends).  The left endpoint slot is NaN: the continuous
    value behaves like (t-a)^(-alpha) f(a) there.
    """
    order.require_fractional()
    vals = fractional_integral_values(f.values, order.epsilon, f.grid.h)
    for _ in range(order.m):
        vals = np.gradient(vals, f.grid.h)
    vals = vals.copy()
    vals[0] = np.nan
    return SampleSeries(f.grid, vals)


def riemann_liouville_right(f: SampleSeries, order: FracOrder) -> SampleSeries:
    """Right Riemann-Liouville derivative, by reflection of the left one."""
    rev = SampleSeries(f.grid, f.values[::-1])
    left = riemann_liouville_left(rev, order)
    return SampleSeries(f.grid, left.values[::-1])


# ---------------------------------------------------------------------------
# commutation defect and the derivative-shift identity

def commutation_defect(
    f: SampleSeries, eps: float, f_at_a: float, verify: bool = True
) -> SampleSeries:
    """Defect D^1 J^eps f - J^eps D^1 f = f(a) t^(eps-1) / Gamma(eps).

    Returns the analytic defect on the grid (NaN at the singular left end).
    With ``verify`` the finite-difference realization of the left-hand side
    is checked against it on interior nodes away from the singularity.
    """
    if not 0.0 < eps < 1.0:
        raise FracDomainError(f"eps must be in (0, 1), got {eps}")
    t = f.grid.nodes() - f.grid.t_start
    defect = np.empty_like(t)
    defect[0] = np.nan
    defect[1:] = f_at_a * t[1:] ** (eps - 1.0) / gamma(eps)
    if verify:
        h = f.grid.h
        lhs = np.gradient(fractional_integral_values(f.values, eps, h), h)
        rhs = fractional_integral_values(np.gradient(f.values, h), eps, h)
        numeric = lhs - rhs
        mask = t >= max(10.0 * h, 0.02 * (f.grid.t_end - f.grid.t_start))
        mask[0] = mask[-1] = False
        err = np.max(np.abs(numeric[mask] - defect[mask])) if mask.any() else 0.0
        tol = 0.05 * max(1.0, np.max(np.abs(defect[mask])) if mask.any() else 1.0)
        tol += 50.0 * h
        if err > tol:
            raise AccuracyLossError(
                f"commutation defect mismatch {err:.3e} > {tol:.3e}", achieved=err
            )
    return SampleSeries(f.grid, defect)


def prop1_shift(order: FracOrder, f_m_at_a: float, t: float) -> float:
    """Correction term t^(m-alpha-1)/Gamma(m-alpha) * f^(m)(a).

    Satisfies d/dt D^alpha f = D^(alpha+1) f + shift, with t measured from
    the lower terminal a.
    """
    order.require_fractional()
    expo = order.m - order.alpha - 1.0
    if f_m_at_a == 0.0:
        return 0.0
    if t == 0.0:
        if expo < 0.0:
            raise SingularPointError("shift term diverges at t = a")
        return 0.0
    if t < 0.0:
        raise FracDomainError("t must be >= a")
    return t**expo / gamma(order.m - order.alpha) * f_m_at_a
