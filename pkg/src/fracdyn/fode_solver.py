"""Fixed-step causal integrators for dynamics with fractional history terms.

The right-hand sides built in ``constrained_dynamics`` need the Caputo
derivative of the trajectory-so-far at every step; ``History`` keeps the
accumulated samples and answers those queries with the L1 scheme.  All
schemes are explicit with the history term lagged at most one step, so the
per-step cost grows linearly with the step index (O(N^2) per run).

Singular power-law correction terms (the derivative-shift startup term)
are not sampled; right-hand sides hand over their exact per-step integral
and the steppers add it to the velocity update directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import gamma

from .errors import DivergenceError, FracDomainError
from .frac_ops import l1_caputo_last
from .series import Grid, SampleSeries

__all__ = [
    "IntegratorConfig",
    "SimulationResult",
    "History",
    "integrate_second_order",
    "integrate_hamilton",
    "integrate_fractional_abm",
    "convergence_study",
]

_SCHEMES = ("semi-implicit-euler", "velocity-verlet", "abm-fractional")


@dataclass(frozen=True)
class IntegratorConfig:
    h: float
    t_end: float
    scheme: str = "semi-implicit-euler"
    history_window: Optional[int] = None
    divergence_threshold: float = 1e12

    def __post_init__(self) -> None:
        if not self.h > 0.0:
            raise FracDomainError(f"step size must be positive, got {self.h}")
        if not self.t_end > 0.0:
            raise FracDomainError(f"horizon must be positive, got {self.t_end}")
        if self.scheme not in _SCHEMES:
            raise FracDomainError(f"unknown scheme {self.scheme!r}")
        if self.history_window is not None and self.history_window < 10:
            raise FracDomainError("history window must be at least 10 steps")

    def grid(self) -> Grid:
        n = max(1, round(self.t_end / self.h))
        return Grid(0.0, self.t_end, n)


@dataclass(frozen=True)
class SimulationResult:
    grid: Grid
    q: np.ndarray
    qdot: np.ndarray
    multiplier: np.ndarray
    residual: Optional[np.ndarray]
    diagnostics: dict = field(default_factory=dict)

    def q_series(self, k: int = 0) -> SampleSeries:
        return SampleSeries(self.grid, self.q[:, k])


class History:
    """Accumulated (q, qdot) samples plus causal Caputo queries.

    With a truncation window only the most recent panels enter the L1 sum;
    that is an approximation and stays off in all acceptance runs.
    """

    def __init__(self, grid: Grid, n: int, window: Optional[int] = None) -> None:
        self.h = grid.h
        self.n = n
        self.window = window
        self._q = np.empty((grid.n_nodes, n))
        self._qd = np.empty((grid.n_nodes, n))
        self.count = 0

    def append(self, q: np.ndarray, qdot: np.ndarray) -> None:
        self._q[self.count] = q
        self._qd[self.count] = qdot
        self.count += 1

    @property
    def q_view(self) -> np.ndarray:
        return self._q[: self.count]

    @property
    def qdot_view(self) -> np.ndarray:
        return self._qd[: self.count]

    @property
    def last_q(self) -> np.ndarray:
        return self._q[self.count - 1]

    @property
    def last_qdot(self) -> np.ndarray:
        return self._qd[self.count - 1]

    def _slice(self, arr: np.ndarray) -> np.ndarray:
        if self.window is not None and self.count - 1 > self.window:
            return arr[self.count - 1 - self.window : self.count]
        return arr[: self.count]

    def caputo_q(self, alpha: float) -> np.ndarray:
        cols = self._slice(self._q)
        return np.array(
            [l1_caputo_last(cols[:, k], self.h, alpha) for k in range(self.n)]
        )

    def caputo_qdot(self, alpha: float) -> np.ndarray:
        cols = self._slice(self._qd)
        return np.array(
            [l1_caputo_last(cols[:, k], self.h, alpha) for k in range(self.n)]
        )


def _check_state(q: np.ndarray, qdot: np.ndarray, thr: float, partial) -> None:
    if not (np.all(np.isfinite(q)) and np.all(np.isfinite(qdot))):
        raise DivergenceError("state became non-finite", partial=partial)
    if np.max(np.abs(q)) > thr or np.max(np.abs(qdot)) > thr:
        raise DivergenceError("state exceeded the divergence threshold", partial=partial)


def _partial(grid, q, qd, lam, res, upto) -> SimulationResult:
    return SimulationResult(
        grid, q[:upto], qd[:upto], lam[:upto], res[:upto], {"truncated_at": upto}
    )


def integrate_second_order(rhs, init, cfg: IntegratorConfig) -> SimulationResult:
    """Advance qddot = rhs(t, q, qdot, history) with the configured scheme.

    ``init`` is the pair (q0, qdot0).  The rhs object is consulted once per
    node, in order, so it may keep causal caches of its own.
    """
    grid = cfg.grid()
    h = grid.h
    nn = grid.n_nodes
    n = len(np.asarray(init[0], dtype=float))
    q = np.zeros((nn, n))
    qd = np.zeros((nn, n))
    lam = np.full(nn, np.nan)
    res = np.full(nn, np.nan)
    q[0] = np.asarray(init[0], dtype=float)
    qd[0] = np.asarray(init[1], dtype=float)
    hist = History(grid, n, cfg.history_window)
    hist.append(q[0], qd[0])
    t = grid.nodes()
    max_inc = 0.0

    def record(i: int) -> None:
        lam[i] = getattr(rhs, "last_multiplier", np.nan)
        r = rhs.residual_last(hist) if hasattr(rhs, "residual_last") else np.nan
        res[i] = r

    if cfg.scheme == "semi-implicit-euler":
        for i in range(nn - 1):
            acc = rhs(t[i], q[i], qd[i], hist)
            record(i)
            qd[i + 1] = qd[i] + h * acc
            inc = rhs.singular_velocity_increment(t[i], t[i + 1]) if hasattr(
                rhs, "singular_velocity_increment"
            ) else None
            if inc is not None:
                qd[i + 1] += inc
                max_inc = max(max_inc, float(np.max(np.abs(inc))))
            q[i + 1] = q[i] + h * qd[i + 1]
            _check_state(
                q[i + 1], qd[i + 1], cfg.divergence_threshold,
                _partial(grid, q, qd, lam, res, i + 1),
            )
            hist.append(q[i + 1], qd[i + 1])
        rhs(t[-1], q[-1], qd[-1], hist)
        record(nn - 1)
    elif cfg.scheme == "velocity-verlet":
        acc = rhs(t[0], q[0], qd[0], hist)
        record(0)
        for i in range(nn - 1):
            q[i + 1] = q[i] + h * qd[i] + 0.5 * h * h * acc
            # history still ends at node i: one-step-lagged fractional terms
            acc_new = rhs(t[i + 1], q[i + 1], qd[i] + h * acc, hist)
            qd[i + 1] = qd[i] + 0.5 * h * (acc + acc_new)
            inc = rhs.singular_velocity_increment(t[i], t[i + 1]) if hasattr(
                rhs, "singular_velocity_increment"
            ) else None
            if inc is not None:
                qd[i + 1] += inc
                max_inc = max(max_inc, float(np.max(np.abs(inc))))
            _check_state(
                q[i + 1], qd[i + 1], cfg.divergence_threshold,
                _partial(grid, q, qd, lam, res, i + 1),
            )
            hist.append(q[i + 1], qd[i + 1])
            record(i + 1)
            acc = acc_new
    else:
        raise FracDomainError(
            "use integrate_fractional_abm for the abm-fractional scheme"
        )

    diags = {
        "scheme": cfg.scheme,
        "h": h,
        "history_ops": nn * (nn - 1) // 2,
        "max_singular_increment": max_inc,
    }
    residual = None if np.all(np.isnan(res)) else res
    return SimulationResult(grid, q, qd, lam, residual, diags)


def integrate_hamilton(rhs, init, cfg: IntegratorConfig) -> SimulationResult:
    """Advance the Hamilton-form pair (q, p) by explicit Euler steps.

    The result stores p in the ``qdot`` slot; ``multiplier`` carries mu(t)
    and ``residual`` the constraint value A . qdot.
    """
    grid = cfg.grid()
    h = grid.h
    nn = grid.n_nodes
    n = len(np.asarray(init[0], dtype=float))
    q = np.zeros((nn, n))
    p = np.zeros((nn, n))
    mu = np.full(nn, np.nan)
    res = np.full(nn, np.nan)
    q[0] = np.asarray(init[0], dtype=float)
    p[0] = np.asarray(init[1], dtype=float)
    hist = History(grid, n, cfg.history_window)
    hist.append(q[0], p[0])
    t = grid.nodes()
    for i in range(nn - 1):
        qdot, pdot = rhs(t[i], q[i], p[i], hist)
        mu[i] = rhs.last_multiplier
        res[i] = rhs.last_residual
        q[i + 1] = q[i] + h * qdot
        p[i + 1] = p[i] + h * pdot
        _check_state(
            q[i + 1], p[i + 1], cfg.divergence_threshold,
            _partial(grid, q, p, mu, res, i + 1),
        )
        hist.append(q[i + 1], p[i + 1])
    rhs(t[-1], q[-1], p[-1], hist)
    mu[-1] = rhs.last_multiplier
    res[-1] = rhs.last_residual
    return SimulationResult(grid, q, p, mu, res, {"scheme": "hamilton-euler", "h": h})


def integrate_fractional_abm(
    order, rhs: Callable, init: Sequence[float], cfg: IntegratorConfig
) -> SimulationResult:
    """Predictor-corrector (fractional Adams) for D^beta x = rhs(t, x).

    ``init`` supplies x(0), ..., x^(m-1)(0).  Supported orders: 0 < beta < 3.
    """
    beta = float(getattr(order, "alpha", order))
    if not 0.0 < beta < 3.0:
        raise FracDomainError(f"supported orders are (0, 3), got {beta}")
    m = int(math.floor(beta)) + 1 if beta != int(beta) else int(beta)
    if len(init) != max(m, 1):
        raise FracDomainError(f"need {max(m, 1)} initial values, got {len(init)}")
    grid = cfg.grid()
    h = grid.h
    nn = grid.n_nodes
    t = grid.nodes()
    x = np.zeros(nn)
    fv = np.zeros(nn)
    x[0] = init[0]
    fv[0] = rhs(t[0], x[0])

    taylor = np.zeros(nn)
    for j, v in enumerate(init):
        taylor += v * t**j / math.factorial(j)

    k = np.arange(0, nn, dtype=float)
    bw = (k + 1.0) ** beta - k**beta
    kp = k ** (beta + 1.0)
    cw = np.zeros(nn)
    if nn >= 3:
        cw[1 : nn - 1] = kp[2:nn] - 2.0 * kp[1 : nn - 1] + kp[0 : nn - 2]
    c_pred = h**beta / gamma(beta + 1.0)
    c_corr = h**beta / gamma(beta + 2.0)

    for i in range(1, nn):
        pred = taylor[i] + c_pred * np.dot(bw[i - 1 :: -1][:i], fv[:i])
        a0 = (i - 1.0) ** (beta + 1.0) - (i - 1.0 - beta) * i**beta
        hist_sum = a0 * fv[0]
        if i >= 2:
            hist_sum += np.dot(cw[1:i], fv[i - 1 : 0 : -1])
        x[i] = taylor[i] + c_corr * (hist_sum + rhs(t[i], pred))
        if not np.isfinite(x[i]) or abs(x[i]) > cfg.divergence_threshold:
            raise DivergenceError(
                "fractional Adams run diverged",
                partial=_partial(
                    grid, x[:, None], np.zeros((nn, 1)), np.full(nn, np.nan),
                    np.full(nn, np.nan), i,
                ),
            )
        fv[i] = rhs(t[i], x[i])

    qdot = np.gradient(x, h)
    return SimulationResult(
        grid,
        x[:, None],
        qdot[:, None],
        np.full(nn, np.nan),
        None,
        {"scheme": "abm-fractional", "h": h},
    )


def convergence_study(
    run: Callable[[float], SampleSeries],
    steps: Sequence[float],
    reference: Optional[Callable[[np.ndarray], np.ndarray]] = None,
):
    """Error ladder: rows of (h, sup error, empirical order, monotone flag).

    ``run(h)`` produces the trajectory at step h.  Without an analytic
    ``reference`` the finest requested grid, halved once more, serves as the
    self-convergence baseline (step ratios must then be powers of two).
    """
    steps = sorted(steps, reverse=True)
    if len(steps) < 3:
        raise FracDomainError("ladder must have at least 3 rungs")
    if reference is None:
        ref_series = run(steps[-1] / 2.0)
        ref_t = ref_series.grid.nodes()

        def reference(ts: np.ndarray) -> np.ndarray:
            idx = np.rint((ts - ref_t[0]) / ref_series.grid.h).astype(int)
            if np.max(np.abs(ref_t[idx] - ts)) > 1e-9:
                raise FracDomainError("ladder grids do not nest in the reference")
            return ref_series.values[idx]

    rows = []
    prev_err = None
    monotone = True
    for hstep in steps:
        series = run(hstep)
        err = float(np.max(np.abs(series.values - reference(series.grid.nodes()))))
        order = float("nan")
        if prev_err is not None and err > 0.0 and prev_err > 0.0:
            order = math.log(prev_err / err) / math.log(2.0)
            if err >= prev_err:
                monotone = False
        rows.append({"h": hstep, "error": err, "order": order, "monotone": monotone})
        prev_err = err
    return rows
