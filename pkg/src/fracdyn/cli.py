"""Command-line front end: run named scenarios, verify, convergence tables.

Configs are JSON.  Example (linear constraint in n dimensions):

    {
      "scenario": "linear-nd",
      "grid": {"h": 0.0025, "t_end": 2.0},
      "scheme": "semi-implicit-euler",
      "parameters": {"alpha": 0.5, "a": [1.0, 2.0], "b": [0.5, -0.3],
                     "potential": {"kind": "quadratic", "k": 1.0}},
      "initial": {"q": [1.0, 0.5], "qdot": [2.0, -1.0]},
      "output": {"prefix": "lin2"}
    }

Data CSVs are deterministic (no timestamps); the JSON summary keeps wall
time in its own field so everything else can be hashed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .constrained_dynamics import (
    ConstraintSpec,
    HamiltonSpec,
    SystemSpec,
    hamilton_rhs,
    rhs_linear,
    rhs_nonlinear_frac_oscillator,
)
from .errors import AccuracyLossError, ConfigError, DivergenceError
from .fode_solver import (
    IntegratorConfig,
    SimulationResult,
    convergence_study,
    integrate_hamilton,
    integrate_second_order,
)
from .oscillator_exact import OscillatorSpec, exact_solution
from .series import FracOrder, SampleSeries

SCENARIOS = (
    "oscillator-1d",
    "linear-nd",
    "case1-2d",
    "case1-2d-b2zero",
    "case2-2d",
    "nonlinear-fracosc",
    "hamilton-linear",
    "custom",
)

_SCHEMES = ("semi-implicit-euler", "velocity-verlet")


# ---------------------------------------------------------------------------
# configuration

def _require(d: dict, key: str, kind, path: str):
    if key not in d:
        raise ConfigError(f"{path}.{key}" if path else key, "missing")
    v = d[key]
    if kind is float:
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise ConfigError(f"{path}.{key}" if path else key, "must be a number")
        return float(v)
    if kind is list:
        if not isinstance(v, list) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in v
        ):
            raise ConfigError(f"{path}.{key}" if path else key, "must be a number list")
        return [float(x) for x in v]
    if not isinstance(v, kind):
        raise ConfigError(f"{path}.{key}" if path else key, f"must be {kind.__name__}")
    return v


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    h: float
    t_end: float
    scheme: str = "semi-implicit-euler"
    parameters: dict = field(default_factory=dict)
    q: tuple = ()
    qdot: tuple = ()
    prefix: str = "run"
    seed: int = 0

    @classmethod
    def from_dict(cls, raw: dict) -> "ScenarioConfig":
        if not isinstance(raw, dict):
            raise ConfigError("", "config root must be an object")
        scenario = _require(raw, "scenario", str, "")
        if scenario not in SCENARIOS:
            raise ConfigError("scenario", f"unknown id {scenario!r}")
        grid = _require(raw, "grid", dict, "")
        h = _require(grid, "h", float, "grid")
        t_end = _require(grid, "t_end", float, "grid")
        if h <= 0.0:
            raise ConfigError("grid.h", "must be positive")
        if t_end <= 0.0:
            raise ConfigError("grid.t_end", "must be positive")
        scheme = raw.get("scheme", "semi-implicit-euler")
        if scheme not in _SCHEMES:
            raise ConfigError("scheme", f"unknown scheme {scheme!r}")
        params = raw.get("parameters", {})
        if not isinstance(params, dict):
            raise ConfigError("parameters", "must be an object")
        init = raw.get("initial", {})
        if not isinstance(init, dict):
            raise ConfigError("initial", "must be an object")
        q = tuple(_require(init, "q", list, "initial")) if "q" in init else ()
        qd_key = "p" if scenario == "hamilton-linear" else "qdot"
        qdot = (
            tuple(_require(init, qd_key, list, "initial")) if qd_key in init else ()
        )
        out = raw.get("output", {})
        if not isinstance(out, dict):
            raise ConfigError("output", "must be an object")
        prefix = out.get("prefix", "run")
        if not isinstance(prefix, str) or not prefix:
            raise ConfigError("output.prefix", "must be a non-empty string")
        seed = raw.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ConfigError("seed", "must be an integer")
        return cls(scenario, h, t_end, scheme, dict(params), q, qdot, prefix, seed)

    def to_dict(self) -> dict:
        qd_key = "p" if self.scenario == "hamilton-linear" else "qdot"
        return {
            "scenario": self.scenario,
            "grid": {"h": self.h, "t_end": self.t_end},
            "scheme": self.scheme,
            "parameters": dict(self.parameters),
            "initial": {"q": list(self.q), qd_key: list(self.qdot)},
            "output": {"prefix": self.prefix},
            "seed": self.seed,
        }

    def replace(self, **kw) -> "ScenarioConfig":
        d = self.__dict__.copy()
        d.update(kw)
        return ScenarioConfig(**d)

    def __eq__(self, other) -> bool:
        return isinstance(other, ScenarioConfig) and self.to_dict() == other.to_dict()


def _param(cfg: ScenarioConfig, key: str, kind=float):
    return _require(cfg.parameters, key, kind, "parameters")


def _potential(cfg: ScenarioConfig, n: int):
    sel = cfg.parameters.get("potential", {"kind": "zero"})
    if not isinstance(sel, dict) or "kind" not in sel:
        raise ConfigError("parameters.potential", "needs a 'kind' field")
    kind = sel["kind"]
    if kind == "zero":
        return (lambda q: 0.0), (lambda q: np.zeros(n))
    k = float(sel.get("k", 1.0))
    if kind == "quadratic":
        return (lambda q: 0.5 * k * float(q @ q)), (lambda q: k * np.asarray(q))
    if kind == "quadratic-q1":
        def grad(q):
            g = np.zeros(n)
            g[0] = k * q[0]
            return g

        return (lambda q: 0.5 * k * q[0] ** 2), grad
    raise ConfigError("parameters.potential.kind", f"unknown kind {kind!r}")


def _kfun(cfg: ScenarioConfig):
    sel = cfg.parameters.get("K", {"kind": "linear", "k": 1.0})
    if not isinstance(sel, dict) or "kind" not in sel:
        raise ConfigError("parameters.K", "needs a 'kind' field")
    k = float(sel.get("k", 1.0))
    if sel["kind"] == "linear":
        return lambda x: k * x
    if sel["kind"] == "cubic":
        return lambda x: k * x**3
    raise ConfigError("parameters.K.kind", f"unknown kind {sel['kind']!r}")


def _init_vectors(cfg: ScenarioConfig, n: int):
    q = cfg.q if cfg.q else (0.0,) * n
    qd = cfg.qdot if cfg.qdot else (0.0,) * n
    if len(q) != n:
        raise ConfigError("initial.q", f"needs length {n}")
    if len(qd) != n:
        raise ConfigError("initial.qdot", f"needs length {n}")
    return np.array(q), np.array(qd)


# ---------------------------------------------------------------------------
# scenario construction

@dataclass
class RunPlan:
    n: int
    execute: Callable[[IntegratorConfig], SimulationResult]
    oracle: Optional[Callable[[np.ndarray], np.ndarray]] = None  # q_1 reference


def _frac_order(cfg: ScenarioConfig, key: str = "alpha", lo=0.0, hi=2.0) -> FracOrder:
    alpha = _param(cfg, key)
    if not lo < alpha < hi or alpha == int(alpha):
        raise ConfigError(
            f"parameters.{key}", f"must be non-integer in ({lo}, {hi}), got {alpha}"
        )
    return FracOrder(alpha)


def _linear_plan(cfg: ScenarioConfig, a, b, order: FracOrder) -> RunPlan:
    n = len(a)
    u, grad = _potential(cfg, n)
    q0, qd0 = _init_vectors(cfg, n)
    sys = SystemSpec(
        n=n,
        potential=u,
        grad_potential=grad,
        constraint=ConstraintSpec.linear(a, b, order),
        q_init=q0,
        qdot_init=qd0,
    )

    def execute(icfg: IntegratorConfig) -> SimulationResult:
        rr = rhs_linear(sys)
        return integrate_second_order(rr, (sys.q_init, rr.qdot_start), icfg)

    return RunPlan(n=n, execute=execute)


def build_plan(cfg: ScenarioConfig) -> RunPlan:
    sc = cfg.scenario
    if sc == "oscillator-1d":
        alpha = _param(cfg, "alpha")
        if not 2.0 < alpha < 3.0:
            raise ConfigError("parameters.alpha", "oscillator-1d needs 2 < alpha < 3")
        omega2 = float(cfg.parameters.get("omega2", 1.0))
        if omega2 <= 0.0:
            raise ConfigError("parameters.omega2", "must be positive")
        plan = _linear_plan(cfg, [1.0], [omega2], FracOrder(alpha - 1.0))
        q0, qd0 = _init_vectors(cfg, 1)
        spec = OscillatorSpec.from_initial_data(
            alpha=alpha, omega2=omega2, q0=q0[0], qp0=qd0[0]
        )

        def oracle(grid):
            return exact_solution(spec, grid).values

        plan.oracle = oracle
        return plan
    if sc in ("linear-nd", "custom"):
        a = _param(cfg, "a", list)
        b = _param(cfg, "b", list)
        if len(a) != len(b) or not a:
            raise ConfigError("parameters.b", "a and b need equal nonzero length")
        return _linear_plan(cfg, a, b, _frac_order(cfg))
    if sc in ("case1-2d", "case1-2d-b2zero"):
        a2 = float(cfg.parameters.get("a2", 1.0))
        b1 = float(cfg.parameters.get("b1", 1.0))
        b2 = 0.0 if sc == "case1-2d-b2zero" else float(cfg.parameters.get("b2", 0.0))
        plan = _linear_plan(cfg, [0.0, a2], [b1, b2], _frac_order(cfg))
        sel = cfg.parameters.get("potential", {})
        if sc == "case1-2d-b2zero" and sel.get("kind") == "quadratic-q1":
            # the q1 motion decouples and is classical
            k = float(sel.get("k", 1.0))
            w = math.sqrt(k)
            q0, qd0 = _init_vectors(cfg, 2)

            def oracle(grid):
                t = grid.nodes()
                return q0[0] * np.cos(w * t) + qd0[0] / w * np.sin(w * t)

            plan.oracle = oracle
        return plan
    if sc == "case2-2d":
        c = float(cfg.parameters.get("c", 1.0))
        if c == 0.0:
            raise ConfigError("parameters.c", "must be nonzero")
        b2 = float(cfg.parameters.get("b2", 1.0))
        return _linear_plan(cfg, [c, c], [0.0, b2], _frac_order(cfg))
    if sc == "nonlinear-fracosc":
        g = _param(cfg, "g")
        if g == 0.0:
            raise ConfigError("parameters.g", "must be nonzero")
        order = _frac_order(cfg, lo=1.0, hi=2.0)
        form = cfg.parameters.get("form", "reduced")
        if form not in ("reduced", "pre"):
            raise ConfigError("parameters.form", f"unknown form {form!r}")
        kf = _kfun(cfg)
        q0, qd0 = _init_vectors(cfg, 1)

        def execute(icfg):
            rr = rhs_nonlinear_frac_oscillator(g, kf, order, form=form)
            return integrate_second_order(rr, (q0, qd0), icfg)

        return RunPlan(n=1, execute=execute)
    if sc == "hamilton-linear":
        avec = np.array(_param(cfg, "A", list))
        n = len(avec)
        if n == 0 or not np.any(avec):
            raise ConfigError("parameters.A", "must be a nonzero vector")
        order = _frac_order(cfg)
        u, grad = _potential(cfg, n)
        q0, p0 = _init_vectors(cfg, n)
        spec = HamiltonSpec(
            n=n,
            potential=u,
            grad_potential=grad,
            A=lambda q, d: avec,
            dA_dq=lambda q, d: np.zeros((n, n)),
            dA_dD=lambda q, d: np.zeros((n, n)),
            order=order,
            q_init=q0,
            p_init=p0,
        )

        def execute(icfg):
            return integrate_hamilton(hamilton_rhs(spec), (q0, p0), icfg)

        return RunPlan(n=n, execute=execute)
    raise ConfigError("scenario", f"unknown id {sc!r}")


# ---------------------------------------------------------------------------
# artifacts

def _fmt(x: float) -> str:
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def write_trajectory_csv(path: Path, res: SimulationResult, n: int) -> None:
    cols = (
        ["t"]
        + [f"q_{k + 1}" for k in range(n)]
        + [f"qdot_{k + 1}" for k in range(n)]
        + ["lambda", "constraint_residual"]
    )
    t = res.grid.nodes()
    resid = res.residual if res.residual is not None else np.full(len(t), np.nan)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(cols) + "\n")
        for i in range(len(t)):
            row = (
                [t[i]]
                + list(res.q[i])
                + list(res.qdot[i])
                + [res.multiplier[i], resid[i]]
            )
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_comparison_csv(path: Path, res: SimulationResult, oracle) -> float:
    t = res.grid.nodes()
    exact = oracle(res.grid)
    err = np.abs(res.q[:, 0] - exact)
    with open(path, "w", newline="\n") as fh:
        fh.write("t,numerical,exact,abs_error\n")
        for i in range(len(t)):
            fh.write(
                ",".join(_fmt(v) for v in (t[i], res.q[i, 0], exact[i], err[i])) + "\n"
            )
    return float(np.max(err))


def _summary(cfg: ScenarioConfig, res: SimulationResult, wall: float, extra: dict) -> dict:
    resid = res.residual
    return {
        "scenario": cfg.scenario,
        "scheme": cfg.scheme,
        "h": res.grid.h,
        "t_end": cfg.t_end,
        "max_residual": None
        if resid is None or np.all(np.isnan(resid))
        else float(np.nanmax(np.abs(resid))),
        "final_state": {
            "q": [float(v) for v in res.q[-1]],
            "qdot": [float(v) for v in res.qdot[-1]],
        },
        "diagnostics": res.diagnostics,
        **extra,
        "wall_time_s": wall,  # isolated: excluded when hashing summaries
    }


# ---------------------------------------------------------------------------
# verbs

def _load_config(args) -> ScenarioConfig:
    if not args.config:
        raise ConfigError("config", "--config PATH is required")
    path = Path(args.config)
    if not path.exists():
        raise ConfigError("config", f"file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from exc
    cfg = ScenarioConfig.from_dict(raw)
    if args.h is not None:
        if args.h <= 0:
            raise ConfigError("grid.h", "must be positive")
        cfg = cfg.replace(h=args.h)
    if args.t_end is not None:
        if args.t_end <= 0:
            raise ConfigError("grid.t_end", "must be positive")
        cfg = cfg.replace(t_end=args.t_end)
    if args.scheme is not None:
        if args.scheme not in _SCHEMES:
            raise ConfigError("scheme", f"unknown scheme {args.scheme!r}")
        cfg = cfg.replace(scheme=args.scheme)
    return cfg


def cmd_run(args) -> int:
    cfg = _load_config(args)
    plan = build_plan(cfg)  # full validation before any file is written
    out_dir = Path(args.out or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    icfg = IntegratorConfig(h=cfg.h, t_end=cfg.t_end, scheme=cfg.scheme)
    start = time.perf_counter()
    res = plan.execute(icfg)
    wall = time.perf_counter() - start
    traj = out_dir / f"{cfg.prefix}_trajectory.csv"
    write_trajectory_csv(traj, res, plan.n)
    extra = {}
    if plan.oracle is not None:
        comp = out_dir / f"{cfg.prefix}_comparison.csv"
        extra["max_abs_error_vs_exact"] = write_comparison_csv(comp, res, plan.oracle)
        extra["comparison_csv"] = comp.name
    summary = _summary(cfg, res, wall, extra)
    (out_dir / f"{cfg.prefix}_summary.json").write_text(
        json.dumps(summary, indent=2) + "\n"
    )
    if not args.quiet:
        print(f"wrote {traj}")
        if "max_abs_error_vs_exact" in extra:
            print(f"max |numerical - exact| = {extra['max_abs_error_vs_exact']:.6e}")
    return 0


def cmd_verify(args) -> int:
    from .verification import format_report, run_suite

    rows = run_suite(args.suite)
    if not args.quiet:
        print(format_report(rows))
    return 0 if all(r.passed for r in rows) else 4


def _parse_ladder(text: str):
    out = []
    for part in text.split(","):
        part = part.strip()
        if "/" in part:
            num, den = part.split("/", 1)
            out.append(float(num) / float(den))
        elif part:
            out.append(float(part))
    return out


def cmd_convergence(args) -> int:
    cfg = _load_config(args)
    plan = build_plan(cfg)
    ladder = _parse_ladder(args.ladder)
    if len(ladder) < 3:
        raise ConfigError("ladder", "ladder must have at least 3 rungs")

    def run(h: float) -> SampleSeries:
        res = plan.execute(IntegratorConfig(h=h, t_end=cfg.t_end, scheme=cfg.scheme))
        return res.q_series(0)

    oracle = plan.oracle
    reference = None
    if oracle is not None:
        # wrap: convergence_study hands us node times, the oracle wants a grid
        gmap = {}

        def reference(ts):
            key = (len(ts), ts[-1])
            if key not in gmap:
                from .series import Grid

                gmap[key] = oracle(Grid(0.0, float(ts[-1]), len(ts) - 1))
            return gmap[key]

    rows = convergence_study(run, ladder, reference)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{cfg.prefix}_convergence.csv"
    with open(path, "w", newline="\n") as fh:
        fh.write("h,error,order\n")
        for r in rows:
            fh.write(f"{_fmt(r['h'])},{_fmt(r['error'])},{_fmt(r['order'])}\n")
    if not args.quiet:
        for r in rows:
            print(f"h={r['h']:.6g}  error={r['error']:.6e}  order={r['order']:.3f}")
        print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    threads = os.environ.get("FRACDYN_THREADS")
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, threads)

    parser = argparse.ArgumentParser(
        prog="fracdyn", description="fractional constrained-dynamics scenarios"
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p):
        p.add_argument("--config", help="scenario config (JSON)")
        p.add_argument("--out", help="output directory (default: cwd)")
        p.add_argument("--h", type=float, help="override grid.h")
        p.add_argument("--t-end", dest="t_end", type=float, help="override grid.t_end")
        p.add_argument("--scheme", help="override integration scheme")
        p.add_argument("--quiet", action="store_true")

    p_run = sub.add_parser("run", help="run a scenario, write CSV + JSON artifacts")
    common(p_run)
    p_ver = sub.add_parser("verify", help="run a self-check suite")
    p_ver.add_argument(
        "suite",
        choices=["operators", "mittag-leffler", "oscillator", "constraints", "all"],
    )
    p_ver.add_argument("--quiet", action="store_true")
    p_conv = sub.add_parser("convergence", help="emit an (h, error, order) table")
    common(p_conv)
    p_conv.add_argument(
        "--ladder",
        default="1/256,1/512,1/1024",
        help="comma list of step sizes (fractions like 1/256 allowed)",
    )

    args = parser.parse_args(argv)
    try:
        if args.verb == "run":
            return cmd_run(args)
        if args.verb == "verify":
            return cmd_verify(args)
        return cmd_convergence(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AccuracyLossError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
