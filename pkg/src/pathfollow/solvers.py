"""Path-following drivers: uniform grid, single drift step, adaptive controller.

The uniform driver takes one stationary corrector per grid point. The
adaptive driver searches step sizes h = a**i * h_max, accepts a step when
the certified error test kappa*||y|| <= max(c_k, h)/2 + ell*h passes, and
falls back to forward-backward refinement at the current time when every
step size is rejected. Its c_k ledger is the recursion
c_{k+1} = max(c_k, h)/2 + ell_hat*h with c_0 = 0, which bounds the true
error whenever kappa is a valid subregularity modulus along the path.
"""

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import AllSingular, NoReference, NoSolution, RefineDiverged, Stalled
from .problems import reference_solution
from .reform import approx_step, assemble_newton, newton_step, residual


@dataclass
class RunConfig:
    """Driver settings; uniform runs need steps, adaptive runs need the rest.

    kappa and ell default to the problem's kappa_subreg and ell_path when
    left unset. drift toggles the time-derivative rows in single steps; the
    step-size controller needs it off to make forward progress, so off is
    the default.
    """

    algorithm: str = "uniform"
    steps: Optional[int] = None
    h_max: Optional[float] = None
    a: float = 0.5
    i_max: int = 20
    refine_tol: float = 1e-9
    refine_max: int = 100_000
    kappa: Optional[float] = None
    ell: Optional[float] = None
    tol_zero: float = 1e-12
    drift: bool = False
    ell_hat_factor: float = math.sqrt(2.0)

    def resolved(self, problem):
        cfg = RunConfig(**vars(self))
        if cfg.kappa is None:
            cfg.kappa = problem.kappa_subreg
        if cfg.ell is None:
            cfg.ell = problem.ell_path
        if cfg.algorithm == "uniform":
            if not (isinstance(cfg.steps, int) and cfg.steps >= 1):
                raise ValueError("uniform runs need steps >= 1")
        elif cfg.algorithm == "adaptive":
            if cfg.h_max is None or not 0.0 < cfg.h_max <= problem.T:
                raise ValueError("adaptive runs need 0 < h_max <= T")
            if not 0.0 < cfg.a < 1.0:
                raise ValueError("backoff ratio a must lie in (0, 1)")
            if cfg.i_max < 0 or cfg.refine_max < 1 or cfg.refine_tol <= 0.0:
                raise ValueError("invalid refinement settings")
        else:
            raise ValueError(f"unknown algorithm {cfg.algorithm!r}")
        return cfg


@dataclass
class StepRecord:
    k: int
    t: float
    x: np.ndarray
    d: np.ndarray
    residual: float
    err: Optional[float] = None
    c_k: Optional[float] = None
    h: Optional[float] = None
    refinements: int = 0
    slope_branch: str = ""


@dataclass
class Summary:
    max_residual: float = 0.0
    max_err: Optional[float] = None
    total_refinements: int = 0
    wall_time: float = 0.0


@dataclass
class Trajectory:
    records: list = field(default_factory=list)
    summary: Summary = field(default_factory=Summary)

    def finalize(self, wall_time):
        finite = [r.residual for r in self.records if math.isfinite(r.residual)]
        self.summary.max_residual = max(finite, default=0.0)
        errs = [r.err for r in self.records if r.err is not None]
        self.summary.max_err = max(errs) if errs else None
        self.summary.total_refinements = sum(r.refinements for r in self.records)
        self.summary.wall_time = wall_time
        return self


def forward_backward(problem, t, x, d):
    """One sweep of the splitting map T(t, x, d).

    Returns (s(x - lam*(g(x) - p(t))), d - lam*(d - x)); fixed points solve
    the doubled system at t exactly. Branch selection uses d as the hint.
    """
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    lam = problem.lam
    z = x - lam * (problem.g(x) - problem.p(t))
    return problem.F.resolvent(lam, z, d), d - lam * (d - x)


def refine(problem, t, x, d, target, cap):
    """Iterate the splitting map at fixed t until the residual drops to target."""
    if target <= 0.0:
        raise ValueError("refinement target must be positive")
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    for i in range(cap):
        r = residual(problem, t, x, d)
        if r <= target:
            return x, d, i
        x, d = forward_backward(problem, t, x, d)
        if not (np.isfinite(x).all() and np.isfinite(d).all()):
            raise RefineDiverged(f"splitting iteration diverged at t={t} after {i + 1} sweeps")
    r = residual(problem, t, x, d)
    if r <= target:
        return x, d, cap
    raise RefineDiverged(f"residual {r:.3e} above target {target:g} after {cap} sweeps at t={t}")


def _record_err(problem, t, x):
    if problem.reference is None:
        return None
    return float(np.linalg.norm(np.asarray(x) - reference_solution(problem, t)))


def _default_start(problem, x0):
    if x0 is not None:
        return np.asarray(x0, dtype=float)
    if problem.reference is None:
        raise NoReference(f"no x0 given and problem {problem.name!r} has no reference oracle")
    return reference_solution(problem, 0.0)


def uniform_path_follow(problem, config, x0=None):
    """Track the path on the uniform grid t_k = k T/N with one corrector per point.

    A grid point whose incoming iterate already satisfies the inclusion
    (residual <= tol_zero) is copied forward unchanged. Aborts carry the
    partial trajectory on the raised error.
    """
    cfg = config.resolved(problem)
    N = cfg.steps
    h = problem.T / N
    start = time.perf_counter()
    x = _default_start(problem, x0)
    d = x.copy()
    traj = Trajectory()
    traj.records.append(
        StepRecord(
            k=0,
            t=0.0,
            x=x.copy(),
            d=d.copy(),
            residual=residual(problem, 0.0, x, d),
            err=_record_err(problem, 0.0, x),
            slope_branch="start",
        )
    )
    for k in range(N):
        t_next = problem.T if k + 1 == N else (k + 1) * h
        r_in = residual(problem, t_next, x, d)
        if r_in <= cfg.tol_zero:
            slope = "copy"
            r_out = r_in
        else:
            try:
                ap = approx_step(problem, t_next, x, hint=d)
                sys = assemble_newton(problem, ap)
            except (AllSingular, NoSolution) as exc:
                exc.partial = traj.finalize(time.perf_counter() - start)
                raise
            x, d = newton_step(problem, ap, sys, dt=0.0)
            slope = sys.selection_id
            r_out = residual(problem, t_next, x, d)
        traj.records.append(
            StepRecord(
                k=k + 1,
                t=t_next,
                x=x.copy(),
                d=d.copy(),
                residual=r_out,
                err=_record_err(problem, t_next, x),
                h=h,
                slope_branch=slope,
            )
        )
    return traj.finalize(time.perf_counter() - start)


def single_step(problem, t, s, x, d, drift=False, tol_zero=1e-12):
    """One step of the drift method from time t to s > t.

    Exits early when (x, d) already satisfies the inclusion at s. With drift
    on, the update carries the extra V(s - t) rows (the variant that freezes
    the estimate near x(t)); with drift off it is the stationary corrector
    at s.
    """
    if not t < s <= problem.T:
        raise ValueError(f"need t < s <= T, got t={t}, s={s}")
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    if residual(problem, s, x, d) <= tol_zero:
        return x.copy(), d.copy()
    ap = approx_step(problem, s, x, hint=d)
    sys = assemble_newton(problem, ap)
    return newton_step(problem, ap, sys, dt=(s - t) if drift else 0.0)


def accept_step(kappa, ell, c_k, h, y_norm):
    """Certified acceptance test: kappa*y_norm <= max(c_k, h)/2 + ell*h."""
    return kappa * y_norm <= 0.5 * max(c_k, h) + ell * h


def ck_update(c_prev, ell, h):
    """Error-ledger recursion max(c_prev, h)/2 + ell*h."""
    return 0.5 * max(c_prev, h) + ell * h


def adaptive_path_follow(problem, config, x0=None):
    """Adaptive driver: backtracking step search with a certified error ledger.

    Every committed step satisfies accept_step; the ledger c_k then bounds
    the true path error whenever kappa is a valid subregularity modulus.
    When all step sizes are rejected the current iterate is refined by the
    splitting map and the ledger resets to kappa times the residual; two
    refinement phases without a committed step in between raise Stalled.
    """
    cfg = config.resolved(problem)
    start = time.perf_counter()
    x = _default_start(problem, x0)
    d = x.copy()
    t = 0.0
    c = 0.0
    traj = Trajectory()
    traj.records.append(
        StepRecord(
            k=0,
            t=t,
            x=x.copy(),
            d=d.copy(),
            residual=residual(problem, t, x, d),
            err=_record_err(problem, t, x),
            c_k=c,
            slope_branch="start",
        )
    )
    just_refined = False
    k = 0
    while t < problem.T:
        committed = False
        for i in range(cfg.i_max + 1):
            s = min(t + (cfg.a**i) * cfg.h_max, problem.T)
            h = s - t
            if h <= 0.0:
                break
            try:
                xc, dc = single_step(problem, t, s, x, d, drift=cfg.drift, tol_zero=cfg.tol_zero)
            except (AllSingular, NoSolution):
                continue  # rejected selection; try a smaller step
            y_norm = residual(problem, s, xc, dc)
            if accept_step(cfg.kappa, cfg.ell, c, h, y_norm):
                t, x, d = s, xc, dc
                c = ck_update(c, cfg.ell_hat_factor * cfg.ell, h)
                k += 1
                traj.records.append(
                    StepRecord(
                        k=k,
                        t=t,
                        x=x.copy(),
                        d=d.copy(),
                        residual=y_norm,
                        err=_record_err(problem, t, x),
                        c_k=c,
                        h=h,
                        slope_branch="accepted",
                    )
                )
                committed = True
                just_refined = False
                break
        if committed:
            continue
        if just_refined:
            exc = Stalled(f"no step size down to a^{cfg.i_max} h_max accepted at t={t}")
            exc.partial = traj.finalize(time.perf_counter() - start)
            raise exc
        try:
            x, d, iters = refine(problem, t, x, d, cfg.refine_tol, cfg.refine_max)
        except RefineDiverged as exc:
            exc.partial = traj.finalize(time.perf_counter() - start)
            raise
        c = cfg.kappa * residual(problem, t, x, d)
        rec = traj.records[-1]
        rec.x, rec.d = x.copy(), d.copy()
        rec.residual = residual(problem, t, x, d)
        rec.err = _record_err(problem, t, x)
        rec.c_k = c
        rec.refinements += iters
        just_refined = True
    return traj.finalize(time.perf_counter() - start)
