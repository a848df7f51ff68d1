"""Grid-error and rate studies, plus empirical regularity probes.

The probes are seeded and prefix-stable: sample i never depends on the total
sample count, so doubling the count extends the stream and the reported max
can only grow.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import AllSingular, NoReference, PathFollowError
from .problems import reference_solution
from .reform import approx_step, assemble_newton, residual
from .solvers import RunConfig, uniform_path_follow

RESIDUAL_FLOOR = 1e-14


@dataclass(frozen=True)
class RateRow:
    N: int
    h: float
    max_err: Optional[float]
    observed_order: Optional[float] = None
    failed: bool = False


@dataclass(frozen=True)
class RateTable:
    rows: tuple

    def final_order(self):
        orders = [r.observed_order for r in self.rows if r.observed_order is not None]
        return orders[-1] if orders else None


@dataclass(frozen=True)
class ProbeReport:
    t: float
    delta: float
    samples: int
    kappa_hat: float
    eps_hat: Optional[float] = None
    worst_witness: Optional[np.ndarray] = None


def grid_error(traj, reference):
    """Per-record distance ||x_k - reference(t_k)|| and its max over the grid."""
    if reference is None:
        raise NoReference("grid_error needs a reference oracle")
    per_step = [float(np.linalg.norm(rec.x - reference(rec.t))) for rec in traj.records]
    return max(per_step), per_step


def observed_order(err_prev, err, h_prev, h):
    if err_prev is None or err is None or err_prev <= 0.0 or err <= 0.0:
        return None
    return math.log(err_prev / err) / math.log(h_prev / h)


def rate_study(problem, Ns, x0=None):
    """Run the uniform driver per grid count and tabulate max errors and orders."""
    Ns = list(Ns)
    if len(Ns) < 2 or any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise ValueError("need at least two strictly increasing grid counts")
    if problem.reference is None:
        raise NoReference("rate_study needs a reference oracle")
    rows = []
    prev = None  # (h, max_err)
    for N in Ns:
        h = problem.T / N
        try:
            traj = uniform_path_follow(problem, RunConfig(algorithm="uniform", steps=N), x0=x0)
            max_err, _ = grid_error(traj, problem.reference)
        except PathFollowError:
            rows.append(RateRow(N=N, h=h, max_err=None, failed=True))
            continue
        order = None if prev is None else observed_order(prev[1], max_err, prev[0], h)
        rows.append(RateRow(N=N, h=h, max_err=max_err, observed_order=order))
        prev = (h, max_err)
    return RateTable(rows=tuple(rows))


def _ball_sampler(rng, n):
    # uniform draw in the unit n-ball; fixed draw count per sample keeps the
    # stream prefix-stable
    def draw():
        v = rng.standard_normal(n)
        nv = float(np.linalg.norm(v))
        if nv == 0.0:
            v, nv = np.ones(n), math.sqrt(n)
        return (rng.uniform() ** (1.0 / n)) * v / nv

    return draw


def _pair_norm(a, b):
    return max(float(np.linalg.norm(a)), float(np.linalg.norm(b)))


def estimate_kappa(problem, t, delta, samples, seed=0):
    """Empirical subregularity modulus of the doubled system at (x(t), x(t)).

    Alternates paired perturbations (x(t)+xi, x(t)+xi) with graph-coupled
    ones (d from the resolvent step at the perturbed x), and maximizes
    error/residual over samples whose residual clears the floating-point
    floor. Pure d-only perturbations are excluded on purpose: the probe
    measures the modulus seen by the path followers, which always couple d
    to x through the resolvent.
    """
    xbar = reference_solution(problem, t)
    rng = np.random.default_rng(seed)
    draw = _ball_sampler(rng, problem.n)
    best = 0.0
    witness = None
    for i in range(samples):
        xi = delta * draw()
        x = xbar + xi
        if i % 2 == 0:
            d = x.copy()
        else:
            d = approx_step(problem, t, x, hint=xbar).d_hat
        res = residual(problem, t, x, d)
        if not math.isfinite(res) or res <= RESIDUAL_FLOOR:
            continue
        ratio = _pair_norm(x - xbar, d - xbar) / res
        if ratio > best:
            best = ratio
            witness = np.concatenate([x, d])
    return ProbeReport(t=t, delta=delta, samples=samples, kappa_hat=best, worst_witness=witness)


def semismooth_probe(problem, t, deltas, samples, seed=0):
    """Linearization-defect probe of the doubled system around (x(t), x(t)).

    For each radius, graph points are generated by the resolvent step from
    perturbed x (shrinking the perturbation until the graph point sits inside
    the radius); each row of an assembled (M, N) at that point contributes
    |<M_i, w - wbar> - <N_i, y>| normalized by the row norm and the point
    distance. Returns [(delta, eps_hat)] in the given order.
    """
    xbar = reference_solution(problem, t)
    wbar = np.concatenate([xbar, xbar])
    out = []
    for delta in deltas:
        rng = np.random.default_rng(seed)
        draw = _ball_sampler(rng, problem.n)
        worst = 0.0
        for _ in range(samples):
            xi = delta * draw()
            ap = None
            for _attempt in range(60):
                ap = approx_step(problem, t, xbar + xi, hint=xbar)
                w = np.concatenate([ap.x_hat, ap.d_hat])
                dist = max(float(np.linalg.norm(w - wbar)), float(np.linalg.norm(ap.y_hat)))
                if dist <= delta:
                    break
                xi = 0.5 * xi
            if dist <= RESIDUAL_FLOOR:
                continue
            try:
                sys = assemble_newton(problem, ap)
            except AllSingular:
                continue
            gap = sys.M @ (w - wbar) - sys.N @ ap.y_hat
            for i in range(2 * problem.n):
                row_norm = math.sqrt(
                    float(sys.M[i] @ sys.M[i]) + float(sys.N[i] @ sys.N[i])
                )
                if row_norm == 0.0:
                    continue
                worst = max(worst, abs(float(gap[i])) / (row_norm * dist))
        out.append((delta, worst))
    return out


def probe_report(problem, t, deltas, samples, seed=0):
    """Combined kappa/eps rows for the CLI probe command."""
    eps = dict(semismooth_probe(problem, t, deltas, samples, seed=seed))
    rows = []
    for delta in deltas:
        kap = estimate_kappa(problem, t, delta, samples, seed=seed)
        rows.append(
            ProbeReport(
                t=t,
                delta=delta,
                samples=samples,
                kappa_hat=kap.kappa_hat,
                eps_hat=eps[delta],
                worst_witness=kap.worst_witness,
            )
        )
    return rows
