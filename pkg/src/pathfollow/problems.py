"""Shipped parametric circuit problems and their reference oracles.

Each problem tracks the inclusion 0 in g(x(t)) - p(t) + F(x(t)) on [0, T].
The reference oracles are deliberately independent of the Newton path
followers: a closed form for the ideal diode, bracketed bisection for the
practical diode, and a damped forward-backward fixed-point iteration for
the transistor (warm-started along t through a per-oracle cache).
"""

import bisect
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .errors import NoReference, OracleDiverged
from .monotone import IdealDiode, PracticalDiode, ProductMap

ORACLE_TOL = 1e-12
ORACLE_MAX_ITER = 100_000


@dataclass(frozen=True)
class ParametricProblem:
    """A parametric generalized equation plus the constants its solvers need.

    ell_path bounds the speed of t -> x(t) (between jumps, for problems whose
    path switches branches); kappa_subreg is the subregularity modulus the
    adaptive controller certifies errors with; c_mono is a strong-monotonicity
    modulus of g on the working box (0 when unknown). box is the sampling box
    used by probes and property tests.
    """

    name: str
    n: int
    T: float
    g: Callable
    dg: Callable
    p: Callable
    dp: Callable
    F: ProductMap
    lam: float
    ell_path: float
    kappa_subreg: float
    c_mono: float = 0.0
    reference: Optional[Callable] = None
    box: tuple = ((-1.0, 1.0),)

    def with_overrides(self, **kwargs):
        unknown = set(kwargs) - {"lam", "T", "kappa_subreg", "ell_path", "c_mono"}
        if unknown:
            raise ValueError(f"unknown problem override(s): {sorted(unknown)}")
        return replace(self, **kwargs)


def reference_solution(problem, t):
    """Evaluate the problem's reference oracle at time t."""
    if problem.reference is None:
        raise NoReference(f"problem {problem.name!r} ships no reference oracle")
    if not 0.0 <= t <= problem.T:
        raise ValueError(f"t={t} outside [0, {problem.T}]")
    return problem.reference(t)


def estimate_path_lipschitz(problem, samples=10_000, safety=1.1, jump_factor=50.0):
    """Max finite-difference slope of the reference over a uniform grid, x safety.

    Steps whose slope exceeds jump_factor times the median are treated as
    path discontinuities (branch switches) and excluded; the returned bound
    is the piecewise constant between them.
    """
    if problem.reference is None:
        raise NoReference(f"problem {problem.name!r} ships no reference oracle")
    h = problem.T / samples
    prev = problem.reference(0.0)
    slopes = np.empty(samples)
    for k in range(samples):
        cur = problem.reference((k + 1) * h if k + 1 < samples else problem.T)
        slopes[k] = float(np.linalg.norm(cur - prev)) / h
        prev = cur
    positive = slopes[slopes > 0.0]
    if positive.size == 0:
        return 0.0
    cut = jump_factor * float(np.median(positive))
    smooth = slopes[slopes <= cut]
    return safety * float(smooth.max())


class _SplittingOracle:
    """Damped forward-backward fixed point x <- s(x - lam*(g(x) - p(t))).

    Solutions are cached by t and each call warm-starts from the nearest
    solved time, so sweeps along increasing t converge in a few iterations
    per point. The cache is private to the oracle instance and the hint fed
    to the resolvent is the current iterate, which keeps the branch choice
    continuous along the tracked path.
    """

    def __init__(self, g, p, components, lam, seed_x):
        self._g = g
        self._p = p
        self._components = components
        self._lam = lam
        self._ts = [0.0]
        self._xs = [np.asarray(seed_x, dtype=float)]

    def _warm_start(self, t):
        i = bisect.bisect_left(self._ts, t)
        best, dist = 0, math.inf
        for j in (i - 1, i):
            if 0 <= j < len(self._ts) and abs(self._ts[j] - t) < dist:
                best, dist = j, abs(self._ts[j] - t)
        return self._xs[best].copy()

    def _residual(self, x, pv):
        y = pv - self._g(x)
        total = 0.0
        for i, comp in enumerate(self._components):
            r = comp.membership_residual(float(x[i]), float(y[i]))
            if math.isinf(r):
                return math.inf
            total += r * r
        return math.sqrt(total)

    def __call__(self, t):
        i = bisect.bisect_left(self._ts, t)
        if i < len(self._ts) and self._ts[i] == t:
            return self._xs[i].copy()
        x = self._warm_start(t)
        pv = self._p(t)
        lam = self._lam
        theta = 1.0
        best = math.inf
        since_best = 0
        r = self._residual(x, pv)
        for _ in range(ORACLE_MAX_ITER):
            if r <= ORACLE_TOL:
                break
            z = x - lam * (self._g(x) - pv)
            xn = np.array(
                [comp.resolvent(lam, float(z[j]), float(x[j])) for j, comp in enumerate(self._components)]
            )
            x = x + theta * (xn - x)
            if not np.isfinite(x).all():
                raise OracleDiverged(f"splitting oracle diverged at t={t}")
            r = self._residual(x, pv)
            if r < best:
                best, since_best = r, 0
            else:
                since_best += 1
                if since_best > 50 and theta > 1.0 / 32.0:
                    theta *= 0.5
                    since_best = 0
        else:
            raise OracleDiverged(
                f"splitting oracle: residual {r:.3e} > {ORACLE_TOL:g} after {ORACLE_MAX_ITER} iterations at t={t}"
            )
        self._ts.insert(i, t)
        self._xs.insert(i, x.copy())
        return x.copy()


def splitting_oracle(problem, lam=None, seed_x=None):
    """Forward-backward reference oracle for any shipped problem.

    This is the shipped transistor reference; for the diode problems it
    serves as an independent cross-check against their own oracles.
    """
    if seed_x is None:
        seed_x = np.zeros(problem.n)
    return _SplittingOracle(
        problem.g, problem.p, problem.F.components, problem.lam if lam is None else lam, seed_x
    )


# ---------------------------------------------------------------------------
# practical diode: g = sinh, p = 3 sin t, sqrt-diode with segment [-2, 1]

_PRAC_V1, _PRAC_V2 = -2.0, 1.0


def _practical_reference(t):
    pv = 3.0 * math.sin(t)
    if _PRAC_V1 <= pv <= _PRAC_V2:
        return np.array([0.0])
    if pv > _PRAC_V2:
        f = lambda x: math.sinh(x) + _PRAC_V2 + math.sqrt(x) - pv
        lo, hi = 0.0, 1.0
        while f(hi) < 0.0:
            hi *= 2.0
    else:
        f = lambda x: math.sinh(x) + _PRAC_V1 - math.sqrt(-x) - pv
        lo, hi = -1.0, 0.0
        while f(lo) > 0.0:
            lo *= 2.0
    fm = f(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if abs(fm) <= ORACLE_TOL:
            return np.array([mid])
        if fm < 0.0:
            lo = mid
        else:
            hi = mid
    raise OracleDiverged(f"bisection stalled at t={t}, residual {fm:.3e}")


def make_practical_diode():
    g = lambda x: np.sinh(x)
    dg = lambda x: np.array([[math.cosh(float(x[0]))]])
    p = lambda t: np.array([3.0 * math.sin(t)])
    dp = lambda t: np.array([3.0 * math.cos(t)])
    return ParametricProblem(
        name="practical-diode",
        n=1,
        T=3.0,
        g=g,
        dg=dg,
        p=p,
        dp=dp,
        F=ProductMap((PracticalDiode(_PRAC_V1, _PRAC_V2),)),
        lam=0.5,
        # estimate_path_lipschitz gives 1.326 on a 1e4 grid; frozen here
        ell_path=1.33,
        kappa_subreg=2.0,
        c_mono=1.0,  # cosh >= 1 makes sinh strongly monotone with modulus 1
        reference=_practical_reference,
        box=((-1.2, 1.2),),
    )


# ---------------------------------------------------------------------------
# ideal diode: g = asinh, p = sin(2 pi t), F = normal cone to [0, inf)


def _ideal_reference(t):
    return np.array([math.sinh(max(math.sin(2.0 * math.pi * t), 0.0))])


def make_ideal_diode():
    g = lambda x: np.arcsinh(x)
    dg = lambda x: np.array([[1.0 / math.sqrt(1.0 + float(x[0]) ** 2)]])
    p = lambda t: np.array([math.sin(2.0 * math.pi * t)])
    dp = lambda t: np.array([2.0 * math.pi * math.cos(2.0 * math.pi * t)])
    return ParametricProblem(
        name="ideal-diode",
        n=1,
        T=3.0,
        g=g,
        dg=dg,
        p=p,
        dp=dp,
        F=ProductMap((IdealDiode(),)),
        lam=0.5,
        ell_path=2.0 * math.pi * math.cosh(1.0),
        kappa_subreg=3.0,
        c_mono=0.4,  # asinh' >= 1/sqrt(5) on the working box
        reference=_ideal_reference,
        box=((-2.0, 2.0),),
    )


# ---------------------------------------------------------------------------
# transistor (Ebers-Moll: two opposed sqrt-diodes behind a linear resistor network)

_TRANS_G = np.array([[0.5, 0.9], [0.0, 1.5]])


def make_transistor(g_matrix=None):
    """Ebers-Moll transistor stage; g_matrix overrides the printed resistor matrix."""
    G = _TRANS_G if g_matrix is None else np.asarray(g_matrix, dtype=float)
    if G.shape != (2, 2):
        raise ValueError(f"g_matrix must be 2x2, got {G.shape}")
    g = lambda x: G @ x
    dg = lambda x: G
    p = lambda t: np.array([math.sin(t), -9.0 * math.sin(t)])
    dp = lambda t: np.array([math.cos(t), -9.0 * math.cos(t)])
    F = ProductMap(
        (
            PracticalDiode(-3.0, 1.0, swap_branches=True),
            PracticalDiode(-1.0, 2.0, swap_branches=True),
        )
    )
    problem = ParametricProblem(
        name="transistor",
        n=2,
        T=2.0 * math.pi,
        g=g,
        dg=dg,
        p=p,
        dp=dp,
        F=F,
        lam=0.2,
        # piecewise bound between branch switches; the swapped diode branch
        # ordering makes the exact path jump at isolated times
        ell_path=9.5,
        kappa_subreg=4.0,
        c_mono=0.32,  # min eigenvalue of (G + G^T)/2 is 0.3273 for the printed matrix
        reference=None,
        box=((-9.0, 13.0), (-7.0, 6.5)),
    )
    return replace(problem, reference=splitting_oracle(problem))


PROBLEMS = {
    "practical-diode": make_practical_diode,
    "ideal-diode": make_ideal_diode,
    "transistor": make_transistor,
}


def make_problem(name, **kwargs):
    try:
        factory = PROBLEMS[name]
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}") from None
    return factory(**kwargs)
