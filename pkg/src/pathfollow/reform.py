"""The doubled-variable reformulation behind the path followers.

The inclusion 0 in g(x) - p(t) + F(x) is tracked through the system

    (p(t), 0)  in  H(x, d) := (g(x) + F(d),  x - d),

whose resolvent-based approximation step always lands on the graph of H.
This module provides the computable residual of that system, the
approximation step, the assembly of structure-checked linearization rows
(M, N) from resolvent slopes, and the Newton/drift update they induce.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import numkit
from .errors import AllSingular, SingularMatrix

STRUCTURE_TOL = 1e-10


@dataclass(frozen=True)
class ApproxPoint:
    """Graph point of the doubled system produced by the resolvent step.

    y_hat equals ((x_hat - d_hat)/lam, x_hat - d_hat) componentwise, and
    (y_hat + (p(t), 0)) lies in H(x_hat, d_hat) up to resolvent roundoff.
    """

    t: float
    x_hat: np.ndarray
    d_hat: np.ndarray
    y_hat: np.ndarray


@dataclass(frozen=True)
class NewtonSystem:
    """Row-stacked linearization (M, N) with its slope matrix and factorization."""

    M: np.ndarray
    N: np.ndarray
    J: np.ndarray
    selection_id: str
    lu: np.ndarray
    perm: np.ndarray


def residual(problem, t, x, d):
    """Distance of (p(t), 0) to H(x, d): max of the two block residuals.

    The first block is the product-map membership distance of p(t) - g(x)
    at d, the second is ||x - d||; blocks pair with the max norm.
    """
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    first = problem.F.membership_residual(d, problem.p(t) - problem.g(x))
    second = float(np.linalg.norm(x - d))
    return max(first, second)


def resolvent_argument(problem, t, x):
    x = np.asarray(x, dtype=float)
    return x - problem.lam * (problem.g(x) - problem.p(t))


def approx_step(problem, t, x, hint=None):
    """Resolvent step: d_hat solves the inclusion at z = x - lam*(g(x) - p(t)).

    hint steers branch selection for multivalued resolvents (pass the previous
    d iterate during path-following). If x solves the inclusion at t, y_hat
    vanishes.
    """
    x = np.asarray(x, dtype=float)
    z = resolvent_argument(problem, t, x)
    d_hat = problem.F.resolvent(problem.lam, z, hint)
    gap = x - d_hat
    return ApproxPoint(t=t, x_hat=x, d_hat=d_hat, y_hat=np.concatenate([gap / problem.lam, gap]))


def slope_set(problem, ap):
    """Slope matrices of the resolvent selection at ap's resolvent argument."""
    z = resolvent_argument(problem, ap.t, ap.x_hat)
    return problem.F.resolvent_slopes(problem.lam, z, hint=ap.d_hat)


# Generator matrices (C, R) per row block. Row i arises from the coderivative
# structure y1* = J^T c_i, x1* = dg^T y1* + r_i, x2* = (1/lam)(I - J^T) c_i - r_i,
# stacked as N = [C J | R], M = [C J dg + R | (1/lam) C (I - J) - R].
def _generators(variant, n, lam):
    I = np.eye(n)
    Z = np.zeros((n, n))
    if variant == "default":
        C = np.vstack([lam * I, Z])
        R = np.vstack([Z, I])
    elif variant == "alt":
        C = np.vstack([lam * I, I])
        R = np.vstack([I, Z])
    else:
        raise ValueError(f"unknown parametrization {variant!r}")
    return C, R


def _build(problem, ap, J, variant):
    n = problem.n
    lam = problem.lam
    dg = np.asarray(problem.dg(ap.x_hat), dtype=float)
    C, R = _generators(variant, n, lam)
    CJ = C @ J
    M = np.hstack([CJ @ dg + R, C @ (np.eye(n) - J) / lam - R])
    N = np.hstack([CJ, R])
    return M, N, C


def structure_check(problem, M, N, J, C, x_hat):
    """Verify every row pair against the coderivative identities.

    Row i must satisfy x1* = dg^T y1* + y2* and x2* = (1/lam)(I - J^T) m - y2*
    with y1* = J^T m for the row's generator m (row i of C).
    """
    n = problem.n
    lam = problem.lam
    dg = np.asarray(problem.dg(x_hat), dtype=float)
    worst = 0.0
    for i in range(2 * n):
        m = C[i]
        y1, y2 = N[i, :n], N[i, n:]
        x1, x2 = M[i, :n], M[i, n:]
        worst = max(worst, float(np.max(np.abs(y1 - J.T @ m))))
        worst = max(worst, float(np.max(np.abs(x1 - (dg.T @ y1 + y2)))))
        worst = max(worst, float(np.max(np.abs(x2 - ((np.eye(n) - J.T) @ m / lam - y2)))))
    return worst


def assemble_newton(problem, ap, J=None):
    """Assemble a nonsingular structure-checked system at an approximation point.

    Tries the preferred slope matrix first (the slope set's first element when
    J is not given), then the remaining slope combinations, then the alternate
    row parametrization for each. Raises AllSingular when every candidate
    factorization fails, which the adaptive driver treats as step rejection.
    """
    slopes = list(slope_set(problem, ap))
    if J is not None:
        ordered = [J] + [s for s in slopes if not np.array_equal(s, J)]
    else:
        ordered = slopes
    for variant in ("default", "alt"):
        for idx, Jc in enumerate(ordered):
            M, N, C = _build(problem, ap, Jc, variant)
            try:
                lu, perm = numkit.lu_factor(M)
            except SingularMatrix:
                continue
            worst = structure_check(problem, M, N, Jc, C, ap.x_hat)
            if worst > STRUCTURE_TOL:
                continue
            return NewtonSystem(
                M=M, N=N, J=Jc, selection_id=f"{variant}[{idx}]", lu=lu, perm=perm
            )
    raise AllSingular(
        f"no nonsingular linearization at t={ap.t}: {len(ordered)} slope choices x 2 parametrizations"
    )


def newton_step(problem, ap, sys, dt):
    """One corrector/drift update from an approximation point.

    Returns (x+, d+) = (x_hat, d_hat) - M^{-1} (N y_hat - V dt) with the drift
    rows V = -N (dp(t), 0). dt = 0 gives the stationary corrector at ap.t;
    dt = s - t adds the drift term that freezes the estimate at the earlier
    time t (exact for affine data).
    """
    if dt < 0.0:
        raise ValueError(f"dt must be nonnegative, got {dt}")
    n = problem.n
    rhs = sys.N @ ap.y_hat
    if dt != 0.0:
        V = -(sys.N @ np.concatenate([problem.dp(ap.t), np.zeros(n)]))
        rhs = rhs - V * dt
    step = numkit.lu_solve_factored(sys.lu, sys.perm, rhs)
    return ap.x_hat - step[:n], ap.d_hat - step[n:]
