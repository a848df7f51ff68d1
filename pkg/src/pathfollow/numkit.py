"""Small dense linear-algebra kernels.

Everything here targets the tiny systems this package assembles (2n x 2n
with n <= 8), so the factorizations are plain partial-pivoting elimination
on numpy arrays with a deterministic relative singularity test.
"""

import math

import numpy as np

from .errors import SingularMatrix

# A pivot below this fraction of the largest pivot seen so far is treated as
# an exact rank deficiency; downstream Newton assembly uses that signal to
# fall back to another slope selection.
PIVOT_RTOL = 1e-12

_OPNORM_ITERS = 200
_OPNORM_RTOL = 1e-6


def lu_factor(m):
    """LU-factorize a square matrix with partial pivoting.

    Returns (lu, perm) where lu packs the unit-lower and upper factors and
    perm is the row permutation. Raises SingularMatrix when a pivot falls
    below PIVOT_RTOL times the largest pivot encountered.
    """
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    perm = np.arange(n)
    pivot_max = 0.0
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        piv = abs(a[p, k])
        pivot_max = max(pivot_max, piv)
        if piv <= PIVOT_RTOL * pivot_max:
            raise SingularMatrix(
                f"pivot {piv:.3e} at column {k} below {PIVOT_RTOL:g} of largest pivot {pivot_max:.3e}"
            )
        if p != k:
            a[[k, p]] = a[[p, k]]
            perm[[k, p]] = perm[[p, k]]
        a[k + 1:, k] /= a[k, k]
        a[k + 1:, k + 1:] -= np.outer(a[k + 1:, k], a[k, k + 1:])
    return a, perm


def lu_solve_factored(lu, perm, b):
    """Solve with factors from lu_factor (forward/back substitution)."""
    n = lu.shape[0]
    x = np.asarray(b, dtype=float)[perm].copy()
    for k in range(1, n):
        x[k] -= lu[k, :k] @ x[:k]
    for k in range(n - 1, -1, -1):
        x[k] = (x[k] - lu[k, k + 1:] @ x[k + 1:]) / lu[k, k]
    return x


def lu_solve(m, b):
    """Solve m @ x = b for a small dense square m.

    Raises SingularMatrix for numerically rank-deficient m (relative pivot
    test, see lu_factor).
    """
    b = np.asarray(b, dtype=float)
    m = np.asarray(m, dtype=float)
    if b.shape != (m.shape[0],):
        raise ValueError(f"rhs length {b.shape} does not match matrix {m.shape}")
    lu, perm = lu_factor(m)
    return lu_solve_factored(lu, perm, b)


def frobenius_norm(m):
    a = np.asarray(m, dtype=float)
    return math.sqrt(float((a * a).sum()))


def _power_iteration(ata, v):
    lam = 0.0
    for _ in range(_OPNORM_ITERS):
        w = ata @ v
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return 0.0
        v = w / nw
        if abs(nw - lam) <= _OPNORM_RTOL * nw:
            return nw
        lam = nw
    return lam


def operator_norm_estimate(m):
    """Largest singular value of a square matrix via power iteration on m^T m.

    Two fixed start vectors guard against an unlucky orthogonal start; the
    estimate is within 1% for the matrices this package produces.
    """
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if not a.any():
        return 0.0
    ata = a.T @ a
    ones = np.full(n, 1.0 / math.sqrt(n))
    alt = np.array([(-1.0) ** k for k in range(n)]) / math.sqrt(n)
    lam = max(_power_iteration(ata, ones), _power_iteration(ata, alt))
    return math.sqrt(lam)
