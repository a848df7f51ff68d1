"""Synthetic affine/linear problems used as exactness oracles in tests."""

import numpy as np

from pathfollow import AffineBranch, ParametricProblem, ProductMap


def make_affine(n=2, seed=0, f_slopes=None, f_offsets=None, p_affine=True, T=1.0):
    """Affine g, affine p, affine-branch F: the tracked path is linear algebra.

    reference(t) solves (A + diag(f_slopes)) x = p(t) - b - f_offsets exactly,
    so one consistent linearization step must land on it to rounding.
    """
    rng = np.random.default_rng(seed)
    A = rng.uniform(-0.5, 0.5, size=(n, n)) + np.eye(n) * 2.0
    b = rng.uniform(-1.0, 1.0, size=n)
    p0 = rng.uniform(-1.0, 1.0, size=n)
    p1 = rng.uniform(-1.0, 1.0, size=n) if p_affine else np.zeros(n)
    f_slopes = np.zeros(n) if f_slopes is None else np.asarray(f_slopes, dtype=float)
    f_offsets = np.zeros(n) if f_offsets is None else np.asarray(f_offsets, dtype=float)
    F = ProductMap(tuple(AffineBranch(float(s), float(o)) for s, o in zip(f_slopes, f_offsets)))
    K = A + np.diag(f_slopes)

    def reference(t):
        return np.linalg.solve(K, p0 + p1 * t - b - f_offsets)

    ell = float(np.linalg.norm(np.linalg.solve(K, p1))) + 1e-9
    return ParametricProblem(
        name=f"affine-{n}d",
        n=n,
        T=T,
        g=lambda x: A @ x + b,
        dg=lambda x: A,
        p=lambda t: p0 + p1 * t,
        dp=lambda t: p1,
        F=F,
        lam=0.5,
        ell_path=ell,
        kappa_subreg=float(np.linalg.norm(np.linalg.inv(K), 2)) + 1.0,
        c_mono=0.5,
        reference=reference,
        box=tuple((-2.0, 2.0) for _ in range(n)),
    )


def make_scaling(T=1.0):
    """g(x) = 2x, F = {0}, p = 0: the probe-calibration problem with x(t) = 0."""
    return ParametricProblem(
        name="scaling-1d",
        n=1,
        T=T,
        g=lambda x: 2.0 * x,
        dg=lambda x: np.array([[2.0]]),
        p=lambda t: np.zeros(1),
        dp=lambda t: np.zeros(1),
        F=ProductMap((AffineBranch(0.0, 0.0),)),
        lam=0.5,
        ell_path=1e-9,
        kappa_subreg=1.0,
        c_mono=2.0,
        reference=lambda t: np.zeros(1),
        box=((-1.0, 1.0),),
    )
