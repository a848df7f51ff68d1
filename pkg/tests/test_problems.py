import math

import numpy as np
import pytest
from scipy.optimize import brentq

from pathfollow import (
    NoReference,
    OracleDiverged,
    ParametricProblem,
    ProductMap,
    AffineBranch,
    make_ideal_diode,
    make_practical_diode,
    make_transistor,
    reference_solution,
    splitting_oracle,
)
from pathfollow.problems import estimate_path_lipschitz
from pathfollow.reform import residual

from conftest import TRANSISTOR_JUMPS


# --- factories ---------------------------------------------------------------

def test_practical_diode_factory(practical_diode):
    p = practical_diode
    assert (p.n, p.T, p.lam) == (1, 3.0, 0.5)
    assert p.p(1.5707963)[0] == pytest.approx(3.0, abs=1e-6)
    assert p.g(np.zeros(1))[0] == 0.0
    assert p.F.components[0].is_monotone


def test_practical_diode_strong_monotonicity(practical_diode):
    # cosh >= 1 gives modulus 1 everywhere, checked on sampled pairs in |x| <= 3
    rng = np.random.default_rng(1)
    g = practical_diode.g
    for _ in range(1000):
        x, u = rng.uniform(-3.0, 3.0, size=(2, 1))
        lhs = float((g(x) - g(u)) @ (x - u))
        assert lhs >= practical_diode.c_mono * float((x - u) @ (x - u)) - 1e-12


def test_ideal_diode_factory(ideal_diode):
    p = ideal_diode
    assert (p.n, p.T, p.lam) == (1, 3.0, 0.5)
    assert reference_solution(p, 0.25)[0] == pytest.approx(math.sinh(1.0), abs=1e-12)
    assert reference_solution(p, 0.75)[0] == 0.0
    assert p.ell_path == pytest.approx(2.0 * math.pi * math.cosh(1.0), abs=0.0)


def test_transistor_factory(transistor):
    p = transistor
    assert (p.n, p.T, p.lam) == (2, 2.0 * math.pi, 0.2)
    assert np.allclose(p.dg(np.zeros(2)), [[0.5, 0.9], [0.0, 1.5]], atol=0.0)
    assert np.allclose(p.p(0.0), [0.0, 0.0], atol=0.0)
    assert np.allclose(reference_solution(p, 0.0), [0.0, 0.0], atol=0.0)
    assert all(c.swap_branches for c in p.F.components)


def test_transistor_g_matrix_override():
    p = make_transistor(g_matrix=[[0.5, 0.9], [0.0, 1.9]])
    assert np.allclose(p.dg(np.zeros(2)), [[0.5, 0.9], [0.0, 1.9]])
    with pytest.raises(ValueError):
        make_transistor(g_matrix=[[1.0, 2.0, 3.0]])


def test_transistor_symmetric_part_positive_definite(transistor):
    G = transistor.dg(np.zeros(2))
    eigs = np.linalg.eigvalsh(0.5 * (G + G.T))
    assert eigs.min() == pytest.approx(0.3273, abs=5e-4)
    assert transistor.c_mono <= eigs.min()


def test_overrides_and_unknown_key(ideal_diode):
    q = ideal_diode.with_overrides(lam=0.25, T=1.0)
    assert (q.lam, q.T) == (0.25, 1.0)
    with pytest.raises(ValueError):
        ideal_diode.with_overrides(volts=3)


@pytest.mark.parametrize("factory", [make_practical_diode, make_ideal_diode, make_transistor])
def test_jacobian_matches_finite_differences(factory):
    p = factory()
    rng = np.random.default_rng(9)
    for _ in range(50):
        x = rng.uniform(-1.5, 1.5, size=p.n)
        J = np.asarray(p.dg(x), dtype=float)
        h = 1e-6
        for j in range(p.n):
            e = np.zeros(p.n)
            e[j] = h
            col = (p.g(x + e) - p.g(x - e)) / (2.0 * h)
            assert np.allclose(J[:, j], col, rtol=1e-6, atol=1e-9)


@pytest.mark.parametrize("factory", [make_practical_diode, make_ideal_diode, make_transistor])
def test_signal_derivative_matches_finite_differences(factory):
    p = factory()
    rng = np.random.default_rng(13)
    for _ in range(50):
        t = float(rng.uniform(0.01, p.T - 0.01))
        h = 1e-6
        fd = (p.p(t + h) - p.p(t - h)) / (2.0 * h)
        assert np.allclose(p.dp(t), fd, rtol=1e-6, atol=1e-9)


# --- reference oracles -------------------------------------------------------

def test_reference_requires_oracle():
    bare = ParametricProblem(
        name="bare", n=1, T=1.0,
        g=lambda x: x, dg=lambda x: np.eye(1),
        p=lambda t: np.zeros(1), dp=lambda t: np.zeros(1),
        F=ProductMap((AffineBranch(),)), lam=0.5, ell_path=1.0, kappa_subreg=1.0,
    )
    with pytest.raises(NoReference):
        reference_solution(bare, 0.5)


def test_reference_validates_time(ideal_diode):
    with pytest.raises(ValueError):
        reference_solution(ideal_diode, -0.1)
    with pytest.raises(ValueError):
        reference_solution(ideal_diode, 3.1)


def test_practical_reference_segment_and_branch(practical_diode):
    # p = 0 lies inside [-2, 1], so the current is pinned at zero
    assert reference_solution(practical_diode, 0.0)[0] == 0.0
    # p = 3 at t = pi/2: root of sinh x + 1 + sqrt(x) = 3, bracketed in (0, 1)
    want = brentq(lambda x: math.sinh(x) + 1.0 + math.sqrt(x) - 3.0, 1e-12, 1.0, xtol=1e-15)
    got = reference_solution(practical_diode, math.pi / 2.0)[0]
    assert got == pytest.approx(want, abs=1e-11)
    assert 0.0 < got < 1.0


def test_practical_reference_negative_branch():
    # force the lower branch by overriding the horizon past 3 sin t < -2
    p = make_practical_diode().with_overrides(T=5.0)
    t = 4.0
    pv = 3.0 * math.sin(t)
    assert pv < -2.0
    want = brentq(lambda x: math.sinh(x) - 2.0 - math.sqrt(-x) - pv, -2.0, -1e-12, xtol=1e-15)
    assert reference_solution(p, t)[0] == pytest.approx(want, abs=1e-11)


@pytest.mark.parametrize("name", ["practical-diode", "ideal-diode", "transistor"])
def test_reference_satisfies_inclusion(name, all_problems):
    problem = {p.name: p for p in all_problems}[name]
    ts = np.linspace(0.0, problem.T, 1000)
    worst = 0.0
    for t in ts:
        r = reference_solution(problem, float(t))
        worst = max(worst, residual(problem, float(t), r, r))
    assert worst <= 1e-9


def test_ideal_closed_form_matches_splitting_oracle(ideal_diode):
    oracle = splitting_oracle(ideal_diode)
    for t in np.linspace(0.0, 3.0, 100):
        a = reference_solution(ideal_diode, float(t))
        b = oracle(float(t))
        assert np.linalg.norm(a - b) <= 1e-10


def test_transistor_oracle_residual(transistor):
    for t in np.linspace(0.0, transistor.T, 100):
        x = reference_solution(transistor, float(t))
        assert residual(transistor, float(t), x, x) <= 1e-12


def test_transistor_oracle_cache_consistency(transistor):
    a = reference_solution(transistor, 2.0)
    b = reference_solution(transistor, 2.0)
    assert np.array_equal(a, b)
    a[0] = 99.0  # caller copies must not corrupt the cache
    assert reference_solution(transistor, 2.0)[0] != 99.0


def test_splitting_oracle_damping_rescues_large_lambda(transistor):
    # the raw map is expansive at lam=2, but the stall-triggered damping
    # still drives the residual to tolerance (undamped refine diverges there,
    # see test_solvers)
    oracle = splitting_oracle(transistor, lam=2.0)
    t = 1.5707963267948966
    x = oracle(t)
    assert residual(transistor, t, x, x) <= 1e-12


# --- path Lipschitz bounds ---------------------------------------------------

@pytest.mark.parametrize("name", ["practical-diode", "ideal-diode", "transistor"])
def test_reference_is_lipschitz_between_jumps(name, all_problems):
    problem = {p.name: p for p in all_problems}[name]
    ts = np.linspace(0.0, problem.T, 1200)
    for a, b in zip(ts, ts[1:]):
        mid = 0.5 * (a + b)
        if name == "transistor" and min(abs(mid - tj) for tj in TRANSISTOR_JUMPS) < 0.02:
            continue  # branch switches are genuine discontinuities of the path
        slope = float(
            np.linalg.norm(reference_solution(problem, float(b)) - reference_solution(problem, float(a)))
        ) / (b - a)
        assert slope <= problem.ell_path * 1.01


def test_estimated_lipschitz_matches_frozen_constants(practical_diode):
    est = estimate_path_lipschitz(practical_diode, samples=2000)
    assert est == pytest.approx(practical_diode.ell_path, rel=0.05)


def test_estimated_lipschitz_excludes_transistor_jumps(transistor):
    est = estimate_path_lipschitz(transistor, samples=2000)
    assert est == pytest.approx(transistor.ell_path, rel=0.08)
    assert est < 20.0  # raw jump slopes would be in the thousands
