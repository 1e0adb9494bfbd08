import numpy as np
import pytest

from subcont import (PolytopeDomain, contains, enumerate_vertices,
                     feasibility_residual, hit_and_run, linear_maximize,
                     project_polytope, ratio_shrink)
from subcont.geometry import _HAVE_JIT

SIMPLEX = PolytopeDomain([[1.0, 1.0]], [1.0], [1.0, 1.0])


def _random_polytope(rng):
    n = int(rng.integers(1, 5))
    m = int(rng.integers(0, 4))
    A = rng.uniform(0.0, 1.0, size=(m, n))
    b = rng.uniform(0.3, 1.5, size=m)
    upper = rng.uniform(0.3, 1.5, size=n)
    return PolytopeDomain(A, b, upper)


# ----------------------------------------------------------------- contains

def test_contains_examples():
    assert contains(SIMPLEX, [0.5, 0.5])
    assert not contains(SIMPLEX, [1.0, 1.0])
    assert contains(SIMPLEX, [0.0, 0.0])


def test_feasibility_residual():
    assert feasibility_residual(SIMPLEX, [0.5, 0.5]) == 0.0
    assert feasibility_residual(SIMPLEX, [1.0, 1.0]) == pytest.approx(1.0)


# ---------------------------------------------------------------- LP oracle

def test_linear_maximize_examples():
    sol = linear_maximize(SIMPLEX, [2.0, 1.0])
    assert np.allclose(sol.point, [1.0, 0.0]) and sol.objective == pytest.approx(2.0)

    sol = linear_maximize(SIMPLEX, [0.0, 0.0])
    assert sol.objective == 0.0

    wide = PolytopeDomain([[1.0, 1.0]], [2.0], [1.0, 1.0])
    sol = linear_maximize(wide, [1.0, 1.0])
    assert np.allclose(sol.point, [1.0, 1.0]) and sol.objective == pytest.approx(2.0)


def test_linear_maximize_negative_costs_stay_home():
    sol = linear_maximize(SIMPLEX, [-1.0, -2.0])
    assert np.array_equal(sol.point, [0.0, 0.0])


def test_enumerate_vertices_examples():
    verts = {tuple(np.round(v, 9)) for v in enumerate_vertices(SIMPLEX)}
    assert verts == {(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)}

    box_only = PolytopeDomain(np.zeros((0, 2)), np.zeros(0), [1.0, 2.0])
    corners = {tuple(v) for v in enumerate_vertices(box_only)}
    assert corners == {(0, 0), (1, 0), (0, 2), (1, 2)}

    pinned = PolytopeDomain([[1.0, 0.0], [0.0, 1.0]], [0.0, 0.0], [1.0, 1.0])
    verts = enumerate_vertices(pinned)
    assert len(verts) == 1 and np.array_equal(verts[0], [0.0, 0.0])


def test_enumerate_vertices_guard():
    big = PolytopeDomain(np.zeros((0, 11)), np.zeros(0), np.ones(11))
    with pytest.raises(ValueError):
        enumerate_vertices(big)


def test_linear_maximize_matches_vertex_enumeration():
    rng = np.random.default_rng(0)
    for trial in range(60):
        P = _random_polytope(rng)
        c = rng.normal(size=P.dimension)
        sol = linear_maximize(P, c)
        best = max(float(c @ v) for v in enumerate_vertices(P))
        assert sol.objective == pytest.approx(best, abs=1e-8)
        assert contains(P, sol.point, 1e-9)


def test_linear_maximize_returns_vertex():
    rng = np.random.default_rng(4)
    for trial in range(40):
        P = _random_polytope(rng)
        n, m = P.dimension, P.num_rows
        sol = linear_maximize(P, rng.normal(size=n))
        assert len(sol.basis) >= n
        normals = np.vstack([P.A, np.eye(n), np.eye(n)]) if m else \
            np.vstack([np.eye(n), np.eye(n)])
        active = normals[sol.basis]
        assert np.linalg.matrix_rank(active) == n


def test_linear_maximize_deterministic():
    rng = np.random.default_rng(8)
    P = _random_polytope(rng)
    c = rng.normal(size=P.dimension)
    a = linear_maximize(P, c)
    b = linear_maximize(P, c)
    assert np.array_equal(a.point, b.point) and a.basis == b.basis


# --------------------------------------------------------------- projection

def test_project_examples():
    loose = PolytopeDomain([[1.0, 1.0]], [2.0], [1.0, 1.0])
    assert np.allclose(project_polytope(loose, [2.0, 0.0], 1e-9), [1.0, 0.0])

    p = project_polytope(SIMPLEX, [1.0, 1.0], 1e-9)
    assert np.allclose(p, [0.5, 0.5], atol=1e-7)

    inside = np.array([0.25, 0.25])
    assert np.allclose(project_polytope(SIMPLEX, inside, 1e-9), inside, atol=1e-9)


def test_project_variational_characterization():
    rng = np.random.default_rng(2)
    for trial in range(10):
        P = _random_polytope(rng)
        x = rng.uniform(-1, 2, size=P.dimension)
        p = project_polytope(P, x, 1e-8)
        # <x - p, q - p> <= tol for feasible q characterizes the projection
        for _ in range(100):
            q = ratio_shrink(P, rng.uniform(0, 1, size=P.dimension) * P.upper)
            assert float((x - p) @ (q - p)) <= 1e-6


def test_project_nonconvergence_carries_residual():
    with pytest.raises(RuntimeError, match="residual"):
        project_polytope(SIMPLEX, [5.0, 5.0], 1e-12, max_iter=1)


# -------------------------------------------------------------- hit-and-run

def test_hit_and_run_feasible_and_deterministic():
    rng = np.random.default_rng(0)
    for trial in range(5):
        P = _random_polytope(rng)
        s1 = hit_and_run(P, 25, seed=trial)
        s2 = hit_and_run(P, 25, seed=trial)
        assert np.array_equal(s1, s2)
        assert all(contains(P, row, 1e-9) for row in s1)


def test_hit_and_run_uniform_mean_on_interval():
    P = PolytopeDomain(np.zeros((0, 1)), np.zeros(0), [1.0])
    s = hit_and_run(P, 3000, seed=3)
    assert abs(s.mean() - 0.5) <= 0.05


def test_hit_and_run_uniform_moments_on_simplex():
    # uniform on {x >= 0, x1 + x2 <= 1} has coordinate mean 1/3
    s = hit_and_run(SIMPLEX, 4000, seed=11)
    assert np.max(np.abs(s.mean(axis=0) - 1.0 / 3.0)) <= 0.03
    assert all(contains(SIMPLEX, row, 1e-9) for row in s)


@pytest.mark.skipif(not _HAVE_JIT, reason="jit accelerator unavailable")
def test_hit_and_run_jit_matches_numpy_reference():
    rng = np.random.default_rng(1)
    for trial in range(3):
        P = _random_polytope(rng)
        fast = hit_and_run(P, 30, seed=trial, use_jit=True)
        ref = hit_and_run(P, 30, seed=trial, use_jit=False)
        assert np.array_equal(fast, ref)
    inst_P = PolytopeDomain(rng.uniform(0, 1, (5, 8)), np.ones(5), np.ones(8))
    assert np.array_equal(hit_and_run(inst_P, 40, seed=9, use_jit=True),
                          hit_and_run(inst_P, 40, seed=9, use_jit=False))


def test_hit_and_run_rejects_bad_k():
    with pytest.raises(ValueError):
        hit_and_run(SIMPLEX, 0, seed=0)


def test_hit_and_run_on_pinned_polytope_stays_at_origin():
    # rows with b = 0 pin every coordinate; the feasible set is just {0} and
    # the lazy chain samples it without erroring
    pinned = PolytopeDomain([[1.0, 0.0], [0.0, 1.0]], [0.0, 0.0], [1.0, 1.0])
    s = hit_and_run(pinned, 10, seed=0)
    assert np.array_equal(s, np.zeros((10, 2)))


# ------------------------------------------------------------- ratio shrink

def test_ratio_shrink_examples():
    assert np.allclose(ratio_shrink(SIMPLEX, [2.0, 2.0]), [0.5, 0.5])
    feasible = np.array([0.25, 0.5])
    assert np.array_equal(ratio_shrink(SIMPLEX, feasible), feasible)
    assert np.array_equal(ratio_shrink(SIMPLEX, [0.0, 0.0]), [0.0, 0.0])


def test_ratio_shrink_rejects_negative():
    with pytest.raises(ValueError):
        ratio_shrink(SIMPLEX, [-0.1, 0.5])


def test_ratio_shrink_always_feasible():
    rng = np.random.default_rng(5)
    for trial in range(50):
        P = _random_polytope(rng)
        x = rng.uniform(0, 3, size=P.dimension)
        assert contains(P, ratio_shrink(P, x), 1e-9)
