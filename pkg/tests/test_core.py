import numpy as np
import pytest

from subcont import (BoxDomain, ObjectiveHandle, PolytopeDomain, QuadraticInstance,
                     SolverTrace, finite_diff_gradient, lattice_ops)


def test_lattice_ops_examples():
    j, m = lattice_ops([1, 0], [0, 1])
    assert np.array_equal(j, [1, 1]) and np.array_equal(m, [0, 0])

    j, m = lattice_ops([0.3, 0.7], [0.3, 0.7])
    assert np.array_equal(j, [0.3, 0.7]) and np.array_equal(m, [0.3, 0.7])

    j, m = lattice_ops([2, -1, 0], [1, 0, 0])
    assert np.array_equal(j, [2, 0, 0]) and np.array_equal(m, [1, -1, 0])


def test_lattice_ops_dimension_mismatch():
    with pytest.raises(ValueError):
        lattice_ops([1, 2], [1, 2, 3])


def test_lattice_join_meet_ordering_and_identity():
    rng = np.random.default_rng(0)
    for _ in range(100):
        x = rng.normal(size=5)
        y = rng.normal(size=5)
        j, m = lattice_ops(x, y)
        assert np.all(j >= x) and np.all(j >= y)
        assert np.all(m <= x) and np.all(m <= y)
        # each coordinate of join/meet copies one input, so the identity is exact
        assert np.array_equal(j + m, x + y)


def test_finite_diff_linear_is_exact():
    g = finite_diff_gradient(lambda v: v[0] + v[1], np.array([0.4, 1.7]), h=1e-5)
    assert np.max(np.abs(g - 1.0)) <= 1e-8


def test_finite_diff_bilinear():
    g = finite_diff_gradient(lambda v: v[0] * v[1], np.array([2.0, 3.0]), h=1e-5)
    assert np.max(np.abs(g - [3.0, 2.0])) <= 1e-6


def test_finite_diff_constant_is_zero():
    g = finite_diff_gradient(lambda v: 4.2, np.array([0.1, 0.2, 0.3]), h=1e-5)
    assert np.array_equal(g, np.zeros(3))


def test_finite_diff_matches_quadratic_gradient():
    rng = np.random.default_rng(1)
    M = rng.uniform(-1, 1, size=(4, 4))
    inst = QuadraticInstance((M + M.T) / 2, rng.uniform(-1, 1, size=4), 0.5)
    for _ in range(100):
        x = rng.uniform(-1, 1, size=4)
        fd = finite_diff_gradient(inst.handle(), x, h=1e-5)
        exact = inst.gradient(x)
        rel = np.abs(fd - exact) / np.maximum(1.0, np.abs(exact))
        assert np.max(rel) <= 1e-5


def test_finite_diff_nonfinite_identifies_coordinate():
    def bad(v):
        return float("nan") if v[1] > 0.5 else float(v[0])

    with pytest.raises(ValueError, match="coordinate 1"):
        finite_diff_gradient(bad, np.array([0.0, 0.5]), h=0.1)


def test_box_validation():
    with pytest.raises(ValueError):
        BoxDomain([1.0, 0.0], [0.0, 1.0])
    with pytest.raises(ValueError):
        BoxDomain([0.0, np.inf], [1.0, 2.0])
    box = BoxDomain([0, 0], [1, 2])
    assert box.dimension == 2
    assert box.contains([1, 2]) and not box.contains([1.1, 0])


def test_polytope_validation():
    with pytest.raises(ValueError):
        PolytopeDomain([[-1.0, 0.0]], [1.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        PolytopeDomain([[1.0, 0.0]], [-1.0], [1.0, 1.0])
    P = PolytopeDomain(np.zeros((0, 2)), np.zeros(0), [1.0, 1.0])
    assert P.num_rows == 0 and P.dimension == 2
    assert P.box().contains([0.5, 0.5])


def test_objective_handle_flag_invariants():
    with pytest.raises(ValueError):
        ObjectiveHandle(2, lambda x: 0.0, differentiable=True)  # flag without gradient
    with pytest.raises(ValueError):
        ObjectiveHandle(2, lambda x: 0.0, gradient=lambda x: x)  # gradient without flag
    with pytest.raises(ValueError):
        ObjectiveHandle(2, lambda x: 0.0, dr_submodular=True, submodular=False)


def test_trace_invariants():
    tr = SolverTrace()
    tr.append(0, 0.0, 1.0, 0.0)
    tr.append(1, 0.5, 2.0, 0.0)
    with pytest.raises(ValueError):
        tr.append(1, 0.6, 2.0, 0.0)       # stalled iteration index
    with pytest.raises(ValueError):
        tr.append(2, 0.4, 2.0, 0.0)       # decreasing cumulative step
    with pytest.raises(ValueError):
        tr.append(2, 1.5, 2.0, 0.0)       # step beyond 1
    with pytest.raises(ValueError):
        tr.append(2, 0.9, 2.0, -1.0)      # negative residual
    tr.append(2, 1.0, 3.0, 0.0)
    assert tr.final_objective == 3.0
    assert len(tr) == 3
