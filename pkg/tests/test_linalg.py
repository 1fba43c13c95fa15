import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from csarbandit.exceptions import InvalidParams, NotSymmetric, Singular
from csarbandit.hadamard import hadamard, sylvester
from csarbandit.linalg import (
    condition_number,
    determinant,
    inverse,
    mse,
    rankdata,
    singular_values,
    solve,
    spearman,
    sym_eigenvalues,
)


def test_solve_examples():
    z = np.array([1.0, -2.0, 3.0])
    np.testing.assert_array_equal(solve(np.eye(3), z), z)
    h = sylvester(2).entries
    np.testing.assert_allclose(solve(h, h @ [1, 2, 3, 4]), [1, 2, 3, 4], atol=1e-14)
    with pytest.raises(Singular):
        solve([[1, 2, 3], [1, 2, 3], [0, 1, 1]], [1, 1, 1])


def test_solve_shape_errors():
    with pytest.raises(InvalidParams):
        solve(np.ones((2, 3)), [1, 2])


def test_eigen_examples():
    np.testing.assert_allclose(sym_eigenvalues(np.diag([3.0, -1.0, 2.0])), [-1, 2, 3])
    h = hadamard(12).entries.astype(float)
    np.testing.assert_allclose(sym_eigenvalues(h.T @ h), np.full(12, 12.0), atol=1e-10)
    np.testing.assert_allclose(sym_eigenvalues([[2, 1], [1, 2]]), [1, 3], atol=1e-14)
    with pytest.raises(NotSymmetric):
        sym_eigenvalues([[1, 2], [0, 1]])


def test_condition_examples():
    for order in (2, 4, 8, 12, 20):
        assert condition_number(hadamard(order).entries) == pytest.approx(1.0, abs=1e-12)
    assert condition_number(np.diag([3.0, 1.0])) == pytest.approx(3.0, abs=1e-12)
    with pytest.raises(Singular):
        condition_number([[1, 2], [2, 4]])


def test_spearman_examples():
    assert spearman([1, 2, 3, 4], [10, 20, 30, 40]) == pytest.approx(1.0)
    assert spearman([1, 2, 3, 4], [4, 3, 2, 1]) == pytest.approx(-1.0)
    assert spearman([1, 2, 3], [1, 1, 1]) == 0.0
    np.testing.assert_array_equal(rankdata([3, 1, 3, 2]), [3.5, 1, 3.5, 2])


def test_mse_examples():
    assert mse([1, 2, 3], [1, 2, 3]) == 0.0
    assert mse(np.arange(5) + 2.5, np.arange(5)) == pytest.approx(6.25)
    assert mse([0, 0], [1, -1]) == 1.0


# ---- numpy oracles on random inputs

square = st.integers(1, 9).flatmap(
    lambda n: arrays(np.float64, (n, n), elements=st.floats(-10, 10, allow_nan=False, width=32))
)


@settings(max_examples=150, deadline=None)
@given(square)
def test_solve_and_det_against_numpy(a):
    z = np.arange(1, a.shape[0] + 1, dtype=float)
    if np.linalg.cond(a) > 1e8:
        return
    np.testing.assert_allclose(solve(a, z), np.linalg.solve(a, z), rtol=1e-6, atol=1e-8)
    np.testing.assert_allclose(inverse(a) @ a, np.eye(a.shape[0]), atol=1e-6)
    assert determinant(a) == pytest.approx(np.linalg.det(a), rel=1e-7, abs=1e-9)


@settings(max_examples=150, deadline=None)
@given(square)
def test_eigenvalues_against_numpy(a):
    s = a + a.T
    ours = sym_eigenvalues(s)
    np.testing.assert_allclose(ours, np.linalg.eigvalsh(s), atol=1e-9 * max(1.0, np.abs(s).max()))
    assert ours.sum() == pytest.approx(np.trace(s), abs=1e-8 * max(1.0, np.abs(s).sum()))


@settings(max_examples=150, deadline=None)
@given(square)
def test_singular_values_against_numpy(a):
    np.testing.assert_allclose(
        singular_values(a), np.linalg.svd(a, compute_uv=False), atol=1e-9 * max(1.0, np.abs(a).max())
    )


def test_condition_against_numpy():
    rng = np.random.default_rng(0)
    for _ in range(100):
        m = rng.choice([-1.0, 1.0], size=(8, 8))
        if abs(np.linalg.det(m)) < 1e-6:
            with pytest.raises(Singular):
                condition_number(m)
            continue
        assert condition_number(m) == pytest.approx(np.linalg.cond(m), rel=1e-8)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-100, 100), min_size=3, max_size=30), st.data())
def test_spearman_against_scipy(xs, data):
    scipy_stats = pytest.importorskip("scipy.stats")
    ys = data.draw(st.lists(st.floats(-100, 100), min_size=len(xs), max_size=len(xs)))
    ours = spearman(xs, ys)
    if len(set(xs)) == 1 or len(set(ys)) == 1:
        assert ours == 0.0
    else:
        assert ours == pytest.approx(scipy_stats.spearmanr(xs, ys)[0], abs=1e-10)
