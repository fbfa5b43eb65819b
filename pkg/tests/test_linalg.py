import numpy as np
import pytest

from singroot.errors import BreadthError, DegenerateError, RankError
from singroot.linalg import (
    complete_unitary,
    least_squares_solve,
    null_vector,
    regularized_newton_step,
    smallest_right_singular_vector,
    svd,
    track_shapes,
)
from singroot.poly import Poly, PolySystem


def test_svd_examples():
    f = svd(np.diag([3.0, 1.0]))
    np.testing.assert_allclose(f.singvals, [3, 1])
    np.testing.assert_allclose(np.abs(f.U), np.eye(2), atol=1e-15)
    np.testing.assert_allclose(np.abs(f.V), np.eye(2), atol=1e-15)
    f = svd([[0, -1], [0, 0]])
    np.testing.assert_allclose(f.singvals, [1, 0])
    np.testing.assert_allclose(f.V[:, 1], [1, 0], atol=1e-15)
    Q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((4, 4)))
    np.testing.assert_allclose(svd(Q).singvals, np.ones(4), rtol=1e-14)


def test_svd_reconstructs_and_orders():
    rng = np.random.default_rng(1)
    for shape in [(3, 3), (5, 3), (2, 4)]:
        A = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        f = svd(A)
        assert np.linalg.norm(f.reconstruct() - A) <= 1e-12 * np.linalg.norm(A)
        assert np.all(np.diff(f.singvals) <= 0) and np.all(f.singvals >= 0)


def test_svd_phase_is_deterministic():
    A = np.random.default_rng(2).standard_normal((3, 3))
    V1, V2 = svd(A).V, svd(A * np.exp(0.7j)).V
    np.testing.assert_allclose(V1, V2, atol=1e-12)
    for v in V1.T:
        k = np.argmax(np.abs(v))
        assert abs(v[k].imag) < 1e-14 and v[k].real > 0


def test_regularized_step_scalar():
    x = Poly.variable(0, 1)
    F = PolySystem([x**2])
    step = regularized_newton_step(F, [0.1])
    assert step.sigma_n == pytest.approx(0.2)
    assert step.y[0] == pytest.approx(0.2 * -0.01 / (0.04 + 0.2), rel=1e-14)
    assert abs(F([0.1 + step.y[0]])[0]) == pytest.approx(8.40278e-3, rel=1e-5)


def test_regularized_step_at_simple_root_is_zero():
    x1, x2 = Poly.variable(0, 2), Poly.variable(1, 2)
    F = PolySystem([x1 - 1, x2 + 2])
    assert np.all(regularized_newton_step(F, [1, -2]).y == 0)


def test_regularized_step_two_by_two():
    x1, x2 = Poly.variable(0, 2), Poly.variable(1, 2)
    F = PolySystem([x1 - 1, x2**2])
    x = np.array([1.01, 0.01])
    step = regularized_newton_step(F, x)
    assert step.sigma_n == pytest.approx(0.02)
    # y_i = sigma_i b_i / (sigma_i^2 + sigma_n) with b = -(0.01, 0.0001), sigma = (1, 0.02)
    np.testing.assert_allclose(step.y, [-0.01 / 1.02, -0.0001 * 0.02 / (0.0004 + 0.02)], rtol=1e-12)
    eps = np.linalg.norm(x - [1, 0])
    assert np.linalg.norm(F(x + step.y)) <= 10 * eps**2


def test_regularized_step_solves_normal_equations():
    rng = np.random.default_rng(4)
    for t, s in [(3, 3), (4, 3)]:
        polys = []
        for _ in range(t):
            terms = {tuple(rng.integers(0, 3, s)): complex(*rng.standard_normal(2)) for _ in range(5)}
            polys.append(Poly(terms, s))
        F = PolySystem(polys, s)
        x = rng.standard_normal(s)
        A, b = F.jacobian(x), -F(x)
        step = regularized_newton_step(F, x)
        lhs = (A.conj().T @ A + step.sigma_n * np.eye(s)) @ step.y
        rhs = A.conj().T @ b
        assert np.linalg.norm(lhs - rhs) <= 1e-10 * np.linalg.norm(rhs)


def test_null_vector_examples():
    np.testing.assert_allclose(null_vector(np.diag([1, 1e-9]), 1e-4), [0, 1])
    np.testing.assert_allclose(null_vector([[0, -1], [0, 0]], 1e-4), [1, 0])
    with pytest.raises(BreadthError) as info:
        null_vector(np.eye(2), 1e-4)
    assert info.value.corank == 0
    with pytest.raises(BreadthError) as info:
        null_vector(np.diag([1, 1e-9, 1e-10]), 1e-4)
    assert info.value.corank == 2


@pytest.mark.parametrize(
    "r1",
    [[1, 0], [0, 1], np.array([1, 1]) / np.sqrt(2), np.array([1j, 2, -1]) / np.sqrt(6), [1]],
)
def test_complete_unitary(r1):
    r1 = np.asarray(r1, dtype=complex)
    R = complete_unitary(r1)
    assert np.linalg.norm(R.conj().T @ R - np.eye(r1.size)) <= 1e-12
    np.testing.assert_allclose(R[:, 0], r1, atol=1e-15)


def test_complete_unitary_identity_for_e1():
    np.testing.assert_allclose(complete_unitary([1, 0, 0]), np.eye(3), atol=1e-15)


def test_complete_unitary_random():
    rng = np.random.default_rng(6)
    for n in range(1, 7):
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        R = complete_unitary(v / np.linalg.norm(v))
        assert np.linalg.norm(R.conj().T @ R - np.eye(n)) <= 1e-12
    with pytest.raises(ValueError):
        complete_unitary([1.0, 1.0])


def test_least_squares_examples():
    b = np.array([0.3, -2.0])
    np.testing.assert_allclose(least_squares_solve(np.eye(2), b), b)
    np.testing.assert_allclose(least_squares_solve([[2]], [-0.2]), [-0.1])
    v = least_squares_solve([[1, 0], [0, 1], [1, 1]], [1, 1, 2])
    np.testing.assert_allclose(v, [1, 1], atol=1e-15)
    with pytest.raises(RankError):
        least_squares_solve([[1, 1], [1, 1]], [1, 1])


def test_smallest_right_singular_vector_examples():
    v, smin, _ = smallest_right_singular_vector([[0, 1]])
    np.testing.assert_allclose(v, [1, 0])
    assert smin == 0
    v, _, _ = smallest_right_singular_vector([[1, 1]])
    np.testing.assert_allclose(v, [1, -1], atol=1e-15)
    v, smin, smax = smallest_right_singular_vector(np.eye(2), normalize=False)
    assert smin == smax == 1 and np.linalg.norm(v) == pytest.approx(1)
    with pytest.raises(DegenerateError):
        smallest_right_singular_vector([[1, 0]])


def test_track_shapes_records_svd():
    with track_shapes() as log:
        svd(np.ones((3, 2)))
    assert log == [(3, 2)]
    svd(np.ones((2, 2)))
    assert log == [(3, 2)]
