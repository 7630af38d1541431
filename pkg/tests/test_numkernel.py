import numpy as np
import pytest

from slspec import numkernel
from slspec.errors import DimensionError, RankDeficiencyError, SingularMatrixError


def test_det_identity():
    assert numkernel.det(np.eye(4)) == pytest.approx(1.0, abs=1e-14)


def test_det_2x2_closed_form():
    assert numkernel.det(np.array([[1.0, 2.0], [3.0, 4.0]])) == pytest.approx(-2.0, abs=1e-14)


def test_det_zero_matrix():
    assert numkernel.det(np.zeros((2, 2))) == 0.0


def test_det_rejects_non_square():
    with pytest.raises(DimensionError):
        numkernel.det(np.zeros((2, 3)))


def test_inverse_identity():
    np.testing.assert_allclose(numkernel.inverse(np.eye(3)), np.eye(3), atol=1e-14)


def test_inverse_diagonal():
    np.testing.assert_allclose(
        numkernel.inverse(np.diag([2.0, 4.0])), np.diag([0.5, 0.25]), atol=1e-14
    )


def test_inverse_shear():
    m = np.array([[1.0, 1.0], [0.0, 1.0]])
    np.testing.assert_allclose(numkernel.inverse(m), [[1.0, -1.0], [0.0, 1.0]], atol=1e-14)


def test_inverse_singular_carries_det():
    with pytest.raises(SingularMatrixError) as info:
        numkernel.inverse(np.array([[1.0, 2.0], [2.0, 4.0]]))
    assert info.value.det == pytest.approx(0.0, abs=1e-12)


def test_nullspace_zero_matrix():
    basis = numkernel.nullspace(np.zeros((2, 2)), tol=1e-12)
    assert basis.shape == (2, 2)
    np.testing.assert_allclose(basis.T @ basis, np.eye(2), atol=1e-12)


def test_nullspace_identity_empty():
    assert numkernel.nullspace(np.eye(3), tol=1e-12).shape == (3, 0)


def test_nullspace_rank_one_diagonal():
    basis = numkernel.nullspace(np.diag([1.0, 0.0]), tol=1e-12)
    assert basis.shape == (2, 1)
    np.testing.assert_allclose(np.abs(basis[:, 0]), [0.0, 1.0], atol=1e-12)


def test_orthonormalize_axis_scaling():
    q = numkernel.orthonormalize(np.array([[2.0, 0.0], [0.0, 3.0]]))
    np.testing.assert_allclose(np.abs(q), np.eye(2), atol=1e-14)


def test_orthonormalize_single_vector():
    q = numkernel.orthonormalize(np.array([[1.0], [1.0]]))
    np.testing.assert_allclose(q[:, 0], [1 / np.sqrt(2)] * 2, atol=1e-14)


def test_orthonormalize_classical_gram_schmidt():
    q = numkernel.orthonormalize(np.array([[1.0, 1.0], [0.0, 1.0]]))
    np.testing.assert_allclose(q, np.eye(2), atol=1e-14)


def test_orthonormalize_rejects_dependent():
    with pytest.raises(RankDeficiencyError):
        numkernel.orthonormalize(np.array([[1.0, 2.0], [1.0, 2.0]]))


def test_expm_zero():
    np.testing.assert_allclose(numkernel.expm(np.zeros((3, 3))), np.eye(3), atol=1e-14)


def test_expm_scalar():
    assert numkernel.expm(np.array([[1.0]]))[0, 0] == pytest.approx(np.e, rel=1e-13)


def test_expm_nilpotent():
    m = np.array([[0.0, 1.0], [0.0, 0.0]])
    np.testing.assert_allclose(numkernel.expm(m), [[1.0, 1.0], [0.0, 1.0]], atol=1e-14)


def test_as_matrix_rejects_nan():
    with pytest.raises(ValueError):
        numkernel.as_matrix([[np.nan, 0.0], [0.0, 1.0]])


def test_det_multiplicative_property():
    rng = np.random.default_rng(7)
    for _ in range(25):
        a = np.eye(4) + 0.5 * rng.standard_normal((4, 4))
        b = np.eye(4) + 0.5 * rng.standard_normal((4, 4))
        lhs = numkernel.det(a @ b)
        rhs = numkernel.det(a) * numkernel.det(b)
        assert lhs == pytest.approx(rhs, rel=1e-10)


def test_nullspace_dimension_plus_rank():
    rng = np.random.default_rng(11)
    for cols in (4, 6):
        for rank in range(0, cols):
            left = rng.standard_normal((5, rank))
            right = rng.standard_normal((rank, cols))
            m = left @ right if rank else np.zeros((5, cols))
            basis = numkernel.nullspace(m, tol=1e-10)
            assert basis.shape[1] + rank == cols


def test_expm_inverse_property():
    rng = np.random.default_rng(3)
    for _ in range(10):
        m = rng.standard_normal((4, 4))
        m *= 5.0 / max(np.linalg.norm(m, 2), 5.0)
        prod = numkernel.expm(m) @ numkernel.expm(-m)
        np.testing.assert_allclose(prod, np.eye(4), atol=1e-10)
