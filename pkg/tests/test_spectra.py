import math

import numpy as np
import pytest

from entflow.errors import DimensionMismatch, EmptyInput, InvalidInput, NotHermitian, NotPositiveDefinite
from entflow.spectra import (
    eig_hermitian,
    inv_sqrt,
    lambda_max,
    relative_eig_max,
    sqrt_pd,
    tensor_lambda_max,
)
from oracles import kron_all, random_pd, random_unitary


def rotation(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


class TestEigHermitian:
    def test_diagonal(self):
        vals, _ = eig_hermitian(np.diag([1.0, 0.5]))
        assert vals.tolist() == [0.5, 1.0]

    def test_identity(self):
        vals, vecs = eig_hermitian(np.eye(3))
        assert np.allclose(vals, [1, 1, 1], atol=0)
        assert np.allclose(vecs @ vecs.conj().T, np.eye(3), atol=1e-15)

    def test_real_symmetric_pair(self):
        vals, _ = eig_hermitian([[2, 1], [1, 2]])
        assert vals == pytest.approx([1.0, 3.0], abs=1e-14)

    @pytest.mark.parametrize("d", range(1, 9))
    def test_reconstruction_and_orthonormality(self, rng, d):
        for _ in range(5):
            a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            a = 10 * (a + a.conj().T)
            vals, vecs = eig_hermitian(a)
            assert np.all(np.diff(vals) >= 0)
            resid = np.max(np.abs(a - (vecs * vals) @ vecs.conj().T))
            assert resid <= 1e-11 * np.max(np.abs(a))
            assert np.max(np.abs(vecs.conj().T @ vecs - np.eye(d))) < 1e-12
            assert vals == pytest.approx(np.linalg.eigvalsh(a), abs=1e-11 * np.max(np.abs(a)))

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitian):
            eig_hermitian([[1, 2], [0, 1]])

    def test_within_tolerance_is_symmetrized(self):
        vals, _ = eig_hermitian([[1, 1e-13], [0, 1]])
        assert vals == pytest.approx([1 - 5e-14, 1 + 5e-14], abs=1e-15)

    def test_rejects_nonfinite_and_nonsquare(self):
        with pytest.raises(InvalidInput):
            eig_hermitian([[math.nan]])
        with pytest.raises(InvalidInput):
            eig_hermitian([[1, 2, 3]])

    def test_degenerate_spectrum(self):
        u = random_unitary(np.random.default_rng(3), 4)
        a = (u * np.array([2.0, 2.0, 2.0, -1.0])) @ u.conj().T
        vals, vecs = eig_hermitian(a)
        assert vals == pytest.approx([-1, 2, 2, 2], abs=1e-13)
        assert np.max(np.abs(a - (vecs * vals) @ vecs.conj().T)) < 1e-12


class TestMatrixFunctions:
    def test_inv_sqrt_and_sqrt(self, rng):
        g = random_pd(rng, 4)
        w = inv_sqrt(g)
        assert np.allclose(w @ g @ w, np.eye(4), atol=1e-12)
        s = sqrt_pd(g)
        assert np.allclose(s @ s, g, atol=1e-11)

    def test_not_pd(self):
        with pytest.raises(NotPositiveDefinite):
            inv_sqrt(np.diag([1.0, -1.0]))


class TestRelativeEigMax:
    def test_commuting_diagonal(self):
        assert relative_eig_max(np.diag([1, 0.8]), np.diag([1, 0.5])) == pytest.approx(1.0, abs=1e-15)

    def test_equal_arguments(self, rng):
        g = random_pd(rng, 3)
        assert relative_eig_max(g, g) == pytest.approx(1.0, abs=1e-12)

    def test_rotated_exceeds_one(self):
        g = np.diag([1.0, 0.5])
        r = rotation(math.pi / 4)
        h = r @ g @ r.T
        # oracle: largest root of det(H - x G) = 0 by hand; trace/det of G^-1 H
        m = np.linalg.inv(g) @ h
        tr, det = np.trace(m), np.linalg.det(m)
        expected = (tr + math.sqrt(tr * tr - 4 * det)) / 2
        assert expected == pytest.approx(1.125 + math.sqrt(1.125**2 - 1), abs=1e-12)
        assert relative_eig_max(g, h) == pytest.approx(expected, abs=1e-13)
        assert relative_eig_max(g, h) > 1

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            relative_eig_max(np.eye(2), np.eye(3))

    def test_against_generalized_eigensolver(self, rng):
        import scipy.linalg

        for d in (2, 3, 5):
            g, h = random_pd(rng, d), random_pd(rng, d)
            ref = np.max(scipy.linalg.eigh(h, g, eigvals_only=True))
            assert relative_eig_max(g, h) == pytest.approx(ref, rel=1e-11)

    def test_product_of_both_directions_at_least_one(self, rng):
        for _ in range(50):
            g, h = random_pd(rng, 3), random_pd(rng, 3)
            assert relative_eig_max(g, h) * relative_eig_max(h, g) >= 1 - 1e-12
        g = random_pd(rng, 3)
        assert relative_eig_max(g, 2.5 * g) * relative_eig_max(2.5 * g, g) == pytest.approx(1.0, abs=1e-12)


class TestTensorLambdaMax:
    def test_examples(self):
        assert tensor_lambda_max([np.diag([1, 0.8])] * 5) == 1.0
        assert tensor_lambda_max([np.diag([2, 1]), np.diag([3, 1])]) == pytest.approx(6.0, abs=1e-14)
        assert tensor_lambda_max([np.eye(2)] * 4) == 1.0

    def test_empty(self):
        with pytest.raises(EmptyInput):
            tensor_lambda_max([])

    def test_against_kronecker(self, rng):
        for dims in ((2, 2, 2), (3, 2), (2, 2, 2, 2, 2, 2), (4, 4, 4)):
            parts = [random_pd(rng, d) for d in dims]
            ref = np.max(np.linalg.eigvalsh(kron_all(parts)))
            assert tensor_lambda_max(parts) == pytest.approx(ref, rel=1e-9)


def test_unitary_invariance(rng):
    a = random_pd(rng, 5, shift=0.0)
    u = random_unitary(rng, 5)
    v1 = eig_hermitian(a)[0]
    v2 = eig_hermitian(u @ a @ u.conj().T)[0]
    assert np.max(np.abs(v1 - v2)) <= 1e-10


def test_lambda_max(rng):
    a = random_pd(rng, 6)
    assert lambda_max(a) == pytest.approx(np.max(np.linalg.eigvalsh(a)), rel=1e-12)
