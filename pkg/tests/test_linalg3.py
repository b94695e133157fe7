"""Eigensolver, cubic-oracle, SVD bridge, and 4x4 utility tests."""

import math
import random

import numpy as np
import pytest

from sparseloc.errors import InsufficientDataError, InvalidInputError
from sparseloc.linalg3 import (
    Mat4,
    SymMatrix3,
    Vec3,
    char_poly_roots3,
    mat4_det,
    mat4_inverse,
    mat4_mul,
    svd_right3,
    sym_eigen3,
    transform_point,
)
from util import eig_oracle, random_symmetric


def residual_ok(s: SymMatrix3, tol_scale: float = 1e-9) -> None:
    eig = sym_eigen3(s)
    bound = tol_scale * max(1.0, s.frobenius())
    for lam, v in zip(eig.values, eig.vectors):
        r = s.apply(v).sub(v.scaled(lam))
        assert r.norm() <= bound, f"residual {r.norm()} > {bound}"


class TestSymEigen3:
    def test_diagonal_case(self):
        eig = sym_eigen3(SymMatrix3.diagonal(3.0, 2.0, 1.0))
        assert eig.values == pytest.approx((3.0, 2.0, 1.0), abs=1e-12)
        expected = (Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1))
        for v, e in zip(eig.vectors, expected):
            assert abs(abs(v.dot(e)) - 1.0) < 1e-12

    def test_known_2x2_block(self):
        s = SymMatrix3.from_rows([[2, 1, 0], [1, 2, 0], [0, 0, 5]])
        eig = sym_eigen3(s)
        assert eig.values == pytest.approx((5.0, 3.0, 1.0), abs=1e-10)
        inv_sqrt2 = 1.0 / math.sqrt(2.0)
        expected = (
            Vec3(0, 0, 1),
            Vec3(inv_sqrt2, inv_sqrt2, 0),
            Vec3(inv_sqrt2, -inv_sqrt2, 0),
        )
        for v, e in zip(eig.vectors, expected):
            assert abs(abs(v.dot(e)) - 1.0) < 1e-10

    def test_identity_matrix(self):
        eig = sym_eigen3(SymMatrix3.diagonal(1.0, 1.0, 1.0))
        assert eig.values == pytest.approx((1.0, 1.0, 1.0), abs=1e-12)
        residual_ok(SymMatrix3.diagonal(1.0, 1.0, 1.0))

    def test_zero_matrix(self):
        eig = sym_eigen3(SymMatrix3.diagonal(0.0, 0.0, 0.0))
        assert eig.values == (0.0, 0.0, 0.0)

    def test_descending_and_orthonormal_random(self):
        rng = random.Random(101)
        for _ in range(300):
            s = random_symmetric(rng)
            eig = sym_eigen3(s)
            assert eig.values[0] >= eig.values[1] >= eig.values[2]
            v1, v2, v3 = eig.vectors
            for v in eig.vectors:
                assert abs(v.norm() - 1.0) <= 1e-10
            assert abs(v1.dot(v2)) <= 1e-10
            assert abs(v1.dot(v3)) <= 1e-10
            assert abs(v2.dot(v3)) <= 1e-10

    def test_residual_trace_det_conservation(self):
        rng = random.Random(202)
        for _ in range(300):
            s = random_symmetric(rng)
            residual_ok(s)
            eig = sym_eigen3(s)
            tr = s.trace()
            assert abs(sum(eig.values) - tr) <= 1e-9 * max(1.0, abs(tr))
            det = s.det()
            prod = eig.values[0] * eig.values[1] * eig.values[2]
            assert abs(prod - det) <= 1e-8 * max(1.0, abs(det))

    def test_matches_numpy_oracle(self):
        rng = random.Random(303)
        for _ in range(200):
            s = random_symmetric(rng)
            eig = sym_eigen3(s)
            np_values, np_vectors = eig_oracle(s)
            scale = max(1.0, s.frobenius())
            assert np.allclose(eig.values, np_values, atol=1e-9 * scale)

    def test_repeated_eigenvalue_keeps_postconditions(self):
        # eigenspace is a whole plane; any orthonormal basis is acceptable
        s = SymMatrix3.diagonal(4.0, 4.0, 0.0)
        residual_ok(s)
        eig = sym_eigen3(s)
        assert eig.values == pytest.approx((4.0, 4.0, 0.0), abs=1e-12)

    def test_non_finite_rejected(self):
        with pytest.raises(InvalidInputError):
            SymMatrix3(1.0, math.nan, 0.0, 1.0, 0.0, 1.0)
        with pytest.raises(InvalidInputError):
            SymMatrix3(math.inf, 0.0, 0.0, 1.0, 0.0, 1.0)


class TestCharPolyRoots3:
    def test_diagonal(self):
        assert char_poly_roots3(SymMatrix3.diagonal(4.0, 4.0, 0.0)) == pytest.approx(
            (4.0, 4.0, 0.0), abs=1e-12
        )

    def test_zero(self):
        assert char_poly_roots3(SymMatrix3.diagonal(0.0, 0.0, 0.0)) == (0.0, 0.0, 0.0)

    def test_agrees_with_jacobi(self):
        rng = random.Random(404)
        for _ in range(300):
            s = random_symmetric(rng)
            roots = char_poly_roots3(s)
            eig = sym_eigen3(s)
            scale = max(1.0, s.frobenius())
            for r, lam in zip(roots, eig.values):
                assert abs(r - lam) <= 1e-8 * scale


class TestSvdRight3:
    def test_rank_one_pair(self):
        x = np.asarray([[1.0, -1.0], [0.0, 0.0], [0.0, 0.0]])
        sig = svd_right3(x)
        assert sig.sigma == pytest.approx((math.sqrt(2.0), 0.0, 0.0), abs=1e-12)
        assert abs(abs(sig.vectors[0].dot(Vec3(1, 0, 0))) - 1.0) < 1e-12

    def test_all_zero_columns(self):
        x = np.zeros((3, 5))
        sig = svd_right3(x)
        assert sig.sigma == (0.0, 0.0, 0.0)

    def test_single_column_rejected(self):
        with pytest.raises(InsufficientDataError):
            svd_right3(np.zeros((3, 1)))

    def test_matches_covariance_eigen(self):
        rng = random.Random(505)
        for _ in range(50):
            n = rng.randint(4, 60)
            x = np.asarray(
                [[rng.uniform(-5, 5) for _ in range(n)] for _ in range(3)]
            )
            x = x - x.mean(axis=1, keepdims=True)
            sig = svd_right3(x)
            cov = x @ x.T / (n - 1)
            eig = sym_eigen3(SymMatrix3.from_rows(cov.tolist()))
            for s_val, lam in zip(sig.sigma, eig.values):
                got = s_val * s_val / (n - 1)
                assert abs(got - lam) <= 1e-9 * max(1.0, abs(lam))


class TestMat4:
    def test_identity_product(self):
        i = Mat4.identity()
        assert mat4_mul(i, i).m == i.m

    def test_transform_point_identity(self):
        p, w = transform_point(Mat4.identity(), Vec3(1, 2, 3))
        assert p == Vec3(1.0, 2.0, 3.0)
        assert w == 1.0

    def test_translation(self):
        t = Mat4.translation(Vec3(1, 0, 0))
        p, w = transform_point(t, Vec3(0, 0, 0))
        assert p == Vec3(1.0, 0.0, 0.0)
        assert w == 1.0

    def test_inverse_roundtrip(self):
        rng = random.Random(606)
        for _ in range(50):
            m = Mat4(tuple(rng.uniform(-2, 2) for _ in range(16)))
            if abs(mat4_det(m)) < 1e-6:
                continue
            product = mat4_mul(m, mat4_inverse(m))
            for r in range(4):
                for c in range(4):
                    want = 1.0 if r == c else 0.0
                    assert abs(product[r, c] - want) < 1e-9

    def test_singular_inverse_rejected(self):
        singular = Mat4.from_rows(
            [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 1]]
        )
        with pytest.raises(InvalidInputError):
            mat4_inverse(singular)

    def test_non_finite_rejected(self):
        with pytest.raises(InvalidInputError):
            Mat4(tuple([math.nan] + [0.0] * 15))
