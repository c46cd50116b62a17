import numpy as np
import pytest

from factorcast.linalg import (SingularMatrixError, rank1_reg_solve, real_roots,
                               solve_spd, sym_eig)


def adjugate_inverse(a):
    """Brute-force inverse via cofactor expansion (test oracle, n <= 4)."""
    n = a.shape[0]
    cof = np.empty_like(a)
    for i in range(n):
        for j in range(n):
            minor = np.delete(np.delete(a, i, axis=0), j, axis=1)
            cof[i, j] = (-1) ** (i + j) * np.linalg.det(minor)
    return cof.T / np.linalg.det(a)


class TestSolveSpd:
    def test_identity(self):
        x = solve_spd(np.eye(2), np.array([[3.0], [4.0]]))
        assert np.allclose(x, [[3.0], [4.0]])

    def test_scalar(self):
        assert np.allclose(solve_spd(np.array([[2.0]]), np.array([[6.0]])), [[3.0]])

    def test_against_adjugate_inverse(self, rng):
        m = rng.normal(size=(4, 4))
        a = m.T @ m + np.eye(4)
        a = 0.5 * (a + a.T)
        b = rng.normal(size=(4, 2))
        x = solve_spd(a, b)
        assert np.allclose(x, adjugate_inverse(a) @ b, atol=1e-9)
        assert np.max(np.abs(a @ x - b)) <= 1e-9 * max(1.0, np.max(np.abs(b)))

    def test_vector_rhs_shape(self, rng):
        a = np.eye(3) * 2.0
        x = solve_spd(a, np.ones(3))
        assert x.shape == (3,)
        assert np.allclose(x, 0.5)

    def test_residual_property(self, rng):
        for _ in range(200):
            n = int(rng.integers(1, 9))
            m = rng.normal(size=(n, n))
            a = m.T @ m + 0.1 * np.eye(n)
            a = 0.5 * (a + a.T)
            b = rng.normal(size=(n, int(rng.integers(1, 4))))
            x = solve_spd(a, b)
            denom = max(np.max(np.abs(b)), 1.0)
            assert np.max(np.abs(a @ x - b)) / denom <= 1e-9

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError, match="symmetric"):
            solve_spd(np.array([[1.0, 0.5], [0.0, 1.0]]), np.ones(2))

    def test_indefinite_rejected(self):
        with pytest.raises(SingularMatrixError):
            solve_spd(np.array([[1.0, 0.0], [0.0, -1.0]]), np.ones(2))

    def test_singular_rejected(self):
        a = np.ones((2, 2))
        with pytest.raises(SingularMatrixError):
            solve_spd(a, np.ones(2))

    def test_nonfinite_rejected(self):
        a = np.eye(2)
        a[0, 0] = np.nan
        with pytest.raises(ValueError):
            solve_spd(a, np.ones(2))


class TestRank1RegSolve:
    def test_zero_direction(self, rng):
        b = rng.normal(size=(4, 3))
        assert np.allclose(rank1_reg_solve(2.0, np.zeros(4), b), b / 2.0)

    def test_scalar_case(self):
        out = rank1_reg_solve(1.0, np.array([1.0]), np.array([[2.0]]))
        assert np.allclose(out, [[1.0]])

    def test_matches_direct_solve(self, rng):
        for _ in range(1000):
            d = int(rng.integers(1, 9))
            v = rng.normal(size=d)
            b = rng.normal(size=(d, int(rng.integers(1, 4))))
            rho = float(rng.uniform(0.01, 10.0))
            direct = solve_spd(rho * np.eye(d) + np.outer(v, v), b)
            assert np.max(np.abs(direct - rank1_reg_solve(rho, v, b))) <= 1e-10

    def test_nonpositive_rho_rejected(self):
        with pytest.raises(ValueError):
            rank1_reg_solve(0.0, np.ones(2), np.ones(2))


class TestSymEig:
    def test_identity(self):
        eig = sym_eig(np.eye(3))
        assert np.allclose(eig.psi, 1.0)
        assert np.allclose(eig.q @ np.diag(eig.psi) @ eig.q.T, np.eye(3))

    def test_diagonal_sorted_descending(self):
        eig = sym_eig(np.diag([4.0, 1.0]))
        assert np.allclose(eig.psi, [4.0, 1.0])

    def test_reconstruction_and_orthogonality(self, rng):
        for _ in range(50):
            d = int(rng.integers(1, 9))
            u = rng.normal(size=(d, d + 5))
            s = u @ u.T
            s = 0.5 * (s + s.T)
            eig = sym_eig(s)
            scale = max(np.max(np.abs(s)), 1e-12)
            assert np.max(np.abs(eig.q @ eig.q.T - np.eye(d))) <= 1e-10
            assert np.max(np.abs(eig.q @ np.diag(eig.psi) @ eig.q.T - s)) / scale <= 1e-9
            assert np.all(eig.psi >= 0)
            assert np.all(np.diff(eig.psi) <= 1e-12)

    def test_rank_deficient_clamps_to_zero(self, rng):
        u = rng.normal(size=(4, 2))
        s = u @ u.T
        s = 0.5 * (s + s.T)
        eig = sym_eig(s)
        assert np.all(eig.psi >= 0)
        assert np.sum(eig.psi > 1e-10) == 2

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError, match="symmetric"):
            sym_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))


class TestRealRoots:
    def test_quadratic_plus_minus_one(self):
        assert np.allclose(real_roots([-1.0, 0.0, 1.0]), [-1.0, 1.0])

    def test_factored_quadratic(self):
        # (x - 2)(x - 3) = 6 - 5x + x^2
        assert np.allclose(real_roots([6.0, -5.0, 1.0]), [2.0, 3.0])

    def test_degree_six_from_factors(self):
        roots_true = np.array([-3.5, -1.2, 0.3, 1.7, 2.701, 5.0])
        coeffs = np.array([1.0])
        for r in roots_true:
            coeffs = np.convolve(coeffs, [-r, 1.0])
        got = real_roots(coeffs)
        assert got.size == 6
        assert np.max(np.abs(np.sort(got) - np.sort(roots_true))) <= 1e-8

    def test_random_factored_polynomials(self, rng):
        for _ in range(50):
            degree = int(rng.integers(2, 8))
            while True:
                roots_true = np.sort(rng.uniform(-8.0, 8.0, degree))
                if degree == 1 or np.min(np.diff(roots_true)) >= 1e-3:
                    break
            coeffs = np.array([1.0])
            for r in roots_true:
                coeffs = np.convolve(coeffs, [-r, 1.0])
            got = real_roots(coeffs)
            assert got.size == degree
            assert np.max(np.abs(got - roots_true)) <= 1e-7

    def test_residual_bound(self, rng):
        coeffs = rng.normal(size=7)
        degree = 6
        for r in real_roots(coeffs):
            value = np.polyval(coeffs[::-1], r)
            assert abs(value) <= 1e-8 * np.max(np.abs(coeffs)) * max(1.0, abs(r)) ** degree

    def test_constant_has_no_roots(self):
        assert real_roots([3.0]).size == 0

    def test_linear(self):
        assert np.allclose(real_roots([-4.0, 2.0]), [2.0])

    def test_leading_trim(self):
        # effectively linear after trimming the negligible quadratic lead
        got = real_roots([-4.0, 2.0, 1e-18])
        assert np.allclose(got, [2.0])

    def test_all_zero_rejected(self):
        with pytest.raises(ValueError):
            real_roots([0.0, 0.0])
