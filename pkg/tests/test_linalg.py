import numpy as np
import pytest
from conftest import P_PRINTED
from oracles import cubic_sym_eigvals, det3

from vesselsafe import linalg


def rand_sym(rng, n, scale=1.0):
    A = rng.normal(size=(n, n)) * scale
    return 0.5 * (A + A.T)


class TestSymEig:
    def test_identity(self):
        assert np.allclose(linalg.sym_eigvals(np.eye(3)), [1, 1, 1])

    def test_diagonal_sorted(self):
        assert np.allclose(linalg.sym_eigvals(np.diag([3.0, 1.0, 2.0])), [1, 2, 3])

    def test_reference_p_against_cubic_oracle(self, design):
        mine = linalg.sym_eigvals(design.P)
        oracle = cubic_sym_eigvals(design.P)
        assert np.allclose(mine, oracle, atol=1e-9 * np.linalg.norm(design.P))

    def test_reconstruction_residual(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            M = rand_sym(rng, 3, scale=rng.uniform(0.1, 50.0))
            vals, vecs = linalg.sym_eig(M)
            resid = np.linalg.norm(M @ vecs - vecs @ np.diag(vals))
            assert resid <= 1e-9 * max(1e-30, np.linalg.norm(M))

    def test_eig_sum_trace_product_det(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            M = rand_sym(rng, 3)
            vals = linalg.sym_eigvals(M)
            assert np.isclose(vals.sum(), np.trace(M), atol=1e-8)
            assert np.isclose(np.prod(vals), det3(M), atol=1e-8)

    def test_posdef_iff_positive_eigvals(self):
        rng = np.random.default_rng(7)
        for _ in range(40):
            M = rand_sym(rng, 3)
            vals = linalg.sym_eigvals(M)
            assert linalg.is_pos_def(M) == bool(vals[0] > 1e-12)

    def test_nonfinite_rejected(self):
        with pytest.raises(linalg.InvalidInputError):
            linalg.sym_eigvals([[1.0, np.nan], [np.nan, 1.0]])

    def test_nonsymmetric_rejected(self):
        with pytest.raises(linalg.InvalidInputError):
            linalg.sym_eigvals([[1.0, 2.0], [0.0, 1.0]])


class TestTrace:
    def test_identity(self):
        assert linalg.trace(np.eye(3)) == 3.0

    def test_zero(self):
        assert linalg.trace(np.zeros((4, 4))) == 0.0

    def test_noise_energy_scalar(self):
        # 1x1 trace of G'P G with the two-decimal reference P: the entries
        # sum to 89.12 and G = 0.08 * ones, so the value is 0.0064 * 89.12
        G = 0.08 * np.ones(3)
        val = linalg.trace([[G @ P_PRINTED @ G]])
        assert np.isclose(val, 0.0064 * 89.12, atol=1e-12)
        assert np.isclose(val, 0.5704, atol=1e-3)


class TestPosDef:
    def test_identity(self):
        assert linalg.is_pos_def(np.eye(3), tol=1e-12)

    def test_indefinite(self):
        assert not linalg.is_pos_def(np.diag([1.0, -1.0]), tol=1e-12)

    def test_reference_p(self):
        assert linalg.is_pos_def(P_PRINTED)


class TestLyapunov:
    def test_scalar_identity_case(self):
        P = linalg.solve_lyapunov(-np.eye(2), 2.0 * np.eye(2))
        assert np.allclose(P, np.eye(2), atol=1e-12)

    def test_decoupled_diagonal(self):
        P = linalg.solve_lyapunov(np.diag([-1.0, -2.0]), np.diag([2.0, 4.0]))
        assert np.allclose(P, np.eye(2), atol=1e-12)

    def test_recovers_care_solution(self, design):
        P = linalg.solve_lyapunov(design.Abar, design.Q_eff)
        assert np.abs(P - design.P).max() < 1e-6
        assert np.abs(P - P_PRINTED).max() < 0.01

    def test_non_hurwitz_rejected(self):
        with pytest.raises(linalg.NoSolutionError):
            linalg.solve_lyapunov(np.diag([1.0, -1.0]), np.eye(2))

    def test_residual_bound_random(self):
        rng = np.random.default_rng(8)
        for _ in range(25):
            n = rng.integers(1, 5)
            A = rng.normal(size=(n, n)) - (np.abs(rng.normal()) + n) * np.eye(n)
            Q = rand_sym(rng, n) @ rand_sym(rng, n).T + np.eye(n)
            Q = 0.5 * (Q + Q.T)
            P = linalg.solve_lyapunov(A, Q)
            resid = np.linalg.norm(P @ A + A.T @ P + Q)
            assert resid <= 1e-8 * max(1.0, np.linalg.norm(Q))
            assert np.allclose(P, P.T)


class TestCare:
    def test_scalar_closed_form(self):
        # p solves p^2 + 2p - 1 = 0 for a = -1, b = q = r = 1
        P = linalg.solve_care([[-1.0]], [[1.0]], [[1.0]], [[1.0]])
        assert np.isclose(P[0, 0], np.sqrt(2.0) - 1.0, atol=1e-12)

    def test_reference_solution(self, design):
        assert np.abs(design.P - P_PRINTED).max() < 0.01

    def test_zero_cost_hurwitz(self):
        A = np.array([[-1.0, 0.3], [0.0, -2.0]])
        P = linalg.solve_care(A, [[1.0], [1.0]], np.zeros((2, 2)), [[1.0]])
        assert np.abs(P).max() < 1e-10

    def test_random_stabilizable_triples(self):
        rng = np.random.default_rng(9)
        done = 0
        while done < 100:
            n = int(rng.integers(1, 5))
            m = int(rng.integers(1, 3))
            A = rng.normal(size=(n, n))
            B = rng.normal(size=(n, m))
            C = rng.normal(size=(n, n))
            Qp = C.T @ C
            D = rng.normal(size=(m, m))
            R = D.T @ D + np.eye(m)
            P = linalg.solve_care(A, B, Qp, R)
            resid = np.linalg.norm(P @ A + A.T @ P
                                   - P @ B @ np.linalg.solve(R, B.T @ P) + Qp)
            assert resid <= 1e-8 * max(1.0, np.linalg.norm(Qp))
            assert linalg.is_hurwitz(A - B @ np.linalg.solve(R, B.T @ P), margin=-1e-10)
            done += 1

    def test_nonpd_r_rejected(self):
        with pytest.raises(linalg.InvalidInputError):
            linalg.solve_care(np.eye(2), np.eye(2), np.eye(2), np.diag([1.0, 0.0]))

    @pytest.mark.parametrize("scipy_name", ["scipy.linalg"])
    def test_against_scipy_when_available(self, design, scipy_name):
        sl = pytest.importorskip(scipy_name)
        P_ref = sl.solve_continuous_are(design.A, design.B, design.Q_prime, design.R)
        assert np.abs(design.P - P_ref).max() < 1e-8
