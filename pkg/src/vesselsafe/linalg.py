"""Dense linear algebra for small (n <= 6) control matrices.

Everything here is sized for the 3-state vessel problem: symmetric
eigenvalues via cyclic Jacobi sweeps, positive-definiteness via an explicit
Cholesky factorization, and Lyapunov / continuous algebraic Riccati solvers
built on Kronecker vectorization and Kleinman-Newton iteration.  numpy is
used for dense matrix arithmetic; the nonsymmetric eigenvalues needed for
Hurwitz tests come from ``numpy.linalg.eigvals``.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "InvalidInputError",
    "NoSolutionError",
    "SolverFailureError",
    "sym_eig",
    "sym_eigvals",
    "trace",
    "is_pos_def",
    "is_hurwitz",
    "solve_lyapunov",
    "solve_care",
]

# Convergence defaults; all overridable per call.
JACOBI_TOL = 1e-12
LYAPUNOV_RESIDUAL_TOL = 1e-8
CARE_RESIDUAL_TOL = 1e-8
SYMMETRY_TOL = 1e-10


class InvalidInputError(ValueError):
    """Raised for non-finite, non-square, or non-symmetric inputs."""


class NoSolutionError(RuntimeError):
    """Raised when a Lyapunov system is singular (non-Hurwitz coefficient)."""


class SolverFailureError(RuntimeError):
    """Raised when an iterative solve does not meet its residual bound."""

    def __init__(self, message: str, residual: float = math.nan):
        super().__init__(message)
        self.residual = residual


def _as_square(M, name: str = "matrix") -> np.ndarray:
    A = np.asarray(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidInputError(f"{name} must be square, got shape {A.shape}")
    if A.shape[0] < 1:
        raise InvalidInputError(f"{name} must have dimension >= 1")
    if not np.isfinite(A).all():
        raise InvalidInputError(f"{name} has non-finite entries")
    return A


def _require_symmetric(A: np.ndarray, name: str, tol: float = SYMMETRY_TOL) -> np.ndarray:
    scale = max(1.0, float(np.abs(A).max()))
    if np.abs(A - A.T).max() > tol * scale:
        raise InvalidInputError(f"{name} is not symmetric within tolerance {tol}")
    return 0.5 * (A + A.T)


def trace(M) -> float:
    """Sum of the diagonal."""
    A = _as_square(M)
    return float(np.trace(A))


def sym_eig(M, tol: float = JACOBI_TOL, max_sweeps: int = 100):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (eigenvalues ascending, eigenvectors as columns).  Convergence:
    off-diagonal Frobenius norm below ``tol`` times the matrix norm.
    """
    A = _require_symmetric(_as_square(M, "M"), "M").copy()
    n = A.shape[0]
    V = np.eye(n)
    norm = float(np.linalg.norm(A))
    if norm == 0.0:
        return np.zeros(n), V

    for _ in range(max_sweeps):
        off = math.sqrt(max(0.0, float(np.sum(A * A)) - float(np.sum(np.diag(A) ** 2))))
        if off <= tol * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 0.25 * tol * norm / (n * n):
                    continue
                # classic 2x2 symmetric Schur rotation
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(1.0 + theta * theta))
                cth = 1.0 / math.sqrt(1.0 + t * t)
                sth = t * cth
                Jrot = np.eye(n)
                Jrot[p, p] = cth
                Jrot[q, q] = cth
                Jrot[p, q] = sth
                Jrot[q, p] = -sth
                A = Jrot.T @ A @ Jrot
                V = V @ Jrot
    else:
        raise SolverFailureError("Jacobi sweeps did not converge", residual=off)

    vals = np.diag(A).copy()
    order = np.argsort(vals, kind="stable")
    return vals[order], V[:, order]


def sym_eigvals(M, tol: float = JACOBI_TOL) -> np.ndarray:
    """Eigenvalues of a symmetric matrix, sorted ascending."""
    vals, _ = sym_eig(M, tol=tol)
    return vals


def is_pos_def(M, tol: float = 1e-12) -> bool:
    """True iff the symmetric matrix admits a Cholesky factor with pivots > tol."""
    A = _require_symmetric(_as_square(M), "M")
    n = A.shape[0]
    L = np.zeros_like(A)
    for i in range(n):
        for j in range(i + 1):
            acc = A[i, j] - float(L[i, :j] @ L[j, :j])
            if i == j:
                if not (acc > tol):
                    return False
                L[i, i] = math.sqrt(acc)
            else:
                L[i, j] = acc / L[j, j]
    return True


def is_hurwitz(A, margin: float = 0.0) -> bool:
    """True iff every eigenvalue real part is < -margin."""
    A = _as_square(A, "A")
    return bool(np.max(np.linalg.eigvals(A).real) < -margin)


def solve_lyapunov(Abar, Q, residual_tol: float = LYAPUNOV_RESIDUAL_TOL) -> np.ndarray:
    """Solve P Abar + Abar^T P + Q = 0 for symmetric P.

    Uses Kronecker vectorization, fine at these sizes.  ``Abar`` must be
    Hurwitz, otherwise the linear system is singular and NoSolutionError is
    raised.
    """
    A = _as_square(Abar, "Abar")
    Qs = _require_symmetric(_as_square(Q, "Q"), "Q")
    n = A.shape[0]
    if not is_hurwitz(A):
        raise NoSolutionError("Abar is not Hurwitz; Lyapunov system is singular")
    # vec(P Abar + Abar^T P) = (Abar^T (x) I + I (x) Abar^T) vec(P)
    Id = np.eye(n)
    Kmat = np.kron(A.T, Id) + np.kron(Id, A.T)
    vecP = np.linalg.solve(Kmat, -Qs.reshape(-1))
    P = vecP.reshape(n, n)
    P = 0.5 * (P + P.T)
    res = float(np.linalg.norm(P @ A + A.T @ P + Qs))
    bound = residual_tol * max(1.0, float(np.linalg.norm(Qs)))
    if res > bound:
        raise SolverFailureError(f"Lyapunov residual {res:.3e} exceeds bound {bound:.3e}",
                                 residual=res)
    return P


def _stabilizing_gain(A: np.ndarray, B: np.ndarray, R: np.ndarray) -> np.ndarray:
    """Find K0 with A - B K0 Hurwitz."""
    n, m = B.shape
    K0 = np.zeros((m, n))
    if is_hurwitz(A):
        return K0
    # scalar line search on K0 = c B^T
    for c in np.geomspace(1e-4, 1e8, 61):
        K0 = c * B.T
        if is_hurwitz(A - B @ K0):
            return K0
    # Bass fallback: shift A into the left half plane, then gain from a
    # controllability-style Lyapunov solve
    beta = float(np.linalg.norm(A, ord="fro")) + 1.0
    shifted = -(A + beta * np.eye(n))
    try:
        X = solve_lyapunov(shifted.T, 2.0 * B @ B.T)
        K0 = np.linalg.solve(X, B).T
    except (NoSolutionError, np.linalg.LinAlgError) as exc:
        raise SolverFailureError(f"could not find a stabilizing initial gain: {exc}") from exc
    if not is_hurwitz(A - B @ K0):
        raise SolverFailureError("could not find a stabilizing initial gain "
                                 "(pair may not be stabilizable)")
    return K0


def solve_care(A, B, Qp, R, residual_tol: float = CARE_RESIDUAL_TOL,
               max_iter: int = 60) -> np.ndarray:
    """Solve P A + A^T P - P B R^-1 B^T P + Qp = 0 by Kleinman-Newton iteration.

    Each iterate solves one Lyapunov equation for the current stabilizing
    gain; the iteration is monotone and quadratically convergent from any
    stabilizing start.  Returns the symmetric stabilizing solution.
    """
    A = _as_square(A, "A")
    Qs = _require_symmetric(_as_square(Qp, "Qp"), "Qp")
    Rs = _require_symmetric(_as_square(R, "R"), "R")
    Bm = np.asarray(B, dtype=float)
    if Bm.ndim != 2 or Bm.shape[0] != A.shape[0]:
        raise InvalidInputError(f"B must be {A.shape[0]} x m, got {Bm.shape}")
    if not np.isfinite(Bm).all():
        raise InvalidInputError("B has non-finite entries")
    if not is_pos_def(Rs):
        raise InvalidInputError("R must be positive definite")

    K = _stabilizing_gain(A, Bm, Rs)
    P = np.zeros_like(A)
    for _ in range(max_iter):
        Acl = A - Bm @ K
        Qcl = Qs + K.T @ Rs @ K
        P_next = solve_lyapunov(Acl, Qcl)
        K = np.linalg.solve(Rs, Bm.T @ P_next)
        if np.abs(P_next - P).max() <= 1e-13 * max(1.0, float(np.abs(P_next).max())):
            P = P_next
            break
        P = P_next

    res = float(np.linalg.norm(P @ A + A.T @ P - P @ Bm @ np.linalg.solve(Rs, Bm.T @ P) + Qs))
    bound = residual_tol * max(1.0, float(np.linalg.norm(Qs)))
    if res > bound:
        raise SolverFailureError(f"Riccati residual {res:.3e} exceeds bound {bound:.3e}",
                                 residual=res)
    if not is_hurwitz(A - Bm @ np.linalg.solve(Rs, Bm.T @ P), margin=-1e-12):
        raise SolverFailureError("closed loop from Riccati solution is not Hurwitz",
                                 residual=res)
    return 0.5 * (P + P.T)
