"""Independent oracles used by the tests.

Deliberately written with different algorithms than the library: the
characteristic cubic for 3x3 symmetric eigenvalues, a cofactor determinant,
a series matrix exponential, and central finite differences.
"""

import math

import numpy as np


def cubic_sym_eigvals(M) -> np.ndarray:
    """Eigenvalues of a symmetric 3x3 matrix via the characteristic cubic.

    Uses the trigonometric solution of the depressed cubic, valid for the
    three real roots of a symmetric matrix.  Ascending order.
    """
    A = np.asarray(M, dtype=float)
    p1 = A[0, 1] ** 2 + A[0, 2] ** 2 + A[1, 2] ** 2
    q = np.trace(A) / 3.0
    if p1 == 0.0:
        return np.sort(np.diag(A))
    p2 = sum((A[i, i] - q) ** 2 for i in range(3)) + 2.0 * p1
    p = math.sqrt(p2 / 6.0)
    B = (A - q * np.eye(3)) / p
    r = det3(B) / 2.0
    r = min(1.0, max(-1.0, r))
    phi = math.acos(r) / 3.0
    eig1 = q + 2.0 * p * math.cos(phi)
    eig3 = q + 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
    eig2 = 3.0 * q - eig1 - eig3
    return np.sort([eig1, eig2, eig3])


def det3(M) -> float:
    """Determinant of a 3x3 matrix by cofactor expansion."""
    a = np.asarray(M, dtype=float)
    return (a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
            - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
            + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0]))


def expm_series(A, scaling: int = 10) -> np.ndarray:
    """Matrix exponential by scaling and squaring over a Taylor series."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    As = A / (2.0 ** scaling)
    E = np.eye(n)
    term = np.eye(n)
    for k in range(1, 24):
        term = term @ As / k
        E = E + term
    for _ in range(scaling):
        E = E @ E
    return E


def fd_jacobian(fn, x, step: float = 1e-5) -> np.ndarray:
    """Central-difference Jacobian of fn: R^n -> R^m at x."""
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = step
        cols.append((np.asarray(fn(x + e)) - np.asarray(fn(x - e))) / (2.0 * step))
    return np.stack(cols, axis=1)


def fd_gradient(fn, x, step: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = step
        g[i] = (fn(x + e) - fn(x - e)) / (2.0 * step)
    return g


def fd_hessian(fn, x, step: float = 1e-4) -> np.ndarray:
    """Central-difference Hessian of a scalar function."""
    x = np.asarray(x, dtype=float)
    n = x.size
    H = np.zeros((n, n))
    f0 = fn(x)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = step
        H[i, i] = (fn(x + ei) - 2.0 * f0 + fn(x - ei)) / step ** 2
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = step
            H[i, j] = H[j, i] = (fn(x + ei + ej) - fn(x + ei - ej)
                                 - fn(x - ei + ej) + fn(x - ei - ej)) / (4.0 * step ** 2)
    return H
