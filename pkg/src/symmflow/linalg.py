"""Minimal dense real linear algebra used by all geometries.

Everything here targets small dense matrices (n up to ~50): a cyclic Jacobi
eigensolver for symmetric matrices, a scaling-and-squaring matrix
exponential, SPD square root / inverse built on the eigensolver, and the
indefinite Minkowski bilinear form with signature (-, ..., -, +), time
coordinate last.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DimensionMismatch, NonPositiveDefinite, NumericalFailure

# Scaling-and-squaring parameters: with the max-norm scaled below _EXP_THETA
# the order-_EXP_TERMS Taylor remainder is far under one ulp.
_EXP_TERMS = 14
_EXP_THETA = 0.25

_JACOBI_TOL = 1e-14
_JACOBI_MAX_SWEEPS = 100


def _as_square(a) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    return a


def symmetrize(a) -> np.ndarray:
    """Average a square matrix with its transpose."""
    a = _as_square(a)
    return 0.5 * (a + a.T)


def sym_eig(a, max_sweeps: int = _JACOBI_MAX_SWEEPS):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (eigenvalues ascending, eigenvector matrix V) with A = V diag(w) V^T
    and V orthogonal. Convergence is declared when the off-diagonal Frobenius
    norm drops below 1e-14 relative to the matrix norm; exceeding the sweep
    cap raises NumericalFailure.
    """
    a = _as_square(a).astype(float, copy=True)
    n = a.shape[0]
    if not np.all(np.isfinite(a)):
        raise NumericalFailure("matrix has non-finite entries")
    v = np.eye(n)
    if n == 1:
        return a.ravel().copy(), v

    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n), v
    tol = _JACOBI_TOL * scale

    converged = False
    off_diag = np.ones((n, n), dtype=bool)
    np.fill_diagonal(off_diag, False)
    for sweep in range(max_sweeps + 1):
        off = math.sqrt(float(np.sum(a[off_diag] ** 2)))
        if off <= tol:
            converged = True
            break
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-3 * tol / n:
                    continue
                # Classic symmetric Schur rotation annihilating a[p, q].
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.hypot(1.0, t)
                s = t * c
                rot_p = c * a[:, p] - s * a[:, q]
                rot_q = s * a[:, p] + c * a[:, q]
                a[:, p], a[:, q] = rot_p, rot_q
                rot_p = c * a[p, :] - s * a[q, :]
                rot_q = s * a[p, :] + c * a[q, :]
                a[p, :], a[q, :] = rot_p, rot_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                rot_p = c * v[:, p] - s * v[:, q]
                rot_q = s * v[:, p] + c * v[:, q]
                v[:, p], v[:, q] = rot_p, rot_q
    if not converged:
        raise NumericalFailure(
            f"Jacobi sweep cap ({max_sweeps}) reached without convergence"
        )

    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def mat_exp(a) -> np.ndarray:
    """Matrix exponential via scaling and squaring of a fixed-order Taylor sum.

    Accurate to ~1e-13 relative for max-norm up to ~10; dtype-generic.
    """
    a = _as_square(a)
    n = a.shape[0]
    norm = float(np.max(np.abs(a))) if a.size else 0.0
    eye = np.eye(n, dtype=np.result_type(a.dtype, float))
    if norm == 0.0:
        return eye.copy()
    squarings = max(0, math.ceil(math.log2(norm / _EXP_THETA)))
    b = a / (2.0**squarings)
    # Horner evaluation of sum_{k<=N} B^k / k!.
    result = eye + b / _EXP_TERMS
    for k in range(_EXP_TERMS - 1, 0, -1):
        result = eye + (b @ result) / k
    for _ in range(squarings):
        result = result @ result
    return result


def spd_sqrt(a, eps_pd: float | None = None) -> np.ndarray:
    """Unique SPD square root of an SPD matrix, via eigendecomposition.

    Raises NonPositiveDefinite when the smallest eigenvalue is at or below
    eps_pd (default 1e-13 times the max-norm of `a`).
    """
    a = _as_square(a)
    w, v = sym_eig(a)
    if eps_pd is None:
        eps_pd = 1e-13 * float(np.max(np.abs(a)))
    if w[0] <= eps_pd:
        raise NonPositiveDefinite(
            f"min eigenvalue {w[0]:.3e} not above threshold {eps_pd:.3e}"
        )
    return symmetrize((v * np.sqrt(w)) @ v.T)


def spd_inv(a, eps_pd: float | None = None) -> np.ndarray:
    """Inverse of an SPD matrix through the same eigendecomposition path."""
    a = _as_square(a)
    w, v = sym_eig(a)
    if eps_pd is None:
        eps_pd = 1e-13 * float(np.max(np.abs(a)))
    if w[0] <= eps_pd:
        raise NonPositiveDefinite(
            f"min eigenvalue {w[0]:.3e} not above threshold {eps_pd:.3e}"
        )
    return symmetrize((v / w) @ v.T)


def minkowski(y, z) -> float:
    """Indefinite inner product y^T J z with J = diag(-1, ..., -1, +1).

    The last coordinate carries the + sign.
    """
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    if y.shape != z.shape or y.ndim != 1:
        raise DimensionMismatch(f"incompatible shapes {y.shape} and {z.shape}")
    return float(y[-1] * z[-1] - y[:-1] @ z[:-1])


def minkowski_metric(n_plus_1: int) -> np.ndarray:
    """The matrix J = diag(-1, ..., -1, +1) of size n+1."""
    j = -np.eye(n_plus_1)
    j[-1, -1] = 1.0
    return j
