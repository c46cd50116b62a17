"""Small dense numerical kernels shared by the factorizers and the AR estimator.

Everything here operates on matrices whose side is at most the latent rank or
the AR order (a few dozen at most), so the implementations favour explicit,
easily audited algorithms over large-scale tricks: Cholesky with a pivot
floor, cyclic Jacobi rotations, and a bracketed real-root scan.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular


class SingularMatrixError(ValueError):
    """Raised when a matrix expected to be SPD is numerically singular or indefinite."""


@dataclass(frozen=True)
class SymEig:
    """Eigendecomposition of a symmetric PSD matrix, eigenvalues sorted descending."""

    q: np.ndarray    # orthogonal (n, n), column i pairs with psi[i]
    psi: np.ndarray  # nonnegative eigenvalues, descending


def _as_square_symmetric(a, tol=1e-12, name="matrix"):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if a.size and float(np.max(np.abs(a - a.T))) > tol * scale:
        raise ValueError(f"{name} is not symmetric within tolerance {tol}")
    return a


def _cholesky_lower(a, pivot_floor=1e-14):
    """Lower Cholesky factor with an explicit pivot floor.

    A pivot falling below pivot_floor times the largest diagonal entry is
    treated as (numerically) indefinite input.
    """
    n = a.shape[0]
    max_diag = float(np.max(np.diagonal(a))) if n else 0.0
    if n and (not np.isfinite(max_diag) or max_diag <= 0.0):
        raise SingularMatrixError("matrix has no positive diagonal entry")
    floor = pivot_floor * max_diag
    lower = np.zeros_like(a)
    for j in range(n):
        pivot = a[j, j] - lower[j, :j] @ lower[j, :j]
        if not np.isfinite(pivot) or pivot < floor:
            raise SingularMatrixError(
                f"pivot {pivot:.3e} at row {j} below floor {floor:.3e}"
            )
        lower[j, j] = np.sqrt(pivot)
        if j + 1 < n:
            lower[j + 1:, j] = (a[j + 1:, j] - lower[j + 1:, :j] @ lower[j, :j]) / lower[j, j]
    return lower


def solve_spd(a, b):
    """Solve A X = B for symmetric positive-definite A.

    Accepts B as a vector or a matrix and returns the solution with the same
    trailing shape. Raises SingularMatrixError on indefinite input.
    """
    a = _as_square_symmetric(a, name="A")
    b = np.asarray(b, dtype=float)
    squeeze = b.ndim == 1
    rhs = b[:, None] if squeeze else b
    if rhs.shape[0] != a.shape[0]:
        raise ValueError(f"B has {rhs.shape[0]} rows, expected {a.shape[0]}")
    if not np.all(np.isfinite(rhs)):
        raise ValueError("B contains non-finite entries")
    lower = _cholesky_lower(a)
    y = solve_triangular(lower, rhs, lower=True)
    x = solve_triangular(lower.T, y, lower=False)
    return x[:, 0] if squeeze else x


def rank1_reg_solve(rho, v, b):
    """Solve (rho I + v v^T) X = B through the Sherman-Morrison identity.

    This is the rank-1 specialization of the matrix inversion lemma used by
    the factor updates; it needs no factorization and is exact up to rounding.
    """
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    v = np.asarray(v, dtype=float)
    b = np.asarray(b, dtype=float)
    if v.ndim != 1:
        raise ValueError("v must be a vector")
    if b.shape[0] != v.shape[0]:
        raise ValueError("B must have as many rows as v has entries")
    vs = v * v
    denom = rho + float(vs.sum())
    if b.ndim == 1:
        return (b - v * (v @ b) / denom) / rho
    return (b - np.outer(v, v @ b) / denom) / rho


def sym_eig(s):
    """Eigendecomposition of a symmetric PSD matrix via cyclic Jacobi rotations.

    Returns eigenvalues sorted descending (ties keep their pre-sort order) with
    slightly negative values, down to -1e-12, clamped to zero.
    """
    s = _as_square_symmetric(s, name="S")
    n = s.shape[0]
    a = s.copy()
    q = np.eye(n)
    fro = float(np.linalg.norm(s))
    threshold = 1e-12 * fro
    max_sweeps = 100
    off_mask = ~np.eye(n, dtype=bool)
    for sweep in range(max_sweeps + 1):
        off = float(np.linalg.norm(a[off_mask])) if n > 1 else 0.0
        if off <= threshold:
            break
        if sweep == max_sweeps:
            raise RuntimeError(f"Jacobi sweep did not converge in {max_sweeps} sweeps")
        for p in range(n - 1):
            for r in range(p + 1, n):
                apr = a[p, r]
                if abs(apr) <= threshold / max(n, 1):
                    continue
                theta = (a[r, r] - a[p, p]) / (2.0 * apr)
                t = 1.0 if theta == 0.0 else np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                sn = t * c
                rot_p = c * a[:, p] - sn * a[:, r]
                rot_r = sn * a[:, p] + c * a[:, r]
                a[:, p], a[:, r] = rot_p, rot_r
                rot_p = c * a[p, :] - sn * a[r, :]
                rot_r = sn * a[p, :] + c * a[r, :]
                a[p, :], a[r, :] = rot_p, rot_r
                a[p, r] = a[r, p] = 0.0
                rot_p = c * q[:, p] - sn * q[:, r]
                rot_r = sn * q[:, p] + c * q[:, r]
                q[:, p], q[:, r] = rot_p, rot_r
    psi = np.diagonal(a).copy()
    if np.any(psi < -1e-12):
        raise ValueError("input is not positive semidefinite (eigenvalue < -1e-12)")
    psi = np.maximum(psi, 0.0)
    order = np.argsort(-psi, kind="stable")
    return SymEig(q=q[:, order], psi=psi[order])


def _polyval(coeffs, x):
    # Horner on ascending coefficients; x may be an array.
    result = np.zeros_like(np.asarray(x, dtype=float))
    for c in coeffs[::-1]:
        result = result * x + c
    return result


def real_roots(coeffs):
    """All real roots of a polynomial given by ascending coefficients.

    Roots are located by scanning for sign changes over a grid that combines a
    fine linear mesh near the origin with a geometric mesh out to 1e6, then
    refined by bisection with Newton polishing. Only real arithmetic is used.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.ndim != 1 or coeffs.size == 0:
        raise ValueError("coeffs must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(coeffs)):
        raise ValueError("coeffs contain non-finite values")
    max_coeff = float(np.max(np.abs(coeffs)))
    if max_coeff == 0.0:
        raise ValueError("all-zero polynomial has no well-defined roots")
    trimmed = coeffs.copy()
    while trimmed.size > 1 and abs(trimmed[-1]) <= 1e-14 * max_coeff:
        trimmed = trimmed[:-1]
    degree = trimmed.size - 1
    if degree == 0:
        return np.array([])
    if degree == 1:
        return np.array([-trimmed[0] / trimmed[1]])

    grid = np.unique(np.concatenate([
        np.linspace(-24.0, 24.0, 240_001),
        np.geomspace(24.0, 1e6, 6_000),
        -np.geomspace(24.0, 1e6, 6_000),
    ]))
    values = _polyval(trimmed, grid)
    deriv = np.arange(1, degree + 1) * trimmed[1:]

    roots = []
    exact = grid[values == 0.0]
    roots.extend(exact.tolist())
    signs = np.sign(values)
    flips = np.nonzero(signs[:-1] * signs[1:] < 0)[0]
    for k in flips:
        lo, hi = grid[k], grid[k + 1]
        flo = values[k]
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            fmid = float(_polyval(trimmed, mid))
            if fmid == 0.0:
                lo = hi = mid
                break
            if flo * fmid < 0:
                hi = mid
            else:
                lo, flo = mid, fmid
            if hi - lo <= 1e-15 * max(1.0, abs(lo)):
                break
        root = 0.5 * (lo + hi)
        for _ in range(4):  # Newton polish, kept inside the bracket
            dp = float(_polyval(deriv, root))
            if dp == 0.0:
                break
            step = float(_polyval(trimmed, root)) / dp
            candidate = root - step
            if not (grid[k] <= candidate <= grid[k + 1]):
                break
            root = candidate
        roots.append(root)

    roots = sorted(roots)
    deduped = []
    for r in roots:
        if deduped and abs(r - deduped[-1]) <= 1e-9 * max(1.0, abs(r)):
            continue
        deduped.append(r)
    bound = [
        r for r in deduped
        if abs(float(_polyval(trimmed, r))) <= 1e-8 * max_coeff * max(1.0, abs(r)) ** degree
    ]
    return np.array(bound)
