"""Small dense linear algebra and statistics (matrices up to ~128 x 128)."""

from __future__ import annotations

import numpy as np

from .exceptions import InvalidParams, NotSymmetric, Singular

PIVOT_TOL = 1e-12


def _square(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidParams(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidParams("matrix entries must be finite")
    return a


def _eliminate(a: np.ndarray, b: np.ndarray):
    """Forward elimination with partial pivoting, in place.

    Returns the number of row swaps. Raises Singular on a tiny pivot.
    """
    n = a.shape[0]
    scale = max(np.abs(a).max(), 1.0)
    swaps = 0
    for col in range(n):
        p = col + int(np.argmax(np.abs(a[col:, col])))
        if abs(a[p, col]) <= PIVOT_TOL * scale:
            raise Singular(f"pivot {a[p, col]:.3g} in column {col}")
        if p != col:
            a[[col, p]] = a[[p, col]]
            b[[col, p]] = b[[p, col]]
            swaps += 1
        factors = a[col + 1 :, col] / a[col, col]
        a[col + 1 :, col:] -= np.outer(factors, a[col, col:])
        b[col + 1 :] -= np.outer(factors, b[col]).reshape(b[col + 1 :].shape)
    return swaps


def solve(m, z) -> np.ndarray:
    """Solve ``m @ x = z`` by Gaussian elimination with partial pivoting.

    ``z`` may be a vector or a matrix of right-hand sides.
    """
    a = _square(m)
    b = np.array(z, dtype=float)
    if b.shape[0] != a.shape[0]:
        raise InvalidParams("right-hand side length does not match the matrix")
    a0, b0 = a.copy(), b.copy()
    _eliminate(a, b)
    x = np.empty_like(b)
    for i in range(a.shape[0] - 1, -1, -1):
        x[i] = (b[i] - a[i, i + 1 :] @ x[i + 1 :]) / a[i, i]
    resid = np.abs(a0 @ x - b0).max() if b0.size else 0.0
    if resid > 1e-8 * (1 + np.abs(b0).max()):
        raise Singular(f"residual {resid:.3g} too large; matrix is ill-conditioned")
    return x


def inverse(m) -> np.ndarray:
    a = _square(m)
    return solve(a, np.eye(a.shape[0]))


def determinant(m) -> float:
    a = _square(m)
    try:
        swaps = _eliminate(a, np.zeros(a.shape[0]))
    except Singular:
        return 0.0
    return float((-1) ** swaps * np.prod(np.diag(a)))


def sym_eigenvalues(a, tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending."""
    a = _square(a)
    if a.size and np.abs(a - a.T).max() > 1e-10:
        raise NotSymmetric("matrix is not symmetric")
    a = (a + a.T) / 2
    n = a.shape[0]
    target = tol * np.linalg.norm(a)
    for _ in range(max_sweeps):
        if np.linalg.norm(a - np.diag(np.diag(a))) <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300 + 1e-18 * (abs(a[p, p]) + abs(a[q, q])):
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = (a[q, q] - a[p, p]) / (2 * apq)
                t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0)) if theta else 1.0
                c = 1 / np.hypot(t, 1.0)
                s = t * c
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
    return np.sort(np.diag(a))


def singular_values(m, tol: float = 1e-15, max_sweeps: int = 100) -> np.ndarray:
    """Descending singular values by one-sided (Hestenes) Jacobi.

    Columns are rotated until mutually orthogonal; their norms are then the
    singular values. Unlike sqrt(eig(m^T m)) this keeps tiny singular values
    accurate, which the singularity test in :func:`condition_number` needs.
    """
    u = _square(m)
    n = u.shape[0]
    # columns below this squared norm are numerically zero; stop rotating them
    floor = (1e-17 * np.linalg.norm(u)) ** 2
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = u[:, p] @ u[:, p]
                beta = u[:, q] @ u[:, q]
                gamma = u[:, p] @ u[:, q]
                if min(alpha, beta) <= floor or abs(gamma) <= tol * np.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2 * gamma)
                t = (1.0 if zeta >= 0 else -1.0) / (abs(zeta) + np.hypot(zeta, 1.0))
                c = 1 / np.hypot(t, 1.0)
                s = c * t
                up = u[:, p].copy()
                u[:, p] = c * up - s * u[:, q]
                u[:, q] = s * up + c * u[:, q]
        if not rotated:
            break
    return np.sort(np.linalg.norm(u, axis=0))[::-1]


def condition_number(m) -> float:
    sv = singular_values(m)
    if sv[-1] <= 1e-12 * sv[0]:
        raise Singular("smallest singular value is numerically zero")
    return float(sv[0] / sv[-1])


def mse(estimate, truth) -> float:
    estimate = np.asarray(estimate, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if estimate.shape != truth.shape:
        raise InvalidParams(f"shape mismatch {estimate.shape} vs {truth.shape}")
    return float(np.mean((estimate - truth) ** 2))


def rankdata(x) -> np.ndarray:
    """Fractional ranks starting at 1; ties share their average rank."""
    x = np.asarray(x, dtype=float)
    order = np.argsort(x, kind="mergesort")
    ranks = np.empty(x.size)
    sx = x[order]
    i = 0
    while i < x.size:
        j = i
        while j + 1 < x.size and sx[j + 1] == sx[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def spearman(xs, ys) -> float:
    xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise InvalidParams("spearman needs two equal-length vectors")
    if xs.size < 2:
        raise InvalidParams("spearman needs at least two points")
    rx, ry = rankdata(xs), rankdata(ys)
    rx -= rx.mean()
    ry -= ry.mean()
    denom = np.sqrt((rx @ rx) * (ry @ ry))
    # constant input: no rank information, report no correlation
    return 0.0 if denom == 0 else float(np.clip(rx @ ry / denom, -1.0, 1.0))
