"""Dense matrix kernels: pivoted Householder QR, row Kronecker products,
a one-sided Jacobi SVD used as a reference, and flop-count models."""
from functools import reduce
from typing import NamedTuple

import numpy as np

from ._validation import check_matrix
from .exceptions import ConvergenceError, RankError, ShapeError

EPS = np.finfo(np.float64).eps
# LAPACK xLAQP2 guard: a downdated norm that lost half its bits is recomputed.
_NORM_RECOMPUTE = 2.0 ** -26

# Factor extraction treats directions weaker than NULL_RTOL * ||A||_F as
# null: below it a rounding-level change in A rotates the basis by more than
# 1e-10.  The Gram route works on squared magnitudes, hence NULL_RTOL**2.
NULL_RTOL = 1e-5
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 60


class QrpResult(NamedTuple):
    """``a[:, perm] == q @ r`` with ``|r[0, 0]| >= |r[1, 1]| >= ...``."""
    q: np.ndarray
    r: np.ndarray
    perm: np.ndarray


class SvdResult(NamedTuple):
    u: np.ndarray
    s: np.ndarray
    v: np.ndarray


def _householder_qrp(a, rtol=0.0):
    """Pivoted Householder QR.

    Returns ``(q, r, perm, rank)``: ``q`` is ``m x min(m, n)`` with orthonormal
    columns, ``r`` is ``min(m, n) x n``.  Once every remaining column norm
    falls to ``max(4 max(m, n) eps, rtol) * ||a||_F`` the trailing block of
    ``r`` is set to exact zero and the remaining columns of ``q`` come from
    :func:`orthogonal_complement` rather than from reflections of rounding
    noise, so rank-deficient input still yields a reproducible basis.
    """
    m, n = a.shape
    r = a.copy()
    perm = np.arange(n)
    steps = min(m, n)
    cutoff = max(4.0 * max(m, n) * EPS, rtol) * np.linalg.norm(r)
    vn1 = np.linalg.norm(r, axis=0)
    vn2 = vn1.copy()
    reflectors = []
    rank = steps

    for j in range(steps):
        best = vn1[j:].max()
        if best <= cutoff:
            exact = np.linalg.norm(r[j:, j:], axis=0)
            vn1[j:] = exact
            vn2[j:] = exact
            best = exact.max()
            if best <= cutoff:
                r[j:, j:] = 0.0
                rank = j
                break
        ties = np.flatnonzero(vn1[j:] == best) + j
        p = ties[np.argmin(perm[ties])]
        if p != j:
            r[:, [j, p]] = r[:, [p, j]]
            perm[[j, p]] = perm[[p, j]]
            vn1[[j, p]] = vn1[[p, j]]
            vn2[[j, p]] = vn2[[p, j]]

        x = r[j:, j]
        normx = np.linalg.norm(x)
        if x.shape[0] > 1 and normx > 0.0:
            # sign(0) taken as +1
            alpha = normx if x[0] >= 0.0 else -normx
            v = x.copy()
            v[0] += alpha
            scale = 2.0 / np.dot(v, v)
            r[j:, j + 1:] -= np.outer(v, scale * (v @ r[j:, j + 1:]))
            r[j, j] = -alpha
            r[j + 1:, j] = 0.0
            reflectors.append((j, v, scale))
        else:
            reflectors.append(None)

        if j + 1 < n:
            _downdate_norms(r, j, vn1, vn2)

    # Q = H_1 H_2 ... H_rank applied to the leading identity columns
    q = np.eye(m, rank)
    for item in reversed(reflectors):
        if item is None:
            continue
        j, v, scale = item
        q[j:] -= np.outer(scale * v, v @ q[j:])
    for i in range(rank):
        if r[i, i] < 0.0:
            r[i, i:] = -r[i, i:]
            q[:, i] = -q[:, i]
    if rank < steps:
        q = np.hstack([q, orthogonal_complement(q, steps - rank)])
    return q, r[:steps], perm, rank


def orthogonal_complement(q, count):
    """``count`` orthonormal columns orthogonal to the orthonormal ``q``.

    Built greedily from coordinate vectors: each step projects out the
    current basis from the unit vector ``e_i`` with the largest residual
    (lowest ``i`` on ties) and normalizes it, so the result has a positive
    ``i``-th entry and depends continuously on ``q``.
    """
    m = q.shape[0]
    basis = np.array(q, dtype=np.float64).reshape(m, -1)
    out = np.empty((m, count))
    for c in range(count):
        resid = 1.0 - np.einsum("ij,ij->i", basis, basis)
        i = int(np.argmax(resid))
        w = -(basis @ basis[i])
        w[i] += 1.0
        w -= basis @ (basis.T @ w)
        w /= np.linalg.norm(w)
        out[:, c] = w
        basis = np.hstack([basis, w[:, None]])
    return out


def _downdate_norms(r, j, vn1, vn2):
    cols = np.arange(j + 1, vn1.shape[0])
    live = cols[vn1[cols] != 0.0]
    if live.size == 0:
        return
    ratio = np.abs(r[j, live]) / vn1[live]
    temp = np.maximum(0.0, 1.0 - ratio * ratio)
    temp2 = temp * (vn1[live] / vn2[live]) ** 2
    stale = temp2 <= _NORM_RECOMPUTE
    fresh = live[stale]
    if fresh.size:
        vn1[fresh] = np.linalg.norm(r[j + 1:, fresh], axis=0)
        vn2[fresh] = vn1[fresh]
    keep = live[~stale]
    vn1[keep] *= np.sqrt(temp[~stale])


def qrp(a):
    """QR with column pivoting of a tall (or square) matrix.

    Parameters
    ----------
    a : array_like, shape (m, n), m >= n

    Returns
    -------
    QrpResult
        ``q`` is ``m x n`` with orthonormal columns, ``r`` is ``n x n`` upper
        triangular with a non-negative, non-increasing diagonal, and ``perm``
        lists the original column index placed at each position.  Equal
        column norms are resolved in favour of the lower original index.
    """
    a = check_matrix(a)
    m, n = a.shape
    if m < n:
        raise ShapeError(f"qrp needs rows >= cols, got {m}x{n}; use gram_qrp")
    q, r, perm, _ = _householder_qrp(a)
    return QrpResult(q, r, perm)


def qrp_leading(a, k, rtol=None):
    """First ``k`` columns of the pivoted-QR orthogonal factor of ``a``.

    Fat matrices go through :func:`gram_qrp`.  ``k`` may exceed the column
    count of a tall ``a`` (up to its row count); the extra columns are the
    deterministic orthogonal completion produced by the accumulated
    reflections.
    """
    a = check_matrix(a)
    m, n = a.shape
    if m < n:
        return gram_qrp(a, k, rtol)
    if not 1 <= k <= m:
        raise RankError(f"rank {k} not in [1, {m}] for a {m}x{n} matrix")
    q = _householder_qrp(a, NULL_RTOL if rtol is None else rtol)[0]
    return np.ascontiguousarray(complete_basis(q, k))


def gram_qrp(a, k, rtol=None):
    """Leading ``k`` pivoted-QR columns of the square Gram matrix ``a @ a.T``."""
    a = check_matrix(a)
    m = a.shape[0]
    if not 1 <= k <= m:
        raise RankError(f"rank {k} not in [1, {m}] for a matrix with {m} rows")
    q = _householder_qrp(a @ a.T, NULL_RTOL ** 2 if rtol is None else rtol ** 2)[0]
    return np.ascontiguousarray(q[:, :k])


def kron_rows(a, b):
    """Kronecker product of two row vectors: ``c[q*i + j] = a[i] * b[j]``."""
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    return (a[:, None] * b[None, :]).reshape(-1)


def kron_rows_multi(vectors):
    """Kronecker product of rows given in ascending mode order.

    The fold runs from the highest mode down, so the lowest mode's index
    varies fastest in the result, matching the column order of an unfolding.
    """
    vectors = list(vectors)
    if not vectors:
        raise ValueError("need at least one vector")
    return reduce(kron_rows, reversed(vectors))


def kron_rows_batch(mats):
    """Row-wise :func:`kron_rows_multi` over stacked rows.

    ``mats[t]`` has shape ``(g, R_t)``; row ``i`` of the result equals
    ``kron_rows_multi([m[i] for m in mats])`` bit for bit.
    """
    out = mats[-1]
    g = out.shape[0]
    for m in reversed(mats[:-1]):
        out = (out[:, :, None] * m[:, None, :]).reshape(g, -1)
    return np.ascontiguousarray(out, dtype=np.float64)


def complete_basis(u, k):
    """Extend orthonormal columns ``u`` (m x r) to ``k`` orthonormal columns."""
    m, r = u.shape
    if k <= r:
        return u[:, :k]
    if k > m:
        raise RankError(f"cannot build {k} orthonormal columns in dimension {m}")
    return np.hstack([u, orthogonal_complement(u, k - r)])


def jacobi_svd(a, tol=JACOBI_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """One-sided (Hestenes) Jacobi SVD of a tall matrix.

    Column pairs are swept cyclically by rows and rotated until every
    normalized inner product is at most ``tol``.

    Raises
    ------
    ConvergenceError
        If ``max_sweeps`` sweeps leave a pair above ``tol``; ``residual``
        carries the largest normalized inner product seen in the last sweep.
    """
    a = check_matrix(a)
    m, n = a.shape
    if m < n:
        raise ShapeError(f"jacobi_svd needs rows >= cols, got {m}x{n}")
    w = np.array(a, order="F")
    v = np.eye(n, order="F")
    off = 0.0
    for _ in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                wp, wq = w[:, p], w[:, q]
                alpha = np.dot(wp, wp)
                beta = np.dot(wq, wq)
                if alpha == 0.0 or beta == 0.0:
                    continue
                gamma = np.dot(wp, wq)
                c_pq = abs(gamma) / (np.sqrt(alpha) * np.sqrt(beta))
                off = max(off, c_pq)
                if c_pq <= tol:
                    continue
                zeta = (beta - alpha) / (2.0 * gamma)
                t = (1.0 if zeta >= 0 else -1.0) / (abs(zeta) + np.hypot(1.0, zeta))
                c = 1.0 / np.hypot(1.0, t)
                s = c * t
                new_p = c * wp - s * wq
                w[:, q] = s * wp + c * wq
                w[:, p] = new_p
                vp, vq = v[:, p].copy(), v[:, q]
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
        if off <= tol:
            break
    else:
        raise ConvergenceError(
            f"Jacobi SVD did not converge in {max_sweeps} sweeps "
            f"(max off-diagonal {off:.3e})", residual=off)

    sv = np.linalg.norm(w, axis=0)
    order = np.argsort(-sv, kind="stable")
    sv, w, v = sv[order], w[:, order], v[:, order]
    nonzero = sv > 0.0
    u = np.zeros((m, n))
    u[:, nonzero] = w[:, nonzero] / sv[nonzero]
    r = int(nonzero.sum())
    if r < n:
        u = complete_basis(u[:, :r], n)
    return SvdResult(np.ascontiguousarray(u), sv, np.ascontiguousarray(v))


def svd_leading(a, k, rtol=None):
    """First ``k`` left singular vectors of ``a`` via :func:`jacobi_svd`.

    Fat input is handled through the SVD of its transpose.  Singular values
    at or below ``rtol * ||a||_F`` (default ``NULL_RTOL``) count as zero;
    their vectors, and any beyond the available ones, are replaced by the
    :func:`orthogonal_complement` of the retained vectors.
    """
    a = check_matrix(a)
    m, n = a.shape
    if not 1 <= k <= m:
        raise RankError(f"rank {k} not in [1, {m}] for a matrix with {m} rows")
    if m >= n:
        u, sv, _ = jacobi_svd(a)
    else:
        _, sv, u = jacobi_svd(a.T)
    tol = (NULL_RTOL if rtol is None else rtol) * np.linalg.norm(a)
    keep = int(np.count_nonzero(sv[:k] > tol))
    return np.ascontiguousarray(complete_basis(u[:, :keep], k))


def qrp_flops(m, n):
    """Approximate flop count of a pivoted Householder QR, ``m >= n``."""
    return 2.0 * m * n * n - 2.0 * n ** 3 / 3.0


def svd_flops(m, n):
    """Approximate flop count of an SVD, ``m >= n``."""
    return 2.0 * m * n * n + 11.0 * n ** 3
