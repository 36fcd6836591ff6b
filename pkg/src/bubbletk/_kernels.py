"""Hot Monte Carlo kernels, with a numba backend and a pure-numpy fallback.

The numba path is the default. Set BUBBLETK_NO_NUMBA=1 to force the numpy
path (same results; integer counts are identical, float margins agree to
rounding). Each kernel processes one block of samples serially, so results
never depend on thread scheduling; threading happens a level up, over blocks.

Two functional families appear everywhere:

  sphere:    F_j(p) = <c_j, p> + k_j            (p on S^n, affine in p)
  euclidean: F_j(x) = a_j |x|^2 + 2 <c_j, x> + b_j

Cell membership is argmin_j F_j with ties going to the lowest index.
"""
from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("BUBBLETK_NO_NUMBA", "").strip().lower() in ("1", "true", "yes")

if not _DISABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _DISABLED = True

USE_NUMBA = not _DISABLED


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# numpy reference implementations
# ---------------------------------------------------------------------------

def _sphere_functionals_np(points, C, k):
    # einsum keeps the reduction order fixed (no BLAS dispatch)
    return np.einsum("md,jd->mj", points, C) + k


def _euclid_functionals_np(points, C, a, b):
    r2 = np.einsum("md,md->m", points, points)
    return a * r2[:, None] + 2.0 * np.einsum("md,jd->mj", points, C) + b


def _counts_from_F(F, q):
    idx = np.argmin(F, axis=1)
    return np.bincount(idx, minlength=q).astype(np.int64)


def _assign_from_F(F):
    idx = np.argmin(F, axis=1)
    m = F.shape[0]
    best = F[np.arange(m), idx]
    G = F.copy()
    G[np.arange(m), idx] = np.inf
    runner = G.min(axis=1) - best
    return idx.astype(np.int64), runner


def _group_margins_from_F(F, group):
    group = np.asarray(group, dtype=np.int64)
    q = F.shape[1]
    others = np.setdiff1d(np.arange(q), group)
    inside = F[:, group]
    hi = inside.max(axis=1)
    lo = inside.min(axis=1)
    if others.size:
        margin = F[:, others].min(axis=1) - hi
    else:
        margin = np.full(F.shape[0], np.inf)
    return margin, hi - lo


def sphere_cell_counts_np(points, C, k):
    return _counts_from_F(_sphere_functionals_np(points, C, k), C.shape[0])


def sphere_assign_np(points, C, k):
    return _assign_from_F(_sphere_functionals_np(points, C, k))


def sphere_group_margins_np(points, C, k, group):
    return _group_margins_from_F(_sphere_functionals_np(points, C, k), group)


def euclid_cell_counts_np(points, C, a, b):
    return _counts_from_F(_euclid_functionals_np(points, C, a, b), C.shape[0])


def euclid_assign_np(points, C, a, b):
    return _assign_from_F(_euclid_functionals_np(points, C, a, b))


def euclid_group_margins_np(points, C, a, b, group):
    return _group_margins_from_F(_euclid_functionals_np(points, C, a, b), group)


# ---------------------------------------------------------------------------
# numba implementations (serial per block; summation order is fixed)
# ---------------------------------------------------------------------------

if USE_NUMBA:

    @njit(cache=True, nogil=True)
    def _sphere_F_row(points, C, k, s, j):
        d = points.shape[1]
        acc = k[j]
        for t in range(d):
            acc += C[j, t] * points[s, t]
        return acc

    @njit(cache=True, nogil=True)
    def _euclid_F_row(points, C, a, b, s, j):
        d = points.shape[1]
        r2 = 0.0
        for t in range(d):
            r2 += points[s, t] * points[s, t]
        acc = a[j] * r2 + b[j]
        for t in range(d):
            acc += 2.0 * C[j, t] * points[s, t]
        return acc

    @njit(cache=True, nogil=True)
    def _sphere_cell_counts_nb(points, C, k):
        m = points.shape[0]
        q = C.shape[0]
        counts = np.zeros(q, dtype=np.int64)
        for s in range(m):
            best = 0
            fbest = _sphere_F_row(points, C, k, s, 0)
            for j in range(1, q):
                f = _sphere_F_row(points, C, k, s, j)
                if f < fbest:
                    fbest = f
                    best = j
            counts[best] += 1
        return counts

    @njit(cache=True, nogil=True)
    def _sphere_assign_nb(points, C, k):
        m = points.shape[0]
        q = C.shape[0]
        idx = np.empty(m, dtype=np.int64)
        runner = np.empty(m, dtype=np.float64)
        for s in range(m):
            best = 0
            fbest = _sphere_F_row(points, C, k, s, 0)
            second = np.inf
            for j in range(1, q):
                f = _sphere_F_row(points, C, k, s, j)
                if f < fbest:
                    second = fbest
                    fbest = f
                    best = j
                elif f < second:
                    second = f
            idx[s] = best
            runner[s] = second - fbest
        return idx, runner

    @njit(cache=True, nogil=True)
    def _sphere_group_margins_nb(points, C, k, group):
        m = points.shape[0]
        q = C.shape[0]
        g = group.shape[0]
        margin = np.empty(m, dtype=np.float64)
        spread = np.empty(m, dtype=np.float64)
        for s in range(m):
            hi = -np.inf
            lo = np.inf
            mo = np.inf
            for j in range(q):
                inside = False
                for t in range(g):
                    if group[t] == j:
                        inside = True
                        break
                f = _sphere_F_row(points, C, k, s, j)
                if inside:
                    if f > hi:
                        hi = f
                    if f < lo:
                        lo = f
                elif f < mo:
                    mo = f
            margin[s] = mo - hi
            spread[s] = hi - lo
        return margin, spread

    @njit(cache=True, nogil=True)
    def _euclid_cell_counts_nb(points, C, a, b):
        m = points.shape[0]
        q = C.shape[0]
        counts = np.zeros(q, dtype=np.int64)
        for s in range(m):
            best = 0
            fbest = _euclid_F_row(points, C, a, b, s, 0)
            for j in range(1, q):
                f = _euclid_F_row(points, C, a, b, s, j)
                if f < fbest:
                    fbest = f
                    best = j
            counts[best] += 1
        return counts

    @njit(cache=True, nogil=True)
    def _euclid_assign_nb(points, C, a, b):
        m = points.shape[0]
        q = C.shape[0]
        idx = np.empty(m, dtype=np.int64)
        runner = np.empty(m, dtype=np.float64)
        for s in range(m):
            best = 0
            fbest = _euclid_F_row(points, C, a, b, s, 0)
            second = np.inf
            for j in range(1, q):
                f = _euclid_F_row(points, C, a, b, s, j)
                if f < fbest:
                    second = fbest
                    fbest = f
                    best = j
                elif f < second:
                    second = f
            idx[s] = best
            runner[s] = second - fbest
        return idx, runner

    @njit(cache=True, nogil=True)
    def _euclid_group_margins_nb(points, C, a, b, group):
        m = points.shape[0]
        q = C.shape[0]
        g = group.shape[0]
        margin = np.empty(m, dtype=np.float64)
        spread = np.empty(m, dtype=np.float64)
        for s in range(m):
            hi = -np.inf
            lo = np.inf
            mo = np.inf
            for j in range(q):
                inside = False
                for t in range(g):
                    if group[t] == j:
                        inside = True
                        break
                f = _euclid_F_row(points, C, a, b, s, j)
                if inside:
                    if f > hi:
                        hi = f
                    if f < lo:
                        lo = f
                elif f < mo:
                    mo = f
            margin[s] = mo - hi
            spread[s] = hi - lo
        return margin, spread


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def _contig(x):
    return np.ascontiguousarray(x, dtype=np.float64)


def sphere_cell_counts(points, C, k):
    """Per-cell sample counts under argmin membership. Returns int64 (q,)."""
    if USE_NUMBA:
        return _sphere_cell_counts_nb(_contig(points), _contig(C), _contig(k))
    return sphere_cell_counts_np(points, C, k)


def sphere_assign(points, C, k):
    """(cell index, margin to runner-up) per sample."""
    if USE_NUMBA:
        return _sphere_assign_nb(_contig(points), _contig(C), _contig(k))
    return sphere_assign_np(points, C, k)


def sphere_group_margins(points, C, k, group):
    """(margin, spread) per sample for a candidate face with cells `group`.

    margin = min over other cells of F - max over group (inf when the group
    is every cell); spread = max over group - min over group. A sample lies
    on the open face iff spread is tiny and margin is positive.
    """
    group = np.asarray(group, dtype=np.int64)
    if USE_NUMBA:
        return _sphere_group_margins_nb(_contig(points), _contig(C), _contig(k), group)
    return sphere_group_margins_np(points, C, k, group)


def euclid_cell_counts(points, C, a, b):
    if USE_NUMBA:
        return _euclid_cell_counts_nb(_contig(points), _contig(C), _contig(a), _contig(b))
    return euclid_cell_counts_np(points, C, a, b)


def euclid_assign(points, C, a, b):
    if USE_NUMBA:
        return _euclid_assign_nb(_contig(points), _contig(C), _contig(a), _contig(b))
    return euclid_assign_np(points, C, a, b)


def euclid_group_margins(points, C, a, b, group):
    group = np.asarray(group, dtype=np.int64)
    if USE_NUMBA:
        return _euclid_group_margins_nb(
            _contig(points), _contig(C), _contig(a), _contig(b), group
        )
    return euclid_group_margins_np(points, C, a, b, group)
