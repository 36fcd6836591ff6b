"""Constructors for standard bubbles and the Möbius action on clusters.

The three constructors form a ladder: equal_volume_bubble places curvature
zero and the quasi-centers at simplex vertices; bubble_from_curvatures
factors the target Gram matrix (1/2)P + k k^T; bubble_from_volumes runs a
damped Newton iteration on the curvature-to-volume map, with common random
numbers so the residual it drives to zero is a deterministic function.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cluster import Cluster
from .errors import ConventionError
from .minkowski import lorentz_residual
from .tolerances import EPS_GEO, EPS_LORENTZ

__all__ = [
    "equal_volume_bubble",
    "bubble_from_curvatures",
    "bubble_from_volumes",
    "SolverTrace",
    "apply_mobius",
    "helmert_basis",
]


def helmert_basis(q: int) -> np.ndarray:
    """(q, q-1) matrix with orthonormal columns spanning the zero-sum subspace.

    Column j has 1/sqrt(j(j+1)) in its first j entries and -j/sqrt(j(j+1))
    in entry j, zeros below.
    """
    B = np.zeros((q, q - 1))
    for j in range(1, q):
        s = 1.0 / np.sqrt(j * (j + 1.0))
        B[:j, j - 1] = s
        B[j, j - 1] = -j * s
    return B


def equal_volume_bubble(n: int, q: int) -> Cluster:
    """The q-cell bubble of equal volumes on S^n: k = 0, simplex quasi-centers.

    The quasi-centers are the vertices of a regular (q-1)-simplex with unit
    edge length, centered at the origin, in the first q-1 coordinates. Taking
    c_i = (row i of the Helmert basis)/sqrt(2) gives exactly that: pairwise
    squared distances (e_i - e_j pushed through an orthonormal zero-sum
    basis) come out as 2/2 = 1, and the Gram is (1/2)(I - 11^T/q) on the nose.
    """
    if not (2 <= q <= n + 2):
        raise ConventionError(f"q = {q} outside [2, n + 2] = [2, {n + 2}]")
    B = helmert_basis(q)
    C = np.zeros((q, n + 1))
    C[:, : q - 1] = B / np.sqrt(2.0)
    C -= C.mean(axis=0)
    return Cluster(n=n, q=q, centers=C, curvatures=np.zeros(q))


def bubble_from_curvatures(n: int, q: int, k) -> Cluster:
    """Standard bubble with the prescribed zero-sum curvature vector.

    Factors G = (1/2)P + k k^T (P the zero-sum projector) as C C^T with C of
    rank q-1, so that the cluster's Minkowski Gram C C^T - k k^T equals
    (1/2)P. The factorization is pinned down by sorting eigenvalues in
    descending order and orienting each eigenvector by the sign of its first
    entry above threshold; without that the result is only unique up to a
    rotation of the quasi-centers.
    """
    k = np.asarray(k, dtype=float)
    if k.shape != (q,):
        raise ConventionError(f"curvature vector must have shape {(q,)}")
    if abs(k.sum()) > EPS_GEO:
        raise ConventionError(f"curvatures must sum to zero (|sum| = {abs(k.sum()):.3e})")
    if not (2 <= q <= n + 2):
        raise ConventionError(f"q = {q} outside [2, n + 2] = [2, {n + 2}]")

    P = np.eye(q) - np.full((q, q), 1.0 / q)
    G = 0.5 * P + np.outer(k, k)
    w, V = np.linalg.eigh(G)
    w, V = w[::-1], V[:, ::-1]
    w = np.clip(w[: q - 1], 0.0, None)
    V = V[:, : q - 1].copy()
    for col in range(q - 1):
        v = V[:, col]
        lead = np.nonzero(np.abs(v) > 1e-9 * np.abs(v).max())[0][0]
        if v[lead] < 0:
            V[:, col] = -v
    C = np.zeros((q, n + 1))
    C[:, : q - 1] = V * np.sqrt(w)
    C -= C.mean(axis=0)
    return Cluster(n=n, q=q, centers=C, curvatures=k)


@dataclass
class SolverTrace:
    """Iteration history of the prescribed-volume Newton solver."""

    converged: bool
    iterations: int
    residual_inf: float
    seed: int
    mc_samples: int
    history: list = field(default_factory=list)


def bubble_from_volumes(n: int, q: int, v, mc_samples: int = 1_000_000,
                        seed: int = 0, max_iter: int = 15, tol_v: float = 1e-3):
    """Standard bubble whose Monte Carlo cell volumes match v; (Cluster, trace).

    Damped Newton on the zero-sum curvature coordinates: the residual is
    cell_volumes(bubble_from_curvatures(k)) - v, evaluated with a fixed seed
    (common random numbers) so it is a smooth deterministic function of k and
    the iteration cannot chase sampling noise. The Jacobian is built by
    central differences with step 1e-3; a step is halved (up to 10 times)
    while it fails to decrease the sup-norm residual. The curvature-to-volume
    map is a bijection onto the open simplex, so k = 0 is a sound start.

    Non-convergence within max_iter returns the best iterate with
    trace.converged = False rather than raising.
    """
    from .measure import cell_volumes

    v = np.asarray(v, dtype=float)
    if v.shape != (q,):
        raise ConventionError(f"volume vector must have shape {(q,)}")
    if v.min() <= 0.0 or abs(v.sum() - 1.0) > 1e-9:
        raise ConventionError("volumes must be strictly positive and sum to 1")

    B = helmert_basis(q)
    h = 1e-3

    def residual(a):
        cl = bubble_from_curvatures(n, q, B @ a)
        reports = cell_volumes(cl, samples=mc_samples, seed=seed)
        return np.array([r.value for r in reports]) - v

    a = np.zeros(q - 1)
    r = residual(a)
    best_a, best_r = a.copy(), r.copy()
    history = [{"iter": 0, "residual_inf": float(np.abs(r).max()), "step": 0.0}]
    it = 0
    while np.abs(r).max() >= tol_v and it < max_iter:
        it += 1
        J = np.empty((q, q - 1))
        for l in range(q - 1):
            e = np.zeros(q - 1)
            e[l] = h
            J[:, l] = (residual(a + e) - residual(a - e)) / (2.0 * h)
        delta, *_ = np.linalg.lstsq(J, -r, rcond=None)
        t = 1.0
        for _ in range(10):
            r_new = residual(a + t * delta)
            if np.abs(r_new).max() < np.abs(r).max():
                break
            t *= 0.5
        else:
            r_new = residual(a + t * delta)
        a = a + t * delta
        r = r_new
        if np.abs(r).max() < np.abs(best_r).max():
            best_a, best_r = a.copy(), r.copy()
        history.append({"iter": it, "residual_inf": float(np.abs(r).max()), "step": t})

    converged = bool(np.abs(best_r).max() < tol_v)
    trace = SolverTrace(
        converged=converged,
        iterations=it,
        residual_inf=float(np.abs(best_r).max()),
        seed=seed,
        mc_samples=mc_samples,
        history=history,
    )
    return bubble_from_curvatures(n, q, B @ best_a), trace


def apply_mobius(cluster: Cluster, U: np.ndarray) -> Cluster:
    """Push the cluster through the Möbius map of an orthochronous Lorentz U.

    The homogeneous rows ck_i map to U ck_i; the zero-sum convention is not
    preserved by U, so the mean row is subtracted afterwards, which changes
    no pairwise difference and hence no cell. The Minkowski Gram and the
    incidence structure are untouched.
    """
    U = np.asarray(U, dtype=float)
    d = cluster.n + 2
    if U.shape != (d, d):
        raise ConventionError(f"transform must have shape {(d, d)}")
    if lorentz_residual(U) > max(EPS_LORENTZ, 1e-9):
        raise ConventionError(
            f"matrix is not a Lorentz isometry (residual {lorentz_residual(U):.3e})"
        )
    if U[-1, -1] < 0:
        raise ConventionError("antichronous transform: reverses the time orientation")
    ckU = cluster.ck @ U.T
    ckU -= ckU.mean(axis=0)
    return Cluster(
        n=cluster.n,
        q=cluster.q,
        centers=ckU[:, :-1],
        curvatures=-ckU[:, -1],
        meta=dict(cluster.meta),
    )
