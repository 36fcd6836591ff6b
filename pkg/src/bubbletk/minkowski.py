"""Linear algebra over Minkowski space R^{n+2} with signature (n+1, 1).

The last coordinate is the timelike one:

    <x, y> = sum_{i <= n+1} x_i y_i - x_{n+2} y_{n+2},

i.e. the metric is J = diag(1, ..., 1, -1). The orthochronous Lorentz group
O+(n+1, 1) consists of U with U^T J U = J and U[-1, -1] >= 1.

Homogeneous cluster parameters live here as row lists ck_i = (c_i, -k_i);
their pairwise Minkowski products form the Gram matrix, a complete invariant
of the cluster up to orthochronous transformations, which `align` inverts
constructively.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import ConventionError, VerificationError
from .tolerances import EPS_GEO, EPS_LORENTZ, RANK_RTOL

__all__ = [
    "metric",
    "minkowski_dot",
    "is_lorentz",
    "boost_generator",
    "boost",
    "expm_pade6",
    "gram",
    "align",
]


def metric(dim: int) -> np.ndarray:
    """J = diag(1, ..., 1, -1) of size dim."""
    J = np.eye(dim)
    J[-1, -1] = -1.0
    return J


def minkowski_dot(x, y):
    """<x, y> with the last coordinate timelike. Broadcasts over leading axes."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != y.shape[-1]:
        raise ValueError(f"dimension mismatch: {x.shape[-1]} vs {y.shape[-1]}")
    return np.sum(x[..., :-1] * y[..., :-1], axis=-1) - x[..., -1] * y[..., -1]


def is_lorentz(U, tol: float = EPS_LORENTZ) -> bool:
    """True iff U preserves the form within tol and keeps time orientation."""
    return lorentz_residual(U) < tol and np.asarray(U)[-1, -1] >= 1.0 - tol


def lorentz_residual(U) -> float:
    """Max-norm residual of U^T J U - J."""
    U = np.asarray(U, dtype=float)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ValueError("U must be square")
    J = metric(U.shape[0])
    return float(np.abs(U.T @ J @ U - J).max())


def boost_generator(theta) -> np.ndarray:
    """Generator B of the boost one-parameter subgroup for direction theta.

    theta has length n+1; B is (n+2) x (n+2) with B[:-1, -1] = B[-1, :-1] = theta.
    exp(tB) acts on the sphere (projectively) with velocity field
    p -> theta - <theta, p> p at t = 0.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.ndim != 1:
        raise ValueError("theta must be a vector")
    if not np.any(theta):
        raise ValueError("theta must be nonzero")
    d = theta.size + 1
    B = np.zeros((d, d))
    B[:-1, -1] = theta
    B[-1, :-1] = theta
    return B


def boost(theta, t: float = 1.0) -> np.ndarray:
    """exp(t * boost_generator(theta)) in closed form.

    B^3 = |theta|^2 B, so the exponential series telescopes to

        exp(tB) = I + sinh(t|theta|)/|theta| B + (cosh(t|theta|) - 1)/|theta|^2 B^2.
    """
    B = boost_generator(theta)
    r = float(np.linalg.norm(np.asarray(theta, dtype=float)))
    s = t * r
    U = np.eye(B.shape[0])
    U += (math.sinh(s) / r) * B
    U += ((math.cosh(s) - 1.0) / (r * r)) * (B @ B)
    return U


# Pade [6/6] coefficients of exp: c_k = 6! (12-k)! / (12! k! (6-k)!).
_PADE6_C = (
    1.0,
    1.0 / 2.0,
    5.0 / 44.0,
    1.0 / 66.0,
    1.0 / 792.0,
    1.0 / 15840.0,
    1.0 / 665280.0,
)
_PADE6_THETA = 0.25  # conservative scaling threshold for the 1-norm


def expm_pade6(A) -> np.ndarray:
    """Matrix exponential by scaling-and-squaring with a fixed order-6 Pade core.

    Generic (works for any square matrix); `boost` is the closed form for the
    rank-2 generators and the two are cross-checked in the tests.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    norm = float(np.abs(A).sum(axis=0).max())
    s = 0
    if norm > _PADE6_THETA:
        s = int(math.ceil(math.log2(norm / _PADE6_THETA)))
    As = A / (2.0 ** s)
    d = A.shape[0]
    # N = sum c_k As^k, D = sum c_k (-As)^k
    P = np.eye(d)
    N = _PADE6_C[0] * P
    D = _PADE6_C[0] * P
    sign = 1.0
    for k in range(1, 7):
        P = P @ As
        sign = -sign
        N = N + _PADE6_C[k] * P
        D = D + _PADE6_C[k] * sign * P
    R = np.linalg.solve(D, N)
    for _ in range(s):
        R = R @ R
    return R


def gram(ck) -> np.ndarray:
    """Minkowski Gram matrix G_ij = <ck_i, ck_j> of a zero-sum parameter list.

    G is symmetric with zero row and column sums (it is a quadratic form on
    the zero-sum subspace), and is invariant under any Lorentz transformation
    of the list.
    """
    CK = np.asarray(ck, dtype=float)
    if CK.ndim != 2:
        raise ValueError("ck must be a list of vectors")
    total = CK.sum(axis=0)
    if np.abs(total).max() > EPS_GEO:
        raise ConventionError(
            f"parameter list does not sum to zero (max |sum| = {np.abs(total).max():.3e})"
        )
    S = CK[:, :-1] @ CK[:, :-1].T
    t = CK[:, -1]
    return S - np.outer(t, t)


def _minkowski_complement(rows: np.ndarray):
    """Minkowski-orthonormal basis of the orthogonal complement of span(rows).

    Gram-Schmidt in the indefinite metric, pivoting each step on the vector
    of largest |<w, w>| for stability, then sorted so any timelike vector
    (norm -1) comes last. Returns (basis rows, signs).
    """
    d = rows.shape[1]
    J = metric(d)
    M = rows @ J
    _, sv, vt = np.linalg.svd(M)
    rank = int((sv > sv[0] * RANK_RTOL).sum()) if sv.size else 0
    work = [vt[r] for r in range(rank, d)]

    out = []
    signs = []
    while work:
        norms = [minkowski_dot(w, w) for w in work]
        pick = int(np.argmax(np.abs(norms)))
        nrm = norms[pick]
        if abs(nrm) < 1e-12:
            raise VerificationError(
                "degenerate orthogonal complement (null vector encountered)"
            )
        w = work.pop(pick)
        eps = 1.0 if nrm > 0 else -1.0
        w = w / math.sqrt(abs(nrm))
        out.append(w)
        signs.append(eps)
        work = [v - eps * minkowski_dot(v, w) * w for v in work]

    order = sorted(range(len(out)), key=lambda i: -signs[i])  # +1 first, -1 last
    basis = np.array([out[i] for i in order]) if out else np.zeros((0, d))
    return basis, [signs[i] for i in order]


def align(ck1, ck2, tol: float = 1e-8) -> np.ndarray:
    """Orthochronous Lorentz U with U ck1_i = ck2_i for all i.

    Requires gram(ck1) = gram(ck2) within tol and full rank q-1 on the
    zero-sum subspace. Construction: the first q-1 rows (independent, since
    the all-ones relation is the only one) are matched directly; both spans
    are extended by Minkowski-orthonormal complement bases with matched
    signature order, and the timelike complement vector of the target side is
    flipped if needed to land in the orthochronous component. The excluded
    row is matched automatically because both lists sum to zero.
    """
    A = np.asarray(ck1, dtype=float)
    B = np.asarray(ck2, dtype=float)
    if A.shape != B.shape:
        raise ValueError("parameter lists must have equal shapes")
    q, d = A.shape

    G1 = gram(A)
    G2 = gram(B)
    dev = float(np.abs(G1 - G2).max())
    if dev > tol:
        raise VerificationError(f"gram mismatch: max deviation {dev:.3e} > {tol:.1e}")

    rows_a = A[: q - 1]
    rows_b = B[: q - 1]
    sv = np.linalg.svd(rows_a, compute_uv=False)
    if q - 1 > d or sv.size == 0 or (sv > sv[0] * RANK_RTOL).sum() < q - 1:
        raise VerificationError(
            "rank deficiency: parameter list does not have full rank q-1"
        )

    WA, sig_a = _minkowski_complement(rows_a)
    WB, sig_b = _minkowski_complement(rows_b)
    if sig_a != sig_b:
        raise VerificationError(
            f"complement signatures differ: {sig_a} vs {sig_b} (gram not equivalent)"
        )

    MA = np.vstack([rows_a, WA])
    MB = np.vstack([rows_b, WB])
    U = np.linalg.solve(MA, MB).T

    lorentz_tol = max(tol, EPS_LORENTZ)
    J = metric(d)
    residual = float(np.abs(U.T @ J @ U - J).max())
    if residual > lorentz_tol:
        raise VerificationError(f"alignment is not Lorentz (residual {residual:.3e})")
    if U[-1, -1] < 1.0 - lorentz_tol:
        # wrong time orientation: flip the timelike complement vector
        if not (sig_b and sig_b[-1] < 0):
            raise VerificationError(
                "alignment forced an antichronous map and no timelike complement "
                "vector is available to flip"
            )
        MB = MB.copy()
        MB[-1] *= -1.0
        U = np.linalg.solve(MA, MB).T
        if not is_lorentz(U, tol=lorentz_tol):
            raise VerificationError(
                "alignment is not orthochronous Lorentz "
                f"(residual {lorentz_residual(U):.3e})"
            )

    recon = float(np.abs(A @ U.T - B).max())
    if recon > tol:
        raise VerificationError(f"alignment post-check failed: residual {recon:.3e}")
    return U
