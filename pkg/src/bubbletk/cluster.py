"""Spherical Voronoi clusters on S^n: the central data model.

A cluster is q cells cut out of S^n by affine functionals

    f_j(p) = <c_j, p> + k_j,        cell i = { p : i = argmin_j f_j(p) },

under the conventions sum_i c_i = 0 and sum_i k_i = 0. Pair differences are
written c_ij = c_i - c_j and k_ij = k_i - k_j; a non-empty interface between
cells i and j forces |c_ij|^2 = 1 + k_ij^2, which makes the interface a piece
of a geodesic sphere (the "carrying sphere") with explicit Euclidean center
and radius inside R^{n+1}.

Everything downstream (measurement, variation, combinatorics) works through
the queries in this module.
"""
from __future__ import annotations

import itertools
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels, rng
from .errors import ConventionError, VerificationError
from .minkowski import gram
from .tolerances import EPS_GEO, EPS_MEM, RANK_RTOL, TIE_TOL

__all__ = [
    "Cluster",
    "Tie",
    "InterfaceSphere",
    "TripleCarrier",
    "BlowUpCone",
    "cell_of",
    "interface_sphere",
    "triple_carrier",
    "interface_nonempty",
    "triple_set_nonempty",
    "is_standard_bubble",
    "pseudo_conformally_flat",
    "PseudoFlat",
    "blow_up",
    "stationarity_report",
    "StationarityReport",
    "cluster_to_dict",
    "cluster_from_dict",
    "save_cluster",
    "load_cluster",
]


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Cluster:
    """Immutable spherical Voronoi cluster on S^n.

    centers: (q, n+1) quasi-center rows c_i; curvatures: (q,) scalars k_i.
    Both must sum to zero. q is capped at n+2 (beyond that the Minkowski
    parameter machinery has no room).
    """

    n: int
    q: int
    centers: np.ndarray
    curvatures: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n, q = self.n, self.q
        if n < 1:
            raise ConventionError("ambient dimension n must be >= 1")
        if q < 2:
            raise ConventionError("a cluster needs at least two cells")
        if q > n + 2:
            raise ConventionError(f"q = {q} exceeds n + 2 = {n + 2}")
        C = np.asarray(self.centers, dtype=float)
        k = np.asarray(self.curvatures, dtype=float)
        if C.shape != (q, n + 1):
            raise ConventionError(f"centers must have shape {(q, n + 1)}, got {C.shape}")
        if k.shape != (q,):
            raise ConventionError(f"curvatures must have shape {(q,)}, got {k.shape}")
        if not (np.isfinite(C).all() and np.isfinite(k).all()):
            raise ConventionError("parameters must be finite")
        if np.abs(C.sum(axis=0)).max() > EPS_GEO:
            raise ConventionError(
                f"centers do not sum to zero (max |sum| = {np.abs(C.sum(axis=0)).max():.3e})"
            )
        if abs(k.sum()) > EPS_GEO:
            raise ConventionError(f"curvatures do not sum to zero (|sum| = {abs(k.sum()):.3e})")
        object.__setattr__(self, "centers", _freeze(C))
        object.__setattr__(self, "curvatures", _freeze(k))

    # -- basic queries ------------------------------------------------------

    @property
    def ck(self) -> np.ndarray:
        """Homogeneous Minkowski parameters, rows (c_i, -k_i), shape (q, n+2)."""
        return np.hstack([self.centers, -self.curvatures[:, None]])

    def functionals(self, points: np.ndarray) -> np.ndarray:
        """f_j at each point; points (m, n+1) -> (m, q)."""
        P = np.atleast_2d(np.asarray(points, dtype=float))
        return np.einsum("md,jd->mj", P, self.centers) + self.curvatures

    def pair(self, i: int, j: int):
        """(c_ij, k_ij) for ordered (i, j)."""
        return self.centers[i] - self.centers[j], float(self.curvatures[i] - self.curvatures[j])

    def gram(self) -> np.ndarray:
        return gram(self.ck)

    def replace(self, centers, curvatures) -> "Cluster":
        return Cluster(self.n, self.q, centers, curvatures, dict(self.meta))


@dataclass(frozen=True)
class Tie:
    """Result of cell_of when several functionals share the minimum."""

    cells: tuple


def cell_of(cluster: Cluster, p, tol: float = TIE_TOL):
    """Index of the cell owning p, or Tie(cells) when the minimum is shared.

    p must lie on the sphere within EPS_GEO.
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (cluster.n + 1,):
        raise ValueError(f"point must have shape {(cluster.n + 1,)}")
    if abs(np.linalg.norm(p) - 1.0) > EPS_GEO:
        raise ValueError("point is not on the unit sphere")
    f = cluster.functionals(p)[0]
    m = f.min()
    tied = np.nonzero(f <= m + tol)[0]
    if tied.size == 1:
        return int(tied[0])
    return Tie(tuple(int(t) for t in tied))


# ---------------------------------------------------------------------------
# carriers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InterfaceSphere:
    """The geodesic sphere carrying a (potential) interface between cells i, j.

    The carrier is S^n cut by the plane <c_ij, y> + k_ij = 0; inside R^{n+1}
    it is the round (n-1)-sphere of the stated Euclidean center and radius,
    orthogonal to the quasi-center difference.
    """

    i: int
    j: int
    quasi_center: np.ndarray
    curvature: float
    euclid_center: np.ndarray
    euclid_radius: float

    @property
    def axis(self) -> np.ndarray:
        """Unit vector along the quasi-center difference."""
        return self.quasi_center / np.linalg.norm(self.quasi_center)

    def sample_block(self, seed: int, block_index: int, m: int) -> np.ndarray:
        """(m, n+1) uniform points on the carrying sphere."""
        dim = self.quasi_center.size
        g = rng.normal_block(seed, block_index, m, dim)
        a = self.axis
        g -= (g @ a)[:, None] * a
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        return self.euclid_center + self.euclid_radius * g


def interface_sphere(cluster: Cluster, i: int, j: int) -> InterfaceSphere:
    """Carrier of the (i, j) interface; ConventionError when |c_ij|^2 != 1 + k_ij^2.

    The compatibility identity is what makes the carrying sphere exist; pairs
    violating it cannot bound a non-empty interface.
    """
    if i == j:
        raise ValueError("interface needs two distinct cells")
    c, k = cluster.pair(i, j)
    dev = abs(float(c @ c) - 1.0 - k * k)
    if dev > EPS_GEO:
        raise ConventionError(
            f"malformed pair ({i},{j}): |c_ij|^2 - 1 - k_ij^2 = {dev:.3e}"
        )
    denom = 1.0 + k * k
    return InterfaceSphere(
        i=i,
        j=j,
        quasi_center=_freeze(c),
        curvature=k,
        euclid_center=_freeze(-k * c / denom),
        euclid_radius=1.0 / math.sqrt(denom),
    )


@dataclass(frozen=True)
class TripleCarrier:
    """The (n-2)-sphere S^n cut by two interface planes, for cells (i, j, k)."""

    indices: tuple
    p0: np.ndarray
    rho: float
    basis: np.ndarray  # (n+1, n-1) orthonormal columns spanning the sphere's plane

    def sample_block(self, seed: int, block_index: int, m: int) -> np.ndarray:
        dim = self.basis.shape[1]
        u = rng.sphere_block(seed, block_index, m, dim)
        return self.p0 + self.rho * (u @ self.basis.T)


def triple_carrier(cluster: Cluster, i: int, j: int, k: int) -> Optional[TripleCarrier]:
    """Carrier of the triple set of cells (i, j, k); None when it misses the sphere.

    Raises on a degenerate intersection (the two constraint planes parallel).
    """
    c_ij, k_ij = cluster.pair(i, j)
    c_ik, k_ik = cluster.pair(i, k)
    E = np.vstack([c_ij, c_ik])
    sv = np.linalg.svd(E, compute_uv=False)
    if sv[0] < 1e-300 or sv[1] <= sv[0] * RANK_RTOL:
        raise ValueError(
            f"degenerate intersection for cells ({i},{j},{k}): constraint planes parallel"
        )
    rhs = np.array([-k_ij, -k_ik])
    p0 = np.linalg.pinv(E) @ rhs
    rho2 = 1.0 - float(p0 @ p0)
    if rho2 <= 0.0:
        return None
    _, _, vt = np.linalg.svd(E, full_matrices=True)
    basis = vt[2:].T
    return TripleCarrier(
        indices=(i, j, k), p0=_freeze(p0), rho=math.sqrt(rho2), basis=_freeze(basis)
    )


# ---------------------------------------------------------------------------
# non-emptiness
# ---------------------------------------------------------------------------

def _default_face_samples(n: int) -> int:
    return 4096 * n


def _sampled_face_witness(cluster, carrier_sampler, group, samples, seed):
    """Scan carrier samples for a point where `group` are jointly minimal.

    Returns the first witness (block order, then sample order) or None.
    Acceptance: group functionals within EPS_GEO of each other, everything
    else at least EPS_MEM above them.
    """
    C, k = cluster.centers, cluster.curvatures

    def one_block(b, m):
        pts = carrier_sampler(seed, b, m)
        margin, spread = _kernels.sphere_group_margins(pts, C, k, group)
        hit = np.nonzero((margin > EPS_MEM) & (spread < EPS_GEO))[0]
        return pts[hit[0]] if hit.size else None

    for witness in rng.map_blocks(samples, one_block):
        if witness is not None:
            return witness
    return None


def interface_nonempty(cluster: Cluster, i: int, j: int, samples: Optional[int] = None,
                       seed: int = 0, exact: bool = False):
    """(bool, witness point or None) for the interface of cells i and j.

    Default mode samples the carrying sphere; a False is therefore
    probabilistic (no witness found), while True comes with a checkable
    witness. `exact=True` instead solves a small second-order-cone program
    maximizing the dominance margin over the carrying disk (n <= 8), whose
    verdict is exact for q <= n+2, and pushes its optimum to the sphere along
    a recession direction to produce the witness.
    """
    if i == j:
        raise ValueError("interface needs two distinct cells")
    sph = interface_sphere(cluster, i, j)
    if exact:
        return _exact_face_nonempty(cluster, (i, j))
    samples = _default_face_samples(cluster.n) if samples is None else int(samples)
    witness = _sampled_face_witness(
        cluster, sph.sample_block, np.array([i, j]), samples, seed
    )
    return (witness is not None), witness


def triple_set_nonempty(cluster: Cluster, i: int, j: int, k: int,
                        samples: Optional[int] = None, seed: int = 0,
                        exact: bool = False):
    """(bool, witness point or None) for the triple set of cells i, j, k.

    Indices outside the cluster denote no cell at all, so the triple set is
    vacuously empty. Distinct in-range indices are required otherwise.
    """
    if len({i, j, k}) != 3:
        raise ValueError("triple set needs three distinct cells")
    if not all(0 <= t < cluster.q for t in (i, j, k)):
        return False, None
    carrier = triple_carrier(cluster, i, j, k)
    if carrier is None:
        return False, None
    if exact:
        return _exact_face_nonempty(cluster, (i, j, k))
    samples = _default_face_samples(cluster.n) if samples is None else int(samples)
    witness = _sampled_face_witness(
        cluster, carrier.sample_block, np.array([i, j, k]), samples, seed
    )
    return (witness is not None), witness


def _exact_face_nonempty(cluster: Cluster, group):
    """Margin-maximizing SOCP oracle for face non-emptiness (n <= 8).

    Maximize t subject to f_l(y) - f_g(y) >= t for cells l outside the group,
    f equal across the group, and y in the carrying disk of the face. For
    q <= n+2 the count of dominance constraints never exceeds the slice
    dimension, so their recession cone contains a nonzero ray; pushing the
    optimizer along it reaches the carrying sphere without losing margin.
    Hence disk feasibility and sphere feasibility coincide, and the verdict
    is exact (up to conic-solver tolerance, absorbed by EPS_MEM).
    """
    if cluster.n > 8:
        raise ValueError("exact mode supported for n <= 8 only")
    import cvxpy as cp

    C, kv = cluster.centers, cluster.curvatures
    d = cluster.n + 1
    g0 = group[0]
    others = [l for l in range(cluster.q) if l not in group]

    E = np.array([C[g0] - C[gl] for gl in group[1:]])
    rhs = np.array([-(kv[g0] - kv[gl]) for gl in group[1:]])
    p0 = np.linalg.pinv(E) @ rhs
    rho2 = 1.0 - float(p0 @ p0)
    if rho2 <= 0.0:
        return False, None
    rho = math.sqrt(rho2)

    if not others:
        # the group is every cell, so the face is the whole carrier sphere;
        # feasibility was settled by rho2 > 0 and any carrier point works
        _, _, vt = np.linalg.svd(E)
        u = vt[E.shape[0]]
        return True, p0 + rho * u

    y = cp.Variable(d)
    t = cp.Variable()
    cons = [E @ y == rhs, cp.norm(y - p0) <= rho]
    for l in others:
        a = C[l] - C[g0]
        cons.append(a @ y + (kv[l] - kv[g0]) >= t)
    prob = cp.Problem(cp.Maximize(t), cons)
    prob.solve(solver=cp.CLARABEL)
    if prob.status not in ("optimal", "optimal_inaccurate") or t.value is None:
        raise VerificationError(f"margin program failed: status {prob.status}")
    if float(t.value) <= EPS_MEM:
        return False, None

    ystar = np.asarray(y.value, dtype=float)
    witness = _push_to_sphere(C, kv, group, others, E, p0, rho, ystar)
    return True, witness


def _push_to_sphere(C, kv, group, others, E, p0, rho, ystar):
    """Move an interior margin witness along a recession ray to the carrier."""
    import cvxpy as cp

    d = C.shape[1]
    v = cp.Variable(d)
    t2 = cp.Variable()
    cons = [E @ v == 0, cp.norm(v) <= 1.0]
    for l in others:
        cons.append((C[l] - C[group[0]]) @ v >= t2)
    cp.Problem(cp.Maximize(t2), cons).solve(solver=cp.CLARABEL)
    vstar = np.asarray(v.value, dtype=float) if v.value is not None else np.zeros(d)
    if np.linalg.norm(vstar) < 1e-9:
        # recession cone numerically trivial; fall back to radial projection
        w = ystar - p0
        nw = np.linalg.norm(w)
        if nw < 1e-12:
            return None
        out = p0 + rho * w / nw
        return out / np.linalg.norm(out)
    w = ystar - p0
    a = float(vstar @ vstar)
    bq = float(w @ vstar)
    cq = float(w @ w) - rho * rho
    s = (-bq + math.sqrt(max(bq * bq - a * cq, 0.0))) / a
    out = ystar + s * vstar
    return out / np.linalg.norm(out)


# ---------------------------------------------------------------------------
# predicates
# ---------------------------------------------------------------------------

def is_standard_bubble(cluster: Cluster, tol: float = 1e-10):
    """(bool, deviation): whether the Minkowski Gram equals (1/2)(I - 11^T/q)."""
    q = cluster.q
    P = np.eye(q) - np.full((q, q), 1.0 / q)
    dev = float(np.abs(cluster.gram() - 0.5 * P).max())
    return dev < tol, dev


@dataclass(frozen=True)
class PseudoFlat:
    """Least-squares solution of <c_i, xi> = -k_i over all cells."""

    xi: np.ndarray
    conformally_flat: bool
    residual: float


def pseudo_conformally_flat(cluster: Cluster, tol: float = 1e-8) -> Optional[PseudoFlat]:
    """Minimal-norm xi with <c_i, xi> + k_i = 0 for all i, if one exists.

    Returns None when the best least-squares residual exceeds tol. The
    conformally_flat flag records |xi| < 1 (xi inside the open ball).
    """
    xi = np.linalg.pinv(cluster.centers, rcond=RANK_RTOL) @ (-cluster.curvatures)
    residual = float(np.abs(cluster.centers @ xi + cluster.curvatures).max())
    if residual >= tol:
        return None
    return PseudoFlat(
        xi=_freeze(xi),
        conformally_flat=bool(np.linalg.norm(xi) < 1.0),
        residual=residual,
    )


# ---------------------------------------------------------------------------
# blow-up cones
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BlowUpCone:
    point: np.ndarray
    cells: tuple
    normals: np.ndarray  # (|I_p|, n+1), rows n_i(p) = c_i - <c_i, p> p
    d: int               # rank of the pairwise normal differences
    tag: str             # HYPERPLANE | Y | T | SIMPLICIAL | OTHER


_CONE_SAMPLES = 8192
_CONE_SEED = 49374  # fixed internal stream, independent of caller seeds


def _cone_pair_present(p, normals, a, b, eps=EPS_MEM):
    """Sampled presence of the (a, b) face in the tangent Voronoi cone at p."""
    n_ab = normals[a] - normals[b]
    stack = np.vstack([p, n_ab])
    _, _, vt = np.linalg.svd(stack, full_matrices=True)
    basis = vt[2:]
    if basis.shape[0] == 0:
        return False
    others = [l for l in range(normals.shape[0]) if l not in (a, b)]
    if not others:
        return True
    diffs = np.array([normals[l] - normals[a] for l in others])
    m = _CONE_SAMPLES
    u = rng.sphere_block(_CONE_SEED, 0, m, basis.shape[0]) @ basis
    margins = (u @ diffs.T).min(axis=1)
    return bool((margins > eps).any())


def blow_up(cluster: Cluster, p, tol: float = TIE_TOL) -> BlowUpCone:
    """Tangent-cone data at a boundary point p and its classification.

    The cells meeting at p are those whose functionals tie at the minimum
    within tol; their tangent normals are n_i(p) = c_i - <c_i, p> p. The tag
    is decided by d = rank of the pairwise differences: HYPERPLANE (d = 1),
    Y (three cells, d = 2, unit differences meeting at 120 degrees), T (four
    cells, d = 3, all six cone faces present), SIMPLICIAL (every pair present),
    OTHER (anything else, e.g. four cells meeting across a square).
    """
    p = np.asarray(p, dtype=float)
    who = cell_of(cluster, p, tol=tol)
    if not isinstance(who, Tie):
        raise ValueError("interior point: fewer than two cells meet at p")
    cells = who.cells
    normals = np.array([cluster.centers[i] - (cluster.centers[i] @ p) * p for i in cells])

    diffs = np.array([normals[a] - normals[b]
                      for a, b in itertools.combinations(range(len(cells)), 2)])
    sv = np.linalg.svd(diffs, compute_uv=False)
    d = int((sv > sv[0] * RANK_RTOL).sum()) if sv.size and sv[0] > 0 else 0

    tag = "OTHER"
    if d == 1:
        tag = "HYPERPLANE"
    elif len(cells) == 3 and d == 2 and _is_y_cone(normals):
        tag = "Y"
    else:
        present = all(
            _cone_pair_present(p, normals, a, b)
            for a, b in itertools.combinations(range(len(cells)), 2)
        )
        if len(cells) == 4 and d == 3 and present:
            tag = "T"
        elif present:
            tag = "SIMPLICIAL"

    return BlowUpCone(point=_freeze(p), cells=cells, normals=_freeze(normals), d=d, tag=tag)


def _is_y_cone(normals, tol=1e-6):
    u01 = normals[0] - normals[1]
    u12 = normals[1] - normals[2]
    u20 = normals[2] - normals[0]
    for u in (u01, u12, u20):
        if abs(np.linalg.norm(u) - 1.0) > tol:
            return False
    pairs = [(u01, u12), (u12, u20), (u20, u01)]
    return all(abs(float(a @ b) + 0.5) < tol for a, b in pairs)


# ---------------------------------------------------------------------------
# stationarity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StationarityReport:
    cocycle_exact: bool
    max_normal_sum: float
    triple_points_checked: int
    lagrange_multipliers: np.ndarray


def stationarity_report(cluster: Cluster, samples: Optional[int] = None,
                        seed: int = 0) -> StationarityReport:
    """Check the stationarity identities of the cluster.

    (a) Interface curvatures are differences k_i - k_j of per-cell scalars;
    in this representation that is exact by construction and reported as such.
    (b) At sampled triple points the three oriented unit normals
    n_ij = c_ij + k_ij p must sum to zero; the telescoping of quasi-center
    and curvature differences makes this an algebraic identity, so the
    reported maximum is a floating-point sanity bound.
    The Lagrange multipliers are lambda = (n-1) k.
    """
    samples = _default_face_samples(cluster.n) if samples is None else int(samples)
    worst = 0.0
    checked = 0
    for (i, j, k) in itertools.combinations(range(cluster.q), 3):
        try:
            carrier = triple_carrier(cluster, i, j, k)
        except ValueError:
            continue
        if carrier is None:
            continue
        witness = _sampled_face_witness(
            cluster, carrier.sample_block, np.array([i, j, k]), samples, seed
        )
        if witness is None:
            continue
        p = witness
        c_ij, k_ij = cluster.pair(i, j)
        c_jk, k_jk = cluster.pair(j, k)
        c_ki, k_ki = cluster.pair(k, i)
        total = (c_ij + c_jk + c_ki) + (k_ij + k_jk + k_ki) * p
        worst = max(worst, float(np.abs(total).max()))
        checked += 1
    lam = (cluster.n - 1) * cluster.curvatures
    return StationarityReport(
        cocycle_exact=True,
        max_normal_sum=worst,
        triple_points_checked=checked,
        lagrange_multipliers=_freeze(lam),
    )


# ---------------------------------------------------------------------------
# JSON interchange
# ---------------------------------------------------------------------------

def cluster_to_dict(cluster: Cluster) -> dict:
    return {
        "space": "S",
        "n": cluster.n,
        "q": cluster.q,
        "centers": cluster.centers.tolist(),
        "curvatures": cluster.curvatures.tolist(),
        "meta": dict(cluster.meta),
    }


def cluster_from_dict(data: dict) -> Cluster:
    """Validate and build a Cluster from its JSON dictionary form."""
    if not isinstance(data, dict):
        raise ConventionError("cluster document must be a JSON object")
    missing = [key for key in ("space", "n", "q", "centers", "curvatures") if key not in data]
    if missing:
        raise ConventionError(f"cluster document missing keys: {', '.join(missing)}")
    if data["space"] != "S":
        raise ConventionError(f'space must be "S", got {data["space"]!r}')
    try:
        n = int(data["n"])
        q = int(data["q"])
        centers = np.array(data["centers"], dtype=float)
        curvatures = np.array(data["curvatures"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConventionError(f"malformed numeric payload: {exc}") from exc
    meta = data.get("meta", {})
    if not isinstance(meta, dict):
        raise ConventionError("meta must be an object")
    return Cluster(n=n, q=q, centers=centers, curvatures=curvatures, meta=meta)


def save_cluster(cluster: Cluster, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(cluster_to_dict(cluster), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_cluster(path) -> Cluster:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConventionError(f"invalid JSON in {path}: {exc}") from exc
    return cluster_from_dict(data)
