"""Incidence complexes, small-graph machinery, and the ring angle test.

Clusters carry a two-dimensional abstract simplicial complex: vertices are
cells, edges are non-empty interfaces, triangles are non-empty triple sets.
This module extracts it, computes first homology over GF(2) or Q, provides
the weighted graph Laplacian with the discrete maximum principle, recovers
vertex potentials from edge differences, enumerates small graphs up to
isomorphism, and implements the angle-sum infeasibility test for wheel
("ring") clusters.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .cluster import Cluster, interface_nonempty, triple_set_nonempty
from .errors import ConventionError, VerificationError

__all__ = [
    "IncidenceComplex",
    "WeightedGraph",
    "extract_complex",
    "homology_h1",
    "laplacian",
    "is_positive_definite_on_zero_sum",
    "max_principle_solve",
    "recover_potential",
    "CycleObstruction",
    "enumerate_graphs",
    "RingVerdict",
    "ring_feasibility",
]


def _edge(i, j):
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class IncidenceComplex:
    """Cells / interfaces / triple sets as an abstract simplicial complex.

    Construction closes under faces: every edge of a listed triangle is
    added. Vertices are implicit (0..q-1).
    """

    q: int
    edges: frozenset
    triangles: frozenset

    def __post_init__(self):
        tris = frozenset(tuple(sorted(t)) for t in self.triangles)
        edges = set(_edge(*e) for e in self.edges)
        for (a, b, c) in tris:
            edges.update([(a, b), (a, c), (b, c)])
        for e in edges:
            if not (0 <= e[0] < e[1] < self.q):
                raise ValueError(f"edge {e} out of range for q = {self.q}")
        object.__setattr__(self, "edges", frozenset(edges))
        object.__setattr__(self, "triangles", tris)

    def adjacency(self):
        adj = {v: set() for v in range(self.q)}
        for (a, b) in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return adj


def extract_complex(cluster: Cluster, samples: Optional[int] = None,
                    seed: int = 0, exact: bool = False) -> IncidenceComplex:
    """Incidence complex of a cluster by face non-emptiness queries.

    Pairs whose carrying-sphere identity fails cannot carry an interface and
    count as absent; degenerate triples likewise.
    """
    q = cluster.q
    edges = set()
    for i in range(q):
        for j in range(i + 1, q):
            try:
                ok, _ = interface_nonempty(cluster, i, j, samples=samples,
                                           seed=seed, exact=exact)
            except ConventionError:
                continue
            if ok:
                edges.add((i, j))
    triangles = set()
    for (i, j, k) in itertools.combinations(range(q), 3):
        try:
            ok, _ = triple_set_nonempty(cluster, i, j, k, samples=samples,
                                        seed=seed, exact=exact)
        except ValueError:
            continue
        if ok:
            triangles.add((i, j, k))
    return IncidenceComplex(q=q, edges=frozenset(edges), triangles=frozenset(triangles))


# ---------------------------------------------------------------------------
# homology
# ---------------------------------------------------------------------------

def _rank_gf2(rows: list) -> int:
    """Rank over GF(2) of a matrix given as bitmask rows."""
    rank = 0
    basis = []
    for r in rows:
        for b in basis:
            r = min(r, r ^ b)
        if r:
            basis.append(r)
            basis.sort(reverse=True)
            rank += 1
    return rank


def _rank_q(M: list) -> int:
    """Rank over Q by fraction-free (Bareiss-style) elimination on Fractions."""
    M = [[Fraction(x) for x in row] for row in M]
    rows = len(M)
    cols = len(M[0]) if rows else 0
    rank = 0
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        for i in range(r + 1, rows):
            if M[i][c] != 0:
                f = M[i][c] / M[r][c]
                for j in range(c, cols):
                    M[i][j] -= f * M[r][j]
        r += 1
        rank += 1
        if r == rows:
            break
    return rank


def homology_h1(complex_: IncidenceComplex, field: str = "GF2") -> int:
    """Rank of the first simplicial homology of the complex over the field."""
    if field not in ("GF2", "Q"):
        raise ValueError('field must be "GF2" or "Q"')
    edges = sorted(complex_.edges)
    tris = sorted(complex_.triangles)
    E = len(edges)
    if E == 0:
        return 0
    eidx = {e: p for p, e in enumerate(edges)}

    if field == "GF2":
        # boundary_1 rows indexed by vertices, bitmask over edges
        d1 = [0] * complex_.q
        for p, (a, b) in enumerate(edges):
            d1[a] |= 1 << p
            d1[b] |= 1 << p
        rank1 = _rank_gf2(d1)
        d2 = []
        for (a, b, c) in tris:
            m = (1 << eidx[(a, b)]) | (1 << eidx[(a, c)]) | (1 << eidx[(b, c)])
            d2.append(m)
        rank2 = _rank_gf2(d2)
    else:
        d1 = [[0] * E for _ in range(complex_.q)]
        for p, (a, b) in enumerate(edges):
            d1[a][p] = -1
            d1[b][p] = 1
        rank1 = _rank_q(d1)
        d2 = []
        for (a, b, c) in tris:
            row = [0] * E
            row[eidx[(a, b)]] = 1
            row[eidx[(b, c)]] = 1
            row[eidx[(a, c)]] = -1
            d2.append(row)
        rank2 = _rank_q(d2) if d2 else 0
    return (E - rank1) - rank2


# ---------------------------------------------------------------------------
# weighted graphs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightedGraph:
    """Undirected graph with strictly positive edge weights."""

    vertices: int
    weights: dict = field(default_factory=dict)  # (i, j) i < j -> weight

    def __post_init__(self):
        norm = {}
        for (i, j), w in self.weights.items():
            if i == j or not (0 <= min(i, j) and max(i, j) < self.vertices):
                raise ValueError(f"bad edge ({i},{j})")
            if w <= 0:
                raise ValueError(f"edge ({i},{j}) has nonpositive weight {w}")
            norm[_edge(i, j)] = float(w)
        object.__setattr__(self, "weights", norm)

    def adjacency(self):
        adj = {v: set() for v in range(self.vertices)}
        for (a, b) in self.weights:
            adj[a].add(b)
            adj[b].add(a)
        return adj


def _connected(adj, skip=None) -> bool:
    verts = [v for v in adj if v != skip]
    if not verts:
        return True
    seen = {verts[0]}
    stack = [verts[0]]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w != skip and w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(verts)


def laplacian(graph: WeightedGraph) -> np.ndarray:
    """L = sum over edges of w_ij (e_i - e_j)(e_i - e_j)^T."""
    L = np.zeros((graph.vertices, graph.vertices))
    for (i, j), w in graph.weights.items():
        L[i, i] += w
        L[j, j] += w
        L[i, j] -= w
        L[j, i] -= w
    return L


def is_positive_definite_on_zero_sum(graph: WeightedGraph) -> bool:
    """Whether the Laplacian is positive definite on the zero-sum subspace."""
    from .construct import helmert_basis

    V = graph.vertices
    if V == 1:
        return True
    B = helmert_basis(V)
    M = B.T @ laplacian(graph) @ B
    w = np.linalg.eigvalsh(M)
    scale = max(abs(w).max(), 1.0)
    return bool(w.min() > 1e-12 * scale)


def max_principle_solve(graph: WeightedGraph, s: int, t: int) -> np.ndarray:
    """Zero-sum solution a of L a = e_s - e_t, with a_s checked strictly maximal.

    Requires the graph connected and still connected with s removed (so the
    maximum cannot hide behind a cut at s).
    """
    V = graph.vertices
    if s == t or not (0 <= s < V and 0 <= t < V):
        raise ValueError("source and sink must be distinct vertices")
    adj = graph.adjacency()
    if not _connected(adj):
        raise ValueError("graph is not connected")
    if not _connected(adj, skip=s):
        raise ValueError(f"removing the source {s} disconnects the graph")
    L = laplacian(graph)
    rhs = np.zeros(V)
    rhs[s], rhs[t] = 1.0, -1.0
    a = np.linalg.solve(L + np.full((V, V), 1.0 / V), rhs)
    a -= a.mean()
    others = np.delete(a, s)
    if not (a[s] > others.max()):
        raise VerificationError("maximum principle violated: a_s is not strictly maximal")
    return a


@dataclass(frozen=True)
class CycleObstruction:
    """A directed cycle whose edge values do not integrate to zero."""

    cycle: tuple   # vertex sequence v0, v1, ..., vm = v0 implied closed
    total: float


def recover_potential(graph: WeightedGraph, edge_values: dict, tol: float = 1e-9):
    """Zero-sum potential a with value(i, j) = a_i - a_j, or a CycleObstruction.

    edge_values maps ordered pairs to numbers; (i, j) and (j, i) may both be
    given and must be antisymmetric. Integration runs over a BFS spanning
    tree; every remaining edge is then checked, and the first failure
    returns the fundamental cycle witnessing it.
    """
    V = graph.vertices
    vals = {}
    for (i, j), x in edge_values.items():
        e = _edge(i, j)
        if e not in graph.weights:
            raise ValueError(f"value given for absent edge ({i},{j})")
        oriented = float(x) if (i, j) == e else -float(x)
        if e in vals and abs(vals[e] - oriented) > tol:
            raise ValueError(f"inconsistent values for edge {e}")
        vals[e] = oriented
    missing = set(graph.weights) - set(vals)
    if missing:
        raise ValueError(f"missing values for edges: {sorted(missing)}")
    adj = graph.adjacency()
    if not _connected(adj):
        raise ValueError("graph is not connected")

    a = np.zeros(V)
    parent = {0: None}
    order = [0]
    queue = [0]
    while queue:
        u = queue.pop(0)
        for w in sorted(adj[u]):
            if w not in parent:
                parent[w] = u
                e = _edge(u, w)
                # vals[e] = a[e0] - a[e1] with e ordered
                a[w] = a[u] - vals[e] if e == (u, w) else a[u] + vals[e]
                order.append(w)
                queue.append(w)

    tree = {(_edge(u, parent[u])) for u in parent if parent[u] is not None}
    for e in sorted(set(graph.weights) - tree):
        i, j = e
        gap = (a[i] - a[j]) - vals[e]
        if abs(gap) > tol:
            cycle = _fundamental_cycle(parent, i, j)
            total = vals[e] - (a[i] - a[j])
            return CycleObstruction(cycle=tuple(cycle), total=float(total))
    return a - a.mean()


def _fundamental_cycle(parent, i, j):
    """Vertex sequence i -> ... -> j through the tree, closed by edge (j, i)."""
    anc_i = []
    u = i
    while u is not None:
        anc_i.append(u)
        u = parent[u]
    anc_set = set(anc_i)
    path_j = []
    u = j
    while u not in anc_set:
        path_j.append(u)
        u = parent[u]
    lca = u
    return anc_i[: anc_i.index(lca) + 1] + list(reversed(path_j))


# ---------------------------------------------------------------------------
# graph enumeration
# ---------------------------------------------------------------------------

def _edge_list(q):
    return list(itertools.combinations(range(q), 2))


def _perm_edge_maps(q):
    """(q!, E) array: where each edge slot goes under every vertex permutation."""
    edges = _edge_list(q)
    eidx = {e: p for p, e in enumerate(edges)}
    maps = np.empty((math.factorial(q), len(edges)), dtype=np.int64)
    for r, perm in enumerate(itertools.permutations(range(q))):
        for p, (a, b) in enumerate(edges):
            maps[r, p] = eidx[_edge(perm[a], perm[b])]
    return maps


def _canonical_mask(mask: int, maps: np.ndarray, weights: np.ndarray) -> int:
    E = maps.shape[1]
    bits = np.array([(mask >> p) & 1 for p in range(E)], dtype=np.int64)
    return int((bits[maps] @ weights).min())


def _mask_edges(mask, q):
    return [e for p, e in enumerate(_edge_list(q)) if (mask >> p) & 1]


def _filter_two_connected(q, edges):
    if q < 3:
        return False
    adj = {v: set() for v in range(q)}
    for (a, b) in edges:
        adj[a].add(b)
        adj[b].add(a)
    if not _connected(adj):
        return False
    return all(_connected(adj, skip=v) for v in range(q))


def _filter_min_degree_3(q, edges):
    deg = [0] * q
    for (a, b) in edges:
        deg[a] += 1
        deg[b] += 1
    return min(deg) >= 3 if q else False


def _filter_triangle_cover(q, edges):
    eset = set(edges)
    adj = {v: set() for v in range(q)}
    for (a, b) in eset:
        adj[a].add(b)
        adj[b].add(a)
    return all(bool(adj[a] & adj[b]) for (a, b) in eset)


_FILTERS = {
    "two_connected": _filter_two_connected,
    "min_degree_3": _filter_min_degree_3,
    "triangle_cover": _filter_triangle_cover,
}


def enumerate_graphs(q: int, filter: Optional[str] = None) -> list:
    """All graphs on q labeled-then-canonicalized vertices, up to isomorphism.

    Canonical form: the minimum adjacency bitmask over all q! vertex
    permutations. Graphs are grown one edge at a time from the empty graph,
    canonicalizing at each step, which keeps the work proportional to the
    number of isomorphism classes instead of 2^C(q,2). Returns sorted edge
    lists. q <= 8 (the permutation count is the budget).
    """
    if not (1 <= q <= 8):
        raise ValueError("q must be between 1 and 8")
    if filter is not None and filter not in _FILTERS:
        raise ValueError(f"unknown filter {filter!r}; options: {sorted(_FILTERS)}")
    E = q * (q - 1) // 2
    maps = _perm_edge_maps(q)
    weights = 1 << np.arange(E, dtype=np.int64)
    level = {0}
    seen = {0}
    while level:
        nxt = set()
        for mask in level:
            for p in range(E):
                if not (mask >> p) & 1:
                    cand = _canonical_mask(mask | (1 << p), maps, weights)
                    if cand not in seen:
                        seen.add(cand)
                        nxt.add(cand)
        level = nxt
    out = []
    for mask in sorted(seen):
        edges = _mask_edges(mask, q)
        if filter is None or _FILTERS[filter](q, edges):
            out.append(edges)
    return out


# ---------------------------------------------------------------------------
# ring feasibility
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RingVerdict:
    feasible: bool
    angle_sum_deg: float
    ceiling_deg: float
    excess_deg: float
    construction: Optional[dict] = None


def ring_feasibility(q: int, curvatures) -> RingVerdict:
    """Angle-sum test for a wheel cluster: hub cell plus a (q-1)-cycle.

    curvatures are the q-1 interface curvatures k_iq between each ring cell
    and the hub, all positive. At the triple point of ring neighbors i, j and
    the hub, the two hub interfaces (radii 1/k_iq, 1/k_jq) meet at 60
    degrees; the law of cosines gives the chord between the ring-cell sphere
    centers, and the two base angles of that triangle bound the polygon
    angles at i and j from below. Summed around the ring the bound is exactly
    (q-1) * 120 degrees, while a closed planar (q-1)-gon allows at most
    (q-3) * 180; excess >= 0 (ties included, the inequality being strict) is
    infeasible. For q >= 8 a regular-polygon construction with the mean
    curvature is attached as an existence sketch when the test passes.
    """
    if q < 4:
        raise ValueError("a ring needs q >= 4 (three ring cells and a hub)")
    k = np.asarray(curvatures, dtype=float)
    if k.shape != (q - 1,):
        raise ValueError(f"need {q - 1} ring curvatures, got shape {k.shape}")
    if k.min() <= 0.0:
        raise ValueError("ring curvatures must be strictly positive")

    r = 1.0 / k
    angle_sum = 0.0
    m = q - 1
    for i in range(m):
        j = (i + 1) % m
        ri, rj = r[i], r[j]
        d = math.sqrt(ri * ri + rj * rj - ri * rj)  # apex angle 60 degrees
        cos_ij = (ri * ri + d * d - rj * rj) / (2.0 * ri * d)
        cos_ji = (rj * rj + d * d - ri * ri) / (2.0 * rj * d)
        theta_ij = math.acos(max(-1.0, min(1.0, cos_ij)))
        theta_ji = math.acos(max(-1.0, min(1.0, cos_ji)))
        angle_sum += math.degrees(theta_ij + theta_ji)
    ceiling = (q - 3) * 180.0
    excess = angle_sum - ceiling
    feasible = excess < -1e-9
    construction = None
    if feasible and q >= 8:
        rad = float(np.mean(r))
        side = rad  # equilateral chord when curvatures are equal
        circum = side / (2.0 * math.sin(math.pi / m))
        construction = {
            "polygon_vertices": [
                [circum * math.cos(2.0 * math.pi * t / m),
                 circum * math.sin(2.0 * math.pi * t / m)]
                for t in range(m)
            ],
            "interior_angle_deg": (m - 2) * 180.0 / m,
            "required_deg": 120.0,
        }
    return RingVerdict(
        feasible=feasible,
        angle_sum_deg=angle_sum,
        ceiling_deg=ceiling,
        excess_deg=excess,
        construction=construction,
    )
