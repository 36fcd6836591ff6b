"""Stereographic and equatorial-ball views of spherical clusters.

The stereographic chart is taken from a pole that sits strictly inside one
cell, so exactly that cell becomes the unbounded Euclidean cell. Parameters
transform linearly in the pole-adapted frame: writing H for the Householder
reflection exchanging the pole with e_{n+1},

    c^R_i = (H c_i)[:n],    k^R_i = k^S_i + <c_i, pole>,

and the Euclidean membership functional for a point x in R^n is

    k^R_i |x|^2 + 2 <c^R_i, x> + (2 k^S_i - k^R_i).

Euclidean parameters alone are lossy (a flat interface has k^R = 0 and no
preferred sphere through it), so the view retains the spherical offsets and
the frame; the round trip back to the sphere is exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .cluster import Cluster, Tie, cell_of
from .errors import ConventionError
from .tolerances import EPS_GEO, TIE_TOL

__all__ = [
    "stereo_to_plane",
    "stereo_to_sphere",
    "EuclideanView",
    "to_euclidean",
    "view_to_sphere_params",
    "BallView",
    "ball_projection",
]


def _pole_frame(pole: np.ndarray) -> np.ndarray:
    """Householder reflection H (symmetric, orthogonal) with H e_last = pole."""
    d = pole.size
    e = np.zeros(d)
    e[-1] = 1.0
    v = e - pole
    nv2 = float(v @ v)
    if nv2 < 1e-30:
        return np.eye(d)
    return np.eye(d) - (2.0 / nv2) * np.outer(v, v)


def _check_pole(pole: np.ndarray) -> np.ndarray:
    pole = np.asarray(pole, dtype=float)
    if abs(np.linalg.norm(pole) - 1.0) > EPS_GEO:
        raise ConventionError("pole must be a unit vector")
    return pole


def stereo_to_plane(p, pole) -> np.ndarray:
    """Stereographic image in R^n of p on S^n, projecting away from pole.

    Accepts a single point or a batch along the leading axes.
    """
    pole = _check_pole(pole)
    p = np.asarray(p, dtype=float)
    H = _pole_frame(pole)
    y = p @ H  # H is symmetric, so this applies H to each point
    denom = 1.0 - y[..., -1]
    if np.any(denom < 1e-12):
        raise ValueError("point at (or too close to) the pole maps to infinity")
    return y[..., :-1] / denom[..., None]


def stereo_to_sphere(x, pole) -> np.ndarray:
    """Inverse stereographic map: x in R^n to S^n, with the given pole."""
    pole = _check_pole(pole)
    x = np.asarray(x, dtype=float)
    s = np.einsum("...d,...d->...", x, x)
    y = np.concatenate([2.0 * x, (s - 1.0)[..., None]], axis=-1)
    return (y / (s + 1.0)[..., None]) @ _pole_frame(pole)


@dataclass(frozen=True)
class EuclideanView:
    """Euclidean Voronoi representation of a spherical cluster.

    Always a view over a spherical parent: euclid_centers/euclid_curvatures
    do not determine the parent when some k^R vanishes, so spherical_offsets
    (the parent curvatures) and the frame are kept alongside.
    """

    parent: Cluster
    pole: np.ndarray
    pole_cell: int
    frame: np.ndarray
    euclid_centers: np.ndarray      # (q, n)
    euclid_curvatures: np.ndarray   # (q,)  k^R
    spherical_offsets: np.ndarray   # (q,)  k^S

    @property
    def n(self) -> int:
        return self.parent.n

    @property
    def q(self) -> int:
        return self.parent.q

    def functionals(self, points: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(points, dtype=float))
        kr, ks = self.euclid_curvatures, self.spherical_offsets
        w = (X * X).sum(axis=1)
        return kr * w[:, None] + 2.0 * X @ self.euclid_centers.T + (2.0 * ks - kr)

    def cell_of(self, x, tol: float = TIE_TOL):
        f = self.functionals(x)[0]
        m = f.min()
        tied = np.nonzero(f <= m + tol)[0]
        if tied.size == 1:
            return int(tied[0])
        return Tie(tuple(int(t) for t in tied))

    def assign(self, points: np.ndarray):
        """(cell indices, margins) for a batch of Euclidean points."""
        kr, ks = self.euclid_curvatures, self.spherical_offsets
        return _kernels.euclid_assign(points, self.euclid_centers, kr, 2.0 * ks - kr)

    def pair(self, i: int, j: int):
        """(c^R_ij, k^R_ij, k^S_ij) for ordered (i, j)."""
        return (
            self.euclid_centers[i] - self.euclid_centers[j],
            float(self.euclid_curvatures[i] - self.euclid_curvatures[j]),
            float(self.spherical_offsets[i] - self.spherical_offsets[j]),
        )

    def to_point(self, x) -> np.ndarray:
        return stereo_to_sphere(x, self.pole)

    def from_point(self, p) -> np.ndarray:
        return stereo_to_plane(p, self.pole)


def _pole_candidates(cluster: Cluster, hint):
    order = []
    if hint is not None:
        order.append(int(hint))
    order.extend(i for i in range(cluster.q) if i != hint)
    for i in order:
        c = cluster.centers[i]
        nc = np.linalg.norm(c)
        if nc > 1e-12:
            yield -c / nc
    d = cluster.n + 1
    for l in range(d):
        e = np.zeros(d)
        e[l] = 1.0
        yield e
        yield -e


def to_euclidean(cluster: Cluster, pole_cell_hint=None) -> EuclideanView:
    """Stereographic Euclidean view of the cluster from an interior pole.

    Candidate poles are tried in a fixed order (the opposite quasi-center
    directions, cell-hint first, then the coordinate directions); the first
    one lying strictly inside a cell wins.
    """
    for pole in _pole_candidates(cluster, pole_cell_hint):
        who = cell_of(cluster, pole)
        if not isinstance(who, Tie):
            return _view_from_pole(cluster, pole, who)
    raise ConventionError("no valid pole found: every candidate lies on the boundary set")


def _view_from_pole(cluster: Cluster, pole: np.ndarray, pole_cell: int) -> EuclideanView:
    H = _pole_frame(pole)
    adapted = cluster.centers @ H.T
    cR = adapted[:, :-1]
    kR = cluster.curvatures + adapted[:, -1]
    frozen = lambda a: np.asarray(a, dtype=float)
    view = EuclideanView(
        parent=cluster,
        pole=frozen(pole),
        pole_cell=pole_cell,
        frame=frozen(H),
        euclid_centers=frozen(cR),
        euclid_curvatures=frozen(kR),
        spherical_offsets=cluster.curvatures,
    )
    for a in (view.pole, view.frame, view.euclid_centers, view.euclid_curvatures):
        a.flags.writeable = False
    return view


def view_to_sphere_params(view: EuclideanView):
    """Reconstruct (centers, curvatures) of the parent from the view.

    The adapted-frame row is (c^R_i, k^R_i - k^S_i); reflecting back through
    the frame recovers c^S_i, and k^S_i is carried verbatim.
    """
    rows = np.hstack([
        view.euclid_centers,
        (view.euclid_curvatures - view.spherical_offsets)[:, None],
    ])
    return rows @ view.frame.T, view.spherical_offsets.copy()


@dataclass(frozen=True)
class BallView:
    """Equatorial-ball polyhedral view of a perpendicularly symmetric cluster."""

    north: np.ndarray
    basis: np.ndarray        # (n+1, n) orthonormal, spanning north-perp
    normals: np.ndarray      # (q, q, n) row (i, j) = projected c_ij
    offsets: np.ndarray      # (q, q)    entry (i, j) = k_ij

    def halfspaces(self, i: int):
        """(A, b) with cell i = {z in the open ball : A z + b <= 0}."""
        rows = [j for j in range(self.normals.shape[0]) if j != i]
        return self.normals[i, rows], self.offsets[i, rows]

    def contains(self, i: int, z, tol: float = 0.0) -> bool:
        z = np.asarray(z, dtype=float)
        A, b = self.halfspaces(i)
        return bool(np.linalg.norm(z) < 1.0 and (A @ z + b <= tol).all())

    def lift(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        h = 1.0 - float(z @ z)
        if h < 0.0:
            raise ValueError("point outside the closed ball")
        return self.basis @ z + math.sqrt(h) * self.north


def ball_projection(cluster: Cluster, north) -> BallView:
    """Orthogonal projection of a north-symmetric cluster to the equatorial ball.

    Requires every quasi-center to be perpendicular to north; then each cell
    meets the open upper hemisphere in a set whose vertical projection is the
    convex polyhedron {<c_ij, .> + k_ij <= 0 for all j}, intersected with the
    ball, and membership of z in the ball view equals membership of its lift.
    """
    north = _check_pole(north)
    dots = cluster.centers @ north
    if np.abs(dots).max() > EPS_GEO:
        raise ConventionError(
            f"cluster is not perpendicular to the axis (max |<c_i, N>| = {np.abs(dots).max():.3e})"
        )
    d = cluster.n + 1
    _, _, vt = np.linalg.svd(north[None, :], full_matrices=True)
    basis = vt[1:].T  # (n+1, n)
    q = cluster.q
    normals = np.zeros((q, q, cluster.n))
    offsets = np.zeros((q, q))
    for i in range(q):
        for j in range(q):
            if i == j:
                continue
            c, k = cluster.pair(i, j)
            normals[i, j] = basis.T @ c
            offsets[i, j] = k
    view = BallView(north=north, basis=basis, normals=normals, offsets=offsets)
    for a in (view.north, view.basis, view.normals, view.offsets):
        a.flags.writeable = False
    return view
