"""Monte Carlo measurement of clusters: volumes, perimeters, surface moments.

Spherical quantities are reported against the normalized measures (total
sphere volume 1, interfaces weighted by |S^{n-1}| r^{n-1} / |S^n|); Euclidean
quantities are plain Lebesgue. Every estimator draws through the block RNG
in `rng`, reduces in block order, and therefore returns bit-identical
reports for a fixed (input, samples, seed) regardless of thread count.

Distinct interfaces get decorrelated streams by deriving a per-pair seed
from the caller seed and the pair index; the derivation is fixed, so it is
part of the reproducibility contract.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels, rng
from .cluster import Cluster, interface_sphere
from .errors import ConventionError
from .projections import EuclideanView
from .tolerances import EPS_GEO

__all__ = [
    "MeasureReport",
    "PerimeterReport",
    "EuclideanMeasures",
    "MomentReport",
    "sphere_area",
    "ball_volume",
    "cell_volumes",
    "perimeter",
    "euclidean_volumes_perimeter",
    "surface_moment",
]

DEFAULT_VOLUME_SAMPLES = 1_000_000
DEFAULT_INTERFACE_SAMPLES = 200_000


def sphere_area(m: int) -> float:
    """|S^m|, the surface measure of the unit m-sphere in R^{m+1}."""
    return 2.0 * math.pi ** ((m + 1) / 2.0) / math.gamma((m + 1) / 2.0)


def ball_volume(m: int, radius: float = 1.0) -> float:
    """Lebesgue volume of the m-dimensional ball."""
    return math.pi ** (m / 2.0) / math.gamma(m / 2.0 + 1.0) * radius**m


def _pair_seed(seed: int, pair_index: int) -> int:
    return seed + 1_000_003 * (1 + pair_index)


def _pair_index(q: int, i: int, j: int) -> int:
    i, j = min(i, j), max(i, j)
    return i * q + j


@dataclass(frozen=True)
class MeasureReport:
    value: float
    std_error: float
    samples: int
    seed: int
    normalization: str  # "S": normalized Haar/Hausdorff; "R": Lebesgue

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError("report value must be finite")
        if self.std_error < 0.0:
            raise ValueError("std_error must be nonnegative")


def cell_volumes(cluster: Cluster, samples: int = DEFAULT_VOLUME_SAMPLES,
                 seed: int = 0) -> list:
    """Normalized volume of each cell by uniform sampling of S^n.

    Tie samples (a measure-zero event) land on the lowest tied index through
    the argmin. The reported values sum to 1 exactly: the last cell's value
    is defined as one minus the others, absorbing the final rounding ulp.
    """
    C, k = cluster.centers, cluster.curvatures
    d = cluster.n + 1

    def one(b, m):
        return _kernels.sphere_cell_counts(rng.sphere_block(seed, b, m, d), C, k)

    counts = np.zeros(cluster.q, dtype=np.int64)
    for c in rng.map_blocks(samples, one):
        counts += c
    frac = counts / float(samples)
    frac[-1] = 1.0 - frac[:-1].sum()
    err = np.sqrt(np.clip(frac * (1.0 - frac), 0.0, None) / samples)
    return [
        MeasureReport(float(frac[i]), float(err[i]), samples, seed, "S")
        for i in range(cluster.q)
    ]


def _sphere_face_fraction(cluster, sampler, group, samples, seed):
    """(hit fraction, binomial variance of the fraction) on a carrier."""
    C, k = cluster.centers, cluster.curvatures
    group = np.asarray(group, dtype=np.int64)

    def one(b, m):
        pts = sampler(seed, b, m)
        margin, _ = _kernels.sphere_group_margins(pts, C, k, group)
        return int((margin >= -EPS_GEO).sum())

    hits = sum(rng.map_blocks(samples, one))
    f = hits / float(samples)
    return f, f * (1.0 - f) / samples


@dataclass(frozen=True)
class PerimeterReport:
    pairs: dict            # (i, j) -> MeasureReport, i < j
    total: MeasureReport
    skipped: list = field(default_factory=list)


def perimeter(cluster: Cluster, samples: int = DEFAULT_INTERFACE_SAMPLES,
              seed: int = 0) -> PerimeterReport:
    """Per-interface and total perimeter, normalized by |S^n|.

    Each candidate pair's carrying sphere is sampled uniformly; the fraction
    lying in the closure of both cells times the carrier's area gives the
    interface measure. Malformed pairs (carrying-sphere identity violated)
    are skipped with a warning and listed in the report.
    """
    n, q = cluster.n, cluster.q
    norm = sphere_area(n)
    reports = {}
    skipped = []
    for i in range(q):
        for j in range(i + 1, q):
            try:
                sph = interface_sphere(cluster, i, j)
            except ConventionError as exc:
                warnings.warn(f"perimeter: skipping pair ({i},{j}): {exc}")
                skipped.append((i, j, str(exc)))
                continue
            s = _pair_seed(seed, _pair_index(q, i, j))
            f, var = _sphere_face_fraction(cluster, sph.sample_block, [i, j], samples, s)
            scale = sphere_area(n - 1) * sph.euclid_radius ** (n - 1) / norm
            reports[(i, j)] = MeasureReport(f * scale, math.sqrt(var) * scale, samples, s, "S")
    total = MeasureReport(
        value=float(sum(r.value for r in reports.values())),
        std_error=math.sqrt(sum(r.std_error**2 for r in reports.values())),
        samples=samples,
        seed=seed,
        normalization="S",
    )
    return PerimeterReport(pairs=reports, total=total, skipped=skipped)


# ---------------------------------------------------------------------------
# Euclidean side
# ---------------------------------------------------------------------------

def _euclid_coeffs(view: EuclideanView):
    kr, ks = view.euclid_curvatures, view.spherical_offsets
    return view.euclid_centers, kr, 2.0 * ks - kr


def _euclid_pair_carrier(view: EuclideanView, i: int, j: int, bounding_radius: float):
    """Sampler and Lebesgue area of the (i, j) Euclidean carrier within the bound.

    Returns (sampler(seed, b, m) -> points, carrier_measure, kind) where kind
    is "sphere" or "disk"; None when the carrier misses the bounding ball.
    """
    n = view.n
    cr, kr, ks = view.pair(i, j)
    if abs(kr) > 1e-10:
        center = -cr / kr
        radius = 1.0 / abs(kr)

        def sample(seed, b, m):
            return center + radius * rng.sphere_block(seed, b, m, n)

        return sample, sphere_area(n - 1) * radius ** (n - 1), "sphere"
    # flat carrier: hyperplane <u, x> + ks = 0 with unit normal u
    u = cr.copy()
    nu = np.linalg.norm(u)
    if abs(nu - 1.0) > 1e-6:
        raise ConventionError(
            f"flat carrier ({i},{j}) without unit normal (|c^R_ij| = {nu:.6f})"
        )
    disk2 = bounding_radius**2 - ks**2
    if disk2 <= 0.0:
        return None
    rho = math.sqrt(disk2)
    foot = -ks * u
    _, _, vt = np.linalg.svd(u[None, :], full_matrices=True)
    basis = vt[1:]  # (n-1, n)

    def sample(seed, b, m):
        z = rng.ball_block(seed, b, m, n - 1, rho)
        return foot + z @ basis

    return sample, ball_volume(n - 1, rho), "disk"


@dataclass(frozen=True)
class EuclideanMeasures:
    volumes: list                    # per cell: MeasureReport, or None for the pole cell
    pairs: dict                      # (i, j) -> MeasureReport (Lebesgue)
    total_perimeter: MeasureReport
    bounding_radius: float
    skipped: list = field(default_factory=list)


def euclidean_volumes_perimeter(view: EuclideanView, bounding_radius: float,
                                samples: int = DEFAULT_VOLUME_SAMPLES,
                                seed: int = 0,
                                interface_samples: int = DEFAULT_INTERFACE_SAMPLES) -> EuclideanMeasures:
    """Lebesgue volumes of the bounded cells and interface areas of a view.

    All bounded cells and all interfaces must sit inside the ball of
    bounding_radius; this is checked on the samples themselves (a bounded
    cell's sample or an accepted interface sample beyond 98% of the bound
    aborts with the offender named). The pole cell is unbounded by
    construction and is reported as None.
    """
    n, q = view.n, view.q
    Rb = float(bounding_radius)
    if Rb <= 0.0:
        raise ConventionError("bounding radius must be positive")
    C, a, b = _euclid_coeffs(view)
    pole = view.pole_cell
    eps_closure = EPS_GEO * (1.0 + Rb * Rb)

    def vol_block(bi, m):
        pts = rng.ball_block(seed, bi, m, n, Rb)
        idx, _ = _kernels.euclid_assign(pts, C, a, b)
        leak = np.unique(idx[(np.linalg.norm(pts, axis=1) > 0.98 * Rb) & (idx != pole)])
        return np.bincount(idx, minlength=q).astype(np.int64), leak

    counts = np.zeros(q, dtype=np.int64)
    leaking = set()
    for cnt, leak in rng.map_blocks(samples, vol_block):
        counts += cnt
        leaking.update(int(l) for l in leak)
    if leaking:
        raise ConventionError(
            f"bounded cell(s) {sorted(leaking)} reach the bounding sphere: "
            "enlarge bounding_radius or check the view"
        )
    vb = ball_volume(n, Rb)
    frac = counts / float(samples)
    err = np.sqrt(np.clip(frac * (1.0 - frac), 0.0, None) / samples)
    volumes = [
        None if i == pole else
        MeasureReport(float(frac[i] * vb), float(err[i] * vb), samples, seed, "R")
        for i in range(q)
    ]

    reports = {}
    skipped = []
    group = np.empty(2, dtype=np.int64)
    for i in range(q):
        for j in range(i + 1, q):
            try:
                interface_sphere(view.parent, i, j)
                carrier = _euclid_pair_carrier(view, i, j, Rb)
            except ConventionError as exc:
                warnings.warn(f"euclidean perimeter: skipping pair ({i},{j}): {exc}")
                skipped.append((i, j, str(exc)))
                continue
            s = _pair_seed(seed, _pair_index(q, i, j))
            if carrier is None:
                reports[(i, j)] = MeasureReport(0.0, 0.0, interface_samples, s, "R")
                continue
            sample, measure, kind = carrier
            group[0], group[1] = i, j

            def face_block(bi, m):
                pts = sample(s, bi, m)
                margin, _ = _kernels.euclid_group_margins(pts, C, a, b, group)
                hit = margin >= -eps_closure
                reach = bool(hit.any()) and float(
                    np.linalg.norm(pts[hit], axis=1).max()
                ) > 0.98 * Rb
                return int(hit.sum()), reach

            hits = 0
            reaches = False
            for h, reach in rng.map_blocks(interface_samples, face_block):
                hits += h
                reaches = reaches or reach
            if reaches and kind == "disk":
                raise ConventionError(
                    f"unbounded interface ({i},{j}): flat piece reaches the bounding sphere"
                )
            if reaches:
                raise ConventionError(
                    f"interface ({i},{j}) reaches the bounding sphere: enlarge bounding_radius"
                )
            f = hits / float(interface_samples)
            sigma = math.sqrt(f * (1.0 - f) / interface_samples) * measure
            reports[(i, j)] = MeasureReport(f * measure, sigma, interface_samples, s, "R")

    total = MeasureReport(
        value=float(sum(r.value for r in reports.values())),
        std_error=math.sqrt(sum(r.std_error**2 for r in reports.values())),
        samples=interface_samples,
        seed=seed,
        normalization="R",
    )
    return EuclideanMeasures(
        volumes=volumes, pairs=reports, total_perimeter=total,
        bounding_radius=Rb, skipped=skipped,
    )


# ---------------------------------------------------------------------------
# surface moments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MomentReport:
    value: np.ndarray       # (d, d)
    std_error: np.ndarray   # (d, d) entrywise
    samples: int
    seed: int
    normalization: str
    which: str


_MOMENTS = ("nn", "nc", "id")


def surface_moment(obj, which: str, samples: int = DEFAULT_INTERFACE_SAMPLES,
                   seed: int = 0, bounding_radius: Optional[float] = None) -> MomentReport:
    """Surface integral over the whole interface set of a tensor field.

    which: "nn" for the outer product of the unit normal with itself, "nc"
    for normal against the pair quasi-center, "id" for the identity weighted
    by surface measure. Accepts a Cluster (normalized spherical measure,
    normal c_ij + k_ij p, d = n+1) or a EuclideanView (Lebesgue, normal
    c^R_ij + k^R_ij x, d = n; bounding_radius required for flat carriers).
    """
    if which not in _MOMENTS:
        raise ValueError(f"which must be one of {_MOMENTS}")
    if isinstance(obj, Cluster):
        return _sphere_moment(obj, which, samples, seed)
    if isinstance(obj, EuclideanView):
        return _euclid_moment(obj, which, samples, seed, bounding_radius)
    raise TypeError("expected a Cluster or a EuclideanView")


def _accumulate_moment(samples, one_block):
    """Reduce (sum T, sum T^2, count) block results into mean and variance."""
    S1 = None
    S2 = None
    for t1, t2 in rng.map_blocks(samples, one_block):
        S1 = t1 if S1 is None else S1 + t1
        S2 = t2 if S2 is None else S2 + t2
    mean = S1 / samples
    var = np.clip(S2 / samples - mean**2, 0.0, None) / samples
    return mean, var


def _sphere_moment(cluster, which, samples, seed):
    n, q = cluster.n, cluster.q
    d = n + 1
    norm = sphere_area(n)
    C, k = cluster.centers, cluster.curvatures
    value = np.zeros((d, d))
    var = np.zeros((d, d))
    for i in range(q):
        for j in range(i + 1, q):
            try:
                sph = interface_sphere(cluster, i, j)
            except ConventionError as exc:
                warnings.warn(f"surface moment: skipping pair ({i},{j}): {exc}")
                continue
            s = _pair_seed(seed, _pair_index(q, i, j))
            c_ij, k_ij = cluster.pair(i, j)
            group = np.array([i, j], dtype=np.int64)
            scale = sphere_area(n - 1) * sph.euclid_radius ** (n - 1) / norm

            def one(b, m):
                pts = sph.sample_block(s, b, m)
                margin, _ = _kernels.sphere_group_margins(pts, C, k, group)
                hit = margin >= -EPS_GEO
                nv = c_ij + k_ij * pts[hit]
                T = _pair_tensors(nv, c_ij, which, d)
                return T.sum(axis=0), (T * T).sum(axis=0)

            mean, v = _accumulate_moment(samples, one)
            value += scale * mean
            var += (scale**2) * v
    return MomentReport(value, np.sqrt(var), samples, seed, "S", which)


def _euclid_moment(view, which, samples, seed, bounding_radius):
    n, q = view.n, view.q
    C, a, b = _euclid_coeffs(view)
    flat = any(
        abs(view.pair(i, j)[1]) <= 1e-10
        for i in range(q) for j in range(i + 1, q)
    )
    if bounding_radius is None:
        if flat:
            raise ValueError("bounding_radius is required when a carrier is flat")
        bounding_radius = math.inf
    eps_closure = EPS_GEO * (1.0 + min(bounding_radius, 1e8) ** 2)
    value = np.zeros((n, n))
    var = np.zeros((n, n))
    for i in range(q):
        for j in range(i + 1, q):
            try:
                interface_sphere(view.parent, i, j)
                carrier = _euclid_pair_carrier(view, i, j, bounding_radius)
            except ConventionError as exc:
                warnings.warn(f"surface moment: skipping pair ({i},{j}): {exc}")
                continue
            if carrier is None:
                continue
            sample, measure, _ = carrier
            s = _pair_seed(seed, _pair_index(q, i, j))
            cr, kr, _ks = view.pair(i, j)
            group = np.array([i, j], dtype=np.int64)

            def one(bi, m):
                pts = sample(s, bi, m)
                margin, _ = _kernels.euclid_group_margins(pts, C, a, b, group)
                hit = margin >= -eps_closure
                nv = cr + kr * pts[hit]
                T = _pair_tensors(nv, cr, which, n)
                return T.sum(axis=0), (T * T).sum(axis=0)

            mean, v = _accumulate_moment(samples, one)
            value += measure * mean
            var += (measure**2) * v
    return MomentReport(value, np.sqrt(var), samples, seed, "R", which)


def _pair_tensors(normals, c, which, d):
    """(m, d, d) tensor samples for one interface."""
    m = normals.shape[0]
    if which == "nn":
        return np.einsum("ma,mb->mab", normals, normals)
    if which == "nc":
        return np.einsum("ma,b->mab", normals, c)
    return np.broadcast_to(np.eye(d), (m, d, d)).copy()
