"""First and second variation machinery specialized to spherical clusters.

Interfaces of a spherical Voronoi cluster are pieces of geodesic spheres, so
every second-fundamental-form quantity collapses to a closed form in the
interface curvature: II = k Id, |II|^2 = (n-1) k^2, boundary trace k, and
Ric(n, n) = n - 1 on the unit sphere. The Jacobi operator values and the
index form below lean on that throughout; none of it applies to clusters
with non-spherical interfaces, which cannot be represented here anyway.

Fields come in two flavors. Vector fields (MOBIUS, ROTATION) take values in
the ambient tangent space and enter integrals through their normal component
X . n_ij. Scalar fields (SKEW, COORDINATE) assign a function directly to
each oriented interface; SKEW is a_ij <N, p> for a zero-sum weight vector a,
COORDINATE is the plain height <theta, p> with the sign tied to the pair
orientation (i < j positive).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels, rng
from .cluster import Cluster, interface_sphere, triple_carrier
from .construct import apply_mobius
from .errors import ConventionError
from .measure import MeasureReport, sphere_area
from .minkowski import boost
from .tolerances import EPS_GEO, TIE_TOL

__all__ = [
    "FieldSpec",
    "mobius_field",
    "rotation_field",
    "skew_field",
    "coordinate_field",
    "field_value",
    "normal_speed",
    "first_variation_volume",
    "first_variation_area",
    "AreaVariation",
    "jacobi_closed_form",
    "IndexFormReport",
    "index_form_q0",
    "flow_derivative_volume",
    "flow_derivative_perimeter",
    "flow_derivative_curvature",
]

_VECTOR_KINDS = ("MOBIUS", "ROTATION")
_SCALAR_KINDS = ("SKEW", "COORDINATE")

DEFAULT_FIELD_SAMPLES = 200_000


@dataclass(frozen=True)
class FieldSpec:
    kind: str
    theta: Optional[np.ndarray] = None   # MOBIUS, COORDINATE
    plane: Optional[tuple] = None        # ROTATION: coordinate plane (a, b)
    a: Optional[np.ndarray] = None       # SKEW: zero-sum weights, length q
    north: Optional[np.ndarray] = None   # SKEW: symmetry axis

    def __post_init__(self):
        if self.kind not in _VECTOR_KINDS + _SCALAR_KINDS:
            raise ValueError(f"unknown field kind {self.kind!r}")


def mobius_field(theta) -> FieldSpec:
    """W_theta(p) = theta - <theta, p> p, the conformal direction field."""
    theta = np.asarray(theta, dtype=float)
    if np.linalg.norm(theta) == 0.0:
        raise ValueError("theta must be nonzero")
    return FieldSpec(kind="MOBIUS", theta=theta)


def rotation_field(axis_a: int, axis_b: int) -> FieldSpec:
    """Killing field of the rotation in the (axis_a, axis_b) coordinate plane."""
    if axis_a == axis_b:
        raise ValueError("rotation plane needs two distinct axes")
    return FieldSpec(kind="ROTATION", plane=(int(axis_a), int(axis_b)))


def skew_field(a, north) -> FieldSpec:
    """Scalar field a_ij <N, p> per interface; a zero-sum, N the symmetry axis."""
    a = np.asarray(a, dtype=float)
    north = np.asarray(north, dtype=float)
    if abs(a.sum()) > EPS_GEO:
        raise ConventionError("skew weights must sum to zero")
    if abs(np.linalg.norm(north) - 1.0) > EPS_GEO:
        raise ConventionError("north must be a unit vector")
    return FieldSpec(kind="SKEW", a=a, north=north)


def coordinate_field(theta) -> FieldSpec:
    """Scalar field <theta, p> on every interface (canonical orientation)."""
    return FieldSpec(kind="COORDINATE", theta=np.asarray(theta, dtype=float))


def field_value(spec: FieldSpec, p, pair=None):
    """Evaluate the field at p: a tangent vector, or a scalar for SKEW/COORDINATE.

    Scalar kinds are per-interface data; pass pair=(i, j) to fix the
    orientation (required for SKEW, which needs a_ij).
    """
    p = np.asarray(p, dtype=float)
    if spec.kind == "MOBIUS":
        return spec.theta - (spec.theta @ p) * p
    if spec.kind == "ROTATION":
        a, b = spec.plane
        out = np.zeros_like(p)
        out[a] = -p[b]
        out[b] = p[a]
        return out
    if spec.kind == "COORDINATE":
        s = 1.0
        if pair is not None and pair[0] > pair[1]:
            s = -1.0
        return s * float(spec.theta @ p)
    # SKEW
    if pair is None:
        raise ValueError("SKEW field values need the interface pair")
    i, j = pair
    return float((spec.a[i] - spec.a[j]) * (spec.north @ p))


def _speed_batch(cluster: Cluster, spec: FieldSpec, i: int, j: int,
                 pts: np.ndarray) -> np.ndarray:
    """Oriented normal speed f_ij of the field on a batch of carrier points."""
    c_ij, k_ij = cluster.pair(i, j)
    if spec.kind == "MOBIUS":
        th = spec.theta
        nrm = c_ij + k_ij * pts
        return nrm @ th - (pts @ th) * (pts * nrm).sum(axis=1)
    if spec.kind == "ROTATION":
        a, b = spec.plane
        X = np.zeros_like(pts)
        X[:, a] = -pts[:, b]
        X[:, b] = pts[:, a]
        return (X * (c_ij + k_ij * pts)).sum(axis=1)
    if spec.kind == "COORDINATE":
        s = 1.0 if i < j else -1.0
        return s * (pts @ spec.theta)
    return (spec.a[i] - spec.a[j]) * (pts @ spec.north)


def normal_speed(cluster: Cluster, spec: FieldSpec, i: int, j: int, p) -> float:
    """f_ij(p): the field's normal component (or scalar value) on Sigma_ij."""
    p = np.asarray(p, dtype=float)
    return float(_speed_batch(cluster, spec, i, j, p[None, :])[0])


# ---------------------------------------------------------------------------
# interface integrals
# ---------------------------------------------------------------------------

def _pair_stream(seed, i, j, q):
    return seed + 1_000_003 * (1 + min(i, j) * q + max(i, j))


def _face_mc(cluster, sampler, group, values, samples, seed):
    """(mean, variance-of-mean) of values(points) * 1_{face} on a carrier."""
    C, k = cluster.centers, cluster.curvatures
    group = np.asarray(group, dtype=np.int64)

    def one(b, m):
        pts = sampler(seed, b, m)
        margin, _ = _kernels.sphere_group_margins(pts, C, k, group)
        hit = margin >= -EPS_GEO
        v = values(pts) * hit
        return float(v.sum()), float((v * v).sum())

    s1 = s2 = 0.0
    for t1, t2 in rng.map_blocks(samples, one):
        s1 += t1
        s2 += t2
    mean = s1 / samples
    var = max(s2 / samples - mean * mean, 0.0) / samples
    return mean, var


def _interface_normal_integrals(cluster: Cluster, spec: FieldSpec,
                                samples: int, seed: int):
    """dict (i, j) i<j -> (integral of f_ij, variance), normalized measure.

    Malformed pairs are absent from the result (they carry no interface).
    """
    n, q = cluster.n, cluster.q
    norm = sphere_area(n)
    out = {}
    for i in range(q):
        for j in range(i + 1, q):
            try:
                sph = interface_sphere(cluster, i, j)
            except ConventionError:
                continue
            s = _pair_stream(seed, i, j, q)
            scale = sphere_area(n - 1) * sph.euclid_radius ** (n - 1) / norm
            mean, var = _face_mc(
                cluster, sph.sample_block, [i, j],
                lambda pts: _speed_batch(cluster, spec, i, j, pts),
                samples, s,
            )
            out[(i, j)] = (mean * scale, var * scale * scale)
    return out


def first_variation_volume(cluster: Cluster, spec: FieldSpec,
                           samples: int = DEFAULT_FIELD_SAMPLES,
                           seed: int = 0) -> list:
    """delta V_i = sum over j of the interface integral of f_ij, per cell.

    Each pair integral enters cell i with + and cell j with -, so the result
    is antisymmetric by construction; the last component is set to minus the
    sum of the others so the reported vector sums to zero exactly.
    """
    ints = _interface_normal_integrals(cluster, spec, samples, seed)
    q = cluster.q
    val = np.zeros(q)
    var = np.zeros(q)
    for (i, j), (v, s2) in ints.items():
        val[i] += v
        val[j] -= v
        var[i] += s2
        var[j] += s2
    val[-1] = -val[:-1].sum()
    return [
        MeasureReport(float(val[i]), math.sqrt(var[i]), samples, seed, "S")
        for i in range(q)
    ]


@dataclass(frozen=True)
class AreaVariation:
    value: float
    std_error: float
    lagrange_value: float   # <(n-1) k, delta V> from the same integrals
    lagrange_gap: float     # |value - lagrange_value|, summation order only
    samples: int
    seed: int


def first_variation_area(cluster: Cluster, spec: FieldSpec,
                         samples: int = DEFAULT_FIELD_SAMPLES,
                         seed: int = 0) -> AreaVariation:
    """delta A = sum over pairs of (n-1) k_ij times the interface integral.

    The Lagrange pairing <(n-1)k, delta V> is the same sum rearranged by
    cells; both are computed from one set of interface integrals, so their
    gap is pure floating-point associativity and stays at machine scale.
    """
    n = cluster.n
    ints = _interface_normal_integrals(cluster, spec, samples, seed)
    k = cluster.curvatures
    value = 0.0
    var = 0.0
    dV = np.zeros(cluster.q)
    for (i, j), (v, s2) in ints.items():
        kij = k[i] - k[j]
        value += (n - 1) * kij * v
        var += ((n - 1) * kij) ** 2 * s2
        dV[i] += v
        dV[j] -= v
    lagrange = float(((n - 1) * k) @ dV)
    return AreaVariation(
        value=float(value),
        std_error=math.sqrt(var),
        lagrange_value=lagrange,
        lagrange_gap=abs(value - lagrange),
        samples=samples,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# Jacobi operator
# ---------------------------------------------------------------------------

def jacobi_closed_form(cluster: Cluster, i: int, j: int, spec: FieldSpec, p) -> float:
    """L_Jac applied to the field's speed on Sigma_ij, evaluated at p.

    On a geodesic sphere every case reduces to a constant or a height
    function, giving: MOBIUS -> (n-1) <theta, c_ij>; COORDINATE ->
    -(n-1) k_ij <theta, c_ij>; SKEW -> -(n-1) k_ij a_ij <N, c_ij> (zero on
    perpendicular clusters); ROTATION -> 0 (Killing fields do not change
    mean curvature).
    """
    p = np.asarray(p, dtype=float)
    f = cluster.functionals(p)[0]
    m = f.min()
    if not (f[i] <= m + TIE_TOL and f[j] <= m + TIE_TOL):
        raise ValueError(f"point is not on the ({i},{j}) interface")
    n = cluster.n
    c_ij, k_ij = cluster.pair(i, j)
    if spec.kind == "MOBIUS":
        return float((n - 1) * (spec.theta @ c_ij))
    if spec.kind == "ROTATION":
        return 0.0
    if spec.kind == "COORDINATE":
        # the operator is applied to the height function <theta, p> itself,
        # so the value does not depend on which cell is named first
        return float(-(n - 1) * k_ij * (spec.theta @ c_ij))
    a_ij = spec.a[i] - spec.a[j]
    return float(-(n - 1) * k_ij * a_ij * (spec.north @ c_ij))


# ---------------------------------------------------------------------------
# index form
# ---------------------------------------------------------------------------

def _scalar_gradient(spec: FieldSpec, i: int, j: int) -> np.ndarray:
    """Constant ambient gradient of the scalar field on the (i, j) interface."""
    if spec.kind == "SKEW":
        return (spec.a[i] - spec.a[j]) * spec.north
    if spec.kind == "COORDINATE":
        s = 1.0 if i < j else -1.0
        return s * spec.theta
    raise ValueError("index form needs a scalar field (SKEW or COORDINATE)")


@dataclass(frozen=True)
class IndexFormReport:
    value: float
    std_error: float
    interface_term: float
    boundary_term: float
    traced: bool
    samples: int
    seed: int


def index_form_q0(cluster: Cluster, spec: FieldSpec,
                  samples: int = DEFAULT_FIELD_SAMPLES, seed: int = 0,
                  traced: bool = False, _form: str = "bilinear") -> IndexFormReport:
    """The scalar index form Q0(f), Monte Carlo over interfaces and triples.

    Interface part, per non-empty pair:
        integral of |grad_t f|^2 - ((n-1) + (n-1) k_ij^2) f^2,
    with grad_t the ambient gradient minus its components along the position
    and along the interface normal. Boundary part, per triple (subtracted,
    omitted when traced=True):
        integral over Sigma_ijk of f_ij^2 (k_ik + k_jk) / sqrt(3),
    summed over the pair (i, j) and the third cell k. All measures are
    normalized as in the perimeter estimator.
    """
    n, q = cluster.n, cluster.q
    norm = sphere_area(n)
    interface_term = 0.0
    var = 0.0

    for i in range(q):
        for j in range(i + 1, q):
            try:
                sph = interface_sphere(cluster, i, j)
            except ConventionError:
                continue
            g = _scalar_gradient(spec, i, j)
            c_ij, k_ij = cluster.pair(i, j)
            coef = (n - 1) + (n - 1) * k_ij * k_ij
            s = _pair_stream(seed, i, j, q)
            scale = sphere_area(n - 1) * sph.euclid_radius ** (n - 1) / norm

            def integrand(pts):
                f = _speed_batch(cluster, spec, i, j, pts)
                nv = c_ij + k_ij * pts
                gt = g - (pts @ g)[:, None] * pts - (nv @ g)[:, None] * nv
                return (gt * gt).sum(axis=1) - coef * f * f

            mean, v = _face_mc(cluster, sph.sample_block, [i, j], integrand, samples, s)
            interface_term += mean * scale
            var += v * scale * scale

    boundary_term = 0.0
    if not traced:
        bsamples = max(samples // 4, rng.BLOCK)
        for i in range(q):
            for j in range(i + 1, q):
                for k in range(q):
                    if k == i or k == j:
                        continue
                    try:
                        carrier = triple_carrier(cluster, i, j, k)
                    except ValueError:
                        continue
                    if carrier is None:
                        continue
                    c_scale = (
                        sphere_area(n - 2) * carrier.rho ** (n - 2) / norm
                        if n >= 2 else 0.0
                    )
                    if c_scale == 0.0:
                        continue
                    s = _pair_stream(seed, i, j, q) + 7919 * (k + 1)
                    kap = ((cluster.curvatures[i] - cluster.curvatures[k])
                           + (cluster.curvatures[j] - cluster.curvatures[k]))

                    if _form == "bilinear":
                        def bintegrand(pts, i=i, j=j, kap=kap):
                            f = _speed_batch(cluster, spec, i, j, pts)
                            return f * f * kap / math.sqrt(3.0)
                    else:
                        def bintegrand(pts, i=i, j=j, k=k):
                            f_ij = _speed_batch(cluster, spec, i, j, pts)
                            f_ik = _speed_batch(cluster, spec, i, k, pts)
                            f_jk = _speed_batch(cluster, spec, j, k, pts)
                            c_ij, k_ij = cluster.pair(i, j)
                            return f_ij * (f_ik + f_jk) * k_ij / math.sqrt(3.0)

                    mean, v = _face_mc(cluster, carrier.sample_block, [i, j, k],
                                       bintegrand, bsamples, s)
                    boundary_term += mean * c_scale
                    var += v * c_scale * c_scale

    return IndexFormReport(
        value=float(interface_term - boundary_term),
        std_error=math.sqrt(var),
        interface_term=float(interface_term),
        boundary_term=float(boundary_term),
        traced=traced,
        samples=samples,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# flow finite differences
# ---------------------------------------------------------------------------

def _blocked_samples(samples: int) -> int:
    nb = max(2, (samples + rng.BLOCK - 1) // rng.BLOCK)
    return nb * rng.BLOCK


def flow_derivative_volume(cluster: Cluster, theta, h: float = 1e-3,
                           samples: int = 1_000_000, seed: int = 0) -> list:
    """d/dt of the cell volumes under the boost flow exp(t B_theta), at t = 0.

    Central difference with the two displaced clusters sharing every sample
    point (common random numbers); the standard error comes from the spread
    of the per-block derivative estimates, so the sample count is rounded up
    to whole blocks.
    """
    total = _blocked_samples(samples)
    plus = apply_mobius(cluster, boost(theta, h))
    minus = apply_mobius(cluster, boost(theta, -h))
    d = cluster.n + 1

    def one(b, m):
        pts = rng.sphere_block(seed, b, m, d)
        cp = _kernels.sphere_cell_counts(pts, plus.centers, plus.curvatures)
        cm = _kernels.sphere_cell_counts(pts, minus.centers, minus.curvatures)
        return (cp - cm) / (2.0 * h * m)

    rows = np.array(rng.map_blocks(total, one))
    mean = rows.mean(axis=0)
    sig = rows.std(axis=0, ddof=1) / math.sqrt(rows.shape[0])
    return [
        MeasureReport(float(mean[i]), float(sig[i]), total, seed, "S")
        for i in range(cluster.q)
    ]


def flow_derivative_perimeter(cluster: Cluster, theta, h: float = 1e-3,
                              samples: int = DEFAULT_FIELD_SAMPLES,
                              seed: int = 0) -> MeasureReport:
    """d/dt of the total perimeter under the boost flow, central difference.

    Pairs are matched between the two displaced clusters; per-pair, the two
    carrier estimates share the RNG stream, and the block spread of the
    difference quotient gives the error bar.
    """
    total = _blocked_samples(samples)
    plus = apply_mobius(cluster, boost(theta, h))
    minus = apply_mobius(cluster, boost(theta, -h))
    n, q = cluster.n, cluster.q
    norm = sphere_area(n)

    value = 0.0
    var = 0.0
    for i in range(q):
        for j in range(i + 1, q):
            try:
                sp = interface_sphere(plus, i, j)
                sm = interface_sphere(minus, i, j)
            except ConventionError:
                continue
            s = _pair_stream(seed, i, j, q)
            scp = sphere_area(n - 1) * sp.euclid_radius ** (n - 1) / norm
            scm = sphere_area(n - 1) * sm.euclid_radius ** (n - 1) / norm
            gp = np.array([i, j], dtype=np.int64)

            def one(b, m):
                ptp = sp.sample_block(s, b, m)
                mp, _ = _kernels.sphere_group_margins(ptp, plus.centers,
                                                      plus.curvatures, gp)
                ptm = sm.sample_block(s, b, m)
                mm, _ = _kernels.sphere_group_margins(ptm, minus.centers,
                                                      minus.curvatures, gp)
                fp = float((mp >= -EPS_GEO).sum()) / m
                fm = float((mm >= -EPS_GEO).sum()) / m
                return (fp * scp - fm * scm) / (2.0 * h)

            rows = np.array(rng.map_blocks(total, one))
            value += float(rows.mean())
            var += float(rows.var(ddof=1)) / rows.shape[0]

    return MeasureReport(value, math.sqrt(var), total, seed, "S")


def flow_derivative_curvature(cluster: Cluster, i: int, j: int, theta,
                              h: float = 1e-4) -> float:
    """d/dt of k_ij under the boost flow exp(t B_theta): exact parameters, no MC."""
    plus = apply_mobius(cluster, boost(theta, h))
    minus = apply_mobius(cluster, boost(theta, -h))
    kp = plus.curvatures[i] - plus.curvatures[j]
    km = minus.curvatures[i] - minus.curvatures[j]
    return float((kp - km) / (2.0 * h))
