"""Command-line front end.

Exit codes: 0 success, 1 a verification check failed, 2 input/usage error.
Every randomized output embeds the seed it used; defaults are fixed
constants, never the clock, so identical invocations produce identical
bytes.
"""
from __future__ import annotations

import functools
import json
import math
import sys

import click
import numpy as np

from . import combinatorics, measure, variation
from .cluster import (Cluster, Tie, blow_up, cell_of, cluster_from_dict,
                      cluster_to_dict, interface_sphere, is_standard_bubble,
                      load_cluster, stationarity_report)
from .construct import (apply_mobius, bubble_from_curvatures,
                        bubble_from_volumes, equal_volume_bubble)
from .errors import ConventionError, VerificationError
from .minkowski import boost
from .projections import EuclideanView, to_euclidean
from .variation import (first_variation_area, flow_derivative_curvature,
                        flow_derivative_perimeter, index_form_q0,
                        jacobi_closed_form, mobius_field, skew_field)

DEFAULT_SEED = 0


def _guard(fn):
    @functools.wraps(fn)
    def inner(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConventionError as exc:
            raise click.UsageError(str(exc))
        except (OSError, json.JSONDecodeError) as exc:
            raise click.UsageError(str(exc))
        except VerificationError as exc:
            click.echo(f"verification failed: {exc}", err=True)
            sys.exit(1)
    return inner


def _emit(text: str, out):
    if out is None:
        click.echo(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
            if not text.endswith("\n"):
                fh.write("\n")


def _dump(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True)


def _floats(text: str) -> list:
    try:
        return [float(t) for t in text.split(",") if t.strip() != ""]
    except ValueError as exc:
        raise click.UsageError(f"bad numeric list {text!r}: {exc}")


def _report_dict(r: measure.MeasureReport) -> dict:
    return {
        "value": r.value,
        "std_error": r.std_error,
        "samples": r.samples,
        "seed": r.seed,
        "normalization": r.normalization,
    }


@click.group()
def main():
    """Numerical toolkit for spherical Voronoi bubble clusters."""


# ---------------------------------------------------------------------------
# construct / transform / project
# ---------------------------------------------------------------------------

@main.command("construct")
@click.option("--mode", type=click.Choice(["equal", "curv", "vol"]), required=True)
@click.option("--n", "n", type=int, required=True)
@click.option("--q", "q", type=int, required=True)
@click.option("--k", "k_text", default=None, help="comma-separated curvatures (mode curv)")
@click.option("--v", "v_text", default=None, help="comma-separated volumes (mode vol)")
@click.option("--samples", type=int, default=measure.DEFAULT_VOLUME_SAMPLES, show_default=True)
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("-o", "--out", default=None, help="output path (default: stdout)")
@_guard
def construct_cmd(mode, n, q, k_text, v_text, samples, seed, out):
    """Build a bubble and write its cluster JSON."""
    solver_failed = None
    if mode == "equal":
        cl = equal_volume_bubble(n, q)
        meta = {"constructed": "equal"}
    elif mode == "curv":
        if k_text is None:
            raise click.UsageError("--k is required for mode curv")
        cl = bubble_from_curvatures(n, q, np.array(_floats(k_text)))
        meta = {"constructed": "curv"}
    else:
        if v_text is None:
            raise click.UsageError("--v is required for mode vol")
        cl, trace = bubble_from_volumes(n, q, np.array(_floats(v_text)),
                                        mc_samples=samples, seed=seed)
        meta = {
            "constructed": "vol",
            "solver": {
                "converged": trace.converged,
                "iterations": trace.iterations,
                "residual_inf": trace.residual_inf,
                "seed": trace.seed,
                "mc_samples": trace.mc_samples,
            },
        }
        if not trace.converged:
            solver_failed = trace.residual_inf
    doc = cluster_to_dict(cl.replace(cl.centers, cl.curvatures))
    doc["meta"] = meta
    _emit(_dump(doc), out)
    if solver_failed is not None:
        click.echo(f"verification failed: volume solver residual {solver_failed:.3e}", err=True)
        sys.exit(1)


@main.command("transform")
@click.option("--in", "in_path", required=True)
@click.option("--boost", "boost_text", default=None,
              help='"t:x,y,..." boost of parameter t in direction (x,y,...)')
@click.option("--rotate", "rotate_text", default=None,
              help='"a,b:angle" rotation in the coordinate plane (a,b)')
@click.option("-o", "--out", default=None)
@_guard
def transform_cmd(in_path, boost_text, rotate_text, out):
    """Apply a Möbius transformation to a cluster file."""
    cl = load_cluster(in_path)
    if (boost_text is None) == (rotate_text is None):
        raise click.UsageError("exactly one of --boost/--rotate is required")
    if boost_text is not None:
        try:
            t_text, dir_text = boost_text.split(":", 1)
        except ValueError:
            raise click.UsageError('--boost expects "t:x,y,..."')
        theta = np.array(_floats(dir_text))
        if theta.size != cl.n + 1:
            raise click.UsageError(f"boost direction needs {cl.n + 1} components")
        U = boost(theta, float(t_text))
    else:
        try:
            plane_text, ang_text = rotate_text.split(":", 1)
            a, b = (int(x) for x in plane_text.split(","))
        except ValueError:
            raise click.UsageError('--rotate expects "a,b:angle"')
        d = cl.n + 2
        if not (0 <= a < cl.n + 1 and 0 <= b < cl.n + 1 and a != b):
            raise click.UsageError("rotation plane must name two distinct spatial axes")
        ang = float(ang_text)
        U = np.eye(d)
        U[a, a] = U[b, b] = math.cos(ang)
        U[a, b] = -math.sin(ang)
        U[b, a] = math.sin(ang)
    _emit(_dump(cluster_to_dict(apply_mobius(cl, U))), out)


def _view_dict(view: EuclideanView) -> dict:
    return {
        "space": "R",
        "n": view.n,
        "q": view.q,
        "pole": view.pole.tolist(),
        "pole_cell": view.pole_cell,
        "frame": view.frame.tolist(),
        "euclid_centers": view.euclid_centers.tolist(),
        "euclid_curvatures": view.euclid_curvatures.tolist(),
        "spherical_offsets": view.spherical_offsets.tolist(),
        "parent": cluster_to_dict(view.parent),
    }


@main.command("project")
@click.option("--in", "in_path", required=True)
@click.option("--pole-cell", type=int, default=None)
@click.option("-o", "--out", default=None)
@_guard
def project_cmd(in_path, pole_cell, out):
    """Emit the stereographic Euclidean view of a cluster."""
    cl = load_cluster(in_path)
    if pole_cell is not None and not 0 <= pole_cell < cl.q:
        raise click.UsageError(f"--pole-cell must be in [0, {cl.q})")
    view = to_euclidean(cl, pole_cell_hint=pole_cell)
    _emit(_dump(_view_dict(view)), out)


# ---------------------------------------------------------------------------
# measure
# ---------------------------------------------------------------------------

@main.command("measure")
@click.option("--in", "in_path", required=True)
@click.option("--samples", type=int, default=measure.DEFAULT_VOLUME_SAMPLES, show_default=True)
@click.option("--interface-samples", type=int,
              default=measure.DEFAULT_INTERFACE_SAMPLES, show_default=True)
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
@click.option("-o", "--out", default=None)
@_guard
def measure_cmd(in_path, samples, interface_samples, seed, fmt, out):
    """Monte Carlo volumes and perimeters of a cluster."""
    cl = load_cluster(in_path)
    vols = measure.cell_volumes(cl, samples=samples, seed=seed)
    per = measure.perimeter(cl, samples=interface_samples, seed=seed)
    if fmt == "json":
        payload = {
            "seed": seed,
            "volumes": [_report_dict(r) for r in vols],
            "perimeter": {
                "pairs": {f"{i}-{j}": _report_dict(r) for (i, j), r in per.pairs.items()},
                "total": _report_dict(per.total),
                "skipped": [[i, j, reason] for (i, j, reason) in per.skipped],
            },
        }
        _emit(_dump(payload), out)
    else:
        lines = ["quantity,i,j,value,std_error,samples,seed"]
        for i, r in enumerate(vols):
            lines.append(f"volume,{i},,{r.value:.12g},{r.std_error:.6g},{r.samples},{r.seed}")
        for (i, j), r in sorted(per.pairs.items()):
            lines.append(f"perimeter,{i},{j},{r.value:.12g},{r.std_error:.6g},{r.samples},{r.seed}")
        t = per.total
        lines.append(f"perimeter_total,,,{t.value:.12g},{t.std_error:.6g},{t.samples},{t.seed}")
        _emit("\n".join(lines), out)


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _check_gram(cl, tol, samples, seed):
    ok, dev = is_standard_bubble(cl, tol=tol if tol is not None else 1e-10)
    return ok, {"deviation": dev}


def _check_lagrange(cl, tol, samples, seed):
    gen = np.random.Generator(np.random.Philox(key=seed + 17))
    theta = gen.standard_normal(cl.n + 1)
    theta /= np.linalg.norm(theta)
    spec = mobius_field(theta)
    av = first_variation_area(cl, spec, samples=samples, seed=seed)
    fd = flow_derivative_perimeter(cl, theta, h=1e-3, samples=samples, seed=seed)
    margin = 3.0 * math.hypot(av.std_error, fd.std_error) + 1e-4
    gap = abs(av.value - fd.value)
    return gap <= margin, {"analytic": av.value, "finite_difference": fd.value,
                           "gap": gap, "allowance": margin,
                           "lagrange_gap": av.lagrange_gap}


def _check_jacobi(cl, tol, samples, seed):
    gen = np.random.Generator(np.random.Philox(key=seed + 23))
    worst = 0.0
    detail = []
    pairs = [(i, j) for i in range(cl.q) for j in range(i + 1, cl.q)]
    for trial in range(5):
        i, j = pairs[int(gen.integers(len(pairs)))]
        theta = gen.standard_normal(cl.n + 1)
        theta /= np.linalg.norm(theta)
        expected = (cl.n - 1) * float(theta @ (cl.centers[i] - cl.centers[j]))
        fd = -(cl.n - 1) * flow_derivative_curvature(cl, i, j, theta, h=1e-4)
        worst = max(worst, abs(fd - expected))
        detail.append({"pair": [i, j], "expected": expected, "fd": fd})
    allowance = tol if tol is not None else 1e-4
    return worst <= allowance, {"worst_gap": worst, "allowance": allowance,
                                "trials": detail}


def _symmetry_axis(cl):
    _, _, vt = np.linalg.svd(cl.centers, full_matrices=True)
    axis = vt[-1]
    if np.abs(cl.centers @ axis).max() > 1e-9:
        return None
    return axis


def _check_skew_q0(cl, tol, samples, seed):
    axis = _symmetry_axis(cl)
    if axis is None:
        return None, {"reason": "no perpendicular symmetry axis"}
    gen = np.random.Generator(np.random.Philox(key=seed + 31))
    a = gen.standard_normal(cl.q)
    a -= a.mean()
    spec = skew_field(a, axis)
    rep = index_form_q0(cl, spec, samples=samples, seed=seed)
    bound = 3.0 * rep.std_error + 1e-6
    return abs(rep.value) <= bound, {"q0": rep.value, "std_error": rep.std_error,
                                     "allowance": bound}


def _check_isotropy(cl, tol, samples, seed):
    view = to_euclidean(cl)
    radius = 1.0
    for i in range(cl.q):
        for j in range(i + 1, cl.q):
            cr, kr, _ = view.pair(i, j)
            if abs(kr) > 1e-10:
                center = np.linalg.norm(cr / kr)
                radius = max(radius, center + 1.0 / abs(kr))
    rb = 2.0 * radius + 1.0
    nc = measure.surface_moment(view, "nc", samples=samples, seed=seed, bounding_radius=rb)
    nn = measure.surface_moment(view, "nn", samples=samples, seed=seed, bounding_radius=rb)
    ident = measure.surface_moment(view, "id", samples=samples, seed=seed, bounding_radius=rb)
    gap_nc = float(np.abs(nc.value).max())
    bound_nc = float(3.0 * nc.std_error.max() + 1e-6)
    iso = nn.value - ident.value / view.n
    gap_iso = float(np.abs(iso).max())
    bound_iso = float(3.0 * (nn.std_error + ident.std_error / view.n).max() + 1e-6)
    ok = gap_nc <= bound_nc and gap_iso <= bound_iso
    return ok, {"nc_gap": gap_nc, "nc_allowance": bound_nc,
                "isotropy_gap": gap_iso, "isotropy_allowance": bound_iso,
                "bounding_radius": rb}


_CHECKS = {
    "gram": _check_gram,
    "lagrange": _check_lagrange,
    "jacobi": _check_jacobi,
    "skew-q0": _check_skew_q0,
    "isotropy": _check_isotropy,
}


@main.command("verify")
@click.option("--in", "in_path", required=True)
@click.option("--checks", default="gram", show_default=True,
              help="comma-separated: " + ",".join(sorted(_CHECKS)))
@click.option("--tol", type=float, default=None)
@click.option("--samples", type=int, default=100_000, show_default=True)
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("-o", "--out", default=None)
@_guard
def verify_cmd(in_path, checks, tol, samples, seed, out):
    """Run verification checks; exit 1 when any fails."""
    cl = load_cluster(in_path)
    wanted = [c.strip() for c in checks.split(",") if c.strip()]
    unknown = [c for c in wanted if c not in _CHECKS]
    if unknown:
        raise click.UsageError(f"unknown checks: {', '.join(unknown)}")
    results = {}
    failed = []
    for name in wanted:
        try:
            ok, info = _CHECKS[name](cl, tol, samples, seed)
        except (ConventionError, VerificationError) as exc:
            ok, info = False, {"error": str(exc)}
        status = "skipped" if ok is None else ("pass" if ok else "fail")
        if status == "fail":
            failed.append(name)
        results[name] = {"status": status, **info}
    _emit(_dump({"seed": seed, "samples": samples, "checks": results}), out)
    if failed:
        click.echo(f"verification failed: {', '.join(failed)}", err=True)
        sys.exit(1)


# ---------------------------------------------------------------------------
# graph subcommands
# ---------------------------------------------------------------------------

@main.group("graph")
def graph_group():
    """Incidence complexes and small-graph tools."""


def _complex_dict(cx):
    return {
        "q": cx.q,
        "edges": sorted(list(e) for e in cx.edges),
        "triangles": sorted(list(t) for t in cx.triangles),
    }


def _edges_to_dot(edges, name="g"):
    lines = [f"graph {name} {{"]
    verts = sorted({v for e in edges for v in e})
    for v in verts:
        lines.append(f"  {v};")
    for (a, b) in sorted(edges):
        lines.append(f"  {a} -- {b};")
    lines.append("}")
    return "\n".join(lines)


@graph_group.command("extract")
@click.option("--in", "in_path", required=True)
@click.option("--samples", type=int, default=None)
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--exact", is_flag=True, default=False)
@click.option("--format", "fmt", type=click.Choice(["json", "dot"]), default="json")
@click.option("-o", "--out", default=None)
@_guard
def graph_extract_cmd(in_path, samples, seed, exact, fmt, out):
    """Extract the incidence complex of a cluster."""
    cx = combinatorics.extract_complex(load_cluster(in_path), samples=samples,
                                       seed=seed, exact=exact)
    if fmt == "json":
        _emit(_dump({"seed": seed, **_complex_dict(cx)}), out)
    else:
        _emit(_edges_to_dot(cx.edges), out)


@graph_group.command("homology")
@click.option("--in", "in_path", required=True)
@click.option("--field", type=click.Choice(["GF2", "Q"]), default="GF2", show_default=True)
@click.option("--samples", type=int, default=None)
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@_guard
def graph_homology_cmd(in_path, field, samples, seed):
    """First homology rank of a cluster's incidence complex."""
    cx = combinatorics.extract_complex(load_cluster(in_path), samples=samples, seed=seed)
    h1 = combinatorics.homology_h1(cx, field=field)
    click.echo(_dump({"field": field, "h1": h1, "seed": seed, **_complex_dict(cx)}))


@graph_group.command("enumerate")
@click.option("--q", "q", type=int, required=True)
@click.option("--filter", "filter_name", default=None,
              type=click.Choice(sorted(combinatorics._FILTERS)))
@click.option("--format", "fmt", type=click.Choice(["json", "dot"]), default="dot")
@click.option("-o", "--out", default=None)
@_guard
def graph_enumerate_cmd(q, filter_name, fmt, out):
    """Enumerate graphs on q vertices up to isomorphism."""
    try:
        graphs = combinatorics.enumerate_graphs(q, filter=filter_name)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    if fmt == "json":
        _emit(_dump({"q": q, "filter": filter_name, "count": len(graphs),
                     "graphs": [[list(e) for e in g] for g in graphs]}), out)
    else:
        chunks = [_edges_to_dot(g, name=f"g{t}") for t, g in enumerate(graphs)]
        _emit("\n".join(chunks), out)


@graph_group.command("ring-test")
@click.option("--q", "q", type=int, required=True)
@click.option("--curvatures", required=True, help="comma-separated hub curvatures")
@_guard
def graph_ring_cmd(q, curvatures):
    """Angle-sum feasibility test for a wheel (bubble-ring) cluster."""
    try:
        verdict = combinatorics.ring_feasibility(q, np.array(_floats(curvatures)))
    except ValueError as exc:
        raise click.UsageError(str(exc))
    click.echo(_dump({
        "feasible": verdict.feasible,
        "angle_sum_deg": verdict.angle_sum_deg,
        "ceiling_deg": verdict.ceiling_deg,
        "excess_deg": verdict.excess_deg,
    }))


# ---------------------------------------------------------------------------
# blowup / plot
# ---------------------------------------------------------------------------

@main.command("blowup")
@click.option("--in", "in_path", required=True)
@click.option("--point", required=True, help="comma-separated sphere point")
@click.option("--tol", type=float, default=None)
@_guard
def blowup_cmd(in_path, point, tol):
    """Classify the tangent cone at a boundary point."""
    cl = load_cluster(in_path)
    p = np.array(_floats(point))
    try:
        cone = blow_up(cl, p, tol=tol if tol is not None else 1e-9)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    click.echo(_dump({
        "point": cone.point.tolist(),
        "cells": list(cone.cells),
        "d": cone.d,
        "tag": cone.tag,
        "normals": cone.normals.tolist(),
    }))


_PALETTE = [
    "#4c78a8", "#f58518", "#54a24b", "#e45756", "#72b7b2", "#b279a2",
    "#ff9da6", "#9d755d", "#bab0ac", "#d67195", "#86bcb6", "#e0c47c",
]


def plot_cross_section(obj, plane=(0, 1), resolution: int = 720,
                       euclidean: bool = False) -> str:
    """SVG cross-section of a cluster (or its Euclidean view) in a 2-plane.

    Spherical mode walks the great circle of the coordinate 2-plane, colors
    each cell's arc, and marks cell transitions. Euclidean mode draws every
    interface carrier's intersection with the plane, keeping only the parts
    where the two cells are jointly minimal. Output is deterministic.
    """
    a, b = plane
    if a == b:
        raise ValueError("plane axes must be distinct")
    if euclidean or isinstance(obj, EuclideanView):
        view = obj if isinstance(obj, EuclideanView) else to_euclidean(obj)
        return _plot_euclidean(view, a, b, resolution)
    return _plot_spherical(obj, a, b, resolution)


def _runs(ids):
    """Contiguous runs (start, stop_exclusive, value) of an integer sequence."""
    runs = []
    start = 0
    for t in range(1, len(ids) + 1):
        if t == len(ids) or ids[t] != ids[start]:
            runs.append((start, t, ids[start]))
            start = t
    return runs


def _svg(width, height, viewbox, body):
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="{viewbox}">\n' + "\n".join(body) + "\n</svg>"
    )


def _plot_spherical(cluster: Cluster, a: int, b: int, resolution: int) -> str:
    d = cluster.n + 1
    if not (0 <= a < d and 0 <= b < d):
        raise ValueError(f"plane axes must be < {d}")
    phi = 2.0 * np.pi * np.arange(resolution) / resolution
    pts = np.zeros((resolution, d))
    pts[:, a] = np.cos(phi)
    pts[:, b] = np.sin(phi)
    F = cluster.functionals(pts)
    ids = F.argmin(axis=1)
    body = ['<circle cx="0" cy="0" r="1" fill="none" stroke="#dddddd" stroke-width="0.01"/>']
    for (s, t, cell) in _runs(list(ids)):
        seg = pts[s:t]
        if seg.shape[0] < 2:
            seg = pts[s : s + 1]
        d_attr = "M " + " L ".join(
            f"{x:.5f} {-y:.5f}" for x, y in zip(seg[:, a], seg[:, b])
        )
        color = _PALETTE[cell % len(_PALETTE)]
        body.append(
            f'<path d="{d_attr}" fill="none" stroke="{color}" '
            f'stroke-width="0.04" stroke-linecap="round"/>'
        )
    for t in range(resolution):
        u = (t + 1) % resolution
        if ids[t] != ids[u]:
            mid = pts[t, [a, b]] + pts[u, [a, b]]
            mid /= np.linalg.norm(mid)
            i, j = sorted((int(ids[t]), int(ids[u])))
            color = _PALETTE[(i * cluster.q + j) % len(_PALETTE)]
            body.append(
                f'<circle cx="{mid[0]:.5f}" cy="{-mid[1]:.5f}" r="0.05" '
                f'fill="{color}" stroke="#333333" stroke-width="0.008"/>'
            )
    return _svg(480, 480, "-1.2 -1.2 2.4 2.4", body)


def _plot_euclidean(view: EuclideanView, a: int, b: int, resolution: int) -> str:
    n = view.n
    if not (0 <= a < n and 0 <= b < n):
        raise ValueError(f"plane axes must be < {n}")
    curves = []  # (i, j, (m, 2) plane points embedded later)
    extent = 1.0
    for i in range(view.q):
        for j in range(i + 1, view.q):
            try:
                interface_sphere(view.parent, i, j)
            except ConventionError:
                continue
            cr, kr, ks = view.pair(i, j)
            if abs(kr) > 1e-10:
                center = -cr / kr
                rho = 1.0 / abs(kr)
                off = np.delete(center, [a, b])
                r2 = rho * rho - float(off @ off)
                if r2 <= 0.0:
                    continue
                r = math.sqrt(r2)
                phi = 2.0 * np.pi * np.arange(resolution) / resolution
                uv = np.stack([center[a] + r * np.cos(phi),
                               center[b] + r * np.sin(phi)], axis=1)
                closed = True
            else:
                u2 = np.array([cr[a], cr[b]])
                nu = np.linalg.norm(u2)
                if nu < 1e-12:
                    continue
                q0 = -ks * u2 / (nu * nu)
                direction = np.array([-u2[1], u2[0]]) / nu
                span = np.linspace(-8.0, 8.0, resolution)
                uv = q0 + span[:, None] * direction
                closed = False
            curves.append((i, j, uv, closed))

    pieces = []  # (color, segment points, close_path)
    for (i, j, uv, closed) in curves:
        X = np.zeros((uv.shape[0], n))
        X[:, a] = uv[:, 0]
        X[:, b] = uv[:, 1]
        F = view.functionals(X)
        lo = np.partition(F, 1, axis=1)
        scalefac = 1.0 + (X * X).sum(axis=1)
        on_face = (
            (np.abs(F[:, i] - F[:, j]) <= 1e-7 * scalefac)
            & (F[:, [i, j]].max(axis=1) <= lo[:, 1] + 1e-7 * scalefac)
        )
        color = _PALETTE[(i * view.q + j) % len(_PALETTE)]
        mask = list(on_face.astype(int))
        for (s, t, val) in _runs(mask):
            if not val or t - s < 2:
                continue
            seg = uv[s:t]
            pieces.append((color, seg, closed and s == 0 and t == uv.shape[0]))
            extent = max(extent, float(np.abs(seg).max()))

    body = []
    for (color, seg, close_path) in pieces:
        d_attr = "M " + " L ".join(f"{x:.5f} {-y:.5f}" for x, y in seg)
        if close_path:
            d_attr += " Z"
        body.append(
            f'<path d="{d_attr}" fill="none" stroke="{color}" '
            f'stroke-width="{0.01 * extent:.5f}"/>'
        )
    pad = 1.15 * extent
    vb = f"{-pad:.5f} {-pad:.5f} {2 * pad:.5f} {2 * pad:.5f}"
    return _svg(480, 480, vb, body)


@main.command("plot")
@click.option("--in", "in_path", required=True)
@click.option("--plane", default="0,1", show_default=True)
@click.option("--resolution", type=int, default=720, show_default=True)
@click.option("--euclidean", is_flag=True, default=False)
@click.option("-o", "--out", required=True)
@_guard
def plot_cmd(in_path, plane, resolution, euclidean, out):
    """Render a 2-plane cross-section of a cluster as SVG."""
    cl = load_cluster(in_path)
    try:
        axes = tuple(int(x) for x in plane.split(","))
        if len(axes) != 2:
            raise ValueError
    except ValueError:
        raise click.UsageError('--plane expects "a,b"')
    try:
        svg = plot_cross_section(cl, plane=axes, resolution=resolution,
                                 euclidean=euclidean)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    _emit(svg, out)


if __name__ == "__main__":
    main()
