"""Spherical Voronoi bubble clusters: geometry, measures, and stability."""

from .cluster import (BlowUpCone, Cluster, InterfaceSphere, PseudoFlat,
                      StationarityReport, Tie, TripleCarrier, blow_up,
                      cell_of, cluster_from_dict, cluster_to_dict,
                      interface_nonempty, interface_sphere,
                      is_standard_bubble, load_cluster,
                      pseudo_conformally_flat, save_cluster,
                      stationarity_report, triple_carrier,
                      triple_set_nonempty)
from .combinatorics import (CycleObstruction, IncidenceComplex, RingVerdict,
                            WeightedGraph, enumerate_graphs, extract_complex,
                            homology_h1, is_positive_definite_on_zero_sum,
                            laplacian, max_principle_solve, recover_potential,
                            ring_feasibility)
from .construct import (SolverTrace, apply_mobius, bubble_from_curvatures,
                        bubble_from_volumes, equal_volume_bubble,
                        helmert_basis)
from .errors import ConventionError, VerificationError
from .measure import (EuclideanMeasures, MeasureReport, MomentReport,
                      PerimeterReport, ball_volume, cell_volumes,
                      euclidean_volumes_perimeter, perimeter, sphere_area,
                      surface_moment)
from .minkowski import (align, boost, boost_generator, gram, is_lorentz,
                        lorentz_residual, metric, minkowski_dot)
from .projections import (BallView, EuclideanView, ball_projection,
                          stereo_to_plane, stereo_to_sphere, to_euclidean,
                          view_to_sphere_params)
from .variation import (AreaVariation, FieldSpec, IndexFormReport,
                        coordinate_field, first_variation_area,
                        first_variation_volume, flow_derivative_curvature,
                        flow_derivative_perimeter, flow_derivative_volume,
                        index_form_q0, jacobi_closed_form, mobius_field,
                        normal_speed, rotation_field, skew_field)

__version__ = "0.1.0"

__all__ = [
    "AreaVariation", "BallView", "BlowUpCone", "Cluster", "ConventionError",
    "CycleObstruction", "EuclideanMeasures", "EuclideanView", "FieldSpec",
    "IncidenceComplex", "IndexFormReport", "InterfaceSphere", "MeasureReport",
    "MomentReport", "PerimeterReport", "PseudoFlat", "RingVerdict",
    "SolverTrace", "StationarityReport", "Tie", "TripleCarrier",
    "VerificationError", "WeightedGraph", "align", "apply_mobius",
    "ball_projection", "ball_volume", "blow_up", "boost", "boost_generator",
    "bubble_from_curvatures", "bubble_from_volumes", "cell_of",
    "cell_volumes", "cluster_from_dict", "cluster_to_dict",
    "coordinate_field", "enumerate_graphs", "equal_volume_bubble",
    "euclidean_volumes_perimeter", "extract_complex", "first_variation_area",
    "first_variation_volume", "flow_derivative_curvature",
    "flow_derivative_perimeter", "flow_derivative_volume", "gram",
    "helmert_basis", "homology_h1", "index_form_q0", "interface_nonempty",
    "interface_sphere", "is_lorentz", "is_positive_definite_on_zero_sum",
    "is_standard_bubble", "jacobi_closed_form", "laplacian", "load_cluster",
    "lorentz_residual",
    "max_principle_solve", "metric", "minkowski_dot", "mobius_field",
    "normal_speed", "perimeter", "pseudo_conformally_flat",
    "recover_potential", "ring_feasibility", "rotation_field", "save_cluster",
    "skew_field", "sphere_area", "stationarity_report", "stereo_to_plane",
    "stereo_to_sphere", "surface_moment", "to_euclidean", "triple_carrier",
    "triple_set_nonempty", "view_to_sphere_params",
]
