import numpy as np
import pytest

import bubbletk as bt
from bubbletk import variation
from bubbletk.variation import (coordinate_field, first_variation_area,
                                first_variation_volume,
                                flow_derivative_curvature,
                                flow_derivative_perimeter,
                                flow_derivative_volume, index_form_q0,
                                jacobi_closed_form, mobius_field, normal_speed,
                                rotation_field, skew_field)


@pytest.fixture
def theta():
    t = np.array([0.3, -0.7, 0.2, 0.55])
    return t / np.linalg.norm(t)


class TestFieldSpecs:
    def test_mobius_requires_nonzero(self):
        with pytest.raises(ValueError):
            mobius_field(np.zeros(3))

    def test_rotation_requires_distinct_axes(self):
        with pytest.raises(ValueError):
            rotation_field(1, 1)

    def test_skew_requires_zero_sum_and_unit_axis(self):
        with pytest.raises(bt.ConventionError):
            skew_field(np.array([1.0, 1.0, 1.0]), np.array([0.0, 0.0, 1.0]))
        with pytest.raises(bt.ConventionError):
            skew_field(np.array([1.0, -1.0, 0.0]), np.array([0.0, 0.0, 2.0]))

    def test_skew_speed_needs_pair(self, theta):
        a = np.array([1.0, 0.0, -0.5, -0.5])
        spec = skew_field(a, np.array([0.0, 0.0, 0.0, 1.0]))
        with pytest.raises(ValueError):
            variation.field_value(spec, theta)


class TestNormalSpeed:
    def test_mobius_speed_formula(self, curved_bubble_s3, theta):
        cl = curved_bubble_s3
        sph = bt.interface_sphere(cl, 0, 1)
        pts = sph.sample_block(3, 0, 100)
        cij = cl.centers[0] - cl.centers[1]
        kij = cl.curvatures[0] - cl.curvatures[1]
        nrm = cij + kij * pts
        expected = nrm @ theta - (pts @ theta) * np.einsum("md,md->m", pts, nrm)
        spec = mobius_field(theta)
        for m in range(0, 100, 9):
            assert normal_speed(cl, spec, 0, 1, pts[m]) == pytest.approx(
                expected[m], abs=1e-12)

    def test_rotation_speed_is_killing(self, curved_bubble_s3):
        cl = curved_bubble_s3
        spec = rotation_field(0, 1)
        sph = bt.interface_sphere(cl, 1, 2)
        pts = sph.sample_block(3, 0, 50)
        cij = cl.centers[1] - cl.centers[2]
        kij = cl.curvatures[1] - cl.curvatures[2]
        nrm = cij + kij * pts
        vel = np.zeros_like(pts)
        vel[:, 0] = -pts[:, 1]
        vel[:, 1] = pts[:, 0]
        expected = np.einsum("md,md->m", vel, nrm)
        for m in range(0, 50, 7):
            assert normal_speed(cl, spec, 1, 2, pts[m]) == pytest.approx(
                expected[m], abs=1e-12)

    def test_coordinate_orientation_sign(self, curved_bubble_s3, theta):
        cl = curved_bubble_s3
        spec = coordinate_field(theta)
        sph = bt.interface_sphere(cl, 0, 2)
        pts = sph.sample_block(1, 0, 16)
        for m in range(16):
            fwd = normal_speed(cl, spec, 0, 2, pts[m])
            rev = normal_speed(cl, spec, 2, 0, pts[m])
            assert fwd == pytest.approx(-rev, abs=1e-15)


class TestFirstVariation:
    def test_volume_variation_sums_to_zero_exactly(self, curved_bubble_s3, theta):
        reps = first_variation_volume(curved_bubble_s3, mobius_field(theta),
                                      samples=60_000, seed=2)
        assert len(reps) == 4
        assert sum(r.value for r in reps) == 0.0
        assert all(r.std_error >= 0 for r in reps)

    def test_volume_variation_matches_flow_derivative(self, double_bubble_s2, theta):
        th = theta[:3]
        dv = first_variation_volume(double_bubble_s2, mobius_field(th),
                                    samples=400_000, seed=3)
        fd = flow_derivative_volume(double_bubble_s2, th, h=1e-3,
                                    samples=400_000, seed=3)
        for i in range(3):
            tol = 3 * np.hypot(dv[i].std_error, fd[i].std_error) + 1e-4
            assert abs(dv[i].value - fd[i].value) < tol

    def test_rotation_changes_nothing(self, curved_bubble_s3):
        spec = rotation_field(0, 2)
        dv = first_variation_volume(curved_bubble_s3, spec,
                                    samples=200_000, seed=5)
        for r in dv:
            assert abs(r.value) < 3 * r.std_error + 1e-6
        av = first_variation_area(curved_bubble_s3, spec, samples=200_000, seed=5)
        assert abs(av.value) < 3 * av.std_error + 1e-6

    def test_lagrange_identity_is_structural(self, curved_bubble_s3, theta):
        av = first_variation_area(curved_bubble_s3, mobius_field(theta),
                                  samples=100_000, seed=1)
        # both sides are assembled from the same interface integrals, so the
        # gap measures pure bookkeeping, not Monte Carlo noise
        assert av.lagrange_gap < 1e-12
        assert av.lagrange_value == pytest.approx(av.value, abs=1e-12)

    def test_area_variation_against_flow(self, curved_bubble_s3, theta):
        av = first_variation_area(curved_bubble_s3, mobius_field(theta),
                                  samples=200_000, seed=4)
        fd = flow_derivative_perimeter(curved_bubble_s3, theta, h=1e-3,
                                       samples=200_000, seed=4)
        assert abs(av.value - fd.value) < 3 * np.hypot(av.std_error, fd.std_error) + 1e-4


class TestJacobiClosedForms:
    def test_mobius_closed_form_matches_flow(self, curved_bubble_s3, theta):
        cl = curved_bubble_s3
        for (i, j) in [(0, 1), (1, 3), (2, 3)]:
            expected = (cl.n - 1) * float(theta @ (cl.centers[i] - cl.centers[j]))
            fd = -(cl.n - 1) * flow_derivative_curvature(cl, i, j, theta, h=1e-4)
            assert abs(fd - expected) < 1e-6

    def test_closed_form_needs_membership(self, curved_bubble_s3, theta):
        cl = curved_bubble_s3
        p = -cl.centers[0] / np.linalg.norm(cl.centers[0])  # interior of cell 0
        with pytest.raises(ValueError, match="interface"):
            jacobi_closed_form(cl, 1, 2, mobius_field(theta), p)

    def test_mobius_value_at_interface_point(self, double_bubble_s2):
        cl = double_bubble_s2
        p = cl.centers[2] / np.linalg.norm(cl.centers[2])  # on interface (0,1)
        th = np.array([0.2, -0.4, 0.1])
        got = jacobi_closed_form(cl, 0, 1, mobius_field(th), p)
        assert got == pytest.approx((cl.n - 1) * th @ (cl.centers[0] - cl.centers[1]))

    def test_coordinate_form_orientation_invariant(self, curved_bubble_s3, theta):
        cl = curved_bubble_s3
        ok, w = bt.interface_nonempty(cl, 1, 2, exact=True)
        assert ok
        a = jacobi_closed_form(cl, 1, 2, coordinate_field(theta), w)
        b = jacobi_closed_form(cl, 2, 1, coordinate_field(theta), w)
        assert a == pytest.approx(b)
        kij = cl.curvatures[1] - cl.curvatures[2]
        cij = cl.centers[1] - cl.centers[2]
        assert a == pytest.approx(-(cl.n - 1) * kij * float(theta @ cij))

    def test_rotation_form_is_zero(self, curved_bubble_s3):
        cl = curved_bubble_s3
        ok, w = bt.interface_nonempty(cl, 0, 3, exact=True)
        assert ok
        assert jacobi_closed_form(cl, 0, 3, rotation_field(0, 1), w) == 0.0


class TestIndexForm:
    def test_skew_q0_vanishes_with_boundary_cancellation(self, curved_bubble_s3):
        cl = curved_bubble_s3
        N = np.array([0.0, 0.0, 0.0, 1.0])
        a = np.array([1.0, -0.5, 0.25, -0.75])
        a -= a.mean()
        rep = index_form_q0(cl, skew_field(a, N), samples=400_000, seed=5)
        assert abs(rep.value) <= 3 * rep.std_error + 1e-6
        # with nonzero curvatures both terms are individually nonzero
        assert abs(rep.interface_term) > 10 * rep.std_error
        assert abs(rep.boundary_term) > 10 * rep.std_error

    def test_traced_mode_drops_boundary(self, curved_bubble_s3):
        cl = curved_bubble_s3
        N = np.array([0.0, 0.0, 0.0, 1.0])
        a = np.array([1.0, 0.0, 0.0, -1.0])
        rep = index_form_q0(cl, skew_field(a, N), samples=100_000, seed=6,
                            traced=True)
        assert rep.traced
        assert rep.boundary_term == 0.0
        assert rep.value == pytest.approx(rep.interface_term)

    def test_bilinear_and_cyclic_boundary_agree_on_skew(self, curved_bubble_s3):
        cl = curved_bubble_s3
        N = np.array([0.0, 0.0, 0.0, 1.0])
        a = np.array([0.5, 0.5, -0.25, -0.75])
        spec = skew_field(a, N)
        r1 = index_form_q0(cl, spec, samples=200_000, seed=7)
        r2 = index_form_q0(cl, spec, samples=200_000, seed=7, _form="cyclic")
        tol = 3 * np.hypot(r1.std_error, r2.std_error) + 1e-6
        assert abs(r1.boundary_term - r2.boundary_term) < tol

    def test_vector_fields_rejected(self, curved_bubble_s3, theta):
        with pytest.raises(ValueError, match="scalar"):
            index_form_q0(curved_bubble_s3, mobius_field(theta), samples=10_000)


class TestFlowDerivatives:
    def test_volume_flow_reports(self, double_bubble_s2):
        th = np.array([0.0, 1.0, 0.0])
        reps = flow_derivative_volume(double_bubble_s2, th, samples=120_000, seed=2)
        assert len(reps) == 3
        total = sum(r.value for r in reps)
        sigma = np.sqrt(sum(r.std_error**2 for r in reps))
        assert abs(total) < 3 * sigma + 1e-6

    def test_curvature_flow_of_flat_interface(self, double_bubble_s2):
        cl = double_bubble_s2
        th = np.array([1.0, 0.0, 0.0])
        d = flow_derivative_curvature(cl, 0, 1, th, h=1e-4)
        assert d == pytest.approx(-float(th @ (cl.centers[0] - cl.centers[1])),
                                  abs=1e-8)
