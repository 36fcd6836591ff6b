import numpy as np
import pytest

import bubbletk as bt
from bubbletk.construct import helmert_basis

from conftest import random_orthochronous


class TestHelmert:
    def test_columns_orthonormal_and_zero_sum(self):
        for q in (2, 3, 5, 7):
            B = helmert_basis(q)
            assert B.shape == (q, q - 1)
            assert np.abs(B.T @ B - np.eye(q - 1)).max() < 1e-14
            assert np.abs(B.sum(axis=0)).max() < 1e-14

    def test_first_column_value(self):
        B = helmert_basis(3)
        assert B[0, 0] == pytest.approx(1 / np.sqrt(2))
        assert B[1, 0] == pytest.approx(-1 / np.sqrt(2))
        assert B[2, 0] == 0.0


class TestEqualVolume:
    @pytest.mark.parametrize("q", [2, 3, 4])
    def test_gram_is_half_projector(self, q):
        cl = bt.equal_volume_bubble(q - 1, q)
        P = np.eye(q) - np.full((q, q), 1 / q)
        assert np.abs(cl.gram() - 0.5 * P).max() < 1e-14
        assert np.abs(cl.curvatures).max() == 0.0

    def test_equal_volume_triple_known_gram(self):
        G = bt.equal_volume_bubble(2, 3).gram()
        assert G[0, 0] == pytest.approx(1 / 3, abs=1e-15)
        assert G[0, 1] == pytest.approx(-1 / 6, abs=1e-15)

    def test_cells_have_equal_volumes(self):
        cl = bt.equal_volume_bubble(2, 3)
        vols = bt.cell_volumes(cl, samples=300_000, seed=4)
        for r in vols:
            assert abs(r.value - 1 / 3) < 3 * r.std_error + 1e-12

    def test_range_checks(self):
        with pytest.raises(ValueError):
            bt.equal_volume_bubble(2, 5)
        with pytest.raises(ValueError):
            bt.equal_volume_bubble(1, 1)


class TestFromCurvatures:
    def test_recovers_curvatures_and_gram(self):
        k = np.array([0.4, 0.05, -0.2, -0.25])
        cl = bt.bubble_from_curvatures(3, 4, k)
        assert np.allclose(cl.curvatures, k, atol=1e-12)
        ok, dev = bt.is_standard_bubble(cl)
        assert ok, dev

    def test_zero_curvatures_match_equal_volume_up_to_isometry(self):
        a = bt.bubble_from_curvatures(2, 3, np.zeros(3))
        b = bt.equal_volume_bubble(2, 3)
        W = bt.align(a.ck, b.ck)
        assert np.abs(a.ck @ W.T - b.ck).max() < 1e-8

    def test_rejects_nonzero_sum(self):
        with pytest.raises(bt.ConventionError):
            bt.bubble_from_curvatures(2, 3, np.array([0.1, 0.0, 0.0]))

    def test_rejects_wrong_length(self):
        with pytest.raises(ValueError):
            bt.bubble_from_curvatures(2, 3, np.array([0.1, -0.1]))

    def test_all_interfaces_nonempty(self):
        cl = bt.bubble_from_curvatures(3, 4, np.array([0.3, 0.1, -0.15, -0.25]))
        for i in range(4):
            for j in range(i + 1, 4):
                ok, _ = bt.interface_nonempty(cl, i, j, exact=True)
                assert ok


class TestFromVolumes:
    def test_two_cells_split(self):
        cl, tr = bt.bubble_from_volumes(2, 2, np.array([0.7, 0.3]),
                                        mc_samples=150_000, seed=2)
        assert tr.converged
        v = bt.cell_volumes(cl, samples=300_000, seed=77)
        assert abs(v[0].value - 0.7) < 3 * v[0].std_error + 1e-3

    def test_triple_on_s2(self):
        target = np.array([0.5, 0.3, 0.2])
        cl, tr = bt.bubble_from_volumes(2, 3, target, mc_samples=200_000, seed=3)
        assert tr.converged and tr.iterations <= 15
        v = bt.cell_volumes(cl, samples=400_000, seed=123)
        for i in range(3):
            # the solver stops when its own MC estimate hits the target, so
            # its sampling noise contributes alongside the re-measurement's
            solver_sigma = np.sqrt(target[i] * (1 - target[i]) / tr.mc_samples)
            allowance = 3 * np.hypot(v[i].std_error, solver_sigma) + 1e-3
            assert abs(v[i].value - target[i]) < allowance

    def test_volume_vector_validated(self):
        with pytest.raises(ValueError):
            bt.bubble_from_volumes(2, 3, np.array([0.5, 0.6, -0.1]))
        with pytest.raises(ValueError):
            bt.bubble_from_volumes(2, 3, np.array([0.5, 0.3]))
        with pytest.raises(ValueError):
            bt.bubble_from_volumes(2, 3, np.array([0.5, 0.3, 0.1]))

    def test_trace_carries_history(self):
        _, tr = bt.bubble_from_volumes(2, 2, np.array([0.6, 0.4]),
                                       mc_samples=120_000, seed=5)
        assert tr.seed == 5
        assert tr.mc_samples == 120_000
        # history starts with the iteration-0 residual of the initial guess
        assert len(tr.history) == tr.iterations + 1
        assert tr.residual_inf <= tr.history[0]["residual_inf"]


class TestApplyMobius:
    def test_gram_invariant(self, curved_bubble_s3):
        rng = np.random.default_rng(11)
        U = random_orthochronous(3, rng)
        moved = bt.apply_mobius(curved_bubble_s3, U)
        assert np.abs(moved.gram() - curved_bubble_s3.gram()).max() < 1e-9
        assert np.abs(moved.centers.sum(axis=0)).max() < 1e-12
        assert abs(moved.curvatures.sum()) < 1e-12

    def test_identity_is_noop(self, double_bubble_s2):
        moved = bt.apply_mobius(double_bubble_s2, np.eye(4))
        assert np.allclose(moved.centers, double_bubble_s2.centers)

    def test_rejects_non_lorentz(self, double_bubble_s2):
        with pytest.raises(bt.ConventionError):
            bt.apply_mobius(double_bubble_s2, 2 * np.eye(4))

    def test_rejects_antichronous(self, double_bubble_s2):
        with pytest.raises(bt.ConventionError):
            bt.apply_mobius(double_bubble_s2, bt.metric(4))

    def test_rejects_wrong_shape(self, double_bubble_s2):
        with pytest.raises(bt.ConventionError):
            bt.apply_mobius(double_bubble_s2, np.eye(5))

    def test_boost_moves_volumes_but_keeps_incidence(self, double_bubble_s2):
        theta = np.array([1.0, 0.0, 0.0])
        moved = bt.apply_mobius(double_bubble_s2, bt.boost(theta, 0.5))
        before = bt.extract_complex(double_bubble_s2, seed=8)
        after = bt.extract_complex(moved, seed=8)
        assert before.edges == after.edges
        assert before.triangles == after.triangles
        v = bt.cell_volumes(moved, samples=200_000, seed=6)
        assert max(abs(r.value - 1 / 3) for r in v) > 0.05
