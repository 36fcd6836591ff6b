import os
import subprocess
import sys
import textwrap

import numpy as np
import pytest

from bubbletk import _kernels, rng


def _functionals(points, C, k):
    return points @ C.T + k


class TestAssignSemantics:
    def setup_method(self):
        g = np.random.default_rng(3)
        self.C = g.standard_normal((5, 4))
        self.k = g.standard_normal(5) * 0.1
        self.pts = g.standard_normal((257, 4))
        self.pts /= np.linalg.norm(self.pts, axis=1, keepdims=True)

    def test_assign_matches_argmin(self):
        F = _functionals(self.pts, self.C, self.k)
        idx, gap = _kernels.sphere_assign(self.pts, self.C, self.k)
        assert np.array_equal(idx, F.argmin(axis=1))
        best = F.min(axis=1)
        F2 = F.copy()
        F2[np.arange(len(F)), idx] = np.inf
        assert np.allclose(gap, F2.min(axis=1) - best)

    def test_counts_match_assign(self):
        idx, _ = _kernels.sphere_assign(self.pts, self.C, self.k)
        counts = _kernels.sphere_cell_counts(self.pts, self.C, self.k)
        assert counts.sum() == len(self.pts)
        assert np.array_equal(counts, np.bincount(idx, minlength=5))

    def test_tie_resolves_to_lowest_index(self):
        C = np.array([[1.0, 0.0], [1.0, 0.0], [-1.0, 0.0]])
        pts = np.array([[0.0, 1.0], [1.0, 0.0]])
        idx, gap = _kernels.sphere_assign(pts, C, np.zeros(3))
        assert idx[0] == 0  # exact tie between cells 0 and 1
        assert gap[0] == 0.0
        assert idx[1] == 2

    def test_group_margins(self):
        group = np.array([1, 3])
        F = _functionals(self.pts, self.C, self.k)
        margin, spread = _kernels.sphere_group_margins(self.pts, self.C, self.k, group)
        gmax = F[:, group].max(axis=1)
        omin = np.delete(F, group, axis=1).min(axis=1)
        assert np.allclose(margin, omin - gmax)
        assert np.allclose(spread, F[:, group].max(axis=1) - F[:, group].min(axis=1))

    def test_group_margins_full_group_infinite(self):
        group = np.arange(5)
        margin, spread = _kernels.sphere_group_margins(self.pts, self.C, self.k, group)
        assert np.all(np.isinf(margin))
        assert np.all(spread >= 0)

    def test_euclid_matches_quadratic(self):
        g = np.random.default_rng(5)
        X = g.standard_normal((101, 3)) * 2
        C = g.standard_normal((4, 3))
        a = g.standard_normal(4) * 0.3
        b = g.standard_normal(4)
        F = a * (X * X).sum(axis=1)[:, None] + 2 * X @ C.T + b
        idx, _ = _kernels.euclid_assign(X, C, a, b)
        assert np.array_equal(idx, F.argmin(axis=1))


class TestBlockRng:
    def test_block_sizes_cover_total(self):
        assert sum(rng.block_sizes(100_001)) == 100_001
        assert rng.block_sizes(rng.BLOCK) == [rng.BLOCK]
        with pytest.raises(ValueError):
            rng.block_sizes(0)

    def test_blocks_are_reproducible(self):
        a = rng.sphere_block(9, 2, 1000, 4)
        b = rng.sphere_block(9, 2, 1000, 4)
        assert np.array_equal(a, b)
        assert np.abs(np.linalg.norm(a, axis=1) - 1).max() < 1e-12

    def test_distinct_blocks_differ(self):
        a = rng.sphere_block(9, 0, 1000, 4)
        b = rng.sphere_block(9, 1, 1000, 4)
        assert not np.array_equal(a, b)

    def test_ball_block_radius(self):
        pts = rng.ball_block(4, 0, 2000, 3, 2.5)
        r = np.linalg.norm(pts, axis=1)
        assert r.max() <= 2.5
        # radii of uniform ball samples: P(r <= s) = (s/R)^3
        assert abs(np.mean((r / 2.5) ** 3) - 0.5) < 0.05

    def test_map_blocks_order_is_fixed(self):
        got = rng.map_blocks(3 * rng.BLOCK, lambda b, m: (b, m))
        assert [b for b, _ in got] == [0, 1, 2]
        assert all(m == rng.BLOCK for _, m in got)


_SCRIPT = textwrap.dedent(
    """
    import numpy as np, bubbletk as bt
    from bubbletk import measure, _kernels
    print(_kernels.backend_name())
    cl = bt.bubble_from_curvatures(3, 4, np.array([0.3, 0.1, -0.15, -0.25]))
    v = measure.cell_volumes(cl, samples=150_000, seed=9)
    per = measure.perimeter(cl, samples=60_000, seed=9)
    print(repr([r.value for r in v]))
    print(repr(per.total.value))
    """
)


def _run(env_extra):
    env = dict(os.environ)
    env.pop("BUBBLETK_NO_NUMBA", None)
    env.pop("BUBBLETK_THREADS", None)
    env.update(env_extra)
    out = subprocess.run([sys.executable, "-c", _SCRIPT], capture_output=True,
                         text=True, env=env, timeout=300)
    assert out.returncode == 0, out.stderr
    return out.stdout.splitlines()


@pytest.mark.slow
def test_backends_agree_bit_for_bit():
    numba_out = _run({})
    numpy_out = _run({"BUBBLETK_NO_NUMBA": "1"})
    assert numba_out[0] == "numba"
    assert numpy_out[0] == "numpy"
    assert numba_out[1:] == numpy_out[1:]


@pytest.mark.slow
def test_thread_count_does_not_change_results():
    one = _run({"BUBBLETK_THREADS": "1"})
    many = _run({"BUBBLETK_THREADS": "8"})
    assert one[1:] == many[1:]
