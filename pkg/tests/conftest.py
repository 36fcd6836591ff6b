import numpy as np
import pytest

import bubbletk as bt


@pytest.fixture
def double_bubble_s2():
    """Equal-volume three-cell cluster on S^2."""
    return bt.equal_volume_bubble(2, 3)


@pytest.fixture
def quad_bubble_s3():
    return bt.equal_volume_bubble(3, 4)


@pytest.fixture
def curved_bubble_s3():
    return bt.bubble_from_curvatures(3, 4, np.array([0.3, 0.1, -0.15, -0.25]))


@pytest.fixture
def asymmetric_ring():
    """Four cells on S^2 whose (0,1) interface degenerates to two points.

    Pair (2,3) violates the carrying-sphere identity on purpose, so it
    exercises the malformed-pair paths.
    """
    C = np.array([
        [0.5, 0.0, 0.0],
        [-0.5, 0.0, 0.0],
        [0.0, np.sqrt(3) / 2, 0.0],
        [0.0, -np.sqrt(3) / 2, 0.0],
    ])
    return bt.Cluster(2, 4, C, np.zeros(4))


def random_orthochronous(n, rng, scale=0.35):
    """Random element of the identity component: rotation, boost, rotation."""
    d = n + 2

    def rot():
        A = rng.standard_normal((n + 1, n + 1))
        Q, r = np.linalg.qr(A)
        Q = Q * np.sign(np.diag(r))
        if np.linalg.det(Q) < 0:
            Q[:, 0] = -Q[:, 0]
        U = np.eye(d)
        U[: n + 1, : n + 1] = Q
        return U

    theta = rng.standard_normal(n + 1)
    theta /= np.linalg.norm(theta)
    return rot() @ bt.boost(theta, scale * rng.uniform(-1.0, 1.0)) @ rot()
