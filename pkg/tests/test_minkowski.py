import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import bubbletk as bt
from bubbletk.minkowski import expm_pade6

from conftest import random_orthochronous


def test_metric_signature():
    J = bt.metric(5)
    assert J.shape == (5, 5)
    assert np.array_equal(np.diag(J), [1, 1, 1, 1, -1])
    assert np.array_equal(J, np.diag(np.diag(J)))


def test_minkowski_dot_last_coordinate_negative():
    e = np.zeros(4)
    e[-1] = 1.0
    assert bt.minkowski_dot(e, e) == -1.0
    x = np.array([1.0, 2.0, 0.5, 3.0])
    y = np.array([-1.0, 0.0, 2.0, 1.0])
    assert bt.minkowski_dot(x, y) == pytest.approx(1 * -1 + 2 * 0 + 0.5 * 2 - 3 * 1)


def test_minkowski_dot_batched():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((7, 4))
    Y = rng.standard_normal((7, 4))
    J = bt.metric(4)
    expected = np.einsum("bi,ij,bj->b", X, J, Y)
    assert np.allclose(bt.minkowski_dot(X, Y), expected)


def test_is_lorentz_identity_true():
    assert bt.is_lorentz(np.eye(4))


def test_is_lorentz_rejects_time_reversal():
    # J conjugates the form correctly but reverses time orientation
    assert not bt.is_lorentz(bt.metric(4))


def test_is_lorentz_accepts_boost():
    theta = np.zeros(3)
    theta[0] = 1.0
    assert bt.is_lorentz(bt.boost(theta, 0.3))


def test_boost_generator_layout():
    theta = np.array([2.0, -1.0, 0.5])
    B = bt.boost_generator(theta)
    assert B.shape == (4, 4)
    assert np.array_equal(B[:3, 3], theta)
    assert np.array_equal(B[3, :3], theta)
    assert np.array_equal(B[:3, :3], np.zeros((3, 3)))
    assert B[3, 3] == 0.0


def test_boost_generator_cubic_identity():
    theta = np.array([0.3, -1.2, 0.7, 0.1])
    B = bt.boost_generator(theta)
    assert np.allclose(B @ B @ B, float(theta @ theta) * B, atol=1e-12)


def test_boost_axis_aligned_has_cosh_sinh_block():
    theta = np.zeros(2)
    theta[0] = 1.0
    U = bt.boost(theta, 0.7)
    assert U[0, 0] == pytest.approx(np.cosh(0.7))
    assert U[0, -1] == pytest.approx(np.sinh(0.7))
    assert U[-1, 0] == pytest.approx(np.sinh(0.7))
    assert U[-1, -1] == pytest.approx(np.cosh(0.7))
    assert U[1, 1] == 1.0


@pytest.mark.parametrize("t", [0.0, 0.05, 0.3, 1.7, -2.4])
def test_boost_closed_form_matches_pade(t):
    rng = np.random.default_rng(42)
    theta = rng.standard_normal(4)
    U = bt.boost(theta, t)
    V = expm_pade6(t * bt.boost_generator(theta))
    assert np.abs(U - V).max() < 1e-12
    assert bt.is_lorentz(U)


def test_expm_pade_matches_series_small_matrix():
    A = np.array([[0.0, 0.2], [-0.1, 0.05]])
    term = np.eye(2)
    total = np.eye(2)
    for p in range(1, 25):
        term = term @ A / p
        total = total + term
    assert np.abs(expm_pade6(A) - total).max() < 1e-14


def test_gram_of_equal_volume_triple():
    cl = bt.equal_volume_bubble(2, 3)
    G = bt.gram(cl.ck)
    expected = np.full((3, 3), -1 / 6)
    np.fill_diagonal(expected, 1 / 3)
    assert np.abs(G - expected).max() < 1e-14


def test_gram_rows_sum_to_zero():
    cl = bt.bubble_from_curvatures(3, 5, np.array([0.2, 0.1, 0.0, -0.1, -0.2]))
    G = bt.gram(cl.ck)
    assert np.abs(G.sum(axis=0)).max() < 1e-12
    assert np.abs(G - G.T).max() == 0.0


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), t=st.floats(-1.5, 1.5))
def test_gram_lorentz_invariance(seed, t):
    rng = np.random.default_rng(seed)
    ck = rng.standard_normal((4, 5))
    ck -= ck.mean(axis=0)
    U = random_orthochronous(3, rng, scale=abs(t) + 0.01)
    assert np.abs(bt.gram(ck @ U.T) - bt.gram(ck)).max() < 1e-9


def test_gram_requires_zero_sum():
    ck = np.ones((3, 4))
    with pytest.raises(bt.ConventionError):
        bt.gram(ck)


def test_align_recovers_transform():
    rng = np.random.default_rng(7)
    cl = bt.bubble_from_curvatures(3, 4, np.array([0.25, 0.05, -0.1, -0.2]))
    U = random_orthochronous(3, rng)
    ck1 = cl.ck
    ck2 = ck1 @ U.T
    W = bt.align(ck1, ck2)
    assert bt.is_lorentz(W)
    assert np.abs(ck1 @ W.T - ck2).max() < 1e-8
    assert W[-1, -1] >= 1.0 - 1e-12


def test_align_is_orthochronous_even_for_reflected_targets():
    # conjugating by a spatial reflection keeps the gram, so align must
    # still return an element of the identity-connected component
    cl = bt.equal_volume_bubble(2, 3)
    R = np.eye(4)
    R[2, 2] = -1.0
    ck2 = cl.ck @ R.T
    W = bt.align(cl.ck, ck2)
    assert bt.is_lorentz(W)
    assert np.abs(cl.ck @ W.T - ck2).max() < 1e-8


def test_align_any_two_standard_bubbles():
    # prescribed-curvature bubbles all share the gram (1/2)P, so any two of
    # the same q are Lorentz images of one another
    a = bt.equal_volume_bubble(2, 3)
    b = bt.bubble_from_curvatures(2, 3, np.array([0.4, -0.1, -0.3]))
    W = bt.align(a.ck, b.ck)
    assert bt.is_lorentz(W)
    assert np.abs(a.ck @ W.T - b.ck).max() < 1e-8


def test_align_rejects_gram_mismatch():
    a = bt.equal_volume_bubble(2, 3)
    with pytest.raises(bt.VerificationError):
        bt.align(a.ck, 2.0 * a.ck)
