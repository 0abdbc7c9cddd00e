import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis.extra.numpy import arrays
from hypothesis import strategies as st

from smcflab.errors import InvalidInputError, WrongBranchError
from smcflab.sff import (
    cdk_bound,
    check_sff,
    codazzi_defect,
    grad_decomposition,
    nabla_j_sq,
    normalize_frame,
    random_grad_sff,
    random_sff,
    reaction_bound,
    reaction_terms,
    rotate_sff,
    sff_invariants,
)

comp = arrays(float, 6, elements=st.floats(-3, 3, allow_nan=False))


def _h(c):
    h = np.empty((2, 2, 2))
    for a in range(2):
        h[a] = [[c[3 * a], c[3 * a + 1]], [c[3 * a + 1], c[3 * a + 2]]]
    return h


def _rot(t):
    return np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])


def test_check_sff_rejects_asymmetric():
    h = np.zeros((2, 2, 2))
    h[0, 0, 1] = 1.0
    with pytest.raises(InvalidInputError):
        check_sff(h)


@given(comp)
@settings(max_examples=100, deadline=None)
def test_nabla_j_bounds_mean_curvature(c):
    h = _h(c)
    assert nabla_j_sq(h) >= 0.5 * sff_invariants(h).normH2 - 1e-10


def test_nabla_j_equality_case():
    h = np.zeros((2, 2, 2))
    h[0] = 1.7 * np.eye(2)
    assert nabla_j_sq(h) == pytest.approx(0.5 * sff_invariants(h).normH2, abs=1e-12)


@given(comp, st.floats(0, 6.3), st.floats(0, 6.3))
@settings(max_examples=60, deadline=None)
def test_invariants_under_oriented_rotations(c, s, t):
    h = _h(c)
    h2 = rotate_sff(h, _rot(s), _rot(t))
    a, b = sff_invariants(h), sff_invariants(h2)
    assert a.normA2 == pytest.approx(b.normA2, abs=1e-9)
    assert a.normH2 == pytest.approx(b.normH2, abs=1e-9)
    assert np.allclose(reaction_terms(h), reaction_terms(h2), atol=1e-8)


def test_normalize_frame_aligns_mean_curvature(rng):
    h = random_sff(rng, 100)
    n = normalize_frame(h)
    H = n.h[:, 0, 0, 0] + n.h[:, 0, 1, 1], n.h[:, 1, 0, 0] + n.h[:, 1, 1, 1]
    assert np.allclose(H[1], 0, atol=1e-12) and np.all(H[0] > 0)
    assert np.allclose(n.h[:, 0, 0, 1], 0, atol=1e-12)
    assert np.all(n.h[:, 0, 0, 0] >= n.h[:, 0, 1, 1])


def test_reaction_bound_equality_and_branch():
    h = np.zeros((2, 2, 2))
    h[0] = np.diag([2.0, 0.0])
    h[1] = [[0.0, 1.0], [1.0, 0.0]]
    b = reaction_bound(h)
    assert abs(b.margin) < 1e-10
    with pytest.raises(WrongBranchError):
        reaction_bound(random_sff(np.random.default_rng(0), trace_free=True))


def test_cdk_equality_on_clifford_type_tensor():
    h = np.zeros((2, 2, 2))
    h[0] = np.diag([1.0, -1.0])
    h[1] = [[0.0, 1.0], [1.0, 0.0]]
    b = cdk_bound(h)
    assert b.lhs == pytest.approx(48.0) and abs(b.margin) < 1e-10


def test_random_grad_has_requested_codazzi_vector(rng):
    w = rng.normal(size=(30, 2, 2))
    g = random_grad_sff(rng, 30, w=w)
    assert np.allclose(codazzi_defect(g.dh), w, atol=1e-12)
    assert np.allclose(g.dh, np.swapaxes(g.dh, -1, -2))


def test_grad_decomposition_orthogonal_split(rng):
    g = random_grad_sff(rng, 200)
    d = grad_decomposition(g, 0.3)
    assert np.abs(d.inner).max() < 1e-10
    assert np.allclose(d.normE2 + d.normF2, d.normDA2)
    assert np.all(d.normDA2 >= d.bound_rhs - 1e-10)
    with pytest.raises(InvalidInputError):
        grad_decomposition(g, 0.0)
