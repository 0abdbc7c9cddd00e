import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from smcflab.ambient import (
    COMPLEX_STRUCTURE,
    christoffel_action,
    christoffels,
    covariant_derivative_j,
    covariant_derivative_metric,
    fs_metric,
    kahler_form,
    model_curvature_coords,
    ricci_chart,
    riemann_chart,
    sectional_curvature,
)
from smcflab.errors import InvalidInputError

coords = st.floats(-1.5, 1.5, allow_nan=False)
points = arrays(float, 4, elements=coords)
ks = st.floats(0.25, 4.0)


def test_metric_at_origin_is_scaled_identity():
    assert np.allclose(fs_metric(np.zeros(4), 2.0), 2.0 * np.eye(4))


@given(points, ks)
@settings(max_examples=50, deadline=None)
def test_metric_is_hermitian_and_positive(p, k):
    g = fs_metric(p, k)
    J = COMPLEX_STRUCTURE
    assert np.allclose(g, g.T, atol=1e-12)
    assert np.allclose(J.T @ g @ J, g, atol=1e-12)
    assert np.linalg.eigvalsh(g).min() > 0


def test_bad_inputs_rejected():
    with pytest.raises(InvalidInputError):
        fs_metric(np.zeros(4), 0.0)
    with pytest.raises(InvalidInputError):
        fs_metric(np.zeros(3), 1.0)
    with pytest.raises(InvalidInputError):
        fs_metric(np.array([np.nan, 0, 0, 0]), 1.0)


def test_analytic_and_fd_christoffels_agree(rng):
    p = rng.normal(scale=0.6, size=(20, 4))
    a = christoffels(p, 1.3)
    f = christoffels(p, 1.3, mode="fd")
    assert np.abs(a - f).max() < 1e-8


@given(points, arrays(float, 4, elements=coords), arrays(float, 4, elements=coords))
@settings(max_examples=60, deadline=None)
def test_christoffel_action_matches_symbols(p, X, Y):
    G = christoffels(p, 0.7)
    ref = np.einsum("abc,b,c->a", G, X, Y)
    assert np.allclose(christoffel_action(p, X, Y), ref, atol=1e-12, rtol=1e-12)


def test_connection_is_metric_and_kahler(rng):
    p = rng.normal(scale=0.8, size=(10, 4))
    assert np.abs(covariant_derivative_metric(p, 1.0)).max() < 1e-12
    assert np.abs(covariant_derivative_j(p, 1.0)).max() < 1e-12


def test_riemann_symmetries(rng):
    p = rng.normal(scale=0.7, size=(8, 4))
    R = riemann_chart(p, 1.0)
    assert np.allclose(R, -np.swapaxes(R, -4, -3), atol=1e-10)
    assert np.allclose(R, -np.swapaxes(R, -2, -1), atol=1e-10)
    assert np.allclose(R, np.einsum("...abcd->...cdab", R), atol=1e-10)
    bianchi = R + np.einsum("...abcd->...acdb", R) + np.einsum("...abcd->...adbc", R)
    assert np.abs(bianchi).max() < 1e-10


def test_riemann_matches_closed_form_in_coordinates(rng):
    p = rng.normal(scale=0.7, size=(8, 4))
    assert np.abs(riemann_chart(p, 2.0) - model_curvature_coords(p, 2.0)).max() < 1e-9
    assert np.abs(riemann_chart(p, 2.0, mode="fd") - model_curvature_coords(p, 2.0)).max() < 1e-5


def test_sectional_curvature_range(rng):
    k = 1.7
    p = rng.normal(scale=0.6, size=(200, 4))
    R = riemann_chart(p, k)
    g = fs_metric(p, k)
    X, Y = rng.normal(size=(2, 200, 4))
    K = sectional_curvature(R, X, Y, g)
    assert K.min() >= k / 4 - 1e-9 and K.max() <= k + 1e-9
    # J-invariant planes are extremal
    JX = X @ COMPLEX_STRUCTURE.T
    assert np.allclose(sectional_curvature(R, X, JX, g), k, atol=1e-9)


def test_einstein(rng):
    p = rng.normal(scale=0.7, size=(10, 4))
    assert np.abs(ricci_chart(p, 0.5) - 0.75 * fs_metric(p, 0.5)).max() < 1e-9


def test_kahler_form_antisymmetric(rng):
    p = rng.normal(size=4)
    U, V = rng.normal(size=(2, 4))
    assert np.isclose(kahler_form(p, U, V, 1.0), -kahler_form(p, V, U, 1.0))
    assert np.isclose(kahler_form(p, U, U, 1.0), 0.0, atol=1e-14)
