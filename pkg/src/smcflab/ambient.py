"""Complex projective plane in one affine chart.

Points are real 4-vectors ``(Re z1, Im z1, Re z2, Im z2)``.  The metric is the
Fubini-Study metric rescaled so that its holomorphic sectional curvature is
``k``; at the origin it equals ``(4/k) * I``.

Every function broadcasts over leading axes of ``p``.

Curvature convention
--------------------
``R[a, b, c, d] = <R(e_c, e_d) e_b, e_a>`` with
``R(X, Y) = [nabla_X, nabla_Y] - nabla_[X, Y]``, so the sectional curvature of
an orthonormal pair is ``R[0, 1, 0, 1]``.  The closed-form tensor of a
complex space form, written with the argument order ``(k, j, i, h)``,

    K_kjih = -(k/4) [ (g_kh g_ji - g_jh g_ki) + (J_kh J_ji - J_jh J_ki)
                      - 2 J_kj J_ih ],        J_ab = <J e_a, e_b>,

is then literally the same array as ``R``.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidFrameError, InvalidInputError

__all__ = [
    "COMPLEX_STRUCTURE",
    "check_point",
    "christoffel_action",
    "fs_metric",
    "metric_derivatives",
    "christoffels",
    "christoffel_derivatives",
    "riemann_chart",
    "ricci_chart",
    "complex_structure",
    "kahler_form",
    "model_curvature",
    "model_curvature_coords",
    "frame_components",
    "sectional_curvature",
    "covariant_derivative_metric",
    "covariant_derivative_j",
]

# multiplication by i on (Re z, Im z) pairs: d/dx -> d/dy, d/dy -> -d/dx
COMPLEX_STRUCTURE = np.array(
    [
        [0.0, -1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, -1.0],
        [0.0, 0.0, 1.0, 0.0],
    ]
)

# dz_m / dx_a
_DZ = np.array([[1.0, 1.0j, 0.0, 0.0], [0.0, 0.0, 1.0, 1.0j]])

FD_STEP = 1e-5


def _check_k(k):
    if not np.isfinite(k) or k <= 0:
        raise InvalidInputError(f"holomorphic sectional curvature must be > 0, got {k!r}")


def check_point(p) -> np.ndarray:
    """Return ``p`` as a float array of shape ``(..., 4)``; reject non-finite input."""
    p = np.asarray(p, dtype=float)
    if p.shape[-1:] != (4,):
        raise InvalidInputError(f"chart points have 4 real coordinates, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise InvalidInputError("chart point has non-finite coordinates")
    return p


def _realify(h):
    """Hermitian form h[..., i, j] (complex 2x2) -> real symmetric 4x4 bilinear form.

    ``Re(U^T h conj(V))`` with ``U_i = u[2i] + i u[2i+1]``.
    """
    re, im = h.real, h.imag
    out = np.empty(h.shape[:-2] + (4, 4))
    out[..., 0::2, 0::2] = re
    out[..., 0::2, 1::2] = im
    out[..., 1::2, 0::2] = -im
    out[..., 1::2, 1::2] = re
    return out


def _complex_coords(p):
    return p[..., 0::2] + 1j * p[..., 1::2]


def _hermitian_parts(p, order):
    """Kahler metric h = delta/s - conj(z) z^T / s^2 and its real-coordinate derivatives."""
    z = _complex_coords(p)
    zb = np.conj(z)
    s = 1.0 + np.sum(p * p, axis=-1)
    s = s[..., None, None]
    eye = np.eye(2)
    P = zb[..., :, None] * z[..., None, :]
    u = 1.0 / s
    v = u * u
    h = eye * u - P * v
    if order == 0:
        return (h,)

    x = p[..., :, None, None]  # (..., a, 1, 1)
    s_ = s[..., None, :, :]
    du = -2.0 * x / s_**2
    dv = -4.0 * x / s_**3
    # dP[..., a, i, j] = conj(D[i,a]) z_j + conj(z_i) D[j,a]
    D = _DZ
    dP = np.conj(D).T[:, :, None] * z[..., None, None, :] + zb[..., None, :, None] * D.T[:, None, :]
    dh = eye * du - dP * v[..., None, :, :] - P[..., None, :, :] * dv
    if order == 1:
        return h, dh

    xa = p[..., :, None, None, None]
    xb = p[..., None, :, None, None]
    s2 = s[..., None, None, :, :]
    delta = np.eye(4)[:, :, None, None]
    ddu = -2.0 * delta / s2**2 + 8.0 * xa * xb / s2**3
    ddv = -4.0 * delta / s2**3 + 24.0 * xa * xb / s2**4
    Dc = np.conj(D)
    # ddP[a, b, i, j] = conj(D[i,a]) D[j,b] + conj(D[i,b]) D[j,a]  (constant)
    ddP = np.einsum("ia,jb->abij", Dc, D) + np.einsum("ib,ja->abij", Dc, D)
    dva = dv[..., :, None, :, :]
    dvb = dv[..., None, :, :, :]
    dPa = dP[..., :, None, :, :]
    dPb = dP[..., None, :, :, :]
    ddh = (
        eye * ddu
        - ddP * v[..., None, None, :, :]
        - dPa * dvb
        - dPb * dva
        - P[..., None, None, :, :] * ddv
    )
    return h, dh, ddh


def fs_metric(p, k):
    """Real 4x4 Fubini-Study metric at ``p`` with holomorphic sectional curvature ``k``."""
    _check_k(k)
    p = check_point(p)
    (h,) = _hermitian_parts(p, 0)
    return (4.0 / k) * _realify(h)


def metric_derivatives(p, k, order=1):
    """Analytic derivatives of the metric.

    Returns ``(g, dg)`` or ``(g, dg, ddg)`` with ``dg[..., c, a, b] = d_c g_ab``
    and ``ddg[..., c, d, a, b] = d_c d_d g_ab``.
    """
    _check_k(k)
    p = check_point(p)
    parts = _hermitian_parts(p, order)
    scale = 4.0 / k
    return tuple(scale * _realify(part) for part in parts)


def _fd_metric_derivative(p, k, step):
    cols = []
    for a in range(4):
        e = np.zeros(4)
        e[a] = step
        cols.append((fs_metric(p + e, k) - fs_metric(p - e, k)) / (2.0 * step))
    return np.stack(cols, axis=-3)


def _christoffel_from(g, dg):
    ginv = np.linalg.inv(g)
    # lowered[d, b, c] = 1/2 (d_b g_dc + d_c g_bd - d_d g_bc)
    low = 0.5 * (
        np.swapaxes(dg, -3, -2)
        + np.moveaxis(dg, -3, -1)
        - dg
    )
    return np.einsum("...ad,...dbc->...abc", ginv, low), ginv, low


def christoffels(p, k, mode="analytic", step=FD_STEP):
    """Levi-Civita symbols ``G[..., a, b, c] = Gamma^a_bc`` (symmetric in b, c)."""
    p = check_point(p)
    if mode == "analytic":
        g, dg = metric_derivatives(p, k, order=1)
    elif mode == "fd":
        g = fs_metric(p, k)
        dg = _fd_metric_derivative(p, k, step)
    else:
        raise InvalidInputError(f"unknown derivative mode {mode!r}")
    gamma, _, _ = _christoffel_from(g, dg)
    return gamma


def christoffel_action(p, X, Y):
    """``Gamma(X, Y)^a = Gamma^a_bc X^b Y^c`` from the closed form in complex coordinates.

    For the Fubini-Study connection ``Gamma^k_ij = -(delta^k_i zbar_j + delta^k_j zbar_i) / (1 + |z|^2)``
    (independent of the scale k); mixed-type symbols vanish because the metric is Kahler.
    """
    p = check_point(p)
    z = _complex_coords(p)
    Xc = _complex_coords(np.asarray(X, dtype=float))
    Yc = _complex_coords(np.asarray(Y, dtype=float))
    zb = np.conj(z)
    s = 1.0 + np.sum(p * p, axis=-1)
    out_c = -(Xc * np.sum(zb * Yc, axis=-1)[..., None] + Yc * np.sum(zb * Xc, axis=-1)[..., None]) / s[..., None]
    out = np.empty(out_c.shape[:-1] + (4,))
    out[..., 0::2] = out_c.real
    out[..., 1::2] = out_c.imag
    return out


def christoffel_derivatives(p, k, mode="analytic", step=FD_STEP):
    """Return ``(g, Gamma, dGamma)`` with ``dGamma[..., e, a, b, c] = d_e Gamma^a_bc``."""
    p = check_point(p)
    if mode == "analytic":
        g, dg, ddg = metric_derivatives(p, k, order=2)
        gamma, ginv, low = _christoffel_from(g, dg)
        # d_e of the lowered symbols
        dlow = 0.5 * (
            np.swapaxes(ddg, -3, -2)
            + np.moveaxis(ddg, -3, -1)
            - ddg
        )
        dginv = -np.einsum("...ad,...edf,...fb->...eab", ginv, dg, ginv, optimize=True)
        dgamma = np.einsum("...ead,...dbc->...eabc", dginv, low) + np.einsum(
            "...ad,...edbc->...eabc", ginv, dlow
        )
        return g, gamma, dgamma
    if mode == "fd":
        g = fs_metric(p, k)
        gamma = christoffels(p, k, mode="fd", step=step)
        cols = []
        for e_ in range(4):
            e = np.zeros(4)
            e[e_] = step
            cols.append(
                (christoffels(p + e, k, "fd", step) - christoffels(p - e, k, "fd", step))
                / (2.0 * step)
            )
        return g, gamma, np.stack(cols, axis=-4)
    raise InvalidInputError(f"unknown derivative mode {mode!r}")


def riemann_chart(p, k, mode="analytic", step=FD_STEP):
    """Lowered Riemann tensor ``R[..., a, b, c, d]`` of the chart metric."""
    g, G, dG = christoffel_derivatives(p, k, mode=mode, step=step)
    # R^a_bcd = d_c G^a_db - d_d G^a_cb + G^a_ce G^e_db - G^a_de G^e_cb
    rup = (
        np.einsum("...cadb->...abcd", dG)
        - np.einsum("...dacb->...abcd", dG)
        + np.einsum("...ace,...edb->...abcd", G, G)
        - np.einsum("...ade,...ecb->...abcd", G, G)
    )
    return np.einsum("...ae,...ebcd->...abcd", g, rup)


def ricci_chart(p, k, mode="analytic"):
    """Ricci tensor ``Ric_bd = g^ac R_abcd``."""
    p = check_point(p)
    R = riemann_chart(p, k, mode=mode)
    ginv = np.linalg.inv(fs_metric(p, k))
    return np.einsum("...ac,...abcd->...bd", ginv, R)


def complex_structure(p=None):
    """Complex structure in chart coordinates (constant in a holomorphic chart)."""
    if p is None:
        return COMPLEX_STRUCTURE.copy()
    p = check_point(p)
    return np.broadcast_to(COMPLEX_STRUCTURE, p.shape[:-1] + (4, 4)).copy()


def kahler_form(p, U, V, k):
    """``omega(U, V) = g(JU, V)``."""
    g = fs_metric(p, k)
    JU = np.einsum("ab,...b->...a", COMPLEX_STRUCTURE, np.asarray(U, dtype=float))
    return np.einsum("...a,...ab,...b->...", JU, g, np.asarray(V, dtype=float))


def _space_form(gm, jm, k):
    # argument order (k, j, i, h) -> array axes (a, b, c, d)
    t1 = np.einsum("...ad,...bc->...abcd", gm, gm) - np.einsum("...bd,...ac->...abcd", gm, gm)
    t2 = np.einsum("...ad,...bc->...abcd", jm, jm) - np.einsum("...bd,...ac->...abcd", jm, jm)
    t3 = -2.0 * np.einsum("...ab,...cd->...abcd", jm, jm)
    return -(k / 4.0) * (t1 + t2 + t3)


def model_curvature(jmat, k, indices=None, gram=None, atol=1e-8):
    """Closed-form curvature of the complex space form on an orthonormal frame.

    ``jmat[a, b] = <J e_a, e_b>``.  ``gram`` (the frame's Gram matrix) is only
    used to reject non-orthonormal frames.  With ``indices=(a, b, c, d)``
    (0-based) a single component is returned, otherwise the full tensor.
    """
    _check_k(k)
    jmat = np.asarray(jmat, dtype=float)
    eye = np.broadcast_to(np.eye(4), jmat.shape)
    if gram is not None:
        gram = np.asarray(gram, dtype=float)
        if not np.allclose(gram, eye, atol=atol, rtol=0):
            raise InvalidFrameError("frame is not orthonormal in the ambient metric")
    R = _space_form(eye, jmat, k)
    if indices is not None:
        return R[(...,) + tuple(indices)]
    return R


def model_curvature_coords(p, k):
    """The same closed form written in the coordinate basis (non-orthonormal)."""
    g = fs_metric(p, k)
    jl = np.einsum("...ca,...cb->...ab", complex_structure(check_point(p)), g)
    return _space_form(g, jl, k)


def frame_components(p, frame, k):
    """Gram matrix and ``J_ab = <J e_a, e_b>`` for frame vectors stored as columns."""
    g = fs_metric(p, k)
    E = np.asarray(frame, dtype=float)
    gram = np.einsum("...ia,...ij,...jb->...ab", E, g, E, optimize=True)
    JE = np.einsum("ij,...jb->...ib", COMPLEX_STRUCTURE, E)
    jmat = np.einsum("...ia,...ij,...jb->...ab", JE, g, E, optimize=True)
    return gram, jmat


def sectional_curvature(R, X, Y, g):
    """Sectional curvature of span(X, Y) from a lowered Riemann tensor."""
    num = np.einsum("...abcd,...a,...b,...c,...d->...", R, X, Y, X, Y)
    gxx = np.einsum("...a,...ab,...b->...", X, g, X)
    gyy = np.einsum("...a,...ab,...b->...", Y, g, Y)
    gxy = np.einsum("...a,...ab,...b->...", X, g, Y)
    return num / (gxx * gyy - gxy**2)


def covariant_derivative_metric(p, k, mode="analytic"):
    """``(nabla_c g)_ab``; vanishes for the Levi-Civita connection."""
    g, dg = metric_derivatives(p, k) if mode == "analytic" else (
        fs_metric(p, k), _fd_metric_derivative(check_point(p), k, FD_STEP))
    G = christoffels(p, k, mode=mode)
    return dg - np.einsum("...dca,...db->...cab", G, g) - np.einsum("...dcb,...ad->...cab", G, g)


def covariant_derivative_j(p, k):
    """``(nabla_c J)^a_b``; zero because the metric is Kahler."""
    G = christoffels(p, k)
    J = COMPLEX_STRUCTURE
    return np.einsum("...acd,db->...cab", G, J) - np.einsum("ad,...dcb->...cab", J, G)
