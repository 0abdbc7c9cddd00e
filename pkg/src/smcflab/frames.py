"""Adapted frames, the Kahler angle and frame-level curvature scalars."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .ambient import COMPLEX_STRUCTURE, model_curvature
from .errors import DegenerateFrameError, InvalidInputError

__all__ = [
    "AdaptedFrame",
    "FrameScalars",
    "orthonormal_frame",
    "adapt_frame",
    "j_matrix",
    "frame_curvature_scalars",
    "w_norm_sq",
    "w_components",
]

_RANK_TOL = 1e-10


@dataclass(frozen=True)
class AdaptedFrame:
    """Orthonormal frame ``e[:, 0..3]`` (chart components as columns).

    ``e1, e2`` span the tangent plane, ``e3, e4`` the normal plane, and
    ``J e1 = x e2 + y e3 + z e4`` with ``x = cos(alpha)``.
    """

    e: np.ndarray
    x: float
    y: float
    z: float
    jmat: np.ndarray

    @property
    def e1(self):
        return self.e[:, 0]

    @property
    def e2(self):
        return self.e[:, 1]

    @property
    def e3(self):
        return self.e[:, 2]

    @property
    def e4(self):
        return self.e[:, 3]


def orthonormal_frame(tangent, metric, normal=None):
    """Gram-Schmidt in the ambient metric, batched over leading axes.

    ``tangent`` has shape ``(..., 4, 2)`` (two column vectors); ``normal``,
    if given, ``(..., 4, 2)``.  Returns ``(E, C)`` where ``E[..., :, a]`` is
    the orthonormal frame and ``C`` (``(..., 2, 2)``) expresses the tangent
    part: ``E[..., :, :2] = tangent @ C``.

    The frame is positively oriented for the complex orientation
    ``dx1 dy1 dx2 dy2``.  e1 is along the first tangent vector.
    """
    tangent = np.asarray(tangent, dtype=float)
    metric = np.asarray(metric, dtype=float)
    L = np.linalg.cholesky(metric)
    LT = np.swapaxes(L, -1, -2)
    if normal is None:
        M = LT @ tangent
        Q, R = np.linalg.qr(M, mode="complete")
        Rt = R[..., :2, :2]
    else:
        M = LT @ np.concatenate([tangent, np.asarray(normal, dtype=float)], axis=-1)
        Q, R = np.linalg.qr(M)
        Rt = R[..., :2, :2]
        rdiag = np.abs(np.diagonal(R, axis1=-2, axis2=-1))
        scale = np.max(np.linalg.norm(M, axis=-2), axis=-1, keepdims=True)
        if np.any(rdiag < _RANK_TOL * scale):
            raise DegenerateFrameError("tangent/normal basis is rank deficient")
    diag = np.diagonal(Rt, axis1=-2, axis2=-1)
    scale_t = np.max(np.linalg.norm(M[..., :2], axis=-2), axis=-1)
    if np.any(np.abs(diag).min(axis=-1) <= _RANK_TOL * scale_t):
        raise DegenerateFrameError("tangent basis is rank deficient")
    # make the tangent part of R have a positive diagonal
    sign = np.sign(diag)
    Q = Q.copy()
    Q[..., :, :2] *= sign[..., None, :]
    Rt = Rt * sign[..., :, None]
    E = np.linalg.solve(LT, Q)
    if normal is not None:
        ndiag = np.sign(np.diagonal(R, axis1=-2, axis2=-1)[..., 2])
        E[..., :, 2] *= ndiag[..., None]
    det = np.linalg.det(E)
    E[..., :, 3] *= np.where(det < 0, -1.0, 1.0)[..., None]
    C = np.linalg.inv(Rt)
    return E, C


def _jmat(E, metric):
    JE = np.einsum("ij,...jb->...ib", COMPLEX_STRUCTURE, E)
    return np.einsum("...ia,...ij,...jb->...ab", JE, metric, E, optimize=True)


def adapt_frame(tangent_basis, normal_basis=None, *, metric):
    """Build an :class:`AdaptedFrame` at one point.

    ``tangent_basis`` / ``normal_basis`` are sequences of two chart vectors.
    Without a normal basis the normal plane is the metric complement of the
    tangent plane.
    """
    T = np.column_stack([np.asarray(v, dtype=float) for v in tangent_basis])
    N = None
    if normal_basis is not None:
        N = np.column_stack([np.asarray(v, dtype=float) for v in normal_basis])
    if T.shape != (4, 2) or (N is not None and N.shape != (4, 2)):
        raise InvalidInputError("expected two tangent and two normal 4-vectors")
    E, _ = orthonormal_frame(T, metric, N)
    jm = _jmat(E, metric)
    return AdaptedFrame(e=E, x=float(jm[0, 1]), y=float(jm[0, 2]), z=float(jm[0, 3]), jmat=jm)


def j_matrix(x, y, z, positive=True):
    """Complex structure in an adapted frame, ``J[a, b] = <J e_a, e_b>``.

    ``positive=True`` gives the form realised by positively oriented frames
    (where ``<J e3, e4> = x``); ``positive=False`` the reflected form.
    Exact for :class:`fractions.Fraction` input (object array).
    """
    exact = all(isinstance(v, (Fraction, int)) for v in (x, y, z))
    norm = x * x + y * y + z * z
    if exact:
        if norm != 1:
            raise InvalidInputError(f"x^2 + y^2 + z^2 = {norm}, expected 1")
    elif abs(norm - 1.0) > 1e-8:
        raise InvalidInputError(f"x^2 + y^2 + z^2 = {norm!r}, expected 1")
    s = 1 if positive else -1
    rows = [
        [0, x, y, z],
        [-x, 0, s * z, -s * y],
        [-y, -s * z, 0, s * x],
        [-z, s * y, -s * x, 0],
    ]
    if exact:
        return np.array([[Fraction(v) for v in r] for r in rows], dtype=object)
    return np.array(rows, dtype=float)


class FrameScalars(NamedTuple):
    K1212: float
    K3434: float
    K1234: float


def frame_curvature_scalars(x, k):
    """Curvature components on an adapted frame as functions of ``x = cos(alpha)``."""
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1 + 1e-12):
        raise InvalidInputError("|cos alpha| must not exceed 1")
    k1212 = 0.25 * k * (3 * x**2 + 1)
    return FrameScalars(k1212, k1212, 0.25 * k * (3 * x**2 - 1))


def w_norm_sq(x, k):
    """``|w|^2 = (9 k^2 / 8) x^2 (1 - x^2)``."""
    x = np.asarray(x, dtype=float)
    return 9.0 * k**2 / 8.0 * x**2 * (1.0 - x**2)


def w_components(jmat, k):
    """``w[alpha, i] = sum_l K_{alpha l i l}`` by direct contraction (alpha = e3, e4)."""
    R = model_curvature(jmat, k)
    w = np.zeros(np.shape(jmat)[:-2] + (2, 2))
    for a in range(2):
        for i in range(2):
            w[..., a, i] = sum(R[..., 2 + a, l, i, l] for l in range(2))
    return w
