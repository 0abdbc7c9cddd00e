"""Pointwise algebra of the second fundamental form of a surface in a 4-manifold.

A second fundamental form is an array ``h[..., alpha, i, j]`` with
``alpha`` indexing the normal vectors (e3, e4) and ``i, j`` the tangent
vectors (e1, e2) of an orthonormal adapted frame.  All functions broadcast
over leading axes so that whole grids or random batches are processed at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .ambient import model_curvature
from .errors import InvalidInputError, WrongBranchError
from .frames import frame_curvature_scalars

__all__ = [
    "SffInvariants",
    "ReactionTerms",
    "Bound",
    "NormalizedSff",
    "CurvatureTerms",
    "GradSff",
    "GradDecomposition",
    "check_sff",
    "mean_curvature",
    "nabla_j_sq",
    "sff_invariants",
    "reaction_terms",
    "rotate_sff",
    "normalize_frame",
    "reaction_bound",
    "cdk_bound",
    "curvature_reaction_terms",
    "curvature_reaction_contracted",
    "grad_decomposition",
    "codazzi_defect",
    "random_sff",
    "random_grad_sff",
    "cos_alpha_gradient",
]

H_ZERO_TOL = 1e-12


def check_sff(h, atol=1e-10):
    h = np.asarray(h, dtype=float)
    if h.shape[-3:] != (2, 2, 2):
        raise InvalidInputError(f"second fundamental form must have trailing shape (2, 2, 2), got {h.shape}")
    if not np.allclose(h, np.swapaxes(h, -1, -2), atol=atol, rtol=0):
        raise InvalidInputError("second fundamental form must be symmetric in its tangent indices")
    return h


def mean_curvature(h):
    """Components ``H^alpha = h^alpha_11 + h^alpha_22``."""
    return np.trace(h, axis1=-2, axis2=-1)


def nabla_j_sq(h):
    """``|h3_1k - h4_2k|^2 + |h3_2k + h4_1k|^2`` (positively oriented frame)."""
    h3, h4 = h[..., 0, :, :], h[..., 1, :, :]
    a = h3[..., 0, :] - h4[..., 1, :]
    b = h3[..., 1, :] + h4[..., 0, :]
    return np.sum(a * a + b * b, axis=-1)


@dataclass(frozen=True)
class SffInvariants:
    H: np.ndarray
    normA2: np.ndarray
    normH2: np.ndarray
    traceless: np.ndarray
    traceless_norm2: np.ndarray  # (..., 2): |h3 traceless|^2, |h4 traceless|^2
    nablaJ2: np.ndarray


def sff_invariants(h) -> SffInvariants:
    h = check_sff(h)
    H = mean_curvature(h)
    traceless = h - 0.5 * H[..., :, None, None] * np.eye(2)
    return SffInvariants(
        H=H,
        normA2=np.sum(h * h, axis=(-3, -2, -1)),
        normH2=np.sum(H * H, axis=-1),
        traceless=traceless,
        traceless_norm2=np.sum(traceless * traceless, axis=(-2, -1)),
        nablaJ2=nabla_j_sq(h),
    )


class ReactionTerms(NamedTuple):
    R1: np.ndarray
    R2: np.ndarray
    R3: np.ndarray


def reaction_terms(h) -> ReactionTerms:
    """Quartic reaction terms.

    ``R1 = sum_{a,b} |h^a h^b - h^b h^a|^2``, ``R2 = sum_{a,b} <h^a, h^b>^2``,
    ``R3 = sum_{ij} (sum_a H^a h^a_ij)^2``.
    """
    h = check_sff(h)
    prod = np.einsum("...aik,...bkj->...abij", h, h)
    comm = prod - np.swapaxes(prod, -4, -3)
    R1 = np.sum(comm * comm, axis=(-4, -3, -2, -1))
    inner = np.einsum("...aij,...bij->...ab", h, h)
    R2 = np.sum(inner * inner, axis=(-2, -1))
    Hh = np.einsum("...a,...aij->...ij", mean_curvature(h), h)
    R3 = np.sum(Hh * Hh, axis=(-2, -1))
    return ReactionTerms(R1, R2, R3)


def rotate_sff(h, tangent_rotation, normal_rotation):
    """``h'^a_ij = N_ab O_ik O_jl h^b_kl``."""
    return np.einsum("...ab,...ik,...jl,...bkl->...aij", normal_rotation, tangent_rotation, tangent_rotation, h)


class NormalizedSff(NamedTuple):
    h: np.ndarray
    tangent_rotation: np.ndarray
    normal_rotation: np.ndarray
    h_zero: np.ndarray  # True where |H| = 0 and only the tangent frame was rotated


def normalize_frame(h, tol=H_ZERO_TOL) -> NormalizedSff:
    """Rotate frames so that ``e3 = H/|H|`` and ``h^3`` is diagonal with ``l1 >= l2``.

    Both rotations are in SO(2).  Where ``|H| <= tol`` the normal frame is left
    alone and only ``h^3`` is diagonalised.
    """
    h = check_sff(h)
    H = mean_curvature(h)
    normH = np.sqrt(np.sum(H * H, axis=-1))
    h_zero = normH <= tol
    safe = np.where(h_zero, 1.0, normH)
    c = np.where(h_zero, 1.0, H[..., 0] / safe)
    s = np.where(h_zero, 0.0, H[..., 1] / safe)
    N = np.stack([np.stack([c, s], -1), np.stack([-s, c], -1)], -2)
    hn = np.einsum("...ab,...bij->...aij", N, h)

    h3 = hn[..., 0, :, :]
    lam, vec = np.linalg.eigh(h3)
    # descending order; rows of O are eigenvectors
    O = np.swapaxes(vec[..., :, ::-1], -1, -2).copy()
    det = np.linalg.det(O)
    O[..., 1, :] *= np.where(det < 0, -1.0, 1.0)[..., None]
    flip = (O[..., 0, 0] < 0) | ((O[..., 0, 0] == 0) & (O[..., 0, 1] < 0))
    O *= np.where(flip, -1.0, 1.0)[..., None, None]
    scale = np.maximum(np.abs(lam).max(axis=-1), 1.0)
    tie = np.abs(lam[..., 1] - lam[..., 0]) <= 1e-14 * scale
    O = np.where(tie[..., None, None], np.eye(2), O)
    out = np.einsum("...ik,...jl,...akl->...aij", O, O, hn)
    return NormalizedSff(out, O, N, h_zero)


class Bound(NamedTuple):
    lhs: np.ndarray
    rhs: np.ndarray

    @property
    def margin(self):
        return self.rhs - self.lhs


def reaction_bound(h, tol=H_ZERO_TOL) -> Bound:
    """``2 R1 + 2 R2 - (4/3) R3`` against its traceless upper bound (|H| != 0 branch).

    The frame is normalised first; the bound uses the traceless norms in the
    frame where ``e3 = H/|H|``.
    """
    norm = normalize_frame(h, tol)
    if np.any(norm.h_zero):
        raise WrongBranchError("reaction_bound needs |H| > 0; use cdk_bound at |H| = 0")
    hn = norm.h
    R1, R2, R3 = reaction_terms(hn)
    inv = sff_invariants(hn)
    a3 = inv.traceless_norm2[..., 0]
    a4 = inv.traceless_norm2[..., 1]
    H2 = inv.normH2
    lhs = 2 * R1 + 2 * R2 - 4.0 / 3.0 * R3
    rhs = 2 * a3**2 + 2 * a4**2 + 2.0 / 3.0 * a3 * H2 - H2**2 / 6.0 + 8 * a3 * a4
    return Bound(lhs, rhs)


def cdk_bound(h) -> Bound:
    """``2 R1 + 2 R2 <= 3 |A|^4`` (stated at |H| = 0; evaluated for any h)."""
    h = check_sff(h)
    R1, R2, _ = reaction_terms(h)
    A2 = np.sum(h * h, axis=(-3, -2, -1))
    return Bound(2 * R1 + 2 * R2, 3 * A2**2)


class CurvatureTerms(NamedTuple):
    T1: np.ndarray
    T2: np.ndarray
    T3: np.ndarray
    T4: np.ndarray

    @property
    def total(self):
        return self.T1 + self.T2 + self.T3 + self.T4


def curvature_reaction_terms(h, x, k) -> CurvatureTerms:
    """Ambient-curvature terms of the |A|^2 evolution reduced with the frame scalars."""
    if k <= 0:
        raise InvalidInputError("k must be positive")
    inv = sff_invariants(h)
    K1212, K3434, K1234 = frame_curvature_scalars(x, k)
    A2, H2 = inv.normA2, inv.normH2
    return CurvatureTerms(
        -4 * K1212 * (A2 - H2),
        8 * K1234 * (A2 - inv.nablaJ2),
        -4 * K1212 * A2,
        3 * k * A2 - 2 * K3434 * A2,
    )


def curvature_reaction_contracted(h, jmat, k) -> CurvatureTerms:
    """The same four terms by brute-force contraction with the closed-form tensor.

    Frame indices 0, 1 are tangent, 2, 3 normal; ``h`` is embedded into a
    4-index array ``hh[alpha+2, i, j]``.
    """
    h = check_sff(h)
    R = model_curvature(jmat, k)
    t = slice(0, 2)
    n = slice(2, 4)
    Rt = R[..., t, t, t, t]
    Rn = R[..., n, n, t, t]
    T1 = -4 * np.einsum("...lijk,...alk,...aij->...", Rt, h, h)
    T2 = 8 * np.einsum("...abjk,...bik,...aij->...", Rn, h, h)
    T3 = -4 * np.einsum("...lkik,...alj,...aij->...", Rt, h, h)
    Rntn = R[..., n, t, n, t]
    T4 = 2 * np.einsum("...akbk,...bij,...aij->...", Rntn, h, h)
    return CurvatureTerms(T1, T2, T3, T4)


@dataclass(frozen=True)
class GradSff:
    """Covariant derivative of the second fundamental form.

    ``dh[..., i, alpha, j, k] = (nabla_i h)^alpha_jk`` (symmetric in j, k) and
    ``w[..., alpha, i]``, the curvature vector entering the Codazzi equation.
    """

    dh: np.ndarray
    w: np.ndarray

    @property
    def dH(self):
        """``dH[..., alpha, i] = sum_j dh[i, alpha, j, j]``."""
        return np.swapaxes(np.trace(self.dh, axis1=-2, axis2=-1), -1, -2)


def codazzi_defect(dh):
    """``w[alpha, k] = sum_i (dh[i, alpha, i, k] - dh[k, alpha, i, i])``."""
    a = np.einsum("...iaik->...ak", dh)
    b = np.einsum("...kaii->...ak", dh)
    return a - b


@dataclass(frozen=True)
class GradDecomposition:
    E: np.ndarray
    F: np.ndarray
    normE2: np.ndarray
    normF2: np.ndarray
    normDA2: np.ndarray
    inner: np.ndarray
    bound_rhs: np.ndarray


def grad_decomposition(grad: GradSff, eta, n=None) -> GradDecomposition:
    """Split ``nabla A = E + F`` with E built from ``nabla H`` and ``w``.

    ``bound_rhs`` is the lower bound
    ``(3/(n+2) - eta)|nabla H|^2 - 2/(n+2) (2/((n+2) eta) - n/(n-1)) |w|^2``
    for ``|nabla A|^2``.
    """
    eta = np.asarray(eta, dtype=float)
    if np.any(eta <= 0):
        raise InvalidInputError("eta must be positive")
    dh = np.asarray(grad.dh, dtype=float)
    dim = dh.shape[-1]
    if n is None:
        n = dim
    if n != dim or n < 2:
        raise InvalidInputError(f"n = {n} does not match tensor dimension {dim}")
    w = np.asarray(grad.w, dtype=float)
    dH = grad.dH
    g = np.eye(n)
    c1 = 1.0 / (n + 2)
    c2 = 2.0 / ((n + 2) * (n - 1))
    c3 = n / ((n + 2) * (n - 1))
    # E[i, a, j, k]
    E = (
        c1 * (
            np.einsum("...ai,jk->...iajk", dH, g)
            + np.einsum("...aj,ik->...iajk", dH, g)
            + np.einsum("...ak,ij->...iajk", dH, g)
        )
        - c2 * np.einsum("...ai,jk->...iajk", w, g)
        + c3 * (np.einsum("...aj,ik->...iajk", w, g) + np.einsum("...ak,ij->...iajk", w, g))
    )
    F = dh - E
    axes = (-4, -3, -2, -1)
    dH2 = np.sum(dH * dH, axis=(-2, -1))
    w2 = np.sum(w * w, axis=(-2, -1))
    rhs = (3.0 / (n + 2) - eta) * dH2 - 2.0 / (n + 2) * (2.0 / ((n + 2) * eta) - n / (n - 1)) * w2
    return GradDecomposition(
        E=E,
        F=F,
        normE2=np.sum(E * E, axis=axes),
        normF2=np.sum(F * F, axis=axes),
        normDA2=np.sum(dh * dh, axis=axes),
        inner=np.sum(E * F, axis=axes),
        bound_rhs=rhs,
    )


def random_sff(rng, size=(), trace_free=False, low=-2.0, high=2.0):
    """Symmetric tensors with i.i.d. uniform independent components."""
    size = (size,) if np.isscalar(size) else tuple(size)
    c = rng.uniform(low, high, size + (2, 3))
    h = np.empty(size + (2, 2, 2))
    h[..., 0, 0] = c[..., 0]
    h[..., 0, 1] = h[..., 1, 0] = c[..., 1]
    h[..., 1, 1] = c[..., 2]
    if trace_free:
        tr = 0.5 * (h[..., 0, 0] + h[..., 1, 1])
        h[..., 0, 0] -= tr
        h[..., 1, 1] -= tr
    return h


def random_grad_sff(rng, size=(), w=None, n=2) -> GradSff:
    """Random ``nabla A`` consistent with a prescribed Codazzi vector ``w``.

    A random tensor symmetric in its last two indices is projected onto the
    totally symmetric part, then a particular solution with the requested
    defect is added.
    """
    size = (size,) if np.isscalar(size) else tuple(size)
    if w is None:
        w = rng.normal(size=size + (2, n))
    w = np.broadcast_to(np.asarray(w, dtype=float), size + (2, n))
    T = rng.normal(size=size + (n, 2, n, n))
    T = T + np.swapaxes(T, -1, -2)
    # symmetrise over (i, j, k)
    S = (
        T
        + np.einsum("...iajk->...jaik", T)
        + np.einsum("...iajk->...kaji", T)
    ) / 3.0
    g = np.eye(n)
    a = 1.0 / (2 * (n - 1))
    P = a * (np.einsum("...aj,ik->...iajk", w, g) + np.einsum("...ak,ij->...iajk", w, g)) - a * np.einsum(
        "...ai,jk->...iajk", w, g
    )
    return GradSff(S + P, np.array(w))


def cos_alpha_gradient(h, y, z):
    """Tangential gradient of cos(alpha) in an adapted frame where ``J e1 = x e2 + y e3 + z e4``."""
    h = np.asarray(h, dtype=float)
    y = np.asarray(y, dtype=float)[..., None]
    z = np.asarray(z, dtype=float)[..., None]
    h3, h4 = h[..., 0, :, :], h[..., 1, :, :]
    return y * (h3[..., 1, :] + h4[..., 0, :]) - z * (h3[..., 0, :] - h4[..., 1, :])
