"""Discretized surface patches in the affine chart and their per-node geometry.

Derivatives are second-order central differences.  Every derivative shrinks
the valid block by one node on each side, so quantities carry the margin
(in nodes, relative to the stored grid) on which they are defined.  Periodic
grids are padded by wrapping before differentiation, which makes every
margin cover the whole grid.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .ambient import COMPLEX_STRUCTURE, check_point, christoffel_action, fs_metric
from .errors import DegenerateImmersionError, InvalidInputError
from .frames import orthonormal_frame
from .pinching import PinchingSpec, q_value
from .sff import nabla_j_sq, sff_invariants

__all__ = [
    "FAMILIES",
    "SurfaceConfig",
    "ParamSurface",
    "SurfaceGeometry",
    "SurfaceFields",
    "build_surface",
    "surface_from_points",
    "reparametrize",
    "surface_geometry",
    "first_fundamental_form",
    "normal_frame",
    "second_fundamental_form",
    "kahler_angle_field",
    "mean_curvature_vector",
    "laplace_beltrami",
    "diagnostics",
    "write_surface_csv",
    "DET_MIN",
    "DET_WARN",
    "DIAG_MARGIN",
]

FAMILIES = ("complex-line", "lagrangian", "holomorphic-graph", "perturbed-graph", "clifford-torus")
DET_MIN = 1e-8
DET_WARN = 1e-5
DIAG_MARGIN = 2
_PAD = 3  # wrap padding for periodic grids


@dataclass(frozen=True)
class SurfaceConfig:
    family: str = "holomorphic-graph"
    nu: int = 64
    nv: int | None = None
    k: float = 1.0
    extent: float = 0.5  # planar families use [-extent, extent]^2
    c: float = 0.1
    eps: float = 0.02
    bump_center: tuple[float, float] = (0.0, 0.0)
    bump_width: float = 0.2
    r1: float = 0.6
    r2: float = 0.8

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidInputError(f"unknown surface family {self.family!r}; choose from {FAMILIES}")
        nv = self.nu if self.nv is None else self.nv
        object.__setattr__(self, "nv", int(nv))
        object.__setattr__(self, "nu", int(self.nu))
        if self.nu < 8 or self.nv < 8:
            raise InvalidInputError("grids need at least 8 nodes per direction")
        for name in ("k", "extent", "bump_width", "r1", "r2"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val > 0):
                raise InvalidInputError(f"{name} must be positive, got {val!r}")
        for name in ("c", "eps"):
            if not np.isfinite(getattr(self, name)):
                raise InvalidInputError(f"{name} must be finite")
        object.__setattr__(self, "bump_center", tuple(float(v) for v in self.bump_center))


@dataclass(frozen=True)
class ParamSurface:
    """Immutable grid of chart points ``F[i, j]`` (shape ``(Nu, Nv, 4)``)."""

    F: np.ndarray
    topology: str
    du: float
    dv: float
    k: float = 1.0
    label: str = ""
    run_id: int = 0

    def __post_init__(self):
        F = check_point(self.F).copy()
        if F.ndim != 3 or F.shape[0] < 8 or F.shape[1] < 8:
            raise InvalidInputError("surface grid must have shape (Nu, Nv, 4) with Nu, Nv >= 8")
        if self.topology not in ("periodic", "fixed"):
            raise InvalidInputError(f"unknown topology {self.topology!r}")
        if not (self.du > 0 and self.dv > 0):
            raise InvalidInputError("grid spacings must be positive")
        F.setflags(write=False)
        object.__setattr__(self, "F", F)

    @property
    def shape(self):
        return self.F.shape[:2]

    @property
    def periodic(self):
        return self.topology == "periodic"

    def with_points(self, F):
        return replace(self, F=F)


_RUN_COUNTER = [0]


def _next_run_id():
    _RUN_COUNTER[0] += 1
    return _RUN_COUNTER[0]


def surface_from_points(F, topology, du, dv, k=1.0, label="custom") -> ParamSurface:
    S = ParamSurface(np.asarray(F, dtype=float), topology, float(du), float(dv), float(k), label, _next_run_id())
    first_fundamental_form(S)  # nondegeneracy check
    return S


def _bump(cfg, U, V):
    u0, v0 = cfg.bump_center
    return np.exp(-((U - u0) ** 2 + (V - v0) ** 2) / (2 * cfg.bump_width**2))


def build_surface(cfg: SurfaceConfig) -> ParamSurface:
    """Sample one of the built-in families on a uniform parameter grid."""
    if cfg.family == "clifford-torus":
        u = np.arange(cfg.nu) * (2 * np.pi / cfg.nu)
        v = np.arange(cfg.nv) * (2 * np.pi / cfg.nv)
        U, V = np.meshgrid(u, v, indexing="ij")
        F = np.stack([cfg.r1 * np.cos(U), cfg.r1 * np.sin(U), cfg.r2 * np.cos(V), cfg.r2 * np.sin(V)], -1)
        return surface_from_points(F, "periodic", u[1] - u[0], v[1] - v[0], cfg.k, cfg.family)

    L = cfg.extent
    u = np.linspace(-L, L, cfg.nu)
    v = np.linspace(-L, L, cfg.nv)
    U, V = np.meshgrid(u, v, indexing="ij")
    Z = np.zeros_like(U)
    if cfg.family == "complex-line":
        F = np.stack([U, V, Z, Z], -1)
    elif cfg.family == "lagrangian":
        F = np.stack([U, Z, V, Z], -1)
    else:
        w = U + 1j * V
        z2 = cfg.c * w * w
        if cfg.family == "perturbed-graph":
            z2 = z2 + cfg.eps * _bump(cfg, U, V)
        F = np.stack([U, V, z2.real, z2.imag], -1)
    return surface_from_points(F, "fixed", u[1] - u[0], v[1] - v[0], cfg.k, cfg.family)


def reparametrize(S: ParamSurface, swap=False, flip_u=False, flip_v=False) -> ParamSurface:
    """Relabel the grid: optionally swap u and v, then reverse u and/or v."""
    F = np.asarray(S.F)
    du, dv = S.du, S.dv
    if swap:
        F = np.swapaxes(F, 0, 1)
        du, dv = dv, du
    if flip_u:
        F = F[::-1]
    if flip_v:
        F = F[:, ::-1]
    return ParamSurface(np.ascontiguousarray(F), S.topology, du, dv, S.k, S.label, S.run_id)


# --------------------------------------------------------------------------
# finite differences on shrinking blocks


def _padded(S: ParamSurface):
    F = np.asarray(S.F)
    if S.periodic:
        F = np.pad(F, ((_PAD, _PAD), (_PAD, _PAD), (0, 0)), mode="wrap")
        return F, _PAD
    return F, 0


def _crop(a, n=1):
    return a[n:-n, n:-n] if n else a


def _du(a, h):
    return (a[2:, 1:-1] - a[:-2, 1:-1]) / (2 * h)


def _dv(a, h):
    return (a[1:-1, 2:] - a[1:-1, :-2]) / (2 * h)


def _duu(a, h):
    return (a[2:, 1:-1] - 2 * a[1:-1, 1:-1] + a[:-2, 1:-1]) / h**2


def _dvv(a, h):
    return (a[1:-1, 2:] - 2 * a[1:-1, 1:-1] + a[1:-1, :-2]) / h**2


def _duv(a, hu, hv):
    return (a[2:, 2:] - a[2:, :-2] - a[:-2, 2:] + a[:-2, :-2]) / (4 * hu * hv)


def _ip(G, X, Y):
    return np.einsum("...a,...ab,...b->...", X, G, Y)


@dataclass(frozen=True)
class SurfaceGeometry:
    """Pointwise geometry on the margin-1 block of the padded grid.

    ``offset`` is the padding of the stored grid (``_PAD`` if periodic, else 0),
    so node ``[i, j]`` here corresponds to grid node ``[i + 1 - offset, j + 1 - offset]``.
    """

    surface: ParamSurface
    offset: int
    F: np.ndarray  # (..., 4) points
    G: np.ndarray  # ambient metric
    dF: np.ndarray  # (..., 4, 2) tangent columns F_u, F_v
    g: np.ndarray  # induced metric (..., 2, 2)
    detg: np.ndarray
    ginv: np.ndarray
    frame: np.ndarray  # (..., 4, 4) adapted orthonormal frame columns
    C: np.ndarray  # E[..., :, :2] = dF @ C
    hess: np.ndarray  # (..., 2, 2, 4) ambient covariant Hessian nabla_{F_i} F_j
    h: np.ndarray  # (..., 2, 2, 2) second fundamental form h[alpha, i, j] in the frame
    cos_alpha: np.ndarray
    H: np.ndarray  # (..., 4) mean curvature vector in chart components
    Hcomp: np.ndarray  # (..., 2) frame components H^3, H^4

    def block(self, a, margin):
        """Restrict a margin-1 quantity to grid margin ``margin`` (>= 1)."""
        n = self.offset + margin - 1
        if n < 0:
            raise InvalidInputError("margin too small for this quantity")
        return _crop(a, n)


def surface_geometry(S: ParamSurface, *, check=True) -> SurfaceGeometry:
    P, off = _padded(S)
    du, dv = S.du, S.dv
    Fu, Fv = _du(P, du), _dv(P, dv)
    Fuu, Fvv, Fuv = _duu(P, du), _dvv(P, dv), _duv(P, du, dv)
    F = _crop(P)
    G = fs_metric(F, S.k)
    dF = np.stack([Fu, Fv], axis=-1)
    g = np.einsum("...ai,...ab,...bj->...ij", dF, G, dF, optimize=True)
    detg = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] ** 2
    if check:
        _check_det(detg)
    ginv = np.linalg.inv(g)
    E, C = orthonormal_frame(dF, G)
    huu = Fuu + christoffel_action(F, Fu, Fu)
    huv = Fuv + christoffel_action(F, Fu, Fv)
    hvv = Fvv + christoffel_action(F, Fv, Fv)
    hess = np.stack([np.stack([huu, huv], -2), np.stack([huv, hvv], -2)], -3)  # (..., i, j, 4)
    # normal components in the orthonormal normal frame, then tangent indices to the frame
    hn = np.einsum("...ija,...ab,...bn->...nij", hess, G, E[..., :, 2:], optimize=True)
    h = np.einsum("...nij,...ia,...jb->...nab", hn, C, C, optimize=True)
    JE = np.einsum("ab,...bc->...ac", COMPLEX_STRUCTURE, E)
    cos_alpha = _ip(G, JE[..., :, 0], E[..., :, 1])
    Hcomp = h[..., :, 0, 0] + h[..., :, 1, 1]
    H = np.einsum("...an,...n->...a", E[..., :, 2:], Hcomp)
    return SurfaceGeometry(S, off, F, G, dF, g, detg, ginv, E, C, hess, h, cos_alpha, H, Hcomp)


def _check_det(detg):
    lo = float(np.min(detg))
    if not np.isfinite(lo) or lo < DET_MIN:
        raise DegenerateImmersionError(f"induced metric determinant {lo:.3g} below {DET_MIN}")
    if lo < DET_WARN:
        warnings.warn(f"induced metric badly conditioned (det {lo:.3g})", RuntimeWarning, stacklevel=3)


def first_fundamental_form(S: ParamSurface, margin=1):
    geo = surface_geometry(S)
    return geo.block(geo.g, margin)


def normal_frame(S: ParamSurface, margin=1):
    geo = surface_geometry(S)
    return geo.block(geo.frame[..., :, 2:], margin)


def second_fundamental_form(S: ParamSurface, margin=1):
    geo = surface_geometry(S)
    return geo.block(geo.h, margin)


def kahler_angle_field(S: ParamSurface, margin=1):
    geo = surface_geometry(S)
    return geo.block(geo.cos_alpha, margin)


def mean_curvature_vector(S: ParamSurface, geo: SurfaceGeometry | None = None):
    """Mean curvature 4-vector on the full grid; zero on pinned boundary nodes."""
    geo = geo or surface_geometry(S)
    out = np.zeros(S.F.shape)
    if S.periodic:
        out[:] = _crop(geo.H, geo.offset - 1)
    else:
        out[1:-1, 1:-1] = geo.H
    return out


def _lb(geo: SurfaceGeometry, f):
    """Divergence-form Laplace-Beltrami of a margin-1 field; result on margin 2."""
    S = geo.surface
    du, dv = S.du, S.dv
    sq = np.sqrt(geo.detg)
    a = sq * geo.ginv[..., 0, 0]
    b = sq * geo.ginv[..., 0, 1]
    c = sq * geo.ginv[..., 1, 1]
    # compact stencils for the diagonal terms with face-averaged coefficients
    au = 0.5 * (a[1:] + a[:-1])
    fu = (f[1:] - f[:-1]) / du
    flux_u = au * fu
    term_u = (flux_u[1:, 1:-1] - flux_u[:-1, 1:-1]) / du
    cv = 0.5 * (c[:, 1:] + c[:, :-1])
    fv = (f[:, 1:] - f[:, :-1]) / dv
    flux_v = cv * fv
    term_v = (flux_v[1:-1, 1:] - flux_v[1:-1, :-1]) / dv
    # cross terms: centred derivatives of centred fluxes
    bf_v = b * _central_v_full(f, dv)
    bf_u = b * _central_u_full(f, du)
    term_cross = _du(bf_v, du) + _dv(bf_u, dv)
    return (term_u + term_v + term_cross) / sq[1:-1, 1:-1]


def _central_u_full(f, h):
    out = np.full(f.shape, np.nan)
    out[1:-1] = (f[2:] - f[:-2]) / (2 * h)
    return out


def _central_v_full(f, h):
    out = np.full(f.shape, np.nan)
    out[:, 1:-1] = (f[:, 2:] - f[:, :-2]) / (2 * h)
    return out


def laplace_beltrami(S: ParamSurface, field, margin=DIAG_MARGIN, geo: SurfaceGeometry | None = None):
    """Laplace-Beltrami of a scalar grid field (shape ``(Nu, Nv)``) on the given margin."""
    geo = geo or surface_geometry(S)
    f = np.asarray(field, dtype=float)
    if f.shape != S.shape:
        raise InvalidInputError(f"field shape {f.shape} does not match grid {S.shape}")
    if S.periodic:
        f = np.pad(f, _PAD, mode="wrap")
    f = _crop(f)
    return _lb_block(geo, f, margin)


def _lb_block(geo, f1, margin):
    """Laplacian of a margin-1 block field, restricted to grid margin ``margin`` (>= 2)."""
    if margin < 2:
        raise InvalidInputError("the Laplacian is only defined on margin >= 2")
    out = _lb(geo, f1)
    return _crop(out, geo.offset + margin - 2)


# --------------------------------------------------------------------------
# diagnostics


@dataclass
class SurfaceFields:
    """Per-node values on the diagnostic block plus global extrema."""

    margin: int
    g: np.ndarray
    frame: np.ndarray
    h: np.ndarray
    cos_alpha: np.ndarray
    A2: np.ndarray
    H2: np.ndarray
    nablaJ2: np.ndarray
    H: np.ndarray
    Q: dict = field(default_factory=dict)
    area: float = 0.0

    @property
    def sin2_half(self):
        return 0.5 * (1.0 - self.cos_alpha)

    def extrema(self):
        out = {
            "min_cos_alpha": float(np.min(self.cos_alpha)),
            "max_A2": float(np.max(self.A2)),
            "max_H2": float(np.max(self.H2)),
            "max_sin2_half": float(np.max(self.sin2_half)),
        }
        for name, q in self.Q.items():
            out[f"max_Q_{name}"] = float(np.max(q))
        return out


def _area(geo: SurfaceGeometry):
    S = geo.surface
    sq = np.sqrt(geo.detg)
    if S.periodic:
        return float(np.sum(_crop(sq, geo.offset - 1)) * S.du * S.dv)
    # trapezoid weights over the margin-1 block
    wu = np.ones(sq.shape[0])
    wv = np.ones(sq.shape[1])
    wu[[0, -1]] = 0.5
    wv[[0, -1]] = 0.5
    return float(np.einsum("ij,i,j->", sq, wu, wv) * S.du * S.dv)


def diagnostics(S: ParamSurface, specs: Sequence[PinchingSpec] = (), margin=DIAG_MARGIN,
                geo: SurfaceGeometry | None = None) -> SurfaceFields:
    """Per-node fields and global extrema on the interior block of the given margin."""
    if margin < 1:
        raise InvalidInputError("diagnostics need margin >= 1")
    geo = geo or surface_geometry(S)
    blk = lambda a: geo.block(a, margin)  # noqa: E731
    h = blk(geo.h)
    inv = sff_invariants(h)
    x = np.clip(blk(geo.cos_alpha), -1.0, 1.0)
    Q = {}
    for spec in specs:
        if spec.k != S.k:
            spec = replace(spec, k=S.k) if spec.variant != "yang" else PinchingSpec.yang(spec.lam, S.k)
        Q[spec.name] = q_value(inv, x, spec)
    return SurfaceFields(
        margin=margin,
        g=blk(geo.g),
        frame=blk(geo.frame),
        h=h,
        cos_alpha=x,
        A2=inv.normA2,
        H2=inv.normH2,
        nablaJ2=nabla_j_sq(h),
        H=blk(geo.H),
        Q=Q,
        area=_area(geo),
    )


def write_surface_csv(path, S: ParamSurface, fields: SurfaceFields):
    """Node table: ``i,j,x1,y1,x2,y2,cos_alpha,A2,H2,Q_<spec>...`` over the diagnostic block."""
    m = fields.margin
    nu, nv = fields.cos_alpha.shape
    off = 0 if S.periodic else m
    pts = np.asarray(S.F)[off : off + nu, off : off + nv]
    names = list(fields.Q)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "j", "x1", "y1", "x2", "y2", "cos_alpha", "A2", "H2"] + [f"Q_{n}" for n in names])
        for i in range(nu):
            for j in range(nv):
                row = [i + off, j + off] + [repr(float(c)) for c in pts[i, j]]
                row += [repr(float(fields.cos_alpha[i, j])), repr(float(fields.A2[i, j])), repr(float(fields.H2[i, j]))]
                row += [repr(float(fields.Q[n][i, j])) for n in names]
                w.writerow(row)
