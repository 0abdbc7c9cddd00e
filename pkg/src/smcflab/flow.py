"""Explicit mean curvature flow of grid patches, identity residuals and monitors."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .ambient import christoffel_action
from .errors import BlowUpError, DegenerateImmersionError, InvalidInputError, MismatchError
from .frames import frame_curvature_scalars
from .pinching import PinchingSpec, angle_threshold, auxiliary_function_check
from .sff import nabla_j_sq, reaction_terms
from .surface import (
    ParamSurface,
    SurfaceConfig,
    SurfaceGeometry,
    _crop,
    _du,
    _dv,
    _lb_block,
    build_surface,
    diagnostics,
    surface_geometry,
)

__all__ = [
    "FlowConfig",
    "Residuals",
    "TimeSeries",
    "FlowResult",
    "choose_dt",
    "mcf_step",
    "identity_residuals",
    "run",
    "monitors",
    "write_series_csv",
    "read_series_csv",
    "RESIDUAL_MARGIN",
    "SCHEMES",
    "space_order_study",
    "dt_order_study",
    "series_columns",
]

RESIDUAL_MARGIN = 3
SCHEMES = ("euler", "midpoint")


@dataclass(frozen=True)
class FlowConfig:
    surface: SurfaceConfig = field(default_factory=SurfaceConfig)
    c_cfl: float = 0.1
    dt_max: float = 1e-3
    t_end: float = 0.1
    specs: tuple = (PinchingSpec.thm32(),)
    cadence: int = 10
    seed: int = 0
    scheme: str = "euler"
    residual_gate: float = 1e-2
    delta_mon: float = 1e-3
    max_steps: int = 10**6

    def __post_init__(self):
        if not 0 < self.c_cfl <= 0.5:
            raise InvalidInputError(f"c_cfl must lie in (0, 0.5], got {self.c_cfl}")
        if not (self.t_end > 0 and math.isfinite(self.t_end)):
            raise InvalidInputError("t_end must be positive")
        if not self.dt_max > 0:
            raise InvalidInputError("dt_max must be positive")
        if self.cadence < 1 or self.max_steps < 1:
            raise InvalidInputError("cadence and max_steps must be >= 1")
        if self.scheme not in SCHEMES:
            raise InvalidInputError(f"unknown scheme {self.scheme!r}")
        if not self.specs:
            raise InvalidInputError("at least one pinching spec is required")
        k = self.surface.k
        specs = tuple(
            s if s.k == k else (PinchingSpec.yang(s.lam, k) if s.variant == "yang" else replace(s, k=k))
            for s in self.specs
        )
        object.__setattr__(self, "specs", specs)

    @property
    def k(self):
        return self.surface.k


def _hmin(S: ParamSurface, geo: SurfaceGeometry):
    g = geo.block(geo.g, 1)
    lam = np.linalg.eigvalsh(g)[..., 0]
    return min(S.du, S.dv) * math.sqrt(float(np.min(lam)))


def choose_dt(S: ParamSurface, c_cfl=0.1, dt_max=1e-3, geo: SurfaceGeometry | None = None):
    """``min(dt_max, c_cfl h_min^2 / (1 + max|A|^2))`` over the updated nodes."""
    geo = geo or surface_geometry(S)
    h = geo.block(geo.h, 1)
    maxA2 = float(np.max(np.sum(h * h, axis=(-3, -2, -1))))
    if not math.isfinite(maxA2):
        raise BlowUpError("max |A|^2 is not finite")
    return min(dt_max, c_cfl * _hmin(S, geo) ** 2 / (1.0 + maxA2))


def _velocity(S: ParamSurface, geo: SurfaceGeometry):
    out = np.zeros(S.F.shape)
    if S.periodic:
        out[:] = _crop(geo.H, geo.offset - 1)
    else:
        out[1:-1, 1:-1] = geo.H
    return out


def mcf_step(S: ParamSurface, dt, scheme="euler", sign=1.0, geo: SurfaceGeometry | None = None) -> ParamSurface:
    """One explicit step of ``dF/dt = sign * H``; pinned boundary for fixed grids."""
    return _advance(S, dt, scheme, sign, geo)[0]


def _advance(S, dt, scheme="euler", sign=1.0, geo=None):
    if not (dt > 0 and math.isfinite(dt)):
        raise InvalidInputError("dt must be positive")
    geo = geo or surface_geometry(S)
    F = np.asarray(S.F)
    if scheme == "euler":
        Fn = F + sign * dt * _velocity(S, geo)
    elif scheme == "midpoint":
        half = S.with_points(F + 0.5 * sign * dt * _velocity(S, geo))
        Fn = F + sign * dt * _velocity(half, surface_geometry(half))
    else:
        raise InvalidInputError(f"unknown scheme {scheme!r}")
    if not np.all(np.isfinite(Fn)):
        raise BlowUpError("non-finite node positions")
    S1 = S.with_points(Fn)
    return S1, surface_geometry(S1)  # raises on degeneration


# --------------------------------------------------------------------------
# residuals


@dataclass
class Residuals:
    res_cosalpha: float
    res_H2: float
    field_cosalpha: np.ndarray
    field_H2: np.ndarray
    res_sin2_half: dict  # variant -> max residual of the sin^2(alpha/2) equation


def _normal_gradient_H2(geo: SurfaceGeometry):
    """``|nabla^perp H|^2`` on margin 2 from the ambient mean curvature vector."""
    S = geo.surface
    Hu, Hv = _du(geo.H, S.du), _dv(geo.H, S.dv)
    F = _crop(geo.F)
    dF = _crop(geo.dF)
    H = _crop(geo.H)
    DH = np.stack([Hu + christoffel_action(F, dF[..., 0], H), Hv + christoffel_action(F, dF[..., 1], H)], -2)
    G = _crop(geo.G)
    En = _crop(geo.frame)[..., :, 2:]
    n = np.einsum("...ia,...ab,...bn->...in", DH, G, En, optimize=True)
    ginv = _crop(geo.ginv)
    return np.einsum("...ij,...in,...jn->...", ginv, n, n, optimize=True)


def _pointwise(geo: SurfaceGeometry):
    x = np.clip(geo.cos_alpha, -1.0, 1.0)
    H2 = np.sum(geo.Hcomp**2, axis=-1)
    return x, H2, nabla_j_sq(geo.h)


def identity_residuals(S0: ParamSurface, S1: ParamSurface, dt, margin=RESIDUAL_MARGIN,
                       geo0: SurfaceGeometry | None = None, geo1: SurfaceGeometry | None = None) -> Residuals:
    """Residuals of the cos(alpha) and |H|^2 evolution equations across one step.

    Time derivatives are node-following differences; spatial terms are taken
    at ``S0``, so the residual is first order in ``dt`` and second order in space.
    """
    if S0.run_id != S1.run_id or S0.shape != S1.shape or S0.topology != S1.topology:
        raise MismatchError("states come from different runs")
    if not dt > 0:
        raise InvalidInputError("dt must be positive")
    if margin < 2:
        raise InvalidInputError("residual margin must be >= 2")
    geo0 = geo0 or surface_geometry(S0)
    geo1 = geo1 or surface_geometry(S1)
    k = S0.k
    x0, H20, J0 = _pointwise(geo0)
    x1, H21, _ = _pointwise(geo1)

    lap_x = _lb_block(geo0, x0, margin)
    lap_H2 = _lb_block(geo0, H20, margin)
    gradH = _crop(_normal_gradient_H2(geo0), geo0.offset + margin - 2)
    blk = lambda a: geo0.block(a, margin)  # noqa: E731
    x, J, H2 = blk(x0), blk(J0), blk(H20)
    R3 = reaction_terms(blk(geo0.h)).R3
    K3434 = frame_curvature_scalars(x, k).K3434

    dx = (blk(x1) - x) / dt
    f_cos = dx - lap_x - J * x - 1.5 * k * x * (1 - x**2)
    dH2 = (blk(H21) - H2) / dt
    f_H2 = dH2 - lap_H2 + 2 * gradH - (3 * k - 2 * K3434) * H2 - 2 * R3

    # sin^2(alpha/2) = (1 - x)/2, so its rate and Laplacian are -1/2 those of x
    s = 0.5 * (1 - x)
    ds, lap_s = -0.5 * dx, -0.5 * lap_x
    variants = {}
    for name, (cj, ck) in {"printed_6k": (1.0, 6.0), "direct_3k": (0.5, 3.0)}.items():
        r = ds - lap_s + cj * J * x + ck * k * s * (1 - s) * x
        variants[name] = float(np.max(np.abs(r)))
    return Residuals(float(np.max(np.abs(f_cos))), float(np.max(np.abs(f_H2))), f_cos, f_H2, variants)


# --------------------------------------------------------------------------
# time series


BASE_COLUMNS = ("t", "dt", "area", "min_cos_alpha", "max_A2", "max_H2")
TAIL_COLUMNS = ("max_sin2_half", "res_cosalpha", "res_H2")


def series_columns(spec_names: Sequence[str]):
    return list(BASE_COLUMNS) + [f"max_Q_{n}" for n in spec_names] + list(TAIL_COLUMNS)


@dataclass
class TimeSeries:
    spec_names: list
    k: float
    rows: list = field(default_factory=list)
    extra: list = field(default_factory=list)  # per row: sin^2(alpha/2) residual variants, min factor

    @property
    def columns(self):
        return series_columns(self.spec_names)

    def column(self, name):
        return np.array([r[name] for r in self.rows], dtype=float)

    def append(self, row: dict, extra: dict | None = None):
        if self.rows and not row["t"] > self.rows[-1]["t"]:
            raise InvalidInputError("time series must be strictly increasing in t")
        if not all(math.isfinite(row[c]) for c in self.columns):
            raise BlowUpError(f"non-finite diagnostics at t = {row['t']}")
        self.rows.append({c: float(row[c]) for c in self.columns})
        self.extra.append(extra or {})

    def __len__(self):
        return len(self.rows)


def write_series_csv(path, ts: TimeSeries):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(ts.columns)
        for r in ts.rows:
            w.writerow([repr(r[c]) for c in ts.columns])


def read_series_csv(path, k=1.0) -> TimeSeries:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InvalidInputError("empty series file")
    header = rows[0]
    names = [c[len("max_Q_"):] for c in header if c.startswith("max_Q_")]
    if header != series_columns(names):
        raise InvalidInputError(f"unexpected series header {header}")
    ts = TimeSeries(names, k)
    for line in rows[1:]:
        if len(line) != len(header):
            raise InvalidInputError("malformed series row")
        try:
            ts.append(dict(zip(header, map(float, line))))
        except ValueError as exc:
            raise InvalidInputError(f"malformed series value: {exc}") from exc
    if not ts.rows:
        raise InvalidInputError("series has no rows")
    return ts


@dataclass
class FlowResult:
    series: TimeSeries
    status: str  # "completed" | "blow-up" | "degenerate" | "max-steps"
    final: ParamSurface
    initial: ParamSurface
    trusted: bool
    steps: int
    message: str = ""


def _record(ts, cfg, S, geo, t, dt, res: Residuals):
    d = diagnostics(S, cfg.specs, margin=RESIDUAL_MARGIN, geo=geo)
    ext = d.extrema()
    row = {"t": t, "dt": dt, "area": d.area, "res_cosalpha": res.res_cosalpha, "res_H2": res.res_H2, **ext}
    fac = 0.5 * (1 + d.cos_alpha) * d.cos_alpha  # cos^2(alpha/2) cos(alpha)
    ts.append(row, {"sin2_half": dict(res.res_sin2_half), "min_decay_factor": float(np.min(fac))})


def run(cfg: FlowConfig, initial: ParamSurface | None = None) -> FlowResult:
    """Flow until ``t_end`` (or a controlled stop) and record diagnostics at cadence."""
    S = initial if initial is not None else build_surface(cfg.surface)
    S0 = S
    ts = TimeSeries([s.name for s in cfg.specs], cfg.k)
    t, n = 0.0, 0
    geo = surface_geometry(S)
    status, msg = "completed", ""
    try:
        while True:
            last = t >= cfg.t_end * (1 - 1e-12)
            dt = choose_dt(S, cfg.c_cfl, cfg.dt_max, geo)
            if not last:
                dt = min(dt, cfg.t_end - t)
            S1, geo1 = _advance(S, dt, cfg.scheme, geo=geo)
            if n % cfg.cadence == 0 or last:
                res = identity_residuals(S, S1, dt, geo0=geo, geo1=geo1)
                _record(ts, cfg, S, geo, t, dt, res)
            if last:
                break
            if n >= cfg.max_steps:
                status, msg = "max-steps", f"stopped after {n} steps"
                break
            S, geo, t, n = S1, geo1, t + dt, n + 1
    except BlowUpError as exc:
        status, msg = "blow-up", str(exc)
    except DegenerateImmersionError as exc:
        status, msg = "degenerate", str(exc)
    trusted = status == "completed" and _trusted(ts, cfg.residual_gate)
    return FlowResult(ts, status, S, S0, trusted, n, msg)


def _trusted(ts: TimeSeries, gate):
    if not ts.rows:
        return False
    for r in ts.rows:
        lim = gate * max(1.0, r["max_A2"])
        if r["res_cosalpha"] > lim or r["res_H2"] > lim:
            return False
    return True


# --------------------------------------------------------------------------
# monitors


def monitors(ts: TimeSeries, spec: PinchingSpec, k=None, delta=1e-3, aux="exp", trusted=True) -> dict:
    """Check the preservation, decay, growth and angle claims along a series.

    Failures are report entries.  ``in_hypothesis`` records whether the
    initial data meets the theorem's angle and pinching assumptions.
    """
    if not ts.rows:
        raise InvalidInputError("empty series")
    k = ts.k if k is None else k
    t = ts.column("t")
    qcol = f"max_Q_{spec.name}"
    if qcol not in ts.columns:
        raise InvalidInputError(f"series has no column {qcol}")
    Q = ts.column(qcol)
    cmin = ts.column("min_cos_alpha")
    s2 = ts.column("max_sin2_half")
    H2 = ts.column("max_H2")
    thr = angle_threshold(spec)
    in_hyp = bool(cmin[0] >= thr and Q[0] <= 0)
    report = {"spec": spec.name, "k": k, "delta": delta, "in_hypothesis": in_hyp, "trusted": trusted,
              "angle_threshold": thr}
    if not in_hyp:
        report["note"] = "outside theorem hypotheses"

    # (a) pinching preserved
    bound_a = max(0.0, Q[0]) + delta
    report["a_pinching"] = {"passed": bool(np.all(Q <= bound_a)), "margin": float(bound_a - Q.max()),
                            "margin_vs_initial": float(Q[0] + delta - Q.max())}

    # (b) decay of sin^2(alpha/2); the factor is min_t of cos^2(alpha/2) cos(alpha)
    if ts.extra and all("min_decay_factor" in e for e in ts.extra):
        fac = min(e["min_decay_factor"] for e in ts.extra)
    else:
        # from the extrema alone: cos^2(alpha/2) cos(alpha) is increasing in cos(alpha) on [0, 1]
        c = cmin.min()
        fac = 0.5 * (1 + c) * c
    report["decay_factor"] = float(fac)
    for name, coeff in (("b_decay_3k", 3.0), ("b_decay_6k", 6.0)):
        c_rate = coeff * k * fac
        env = s2[0] * np.exp(-c_rate * t) * (1 + delta)
        ok = bool(np.all(s2 <= env + 1e-15))
        report[name] = {"passed": ok, "c": float(c_rate), "margin": float(np.min(env - s2))}

    # (c) growth of |H|^2
    aux_rep = auxiliary_function_check(aux)
    C0 = H2[0] * aux_rep.sup_over_inf
    env_c = C0 * np.exp(2.25 * k * t)
    report["c_growth"] = {"passed": bool(np.all(H2 <= env_c * (1 + delta) + 1e-15)), "C0": float(C0),
                          "margin": float(np.min(env_c - H2))}

    # (d) min cos(alpha) nondecreasing
    drops = np.maximum.accumulate(cmin) - cmin
    report["d_angle"] = {"passed": bool(np.all(drops <= delta)), "max_drop": float(drops.max())}

    primary = ("a_pinching", "b_decay_3k", "c_growth", "d_angle")
    report["passed"] = all(report[m]["passed"] for m in primary)
    ext = [e.get("sin2_half", {}) for e in ts.extra if e]
    if ext:
        report["sin2_half_residual"] = {v: max(e[v] for e in ext) for v in ext[0]}
    return report


# --------------------------------------------------------------------------
# convergence studies


def _orders(errors, ratio=2.0):
    e = np.asarray(errors, dtype=float)
    return list(np.log(e[:-1] / e[1:]) / np.log(ratio))


def space_order_study(cfg: SurfaceConfig, sizes=(64, 128), dt=1e-8, margin=RESIDUAL_MARGIN):
    """Max residuals at each grid size with a negligible ``dt``, plus observed orders.

    Sizes are node counts; the observed order uses the actual spacing ratio.
    """
    res = []
    spacing = []
    for n in sizes:
        S = build_surface(replace(cfg, nu=n, nv=n))
        r = identity_residuals(S, mcf_step(S, dt), dt, margin)
        res.append((r.res_cosalpha, r.res_H2))
        spacing.append(S.du)
    res = np.array(res)
    orders = {}
    for j, name in enumerate(("res_cosalpha", "res_H2")):
        orders[name] = [
            float(np.log(res[i, j] / res[i + 1, j]) / np.log(spacing[i] / spacing[i + 1]))
            for i in range(len(sizes) - 1)
        ]
    return {"sizes": list(sizes), "residuals": res.tolist(), "orders": orders}


def dt_order_study(S: ParamSurface, dts=(4e-4, 2e-4, 1e-4, 5e-5), margin=RESIDUAL_MARGIN):
    """Observed order in ``dt`` at a fixed grid.

    The dt-independent spatial part cancels in differences of the signed
    residual fields at successive ``dt``, so orders come from those differences.
    """
    dts = list(dts)
    fields = []
    for dt in dts:
        r = identity_residuals(S, mcf_step(S, dt), dt, margin)
        fields.append((r.field_cosalpha, r.field_H2))
    out = {}
    for j, name in enumerate(("res_cosalpha", "res_H2")):
        diffs = [float(np.max(np.abs(fields[i][j] - fields[i + 1][j]))) for i in range(len(dts) - 1)]
        out[name] = {"differences": diffs, "orders": _orders(diffs, dts[0] / dts[1])}
    return out
