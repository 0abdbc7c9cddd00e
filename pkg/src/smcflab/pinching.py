"""Pinching quantities, their reaction bounds and the admissible angle thresholds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Callable, NamedTuple

import numpy as np

from .errors import InvalidInputError, InvalidSpecError, WrongBranchError
from .frames import frame_curvature_scalars
from .sff import (
    SffInvariants,
    normalize_frame,
    reaction_bound,
    reaction_terms,
    curvature_reaction_terms,
    sff_invariants,
)

__all__ = [
    "PinchingSpec",
    "QuadraticSurd",
    "ThresholdReport",
    "ReactionBound",
    "AuxReport",
    "q_value",
    "angle_threshold",
    "angle_threshold_sq",
    "solve_quadratic",
    "threshold_solve",
    "threshold_table",
    "reaction_rhs",
    "reaction_exact",
    "gradient_allowance",
    "auxiliary_function_check",
    "THRESHOLD_CASES",
]

SQRT30 = math.sqrt(30.0)

VARIANTS = ("thm32", "thm51", "yang")


@dataclass(frozen=True)
class PinchingSpec:
    """Which pinching quantity ``Q`` is monitored.

    * ``thm32``: ``Q = |A|^2 - 2/3 |H|^2 - b k`` with ``b = 1/2``
    * ``thm51``: ``Q = |A|^2 - 2/3 |H|^2 - b k cos(alpha)`` with ``b = 4/5``
    * ``yang``:  ``Q = |A|^2 - lam |H|^2 - (2 lam - 1)/lam k`` for ``1/2 <= lam <= 2/3``
    """

    variant: str
    k: float = 1.0
    b: Fraction | None = None
    lam: Fraction | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidSpecError(f"unknown pinching variant {self.variant!r}")
        if not (np.isfinite(self.k) and self.k > 0):
            raise InvalidSpecError("k must be positive")
        default_b = {"thm32": Fraction(1, 2), "thm51": Fraction(4, 5)}.get(self.variant)
        if self.variant == "yang":
            if self.lam is None:
                raise InvalidSpecError("yang family needs lam")
            lam = Fraction(self.lam).limit_denominator(10**9) if isinstance(self.lam, float) else Fraction(self.lam)
            if not Fraction(1, 2) <= lam <= Fraction(2, 3):
                raise InvalidSpecError(f"lam must lie in [1/2, 2/3], got {lam}")
            object.__setattr__(self, "lam", lam)
            if self.b is not None:
                raise InvalidSpecError("b is determined by lam in the yang family")
            object.__setattr__(self, "b", (2 * lam - 1) / lam)
        else:
            if self.lam is not None:
                raise InvalidSpecError("lam only applies to the yang family")
            if self.b is not None and Fraction(self.b) != default_b:
                raise InvalidSpecError(f"{self.variant} fixes b = {default_b}")
            object.__setattr__(self, "b", default_b)

    @classmethod
    def thm32(cls, k=1.0):
        return cls("thm32", k)

    @classmethod
    def thm51(cls, k=1.0):
        return cls("thm51", k)

    @classmethod
    def yang(cls, lam, k=1.0):
        return cls("yang", k, lam=lam)

    @property
    def name(self):
        if self.variant == "yang":
            return f"yang{float(self.lam):g}"
        return self.variant

    @property
    def h2_weight(self):
        return float(self.lam) if self.variant == "yang" else 2.0 / 3.0


def _invariants(h_or_inv):
    if isinstance(h_or_inv, SffInvariants):
        return h_or_inv
    return sff_invariants(h_or_inv)


def _check_x(x):
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1 + 1e-12):
        raise InvalidInputError("|cos alpha| must not exceed 1")
    return x


def q_value(h_or_inv, x, spec: PinchingSpec):
    """Pinching quantity ``Q``; non-positive values mean the condition holds."""
    inv = _invariants(h_or_inv)
    x = _check_x(x)
    k = spec.k
    b = float(spec.b)
    base = inv.normA2 - spec.h2_weight * inv.normH2
    if spec.variant == "thm51":
        return base - b * k * x
    return base - b * k


def angle_threshold_sq(spec: PinchingSpec) -> Fraction:
    """Exact lower bound for ``cos^2(alpha)``."""
    if spec.variant == "thm32":
        return Fraction(5, 6)
    if spec.variant == "thm51":
        return Fraction(251, 265) ** 2
    lam = spec.lam
    return (7 * lam - 3) / (3 * lam)


def angle_threshold(spec: PinchingSpec) -> float:
    """Lower bound for ``cos(alpha)`` under which the pinching is preserved."""
    if spec.variant == "thm51":
        return 251 / 265
    return math.sqrt(angle_threshold_sq(spec))


# --------------------------------------------------------------------------
# exact quadratic roots


@dataclass(frozen=True)
class QuadraticSurd:
    """The number ``p + q * sqrt(d)`` with rational ``p, q, d`` and ``d >= 0``."""

    p: Fraction
    q: Fraction = Fraction(0)
    d: Fraction = Fraction(0)

    def decimal(self, digits=40) -> Decimal:
        with localcontext() as ctx:
            ctx.prec = digits + 10
            val = Decimal(self.p.numerator) / Decimal(self.p.denominator)
            if self.q and self.d:
                root = (Decimal(self.d.numerator) / Decimal(self.d.denominator)).sqrt()
                val += Decimal(self.q.numerator) / Decimal(self.q.denominator) * root
            return +val

    def __float__(self):
        return float(self.decimal())

    def sign_minus(self, r) -> int:
        """Exact sign of ``self - r`` for rational ``r``."""
        u = self.p - Fraction(r)
        if self.q == 0 or self.d == 0:
            return (u > 0) - (u < 0)
        qs = 1 if self.q > 0 else -1
        us = (u > 0) - (u < 0)
        if us == 0:
            return qs
        if us == qs:
            return us
        diff = u * u - self.q * self.q * self.d
        s = (diff > 0) - (diff < 0)
        return us * s

    def __str__(self):
        if self.q == 0 or self.d == 0:
            return str(self.p)
        return f"{self.p} + {self.q}*sqrt({self.d})"


def _rational_sqrt(r: Fraction):
    n, d = r.numerator, r.denominator
    sn, sd = math.isqrt(n), math.isqrt(d)
    if sn * sn == n and sd * sd == d:
        return Fraction(sn, sd)
    return None


def solve_quadratic(a, b, c) -> list[QuadraticSurd]:
    """Real roots of ``a t^2 + b t + c`` in increasing order, exactly."""
    a, b, c = Fraction(a), Fraction(b), Fraction(c)
    if a == 0:
        if b == 0:
            raise InvalidInputError("degenerate polynomial")
        return [QuadraticSurd(-c / b)]
    disc = b * b - 4 * a * c
    if disc < 0:
        return []
    p = -b / (2 * a)
    q = 1 / (2 * a)
    s = _rational_sqrt(disc)
    if s is not None:
        roots = sorted({p - abs(q) * s, p + abs(q) * s})
        return [QuadraticSurd(r) for r in roots]
    return [QuadraticSurd(p, -abs(q), disc), QuadraticSurd(p, abs(q), disc)]


def _poly(coeffs, t):
    a, b, c = coeffs
    return a * t * t + b * t + c


@dataclass
class ThresholdReport:
    case: str
    variable: str
    coefficients: tuple  # (a, b, c) of a t^2 + b t + c <= 0, exact
    root: float
    root_exact: str
    stated_bound: Fraction
    margin: float
    certified: bool
    notes: str = ""
    extra: dict = field(default_factory=dict)

    def row(self):
        return {
            "case": self.case,
            "variable": self.variable,
            "coefficients": " ".join(str(c) for c in self.coefficients),
            "root": f"{self.root:.12g}",
            "root_exact": self.root_exact,
            "stated_bound": str(self.stated_bound),
            "stated_bound_float": f"{float(self.stated_bound):.12g}",
            "margin": f"{self.margin:.6g}",
            "certified": str(self.certified),
        }


THRESHOLD_CASES = ("Thm32_b", "Thm32_angle", "Thm32_Hzero", "Thm51_Hnonzero", "Thm51_Hzero")


def threshold_solve(case: str) -> ThresholdReport:
    """Re-derive one of the admissibility constants and certify the stated bound.

    Certification is exact: the stated bound is compared with the quadratic
    surd root in rational arithmetic, and the polynomial is evaluated at the
    bound as a Fraction.
    """
    half = Fraction(1, 2)
    if case == "Thm32_b":
        # {2b - 1 <= 0} and {3b^2 - 7/2 b + 1 <= 0}
        coeffs = (Fraction(3), Fraction(-7, 2), Fraction(1))
        lo, hi = solve_quadratic(*coeffs)
        feasible_lo, feasible_hi = lo.p, min(hi.p, half)
        ok = feasible_lo == feasible_hi == half
        return ThresholdReport(
            case, "b", coeffs, float(lo), f"roots {lo}, {hi}; with b <= 1/2 only b = {feasible_lo}",
            half, 0.0, ok, extra={"roots": (lo.p, hi.p), "b": feasible_lo},
        )
    if case in ("Thm32_angle", "Thm32_Hzero"):
        b = half
        # 9/2 sin^2 - 3/2 b <= 0 in the variable c2 = cos^2
        coeffs = (Fraction(0), Fraction(-9, 2), Fraction(9, 2) - Fraction(3, 2) * b)
        (root,) = solve_quadratic(*coeffs)
        ok = root.p == Fraction(5, 6) and _poly(coeffs, Fraction(5, 6)) <= 0
        extra = {"cos_alpha": math.sqrt(5 / 6)}
        notes = "cos^2 >= 5/6 <=> cos >= sqrt(30)/6"
        if case == "Thm32_Hzero":
            # 3 b k^2 (b - 1/2) <= 0 forces b <= 1/2 and sin^2 <= b/3
            ok = ok and 3 * b * (b - half) <= 0 and 1 - root.p == b / 3
            notes = "b <= 1/2 and sin^2 <= b/3 at |H| = 0"
        return ThresholdReport(case, "cos^2", coeffs, float(root), str(root), Fraction(5, 6), 0.0, ok, notes, extra)
    if case == "Thm51_Hnonzero":
        b = Fraction(4, 5)
        coeffs = (33 * b * b - 72, -56 * b, Fraction(16 + 72))
        bound = Fraction(251, 265)
    elif case == "Thm51_Hzero":
        b = Fraction(4, 5)
        coeffs = (Fraction(48, 25) - Fraction(9, 2), Fraction(-12, 5), Fraction(9, 2))
        bound = Fraction(121, 129)
    else:
        raise InvalidInputError(f"unknown threshold case {case!r}")
    roots = [r for r in solve_quadratic(*coeffs) if r.sign_minus(0) > 0]
    (root,) = roots
    # leading coefficient < 0 and the other root is negative: p(t) <= 0 for t >= root
    certified = coeffs[0] < 0 and root.sign_minus(bound) <= 0 and _poly(coeffs, bound) <= 0
    return ThresholdReport(
        case, "cos", coeffs, float(root), str(root), bound,
        float(bound) - float(root), certified, f"p(bound) = {_poly(coeffs, bound)}",
    )


def threshold_table(yang_lams=(Fraction(1, 2), Fraction(2, 3))) -> list[dict]:
    """Rows for every solved threshold plus the one-parameter family endpoints."""
    rows = [threshold_solve(c).row() for c in THRESHOLD_CASES]
    for lam in yang_lams:
        spec = PinchingSpec.yang(lam)
        c2 = angle_threshold_sq(spec)
        rows.append(
            {
                "case": f"Yang_lam={lam}",
                "variable": "cos^2",
                "coefficients": f"Q = |A|^2 - {lam}|H|^2 - {spec.b}k",
                "root": f"{float(c2):.12g}",
                "root_exact": str(c2),
                "stated_bound": str(c2),
                "stated_bound_float": f"{math.sqrt(c2):.12g}",
                "margin": "0",
                "certified": str(True),
            }
        )
    return rows


# --------------------------------------------------------------------------
# reaction bounds


class ReactionBound(NamedTuple):
    """Non-Laplacian right-hand side of the Q evolution after substitution.

    ``total = quadratic + linear + square + remainder`` equals the bound
    before substituting |H|^2 (``pre_substitution``) identically.  ``square``
    holds the completed-square term, which is never positive.
    """

    q: np.ndarray
    quadratic: np.ndarray
    linear: np.ndarray
    square: np.ndarray
    remainder: np.ndarray
    pre_substitution: np.ndarray

    @property
    def total(self):
        return self.quadratic + self.linear + self.square + self.remainder


def gradient_allowance(x, k):
    """Upper bound of ``-2(|nabla A|^2 - 2/3 |nabla H|^2)``, i.e. ``(9k^2/2) x^2 (1 - x^2)``."""
    x = np.asarray(x, dtype=float)
    return 4.5 * k**2 * x**2 * (1 - x**2)


def reaction_rhs(h, x, spec: PinchingSpec, branch=None, tol=1e-9) -> ReactionBound:
    """Reaction bound for ``(d/dt - Laplacian) Q`` at one point (or a batch).

    ``branch`` is ``"Hnonzero"`` or ``"Hzero"``; ``None`` picks it from ``h``.
    Only the two proven variants are supported.
    """
    if spec.variant == "yang":
        raise NotImplementedError("the one-parameter family has no derived reaction bound")
    x = _check_x(x)
    inv0 = sff_invariants(h)
    zero = np.sqrt(inv0.normH2) <= tol
    if branch is None:
        if np.all(zero):
            branch = "Hzero"
        elif not np.any(zero):
            branch = "Hnonzero"
        else:
            raise WrongBranchError("batch mixes |H| = 0 and |H| != 0 points")
    if branch == "Hnonzero":
        if np.any(zero):
            raise WrongBranchError("|H| = 0 at some point; use branch='Hzero'")
    elif branch == "Hzero":
        if not np.all(zero):
            raise WrongBranchError("|H| != 0 at some point; use branch='Hnonzero'")
    else:
        raise InvalidInputError(f"unknown branch {branch!r}")

    k = spec.k
    b = float(spec.b)
    A2 = inv0.normA2
    H2 = inv0.normH2
    Q = q_value(inv0, x, spec)
    ang = 4.5 * k**2 * x**2 * (1 - x**2)
    zeros = np.zeros_like(Q)

    if branch == "Hnonzero":
        inv = sff_invariants(normalize_frame(h).h)
        a3 = inv.traceless_norm2[..., 0]
        a4 = inv.traceless_norm2[..., 1]
        r311 = 2 * a3**2 + 2 * a4**2 + 2.0 / 3.0 * a3 * H2 - H2**2 / 6.0 + 8 * a3 * a4
        if spec.variant == "thm32":
            pre = ang - 0.5 * k * (3 * x**2 + 1) * Q - 0.5 * b * k**2 * (3 * x**2 + 1) - k * A2 + r311
            lin = (8 * a3 + 12 * a4 - 12 * b * k + 3 * k - 0.5 * k * (3 * x**2 + 1)) * Q
            sq = -((2 * a4 - k * (3 * b - 1)) ** 2)
            rem = (
                4 * k * (2 * b - 1) * a3
                + k**2 * (3 * b**2 - 3.5 * b + 1)
                + k**2 * x**2 * (4.5 * (1 - x**2) - 1.5 * b)
            )
        else:
            pre = (
                ang - 0.5 * k * (3 * x**2 + 1) * Q - 2 * b * k**2 * x - k * A2
                - 0.5 * b * k * x * H2 + r311
            )
            lin = (8 * a3 + 12 * a4 - 9 * b * k * x + 3 * k - 0.5 * k * (3 * x**2 + 1)) * Q
            sq = -((2 * a4 - 0.25 * k * (9 * b * x - 4)) ** 2)
            rem = k * (5 * b * x - 4) * a3 + k**2 / 16 * (
                33 * b**2 * x**2 - 56 * b * x + 16 + 72 * x**2 * (1 - x**2)
            )
        return ReactionBound(Q, -6 * Q**2, lin, sq, rem, pre)

    if spec.variant == "thm32":
        pre = ang - k * A2 - 0.5 * k * (3 * x**2 + 1) * A2 + 3 * A2**2
        lin = (3 * (A2 + b * k) - 1.5 * k * (x**2 + 1)) * Q
        rem = 3 * b * k**2 * (b - 0.5) + k**2 * x**2 * (4.5 * (1 - x**2) - 1.5 * b)
    else:
        pre = ang - 0.5 * k * (3 * x**2 + 1) * Q - 2 * b * k**2 * x - k * A2 + 3 * A2**2
        lin = (3 * (A2 - b * k * x) + 6 * b * k * x - k - 0.5 * k * (3 * x**2 + 1)) * Q
        rem = 4.5 * k**2 * x**2 * (1 - x**2) - 3 * b * k**2 * x + 3 * b**2 * k**2 * x**2
    return ReactionBound(Q, zeros, lin, zeros, rem, pre)


def reaction_exact(h, x, spec: PinchingSpec):
    """Exact zeroth-order part of ``(d/dt - Laplacian) Q`` at a point.

    Built from the reduced |A|^2 and |H|^2 evolution equations with no
    inequality applied; gradient terms are excluded.
    """
    x = _check_x(x)
    k = spec.k
    inv = sff_invariants(h)
    R1, R2, R3 = reaction_terms(h)
    T = curvature_reaction_terms(h, x, k)
    _, K3434, _ = frame_curvature_scalars(x, k)
    react_A = T.total + 2 * R1 + 2 * R2
    react_H = (3 * k - 2 * K3434) * inv.normH2 + 2 * R3
    out = react_A - spec.h2_weight * react_H
    if spec.variant == "thm51":
        out = out - float(spec.b) * k * (inv.nablaJ2 * x + 1.5 * k * x * (1 - x**2))
    return out


# --------------------------------------------------------------------------
# auxiliary function for the |H|^2 growth estimate


@dataclass
class AuxReport:
    name: str
    x: np.ndarray
    cond1: np.ndarray  # (4/3 f - (sqrt30 f' - f'')/12) / f, must be <= 0
    cond2: np.ndarray  # (sqrt30 f' - f'') / f, must be >= 0
    fprime: np.ndarray
    fsecond: np.ndarray
    f: np.ndarray
    passed: bool
    max_violation: float

    @property
    def sup_over_inf(self):
        return float(self.f.max() / self.f.min())

    def summary(self):
        return {
            "name": self.name,
            "passed": self.passed,
            "max_cond1": float(self.cond1.max()),
            "min_cond2": float(self.cond2.min()),
            "min_fprime": float(self.fprime.min()),
            "min_fsecond": float(self.fsecond.min()),
            "max_violation": self.max_violation,
            "sup_over_inf": self.sup_over_inf,
        }


def _aux_functions(f_spec) -> tuple[str, Callable]:
    if f_spec == "exp":
        def fn(x):
            f = np.exp(-8 * x**2 + 20 * x)
            g = -16 * x + 20
            return f, f * g, f * (-16 + g**2)
        return "exp", fn
    if f_spec == "linear":
        return "linear", lambda x: (x - 0.75, np.ones_like(x), np.zeros_like(x))
    if f_spec == "constant":
        return "constant", lambda x: (np.ones_like(x), np.zeros_like(x), np.zeros_like(x))
    if callable(f_spec):
        return getattr(f_spec, "__name__", "custom"), f_spec
    if isinstance(f_spec, (tuple, list)) and len(f_spec) == 2:
        from scipy.interpolate import CubicSpline

        tx, tf = (np.asarray(v, dtype=float) for v in f_spec)
        lo, hi = SQRT30 / 6, 1.0
        if tx.ndim != 1 or tx.shape != tf.shape or tx.size < 4:
            raise InvalidInputError("custom table needs matching 1-d x and f arrays (>= 4 points)")
        if tx.min() > lo + 1e-12 or tx.max() < hi - 1e-12:
            raise InvalidInputError("custom table does not cover [sqrt(30)/6, 1]")
        cs = CubicSpline(tx, tf)
        return "table", lambda x: (cs(x), cs(x, 1), cs(x, 2))
    raise InvalidInputError(f"unknown auxiliary function spec {f_spec!r}")


def auxiliary_function_check(f_spec="exp", grid_n=1000, tol=1e-12) -> AuxReport:
    """Check a weight ``f(cos alpha)`` for the |H|^2 / f growth argument on [sqrt30/6, 1].

    Conditions: ``4/3 f - (sqrt30 f' - f'')/12 <= 0`` and ``sqrt30 f' - f'' >= 0``,
    plus ``f > 0``, ``f' > 0`` and ``f'' >= 0`` used when discarding terms.
    """
    if grid_n < 2:
        raise InvalidInputError("grid_n must be >= 2")
    name, fn = _aux_functions(f_spec)
    x = np.linspace(SQRT30 / 6, 1.0, grid_n)
    f, f1, f2 = (np.asarray(v, dtype=float) * np.ones_like(x) for v in fn(x))
    if np.any(f <= 0):
        scale = np.ones_like(f)
    else:
        scale = f
    cond1 = (4.0 / 3.0 * f - (SQRT30 * f1 - f2) / 12.0) / scale
    cond2 = (SQRT30 * f1 - f2) / scale
    d1 = f1 / scale
    d2 = f2 / scale
    violations = [
        np.max(cond1),
        -np.min(cond2),
        -np.min(d2),
        0.0 if np.all(f > 0) else float(-np.min(f)) + 1.0,
        0.0 if np.all(f1 > 0) else float(-np.min(f1)) + 1.0,
    ]
    max_violation = float(max(violations))
    return AuxReport(name, x, cond1, cond2, d1, d2, f, max_violation <= tol, max_violation)
