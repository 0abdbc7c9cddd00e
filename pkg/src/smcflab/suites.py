"""Randomized oracle suites behind ``verify-algebra``.

Every suite compares a reduced formula with an independent computation (or
checks an inequality) on seeded random samples, and has a negative-control
mode that corrupts one constant so the suite must fail.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .ambient import fs_metric, frame_components, model_curvature, ricci_chart, riemann_chart
from .frames import frame_curvature_scalars, orthonormal_frame, w_components, w_norm_sq
from .pinching import PinchingSpec, angle_threshold, gradient_allowance, reaction_exact, reaction_rhs
from .sff import (
    cdk_bound,
    cos_alpha_gradient,
    curvature_reaction_contracted,
    curvature_reaction_terms,
    grad_decomposition,
    nabla_j_sq,
    random_grad_sff,
    random_sff,
    reaction_bound,
    sff_invariants,
)

__all__ = ["SuiteResult", "SUITES", "run_suites", "random_frames", "TENSOR_CAP"]

INEQ_TOL = 1e-10
TENSOR_CAP = 2000  # suites that build full curvature tensors use at most this many samples


@dataclass
class SuiteResult:
    name: str
    samples: int
    violations: int
    worst_margin: float  # min over samples of (allowed - observed); negative means violated
    tol: float
    seconds: float = 0.0
    corrupted: bool = False

    @property
    def passed(self):
        return self.violations == 0

    def row(self):
        return {
            "suite": self.name,
            "samples": self.samples,
            "violations": self.violations,
            "worst_margin": f"{self.worst_margin:.3e}",
            "tol": f"{self.tol:.0e}",
            "passed": self.passed,
            "negative_control": self.corrupted,
        }


def random_frames(rng, n, k, scale=0.7):
    """Random chart points with positively oriented orthonormal frames.

    Returns ``(p, E, jmat)``.
    """
    p = rng.normal(scale=scale, size=(n, 4))
    g = fs_metric(p, k)
    M = rng.normal(size=(n, 4, 4))
    E, _ = orthonormal_frame(M[..., :2], g, M[..., 2:])
    _, jmat = frame_components(p, E, k)
    return p, E, jmat


def _cmp(name, observed, expected, tol, corrupt, t0):
    err = np.abs(np.asarray(observed) - np.asarray(expected))
    err = err.reshape(err.shape[0], -1).max(axis=1) if err.ndim > 1 else err
    margin = tol - err
    return SuiteResult(name, len(err), int(np.sum(margin < 0)), float(margin.min()), tol,
                       time.perf_counter() - t0, corrupt)


def _ineq(name, margin, tol, corrupt, t0, identity_err=None):
    """Inequality margins (violated below ``-tol``) plus optional identity errors (violated above ``tol``)."""
    margin = np.asarray(margin, dtype=float)
    bad = int(np.sum(margin < -tol))
    if identity_err is not None:
        bad += int(np.sum(np.asarray(identity_err) > tol))
    return SuiteResult(name, margin.size, bad, float(margin.min()), tol, time.perf_counter() - t0, corrupt)


# --------------------------------------------------------------------------
# suites: (rng, samples, k, corrupt) -> SuiteResult


def suite_curvature_model(rng, samples, k, corrupt=False):
    t0 = time.perf_counter()
    n = min(samples, TENSOR_CAP)
    p, E, jmat = random_frames(rng, n, k)
    R = riemann_chart(p, k)
    Rf = np.einsum("...ijlm,...ia,...jb,...lc,...md->...abcd", R, E, E, E, E)
    model = model_curvature(jmat, k * (1.01 if corrupt else 1.0))
    return _cmp("curvature_model", Rf, model, 1e-6, corrupt, t0)


def suite_ricci(rng, samples, k, corrupt=False):
    t0 = time.perf_counter()
    n = min(samples, TENSOR_CAP)
    p = rng.normal(scale=0.7, size=(n, 4))
    coeff = 1.0 if corrupt else 1.5
    return _cmp("ricci", ricci_chart(p, k), coeff * k * fs_metric(p, k), 1e-6, corrupt, t0)


def suite_frame_scalars(rng, samples, k, corrupt=False):
    t0 = time.perf_counter()
    n = min(samples, TENSOR_CAP)
    _, _, jmat = random_frames(rng, n, k)
    R = model_curvature(jmat, k)
    x = jmat[:, 0, 1]
    K1212, K3434, K1234 = frame_curvature_scalars(x, k)
    if corrupt:
        K1234 = 0.25 * k * (3 * x**2 + 1)
    obs = np.stack([R[:, 0, 1, 0, 1], R[:, 2, 3, 2, 3], R[:, 0, 1, 2, 3]], -1)
    exp = np.stack([K1212, K3434, K1234], -1)
    return _cmp("frame_scalars", obs, exp, 1e-8, corrupt, t0)


def suite_w_norm(rng, samples, k, corrupt=False):
    t0 = time.perf_counter()
    n = min(samples, TENSOR_CAP)
    _, _, jmat = random_frames(rng, n, k)
    w = w_components(jmat, k)
    x = jmat[:, 0, 1]
    expected = w_norm_sq(x, k) * (2.0 if corrupt else 1.0)
    return _cmp("w_norm", np.sum(w * w, axis=(-2, -1)), expected, 1e-8, corrupt, t0)


def suite_curvature_reaction(rng, samples, k, corrupt=False):
    t0 = time.perf_counter()
    n = min(samples, TENSOR_CAP)
    _, _, jmat = random_frames(rng, n, k)
    h = random_sff(rng, n)
    red = np.stack(curvature_reaction_terms(h, jmat[:, 0, 1], k), -1)
    if corrupt:
        red[:, 1] *= 0.5
    con = np.stack(curvature_reaction_contracted(h, jmat, k), -1)
    return _cmp("curvature_reaction", red, con, 1e-8, corrupt, t0)


def suite_ineq_2_5(rng, samples, k, corrupt=False):
    t0 = time.perf_counter()
    h = random_sff(rng, samples)
    inv = sff_invariants(h)
    c = 1.0 if corrupt else 0.5
    return _ineq("ineq_2_5", nabla_j_sq(h) - c * inv.normH2, INEQ_TOL, corrupt, t0)


def suite_ineq_2_6(rng, samples, k, corrupt=False):
    t0 = time.perf_counter()
    h = random_sff(rng, samples)
    v = rng.normal(size=(samples, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    x, y, z = v.T
    grad = cos_alpha_gradient(h, y, z)
    lhs = np.sum(grad * grad, axis=-1)
    s2 = (1 - x**2) * (0.5 if corrupt else 1.0)
    return _ineq("ineq_2_6", s2 * nabla_j_sq(h) - lhs, INEQ_TOL, corrupt, t0)


def suite_ineq_3_3(rng, samples, k, corrupt=False):
    t0 = time.perf_counter()
    grad = random_grad_sff(rng, samples)
    eta = rng.uniform(0.01, 2.0, samples)
    dec = grad_decomposition(grad, eta)
    rhs = dec.bound_rhs
    if corrupt:
        dH2 = np.sum(grad.dH**2, axis=(-2, -1))
        rhs = rhs + (1.0 - 0.75) * dH2 + 1.0
    scale = 1.0 + dec.normDA2
    margin = (dec.normDA2 - rhs) / scale
    # E and F are orthogonal
    return _ineq("ineq_3_3", margin, INEQ_TOL, corrupt, t0, np.abs(dec.inner) / scale)


def suite_ineq_3_10(rng, samples, k, corrupt=False):
    """Gradient terms of the pinching evolution against ``(9k^2/2) x^2 (1 - x^2)``."""
    t0 = time.perf_counter()
    n = min(samples, TENSOR_CAP)
    _, _, jmat = random_frames(rng, n, k)
    w = w_components(jmat, k)
    grad = random_grad_sff(rng, n, w=w)
    # keep only the trace part E (F = 0), where the bound is nearly sharp
    dh = grad_decomposition(grad, 1.0).E
    dA2 = np.sum(dh**2, axis=(-4, -3, -2, -1))
    dH2 = np.sum(grad.dH**2, axis=(-2, -1))
    lhs = -2 * (dA2 - 2.0 / 3.0 * dH2)
    allow = gradient_allowance(jmat[:, 0, 1], k) * (0.25 if corrupt else 1.0)
    return _ineq("ineq_3_10", allow - lhs, INEQ_TOL, corrupt, t0)


def suite_ineq_3_11(rng, samples, k, corrupt=False):
    t0 = time.perf_counter()
    h = random_sff(rng, samples)
    keep = np.sqrt(sff_invariants(h).normH2) > 1e-6
    b = reaction_bound(h[keep])
    rhs = b.rhs - (1e-3 if corrupt else 0.0)
    scale = 1.0 + np.abs(b.rhs)
    return _ineq("ineq_3_11", (rhs - b.lhs) / scale, INEQ_TOL, corrupt, t0)


def suite_ineq_3_12(rng, samples, k, corrupt=False):
    t0 = time.perf_counter()
    h = random_sff(rng, samples, trace_free=True)
    b = cdk_bound(h)
    rhs = b.rhs * (0.9 if corrupt else 1.0)
    scale = 1.0 + np.abs(b.rhs)
    return _ineq("ineq_3_12", (rhs - b.lhs) / scale, INEQ_TOL, corrupt, t0)


def _pinching_samples(rng, samples, k, lo):
    # scaled so that a good share of samples satisfies Q <= 0
    h = random_sff(rng, samples) * rng.uniform(0.0, 0.6 * math.sqrt(k), (samples, 1, 1, 1))
    x = rng.uniform(lo, 1.0, samples)
    return h, x


def suite_pinching_chain(rng, samples, k, corrupt=False):
    """Exact reaction plus the gradient allowance never exceeds the stated bound."""
    t0 = time.perf_counter()
    margins, errs = [], []
    for spec in (PinchingSpec.thm32(k), PinchingSpec.thm51(k)):
        h, x = _pinching_samples(rng, samples, k, 1 / math.sqrt(3))
        rb = reaction_rhs(h, x, spec, "Hnonzero")
        lhs = reaction_exact(h, x, spec) + gradient_allowance(x, k)
        if corrupt:
            lhs = lhs + k**2
        scale = 1.0 + np.abs(rb.pre_substitution)
        margins.append((rb.pre_substitution - lhs) / scale)
        # the substitution of |H|^2 is an identity
        errs.append(np.abs(rb.total - rb.pre_substitution) / scale)
    return _ineq("pinching_chain", np.concatenate(margins), INEQ_TOL, corrupt, t0, np.concatenate(errs))


def suite_pinching_remainder(rng, samples, k, corrupt=False):
    """Constant remainder is non-positive above the angle threshold (both branches)."""
    t0 = time.perf_counter()
    margins = []
    for spec in (PinchingSpec.thm32(k), PinchingSpec.thm51(k)):
        lo = 0.85 if corrupt else angle_threshold(spec)
        h, x = _pinching_samples(rng, samples, k, lo)
        rb = reaction_rhs(h, x, spec, "Hnonzero")
        keep = rb.q <= 0
        margins.append(-rb.remainder[keep])
        h0 = h.copy()
        tr = 0.5 * (h0[..., 0, 0] + h0[..., 1, 1])
        h0[..., 0, 0] -= tr
        h0[..., 1, 1] -= tr
        rb0 = reaction_rhs(h0, x, spec, "Hzero")
        margins.append(-rb0.remainder[rb0.q <= 0])
    return _ineq("pinching_remainder", np.concatenate(margins), INEQ_TOL, corrupt, t0)


SUITES: dict[str, Callable] = {
    "curvature_model": suite_curvature_model,
    "ricci": suite_ricci,
    "frame_scalars": suite_frame_scalars,
    "w_norm": suite_w_norm,
    "curvature_reaction": suite_curvature_reaction,
    "ineq_2_5": suite_ineq_2_5,
    "ineq_2_6": suite_ineq_2_6,
    "ineq_3_3": suite_ineq_3_3,
    "ineq_3_10": suite_ineq_3_10,
    "ineq_3_11": suite_ineq_3_11,
    "ineq_3_12": suite_ineq_3_12,
    "pinching_chain": suite_pinching_chain,
    "pinching_remainder": suite_pinching_remainder,
}


def run_suites(samples, seed, k=1.0, corrupt=(), only=None) -> list[SuiteResult]:
    """Run the suites with independent child seeds derived from ``seed``."""
    corrupt = set(corrupt)
    unknown = corrupt - set(SUITES)
    if unknown:
        raise KeyError(f"unknown suites for negative control: {sorted(unknown)}")
    names = list(SUITES) if only is None else list(only)
    children = np.random.SeedSequence(seed).spawn(len(SUITES))
    seeds = dict(zip(SUITES, children))
    out = []
    for name in names:
        rng = np.random.default_rng(seeds[name])
        out.append(SUITES[name](rng, samples, k, name in corrupt))
    return out
