import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from smcflab.errors import InvalidInputError, InvalidSpecError, WrongBranchError
from smcflab.pinching import (
    PinchingSpec,
    QuadraticSurd,
    angle_threshold,
    angle_threshold_sq,
    auxiliary_function_check,
    gradient_allowance,
    q_value,
    reaction_exact,
    reaction_rhs,
    solve_quadratic,
    threshold_solve,
    threshold_table,
)
from smcflab.sff import random_sff

# Frozen reference values, computed independently (exact surd arithmetic and mpmath).
THM51_ROOT = 0.94660862083  # -70/159 + (25/2544) sqrt(99584/5)
THM51_H0_ROOT = 0.935069137069  # -20/43 + (25/129) sqrt(261/5)
YANG_06 = 0.816496580928  # sqrt(2/3)


def test_spec_constructors():
    assert PinchingSpec.thm32().b == Fraction(1, 2)
    assert PinchingSpec.thm51().b == Fraction(4, 5)
    y = PinchingSpec.yang(Fraction(3, 5))
    assert y.b == Fraction(1, 3) and y.name == "yang0.6"
    with pytest.raises(InvalidSpecError):
        PinchingSpec.yang(0.7)
    with pytest.raises(InvalidSpecError):
        PinchingSpec("thm32", 1.0, b=Fraction(1, 3))


def test_q_on_totally_geodesic_point():
    h = np.zeros((2, 2, 2))
    assert q_value(h, 1.0, PinchingSpec.thm32()) == pytest.approx(-0.5)
    assert q_value(h, 0.5, PinchingSpec.thm51(2.0)) == pytest.approx(-0.8)
    with pytest.raises(InvalidInputError):
        q_value(h, 1.2, PinchingSpec.thm32())


def test_angle_thresholds():
    assert angle_threshold_sq(PinchingSpec.thm32()) == Fraction(5, 6)
    assert angle_threshold(PinchingSpec.thm32()) == pytest.approx(math.sqrt(30) / 6)
    assert angle_threshold(PinchingSpec.thm51()) == pytest.approx(251 / 265)
    assert angle_threshold(PinchingSpec.yang(0.6)) == pytest.approx(YANG_06, abs=1e-9)
    assert angle_threshold_sq(PinchingSpec.yang(Fraction(2, 3))) == Fraction(5, 6)


def test_quadratic_surd_exact_sign():
    r = QuadraticSurd(Fraction(0), Fraction(1), Fraction(2))
    assert r.sign_minus(Fraction(141, 100)) == 1
    assert r.sign_minus(Fraction(142, 100)) == -1
    roots = solve_quadratic(Fraction(1), Fraction(0), Fraction(-2))
    assert sorted(float(x) for x in roots) == pytest.approx([-math.sqrt(2), math.sqrt(2)])


def test_threshold_cases():
    b = threshold_solve("Thm32_b")
    assert b.root == pytest.approx(0.5) and b.certified
    for case in ("Thm32_angle", "Thm32_Hzero"):
        assert threshold_solve(case).root_exact == "5/6"
    r = threshold_solve("Thm51_Hnonzero")
    assert r.root == pytest.approx(THM51_ROOT, abs=1e-10)
    assert r.stated_bound == Fraction(251, 265) and r.margin > 0 and r.certified
    r0 = threshold_solve("Thm51_Hzero")
    assert r0.root == pytest.approx(THM51_H0_ROOT, abs=1e-10)
    assert r0.stated_bound == Fraction(121, 129) and r0.margin > 0 and r0.certified


def test_threshold_table_has_family_rows():
    rows = threshold_table([Fraction(1, 2), Fraction(3, 5), Fraction(2, 3)])
    by_case = {r["case"]: r for r in rows}
    assert by_case["Yang_lam=2/3"]["root_exact"] == "5/6"
    assert float(by_case["Yang_lam=3/5"]["stated_bound_float"]) == pytest.approx(YANG_06, abs=1e-9)


@given(st.floats(0, 1))
@settings(max_examples=50, deadline=None)
def test_gradient_allowance_nonnegative(x):
    assert gradient_allowance(x, 1.0) >= 0


def test_reaction_rhs_branches_and_family(rng):
    h = random_sff(rng, 5)
    with pytest.raises(NotImplementedError):
        reaction_rhs(h, np.ones(5), PinchingSpec.yang(0.6))
    h0 = random_sff(rng, 5, trace_free=True)
    with pytest.raises(WrongBranchError):
        reaction_rhs(h0, np.ones(5), PinchingSpec.thm32(), "Hnonzero")
    with pytest.raises(WrongBranchError):
        reaction_rhs(h, np.ones(5), PinchingSpec.thm32(), "Hzero")


@pytest.mark.parametrize("spec", [PinchingSpec.thm32(), PinchingSpec.thm51(), PinchingSpec.thm32(2.5)])
def test_reaction_decomposition_is_identity(rng, spec):
    h = random_sff(rng, 500)
    x = rng.uniform(0.6, 1.0, 500)
    rb = reaction_rhs(h, x, spec, "Hnonzero")
    assert np.abs(rb.total - rb.pre_substitution).max() < 1e-9 * (1 + np.abs(rb.pre_substitution).max())
    assert np.all(rb.square <= 0)
    # exact reaction plus gradient allowance never exceeds the bound
    assert np.all(reaction_exact(h, x, spec) + gradient_allowance(x, spec.k) <= rb.pre_substitution + 1e-9)


@pytest.mark.parametrize("spec", [PinchingSpec.thm32(), PinchingSpec.thm51()])
def test_remainder_nonpositive_above_threshold(rng, spec):
    h = random_sff(rng, 4000) * rng.uniform(0, 0.6, (4000, 1, 1, 1))
    x = rng.uniform(angle_threshold(spec), 1.0, 4000)
    rb = reaction_rhs(h, x, spec, "Hnonzero")
    assert np.all(rb.remainder[rb.q <= 0] <= 1e-10)


def test_auxiliary_functions():
    exp = auxiliary_function_check("exp")
    lin = auxiliary_function_check("linear")
    const = auxiliary_function_check("constant")
    assert exp.passed and lin.passed and not const.passed
    assert exp.x.size == 1000 and exp.x[0] == pytest.approx(math.sqrt(30) / 6)
    assert exp.sup_over_inf == pytest.approx(1.5057, abs=1e-3)


def test_auxiliary_table_input_matches_closed_form():
    x = np.linspace(0.9, 1.0, 200)
    rep = auxiliary_function_check((x, np.exp(-8 * x**2 + 20 * x)))
    assert rep.passed
    with pytest.raises(InvalidInputError):
        auxiliary_function_check((x[100:], x[100:]))
    with pytest.raises(InvalidInputError):
        auxiliary_function_check("cubic")
