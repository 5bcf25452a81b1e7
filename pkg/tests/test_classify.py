import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sntail.classify import (TO_NEG_INF, TO_POS_INF, TO_ZERO, Parameters, beta_u, boundary_proximity,
                             derive, discriminant, exponent_identity_sides, factorization_sides,
                             limit_classes, marginal_skewness, quantiles, thm3_case)
from sntail.errors import DomainError, UnsupportedParameters

alphas = st.floats(-5, 5, allow_nan=False)
rhos = st.floats(-0.99, 0.99)


@pytest.mark.parametrize("rho", [1.0, -1.0, 1.5])
def test_rho_out_of_range(rho):
    with pytest.raises(DomainError):
        Parameters(0.5, 0.5, rho)


def test_nonfinite_alpha():
    with pytest.raises(DomainError):
        Parameters(math.nan, 0.0, 0.0)


@given(st.floats(-5, 5), rhos)
def test_alpha1_zero_gives_lambda2_alpha2(a2, rho):
    d = derive(Parameters(0.0, a2, rho))
    if abs(a2) > 1e-12:
        assert d.lambda2 == pytest.approx(a2, rel=1e-15)


@given(st.floats(-5, 5).filter(lambda a: abs(a) > 1e-6), rhos)
def test_equal_alphas(a, rho):
    d = derive(Parameters(a, a, rho))
    lam = a * (1 + rho) / math.sqrt(1 + a * a * (1 - rho * rho))
    assert d.lambda1 == pytest.approx(lam, rel=1e-14)
    assert d.lambda2 == pytest.approx(lam, rel=1e-14)


def test_unit_alphas_zero_rho():
    d = derive(Parameters(1.0, 1.0, 0.0))
    assert d.lambda1 == pytest.approx(1 / math.sqrt(2), rel=1e-15)
    assert (d.gamma1, d.gamma2) == pytest.approx((1.0, 1.0))
    assert (d.beta1, d.beta2) == pytest.approx((3.0, 3.0), rel=1e-15)


@settings(max_examples=300)
@given(alphas, alphas, rhos)
def test_derived_invariants(a1, a2, rho):
    p = Parameters(a1, a2, rho)
    d = derive(p)
    l1, l2 = marginal_skewness(a1, a2, rho)
    if d.sign1 != 0:
        assert d.lambda1 == l1
    assert d.gamma1 > 0 and d.gamma2 > 0
    if d.sign1 > 0 and d.sign2 > 0:
        assert d.gamma1 * d.gamma2 == pytest.approx(1.0, rel=1e-14)
    q = 1 - rho * rho
    assert d.beta1 == pytest.approx((d.gamma1 - rho) / q + a1 * (a1 * d.gamma1 + a2), rel=1e-14, abs=1e-14)
    # the alternative closed form of beta_1
    alt = d.gamma1 * (a1 * a1 + 1 / q) + a1 * a2 - rho / q
    assert d.beta1 == pytest.approx(alt, rel=1e-12, abs=1e-12)


@settings(max_examples=500)
@given(alphas.filter(lambda a: a != 0), alphas, rhos)
def test_sign_constraints(a1, a2, rho):
    p = Parameters(a1, a2, rho)
    d = derive(p)
    a_rate, b_rate = d.gamma1 - rho, a1 * d.gamma1 + a2
    assert max(a_rate, b_rate) > 0
    if a_rate <= 0:
        assert a1 > 0 and b_rate > 0
    if d.lambda2 >= 0 or d.b_class.tag in (TO_NEG_INF, TO_ZERO):
        assert d.beta1 > 0
    limit_classes(d, p)


def test_limit_classes_negative_octant():
    p = Parameters(-1.0, -0.5, 0.2)
    a, _ = limit_classes(derive(p), p)
    assert a.tag == TO_NEG_INF


@pytest.mark.parametrize("a", [0.3, 1.0, 2.5])
def test_limit_classes_equal_positive(a):
    p = Parameters(a, a, 0.0)
    _, b = limit_classes(derive(p), p)
    assert b.tag == TO_NEG_INF and b.rate == pytest.approx(2 * a)


def test_limit_classes_gamma_below_rho():
    # found by scanning: lambda1 >> lambda2 > 0 with strong correlation
    p = Parameters(5.0, 0.1, 0.9)
    d = derive(p)
    assert d.gamma1 - p.rho < 0
    a, b = limit_classes(d, p)
    assert a.tag == TO_POS_INF and b.tag == TO_NEG_INF and p.alpha1 > 0


def test_limit_classes_alpha1_zero():
    p = Parameters(0.0, 1.0, 0.3)
    with pytest.raises(UnsupportedParameters):
        limit_classes(derive(p), p)


def test_boundary_flag_forces_zero():
    p = Parameters(-1.0, 2.0, 0.5)
    d = derive(p, ["lambda1"])
    assert d.sign1 == 0 and d.lambda1 == 0.0
    with pytest.raises(DomainError):
        derive(p, ["nonsense"])


def test_beta_u_symmetric_for_equal_alphas():
    p = Parameters(0.7, 0.7, -0.3)
    d = derive(p)
    for lu in (-5.0, -50.0, -500.0):
        assert beta_u(lu, 1, d, p) == pytest.approx(beta_u(lu, 2, d, p), rel=1e-14)


@pytest.mark.parametrize("params", [(1.0, 2.0, 0.3), (-1.0, 0.5, -0.4), (0.5, -2.0, 0.6), (-2.0, -1.0, 0.1)])
def test_beta_u_limit(params):
    p = Parameters(*params)
    d = derive(p)
    assert beta_u(-200.0, 1, d, p) == pytest.approx(d.beta1, rel=0.05)
    # (beta1(u) - beta1) F2^{-1}(u) shrinks like log(-log u)/sqrt(-log u)
    gaps = []
    for lu in (-50.0, -500.0, -5000.0):
        _, f2 = quantiles(lu, p, d)
        gaps.append(abs((beta_u(lu, 1, d, p) - d.beta1) * f2))
        assert gaps[-1] <= 3 * math.log(-lu) / math.sqrt(-lu)
    assert gaps[-1] < gaps[0]


@settings(max_examples=100, deadline=None)
@given(alphas, alphas, rhos, st.floats(-300, -20), st.sampled_from([1, 2]))
def test_exponent_identity(a1, a2, rho, lu, i):
    p = Parameters(a1, a2, rho)
    f1, f2 = quantiles(lu, p, derive(p))
    lhs, rhs = exponent_identity_sides(f1, f2, i, p)
    assert lhs == pytest.approx(rhs, rel=1e-9)


@settings(max_examples=100, deadline=None)
@given(alphas, alphas, rhos, st.floats(-300, -20))
def test_factorization(a1, a2, rho, lu):
    p = Parameters(a1, a2, rho)
    f1, f2 = quantiles(lu, p, derive(p))
    lhs, rhs = factorization_sides(f1, f2, p)
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("params,case", [
    ((-1.0, -0.5, 0.2), "1"),
    ((0.2, -1.0, 0.2), "2"),
    ((0.3, 1.0, -0.5), "3a"),
    ((-2.0, 1.5, 0.5), "3c"),
    ((-1.0, 2.0, 0.5), "4a"),
    ((1.0, 2.0, 0.3), "5"),
    ((2.0, -1.0, 0.2), "swapped-3a"),
    ((0.5, -1.0, 0.5), "2"),
])
def test_thm3_case(params, case):
    p = Parameters(*params)
    assert thm3_case(derive(p), p).thm3_case == case


def test_case_3b_on_the_discriminant():
    # lambda1 < 0 < lambda2 with alpha1 + alpha2 / sqrt(1 + lambda2^2) = 0 solved numerically
    from scipy.optimize import brentq
    rho, a2 = -0.3, 1.5
    a1 = brentq(lambda a: discriminant(derive(Parameters(a, a2, rho)), Parameters(a, a2, rho)), -3.0, 0.0,
                xtol=1e-15)
    p = Parameters(a1, a2, rho)
    d = derive(p, ["discriminant"])
    assert d.sign1 < 0 < d.sign2
    assert thm3_case(d, p).thm3_case == "3b"
    assert "discriminant" in boundary_proximity(derive(p), p)


def test_case_octant_and_group():
    p = Parameters(1.0, 2.0, 0.3)
    tag = thm3_case(derive(p), p)
    assert (tag.octant, tag.group, tag.swapped) == ("(+,+)", "pos/pos", False)


def test_bivariate_normal_is_unsupported():
    p = Parameters(0.0, 0.0, 0.3)
    with pytest.raises(UnsupportedParameters):
        thm3_case(derive(p), p)


def test_swapped_cases_mirror():
    for a1, a2, rho in [(2.0, -1.0, 0.2), (1.0, -3.0, -0.5), (1.0, -0.5, 0.5)]:
        p = Parameters(a1, a2, rho)
        d = derive(p)
        if d.sign1 > 0 >= d.sign2:
            mirror = thm3_case(derive(p.swapped()), p.swapped()).thm3_case
            assert thm3_case(d, p).thm3_case == "swapped-" + mirror
