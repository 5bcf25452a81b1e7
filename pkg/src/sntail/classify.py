"""Scalar quantities derived from (alpha1, alpha2, rho) and regime classification."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InternalConsistencyError, UnsupportedParameters
from .sn_special import ZERO_TOL, quantile_coefficients, sn_quantile

BOUNDARY_NAMES = ("lambda1", "lambda2", "beta1", "discriminant")

TO_NEG_INF = "to_neg_infinity"
TO_ZERO = "to_zero"
TO_POS_INF = "to_pos_infinity"


@dataclass(frozen=True)
class Parameters:
    alpha1: float
    alpha2: float
    rho: float

    def __post_init__(self):
        for name in ("alpha1", "alpha2", "rho"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise DomainError(f"{name} must be a finite real, got {v!r}")
        if not -1.0 < self.rho < 1.0:
            raise DomainError(f"rho must lie in (-1, 1), got {self.rho}")

    def swapped(self) -> "Parameters":
        return Parameters(self.alpha2, self.alpha1, self.rho)


@dataclass(frozen=True)
class LimitClass:
    tag: str
    rate: float

    @classmethod
    def from_rate(cls, rate: float, force_zero: bool = False) -> "LimitClass":
        if force_zero or abs(rate) < ZERO_TOL:
            return cls(TO_ZERO, 0.0 if force_zero else rate)
        return cls(TO_NEG_INF if rate > 0 else TO_POS_INF, rate)


@dataclass(frozen=True)
class DerivedQuantities:
    lambda1: float
    lambda2: float
    gamma1: float
    gamma2: float
    c11: float
    c12: float
    c21: float
    c22: float
    beta1: float
    beta2: float
    a_class: LimitClass
    b_class: LimitClass
    k1: tuple[float, float, float]
    k2: tuple[float, float, float]
    sign1: int
    sign2: int
    beta1_sign: int
    boundary: frozenset = field(default_factory=frozenset)

    @property
    def lambda_signs(self) -> tuple[int, int]:
        return self.sign1, self.sign2


@dataclass(frozen=True)
class CaseTag:
    octant: str
    group: str
    thm3_case: str

    @property
    def swapped(self) -> bool:
        return self.thm3_case.startswith("swapped-")


def marginal_skewness(alpha1: float, alpha2: float, rho: float) -> tuple[float, float]:
    l1 = (alpha1 + rho * alpha2) / math.sqrt(1.0 + alpha2 * alpha2 * (1.0 - rho * rho))
    l2 = (alpha2 + rho * alpha1) / math.sqrt(1.0 + alpha1 * alpha1 * (1.0 - rho * rho))
    return l1, l2


def _sign(x: float, force_zero: bool = False) -> int:
    if force_zero or abs(x) < ZERO_TOL:
        return 0
    return 1 if x > 0 else -1


# Quantile-ratio table keyed by (sign of lambda_i, sign of lambda_{3-i});
# entries give (gamma_i, C_{i,1}, C_{i,2}) as closed forms in (li, lj).
RATIO_TABLE = {
    (1, 1): lambda li, lj: (math.sqrt((1 + lj * lj) / (1 + li * li)), 0.0, math.log(li / lj) / 2),
    (-1, 1): lambda li, lj: (math.sqrt(1 + lj * lj), -0.25, -math.log(2 * lj * math.sqrt(math.pi)) / 2),
    (1, -1): lambda li, lj: (1 / math.sqrt(1 + li * li), 0.25, math.log(2 * li * math.sqrt(math.pi)) / 2),
    (0, 1): lambda li, lj: (math.sqrt(1 + lj * lj), -0.25, -math.log(lj * math.sqrt(math.pi)) / 2),
    (1, 0): lambda li, lj: (1 / math.sqrt(1 + li * li), 0.25, math.log(li * math.sqrt(math.pi)) / 2),
    (-1, -1): lambda li, lj: (1.0, 0.0, 0.0),
    (-1, 0): lambda li, lj: (1.0, 0.0, -math.log(2) / 2),
    (0, -1): lambda li, lj: (1.0, 0.0, math.log(2) / 2),
}


def ratio_coefficients(li: float, lj: float, si: int, sj: int) -> tuple[float, float, float]:
    """(gamma_i, C_{i,1}, C_{i,2}) for F_i^{-1}/F_j^{-1}; signs si, sj already decided."""
    if si == 0 and sj == 0:
        return 1.0, 0.0, 0.0
    return RATIO_TABLE[(si, sj)](li, lj)


def derive(params: Parameters, boundary=()) -> DerivedQuantities:
    """All scalar limits for the parameter set; ``boundary`` names forced zeros."""
    boundary = frozenset(boundary)
    unknown = boundary - set(BOUNDARY_NAMES)
    if unknown:
        raise DomainError(f"unknown boundary flags: {sorted(unknown)}")
    a1, a2, rho = params.alpha1, params.alpha2, params.rho
    if not -1.0 < rho < 1.0:
        raise DomainError("rho must lie in (-1, 1)")
    l1, l2 = marginal_skewness(a1, a2, rho)
    s1 = _sign(l1, "lambda1" in boundary)
    s2 = _sign(l2, "lambda2" in boundary)
    if s1 == 0:
        l1 = 0.0
    if s2 == 0:
        l2 = 0.0
    g1, c11, c12 = ratio_coefficients(l1, l2, s1, s2)
    g2, c21, c22 = ratio_coefficients(l2, l1, s2, s1)
    q = 1.0 - rho * rho
    b1 = (g1 - rho) / q + a1 * (a1 * g1 + a2)
    b2 = (g2 - rho) / q + a2 * (a2 * g2 + a1)
    a_class = LimitClass.from_rate(g1 - rho)
    b_class = LimitClass.from_rate(a1 * g1 + a2, "discriminant" in boundary)
    return DerivedQuantities(
        lambda1=l1, lambda2=l2, gamma1=g1, gamma2=g2,
        c11=c11, c12=c12, c21=c21, c22=c22, beta1=b1, beta2=b2,
        a_class=a_class, b_class=b_class,
        k1=quantile_coefficients(l1, s1 == 0), k2=quantile_coefficients(l2, s2 == 0),
        sign1=s1, sign2=s2, beta1_sign=_sign(b1, "beta1" in boundary),
        boundary=boundary,
    )


def limit_classes(d: DerivedQuantities, params: Parameters) -> tuple[LimitClass, LimitClass]:
    """Limit classes of A1(u) and B(u), with the sign guard on alpha1 != 0."""
    if params.alpha1 == 0:
        raise UnsupportedParameters("alpha1 = 0 has a closed form; no limit classes needed")
    a, b = d.a_class, d.b_class
    if a.tag != TO_NEG_INF and b.tag != TO_NEG_INF:
        raise InternalConsistencyError(
            f"neither A1 nor B tends to -inf (rates {a.rate}, {b.rate})")
    if a.tag != TO_NEG_INF and not (params.alpha1 > 0 and b.tag == TO_NEG_INF):
        raise InternalConsistencyError("gamma1 - rho <= 0 without alpha1 > 0 and B -> -inf")
    return a, b


def quantiles(u_log, params: Parameters, d: DerivedQuantities):
    """(F1^{-1}(u), F2^{-1}(u)) using the classified skewness values."""
    return sn_quantile(u_log, d.lambda1), sn_quantile(u_log, d.lambda2)


def beta_u_from_quantiles(f1, f2, i: int, params: Parameters):
    a1, a2, rho = params.alpha1, params.alpha2, params.rho
    q = 1.0 - rho * rho
    if i == 1:
        return (f1 / f2) * (a1 * a1 + 1.0 / q) + a1 * a2 - rho / q
    if i == 2:
        return (f2 / f1) * (a2 * a2 + 1.0 / q) + a1 * a2 - rho / q
    raise DomainError("index must be 1 or 2")


def beta_u(u_log, i: int, d: DerivedQuantities, params: Parameters):
    """beta_i(u) evaluated with exact quantiles."""
    if np.any(np.asarray(u_log) >= 0):
        raise DomainError("u_log must be negative")
    f1, f2 = quantiles(u_log, params, d)
    return beta_u_from_quantiles(f1, f2, i, params)


def discriminant(d: DerivedQuantities, params: Parameters) -> float:
    """alpha1 + alpha2 / sqrt(1 + lambda2^2)."""
    return params.alpha1 + params.alpha2 / math.sqrt(1.0 + d.lambda2 * d.lambda2)


_SIGN_CHAR = {-1: "-", 0: "0", 1: "+"}


def _group(s1: int, s2: int) -> str:
    if s1 > 0 and s2 > 0:
        return "pos/pos"
    if s1 <= 0 < s2:
        return "nonpos/pos"
    if s1 > 0 >= s2:
        return "pos/nonpos"
    return "nonpos/nonpos"


def _case(s1: int, s2: int, disc_sign: int) -> str:
    sub = {1: "a", 0: "b", -1: "c"}
    if s1 < 0 and s2 < 0:
        return "1"
    if s1 == 0 and s2 < 0:
        return "2"
    if s1 < 0 and s2 > 0:
        return "3" + sub[disc_sign]
    if s1 == 0 and s2 > 0:
        return "4" + sub[disc_sign]
    if s1 > 0 and s2 > 0:
        return "5"
    raise UnsupportedParameters("both marginal skewness values are zero")


def thm3_case(d: DerivedQuantities, params: Parameters) -> CaseTag:
    """Case label; lambda1 > 0 >= lambda2 maps to the mirrored label."""
    if params.alpha1 == 0 and params.alpha2 == 0:
        raise UnsupportedParameters("alpha1 = alpha2 = 0 (bivariate normal) is outside the covered cases")
    s1, s2 = d.sign1, d.sign2
    octant = f"({_SIGN_CHAR[s1]},{_SIGN_CHAR[s2]})"
    group = _group(s1, s2)
    forced = "discriminant" in d.boundary
    if s1 > 0 >= s2:
        # mirror: roles of the indices are exchanged
        dm = derive(params.swapped(), _swap_boundary(d.boundary))
        disc = _sign(discriminant(dm, params.swapped()), forced)
        return CaseTag(octant, group, "swapped-" + _case(s2, s1, disc))
    disc = _sign(discriminant(d, params), forced)
    return CaseTag(octant, group, _case(s1, s2, disc))


def _swap_boundary(boundary: frozenset) -> frozenset:
    m = {"lambda1": "lambda2", "lambda2": "lambda1"}
    return frozenset(m.get(b, b) for b in boundary)


def boundary_proximity(d: DerivedQuantities, params: Parameters, factor: float = 10.0) -> list[str]:
    """Names of classifier inputs lying within factor * tolerance of zero."""
    eps = factor * ZERO_TOL
    l1, l2 = marginal_skewness(params.alpha1, params.alpha2, params.rho)
    checks = {
        "lambda1": l1,
        "lambda2": l2,
        "gamma1-rho": d.gamma1 - params.rho,
        "alpha1*gamma1+alpha2": params.alpha1 * d.gamma1 + params.alpha2,
        "beta1": d.beta1,
        "discriminant": discriminant(d, params),
    }
    return [k for k, v in checks.items() if abs(v) < eps]


def exponent_identity_sides(f1, f2, i: int, params: Parameters):
    """Both sides of lambda_{3-i}^2 F_{3-i}^2 + c_i (beta_i(u) F_{3-i})^2 = A_i^2/(1-rho^2) + B^2."""
    a1, a2, rho = params.alpha1, params.alpha2, params.rho
    q = 1.0 - rho * rho
    l1, l2 = marginal_skewness(a1, a2, rho)
    ai = a1 if i == 1 else a2
    fi, fj = (f1, f2) if i == 1 else (f2, f1)
    lj = l2 if i == 1 else l1
    bu = beta_u_from_quantiles(f1, f2, i, params)
    lhs = lj * lj * fj * fj + (q / (1.0 + ai * ai * q)) * (bu * fj) ** 2
    b = a1 * f1 + a2 * f2
    rhs = (fi - rho * fj) ** 2 / q + b * b
    return lhs, rhs


def factorization_sides(f1, f2, params: Parameters):
    """-A1^2/(1-rho^2) + lambda2^2 F2^2 and its two-factor product form."""
    a1, a2, rho = params.alpha1, params.alpha2, params.rho
    q = 1.0 - rho * rho
    _, l2 = marginal_skewness(a1, a2, rho)
    A1 = f1 - rho * f2
    b = a1 * f1 + a2 * f2
    bu = beta_u_from_quantiles(f1, f2, 1, params)
    r = math.sqrt(q) / math.sqrt(1.0 + a1 * a1 * q)
    s = math.sqrt(1.0 + a1 * a1 * q)
    lhs = -A1 * A1 / q + l2 * l2 * f2 * f2
    rhs = (b + r * bu * f2) * ((s - a1 * math.sqrt(q)) * b / s - r * A1 / q)
    return lhs, rhs
