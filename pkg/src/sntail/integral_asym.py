"""Asymptotics of I(a, b, c) = int_{-inf}^a Phi(x) phi(c x + b) dx as a -> -inf.

Three regimes, keyed by the limit of v = (a(1 + c^2) + c b) / sqrt(1 + c^2),
plus the quadrature oracle and the two reparameterizations of the
conditional probability that feed them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._quadrature import log_quad
from .classify import (TO_NEG_INF, TO_POS_INF, TO_ZERO, DerivedQuantities, Parameters,
                       beta_u_from_quantiles, quantiles)
from .errors import ContractViolation, DomainError
from .sn_special import LOG_SQRT_2PI, LogValue, log_norm_cdf, log_norm_pdf

V_NEG_INF = "v_to_neg_inf"
V_ZERO = "v_to_zero"
V_POS_INF = "v_to_pos_inf"
REGIMES = (V_NEG_INF, V_ZERO, V_POS_INF)
LOG_2PI = 2.0 * LOG_SQRT_2PI
_POLY_TOL = 1e-12


@dataclass(frozen=True)
class Theorem1Input:
    a: float
    b: float
    c: float
    k: float
    regime: str

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise DomainError(f"unknown regime {self.regime!r}")
        for name in ("a", "b", "c", "k"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")

    @property
    def v(self) -> float:
        s = 1.0 + self.c * self.c
        return (self.a * s + self.c * self.b) / math.sqrt(s)

    @property
    def poly(self) -> float:
        """1 + c^2 + c k, whose sign fixes the regime."""
        return 1.0 + self.c * self.c + self.c * self.k


def _check_regime(inp: Theorem1Input) -> None:
    s = 1.0 + inp.c * inp.c
    p = inp.poly
    if inp.regime == V_POS_INF and p > _POLY_TOL * s:
        raise ContractViolation(f"v -> +inf needs 1 + c^2 + c k <= 0, got {p}")
    if inp.regime == V_ZERO and abs(p) > 1e-8 * s:
        raise ContractViolation(f"v -> 0 needs 1 + c^2 + c k = 0, got {p}")
    if inp.regime == V_NEG_INF and p <= 0:
        raise ContractViolation(f"v -> -inf needs 1 + c^2 + c k > 0, got {p}")
    v = inp.v
    if inp.regime == V_NEG_INF and not v < 0:
        raise ContractViolation(f"v = {v} is not negative at this scale")
    if inp.regime == V_POS_INF and not v > 0:
        raise ContractViolation(f"v = {v} is not positive at this scale")


def theorem1_asym(inp: Theorem1Input) -> LogValue:
    """Leading-order asymptotic value of I(a, b, c) in the requested regime."""
    if not inp.a < -2:
        raise DomainError("the asymptotic forms need a < -2")
    _check_regime(inp)
    a, b, c = inp.a, inp.b, inp.c
    s = 1.0 + c * c
    expo = -b * b / (2.0 * s)
    if inp.regime == V_NEG_INF:
        v = inp.v
        return LogValue(expo - 0.5 * v * v - LOG_2PI - 0.5 * math.log(s)
                        - math.log(abs(a)) - math.log(abs(v)))
    ck = abs(c * inp.k)
    if ck == 0:
        raise ContractViolation("c k = 0 is incompatible with a v -> 0 or v -> +inf regime")
    out = 0.5 * math.log(s) + expo - LOG_SQRT_2PI - math.log(abs(a)) - math.log(ck)
    if inp.regime == V_ZERO:
        out -= math.log(2.0)
    return LogValue(out)


def theorem1_asym_zero_alt(a: float, b: float, c: float) -> LogValue:
    """v -> 0 form with |c k| replaced by 1 + c^2."""
    s = 1.0 + c * c
    return LogValue(-b * b / (2.0 * s) - math.log(2.0) - LOG_SQRT_2PI
                    - 0.5 * math.log(s) - math.log(abs(a)))


def _mills_ratio(y: np.ndarray) -> np.ndarray:
    return np.exp(log_norm_pdf(y) - log_norm_cdf(y))


def exact_integral(a: float, b: float, c: float) -> LogValue:
    """Quadrature value of I(a, b, c) = int_{-inf}^a Phi(x) phi(c x + b) dx."""
    if math.isnan(a) or a == -math.inf:
        raise DomainError("upper limit must be finite or +inf")
    if not (math.isfinite(b) and math.isfinite(c)):
        raise DomainError("b and c must be finite")
    if c == 0 and a == math.inf:
        raise DomainError("integral diverges for c = 0 and a = +inf")

    def logf(x):
        return log_norm_cdf(x) + log_norm_pdf(c * x + b)

    def dlogf(x):
        return _mills_ratio(x) - c * (c * x + b)

    return LogValue(log_quad(logf, -math.inf, a, dlogf=dlogf))


def mills_kernel_integral(a: float, b: float, c: float) -> LogValue:
    """I(a, b, c) with Phi(x) replaced by its leading tail form phi(x)/|x| (a < 0)."""
    if not a < 0:
        raise DomainError("the Mills kernel needs a < 0")

    def logf(x):
        return log_norm_pdf(x) - np.log(-x) + log_norm_pdf(c * x + b)

    def dlogf(x):
        return -x - 1.0 / x - c * (c * x + b)

    return LogValue(log_quad(logf, -math.inf, a, dlogf=dlogf))


def sandwich_bounds(a: float, b: float, c: float) -> tuple[LogValue, LogValue]:
    """Lower/upper bounds on the Mills-kernel integral from 1/(1+w) >= exp(-w)."""
    if not a < 0:
        raise DomainError("bounds need a < 0")
    s = 1.0 + c * c
    v = (a * s + c * b) / math.sqrt(s)
    delta = 1.0 / (a * math.sqrt(s))
    pre = -b * b / (2.0 * s) - LOG_SQRT_2PI - 0.5 * math.log(s) - math.log(abs(a))
    lower = pre + 0.5 * (v + delta) ** 2 - 0.5 * v * v + log_norm_cdf(v + delta)
    upper = pre + log_norm_cdf(v)
    return LogValue(lower), LogValue(upper)


# ---------------------------------------------------------------------------
# conditional probability P(Z1 <= F1^{-1}(u) | Z2 = F2^{-1}(u)) via the two routes

def _route_quantities(u_log: float, params: Parameters, d: DerivedQuantities, quants=None):
    if not u_log < 0:
        raise DomainError("u_log must be negative")
    f1, f2 = quants if quants is not None else quantiles(u_log, params, d)
    a1, a2, rho = params.alpha1, params.alpha2, params.rho
    return f1, f2, f1 - rho * f2, a1 * f1 + a2 * f2, math.sqrt(1.0 - rho * rho)


def route1_k(params: Parameters, d: DerivedQuantities) -> float:
    a1, a2, rho = params.alpha1, params.alpha2, params.rho
    return (a2 + rho * a1) * math.sqrt(1.0 - rho * rho) / (d.gamma1 - rho)


def route2_k(params: Parameters, d: DerivedQuantities) -> float:
    a1, a2, rho = params.alpha1, params.alpha2, params.rho
    return -(a2 + rho * a1) / (a1 * math.sqrt(1.0 - rho * rho) * (a1 * d.gamma1 + a2))


def route1_terms(u_log: float, params: Parameters, d: DerivedQuantities, *,
                 exact: bool = False, quants=None) -> tuple[LogValue, LogValue]:
    """(boundary, integral) with P = boundary - integral after integrating by parts.

    The asymptotic boundary follows the limit class of B(u); the integral term
    follows the sign of beta1.  ``exact=True`` evaluates both by quadrature.
    """
    if d.a_class.tag != TO_NEG_INF:
        raise ContractViolation("route 1 needs A1(u) -> -inf")
    if params.alpha1 == 0:
        raise ContractViolation("route 1 needs alpha1 != 0")
    f1, f2, A1, B, sq = _route_quantities(u_log, params, d, quants)
    a1, a2, rho = params.alpha1, params.alpha2, params.rho
    log_phi_l2 = log_norm_cdf(d.lambda2 * f2)
    if exact:
        boundary = LogValue(log_norm_cdf(A1 / sq) + log_norm_cdf(B) - log_phi_l2)
        c = a1 * sq
        core = exact_integral(A1 / sq, (a2 + rho * a1) * f2, c)
        integral = LogValue(math.log(abs(c)) - log_phi_l2, 1 if c > 0 else -1) * core
        return boundary, integral

    base = math.log(sq) - A1 * A1 / (2.0 * sq * sq) - LOG_SQRT_2PI - math.log(abs(A1)) - log_phi_l2
    tag = d.b_class.tag
    if tag == TO_NEG_INF:
        boundary = LogValue(base - 0.5 * B * B - LOG_SQRT_2PI - math.log(abs(B)))
    elif tag == TO_ZERO:
        boundary = LogValue(base - math.log(2.0))
    else:
        boundary = LogValue(base)

    sgn = 1 if a1 > 0 else -1
    la = math.log(abs(a1))
    if d.beta1_sign > 0:
        val = (la + math.log(sq) - A1 * A1 / (2.0 * sq * sq) - 0.5 * B * B - LOG_2PI - log_phi_l2
               - math.log(abs(f2)) - math.log(abs(A1)) - math.log(d.beta1))
    elif d.beta1_sign == 0:
        val = (la + 2.0 * math.log(sq) - 0.5 * (d.lambda2 * f2) ** 2 - math.log(2.0) - LOG_SQRT_2PI
               - log_phi_l2 - math.log(abs(A1)) - 0.5 * math.log(1.0 + a1 * a1 * sq * sq))
    else:
        val = (la - 0.5 * (d.lambda2 * f2) ** 2 - LOG_SQRT_2PI - log_phi_l2
               - math.log(abs(a1 * d.lambda2 * f2)))
    return boundary, LogValue(val, sgn)


def route2_term(u_log: float, params: Parameters, d: DerivedQuantities, *,
                exact: bool = False, quants=None) -> LogValue:
    """The conditional probability through the substitution x = alpha1 z1 + alpha2 F2^{-1}."""
    if not params.alpha1 > 0:
        raise ContractViolation("route 2 needs alpha1 > 0")
    if d.b_class.tag != TO_NEG_INF:
        raise ContractViolation("route 2 needs B(u) -> -inf")
    if not d.beta1 > 0:
        raise ContractViolation(f"route 2 needs beta1 > 0, got {d.beta1}")
    f1, f2, A1, B, sq = _route_quantities(u_log, params, d, quants)
    a1, a2, rho = params.alpha1, params.alpha2, params.rho
    log_phi_l2 = log_norm_cdf(d.lambda2 * f2)
    if exact:
        c = 1.0 / (a1 * sq)
        core = exact_integral(B, -(a2 + rho * a1) * f2 * c, c)
        return core.scale(-math.log(a1 * sq) - log_phi_l2)
    bu = beta_u_from_quantiles(f1, f2, 1, params)
    if not bu > 0:
        raise ContractViolation(f"beta1(u) = {bu} is not positive at this level")
    return LogValue(-A1 * A1 / (2.0 * sq * sq) - 0.5 * B * B - LOG_2PI - math.log(sq) - log_phi_l2
                    - math.log(abs(B)) - math.log(abs(f2)) - math.log(bu))


def theorem1_inputs(u_log: float, params: Parameters, d: DerivedQuantities, route: int,
                    quants=None) -> Theorem1Input:
    """The (a, b, c, k, regime) that a route hands to the integral asymptotics."""
    f1, f2, A1, B, sq = _route_quantities(u_log, params, d, quants)
    a1, a2, rho = params.alpha1, params.alpha2, params.rho
    regime = {1: V_NEG_INF, 0: V_ZERO, -1: V_POS_INF}[d.beta1_sign]
    if route == 1:
        return Theorem1Input(A1 / sq, (a2 + rho * a1) * f2, a1 * sq, route1_k(params, d), regime)
    if route == 2:
        c = 1.0 / (a1 * sq)
        return Theorem1Input(B, -(a2 + rho * a1) * f2 * c, c, route2_k(params, d), regime)
    raise DomainError("route must be 1 or 2")


__all__ = [
    "Theorem1Input", "theorem1_asym", "theorem1_asym_zero_alt", "exact_integral",
    "mills_kernel_integral", "sandwich_bounds", "route1_terms", "route2_term",
    "route1_k", "route2_k", "theorem1_inputs", "V_NEG_INF", "V_ZERO", "V_POS_INF",
    "TO_NEG_INF", "TO_ZERO", "TO_POS_INF",
]
