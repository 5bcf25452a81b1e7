"""P(Z1 <= F1^{-1}(u) | Z2 = F2^{-1}(u)) and its index-swapped twin.

These are the two summands of dC(u, u)/du for the bivariate skew-normal copula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._quadrature import log_quad
from .classify import (TO_NEG_INF, TO_POS_INF, TO_ZERO, DerivedQuantities, Parameters,
                       _swap_boundary, derive, marginal_skewness)
from .errors import ContractViolation, DomainError, InternalConsistencyError
from .sn_special import LOG_SQRT_2PI, LogValue, log_norm_cdf, log_norm_pdf, sn_quantile

LOG_2PI = 2.0 * LOG_SQRT_2PI


@dataclass(frozen=True)
class CondQuery:
    u_log: float
    which: int
    params: Parameters

    def __post_init__(self):
        if not (math.isfinite(self.u_log) and self.u_log < 0):
            raise DomainError(f"u_log must be finite and negative, got {self.u_log}")
        if self.which not in (1, 2):
            raise DomainError("which must be 1 or 2")

    def oriented(self) -> Parameters:
        """Parameters with the conditioned coordinate in slot 2."""
        return self.params if self.which == 1 else self.params.swapped()


def exact_quantiles(u_log: float, params: Parameters) -> tuple[float, float]:
    l1, l2 = marginal_skewness(params.alpha1, params.alpha2, params.rho)
    return float(sn_quantile(u_log, l1)), float(sn_quantile(u_log, l2))


def cond_prob_exact(q: CondQuery, quants=None) -> LogValue:
    """Quadrature value of the conditional probability (log domain)."""
    p = q.oriented()
    a1, a2, rho = p.alpha1, p.alpha2, p.rho
    f1, f2 = quants if quants is not None else exact_quantiles(q.u_log, p)
    sq = math.sqrt(1.0 - rho * rho)
    if a1 == 0:
        return LogValue(log_norm_cdf((f1 - rho * f2) / sq))
    _, l2 = marginal_skewness(a1, a2, rho)
    mu = rho * f2

    def logf(z):
        return log_norm_pdf((z - mu) / sq) + log_norm_cdf(a1 * z + a2 * f2)

    def dlogf(z):
        y = a1 * z + a2 * f2
        return -(z - mu) / (sq * sq) + a1 * np.exp(log_norm_pdf(y) - log_norm_cdf(y))

    core = log_quad(logf, -math.inf, f1, dlogf=dlogf)
    return LogValue(core - math.log(sq) - log_norm_cdf(l2 * f2))


def oriented_derived(q: CondQuery, d: DerivedQuantities | None = None) -> DerivedQuantities:
    if d is None:
        return derive(q.oriented())
    if q.which == 1:
        return d
    return derive(q.oriented(), _swap_boundary(d.boundary))


def cond_prob_asym(q: CondQuery, d: DerivedQuantities | None = None, quants=None) -> LogValue:
    """Leading-order value, branch chosen by the limit class of B(u).

    ``d`` describes the unswapped parameters; which=2 re-derives the swap.
    """
    p = q.oriented()
    do = oriented_derived(q, d)
    a1, a2, rho = p.alpha1, p.alpha2, p.rho
    if a1 == 0:
        raise ContractViolation("the integrated coordinate has zero alpha; use the closed form")
    if quants is None:
        f1, f2 = float(sn_quantile(q.u_log, do.lambda1)), float(sn_quantile(q.u_log, do.lambda2))
    else:
        f1, f2 = quants
    q2 = 1.0 - rho * rho
    A1 = f1 - rho * f2
    B = a1 * f1 + a2 * f2
    log_phi = log_norm_cdf(do.lambda2 * f2)
    tag = do.b_class.tag
    if tag == TO_NEG_INF:
        if not do.beta1 > 0:
            raise ContractViolation(f"B -> -inf requires beta1 > 0, got {do.beta1}")
        return LogValue(-A1 * A1 / (2 * q2) - 0.5 * B * B - LOG_2PI - 0.5 * math.log(q2)
                        - math.log(do.beta1) - math.log(abs(f2)) - log_phi - math.log(abs(B)))
    if do.a_class.tag != TO_NEG_INF:
        raise InternalConsistencyError("B does not tend to -inf, so A1 must")
    out = 0.5 * math.log(q2) - A1 * A1 / (2 * q2) - LOG_SQRT_2PI - math.log(abs(A1)) - log_phi
    if tag == TO_ZERO:
        out -= math.log(2.0)
    elif tag != TO_POS_INF:
        raise InternalConsistencyError(f"unknown limit class {tag}")
    return LogValue(out)


def theorem2_branch(q: CondQuery, d: DerivedQuantities | None = None) -> str:
    tag = oriented_derived(q, d).b_class.tag
    return {TO_NEG_INF: "a", TO_ZERO: "b", TO_POS_INF: "c"}[tag]


def log_dcdu_exact(u_log: float, params: Parameters) -> tuple[float, float, float]:
    """(log dC/du, log summand 1, log summand 2) by quadrature."""
    f1, f2 = exact_quantiles(u_log, params)
    s1 = cond_prob_exact(CondQuery(u_log, 1, params), (f1, f2))
    s2 = cond_prob_exact(CondQuery(u_log, 2, params), (f2, f1))
    return (s1 + s2).log_v, s1.log_v, s2.log_v


__all__ = ["CondQuery", "cond_prob_exact", "cond_prob_asym", "theorem2_branch",
           "log_dcdu_exact", "exact_quantiles", "oriented_derived"]
