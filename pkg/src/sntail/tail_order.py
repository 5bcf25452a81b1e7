"""Regular-variation algebra and assembly of the lower-tail order.

Every asymptotic quantity is carried as tau1 * u^theta * (-log u)^tau2,
stored as (theta, log tau1, tau2).  Constants are composed from the
building blocks below, never copied from closed-form case tables; the
tabulated closed forms are available separately for audit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .classify import (TO_NEG_INF, TO_POS_INF, TO_ZERO, CaseTag, DerivedQuantities,
                       Parameters, _swap_boundary, boundary_proximity, derive, discriminant,
                       thm3_case)
from .conditional import log_dcdu_exact
from .errors import ContractViolation, InternalConsistencyError, NumericalError, UnsupportedParameters
from .sn_special import LOG_SQRT_2PI

SQRT2 = math.sqrt(2.0)
EXTRAPOLATION_WARNING = "extrapolated beyond paper scope: alpha1 = alpha2 = 0 (bivariate normal)"


@dataclass(frozen=True)
class RvForm:
    theta: float
    log_tau1: float
    tau2: float

    @classmethod
    def const(cls, log_c: float) -> "RvForm":
        return cls(0.0, log_c, 0.0)

    def __mul__(self, other: "RvForm") -> "RvForm":
        return RvForm(self.theta + other.theta, self.log_tau1 + other.log_tau1, self.tau2 + other.tau2)

    def __truediv__(self, other: "RvForm") -> "RvForm":
        return RvForm(self.theta - other.theta, self.log_tau1 - other.log_tau1, self.tau2 - other.tau2)

    def scale(self, log_c: float) -> "RvForm":
        return RvForm(self.theta, self.log_tau1 + log_c, self.tau2)

    def evaluate(self, u_log):
        """log of tau1 * u^theta * (-log u)^tau2."""
        lu = np.asarray(u_log, dtype=float)
        out = self.log_tau1 + self.theta * lu + self.tau2 * np.log(-lu)
        return float(out) if out.ndim == 0 else out

    def as_dict(self) -> dict:
        return {"theta": self.theta, "log_tau1": self.log_tau1, "tau2": self.tau2}


def rv_sum(x: RvForm, y: RvForm, tol: float = 1e-12) -> RvForm:
    """Leading term of x + y as u -> 0+."""
    if abs(x.theta - y.theta) > tol * max(1.0, abs(x.theta)):
        return x if x.theta < y.theta else y
    if abs(x.tau2 - y.tau2) > tol * max(1.0, abs(x.tau2)):
        return x if x.tau2 > y.tau2 else y
    return RvForm(x.theta, float(np.logaddexp(x.log_tau1, y.log_tau1)), x.tau2)


@dataclass(frozen=True)
class TailOrderResult:
    kappa: float
    dcdu: RvForm
    lambdaL: RvForm
    case: CaseTag
    summand1: RvForm
    summand2: RvForm
    warnings: tuple = field(default_factory=tuple)


def rv_form(g1: float, g2: float, d: DerivedQuantities) -> RvForm:
    """RV form of exp(-(g1 F1^{-1}(u) - g2 F2^{-1}(u))^2 / 2)."""
    k21, k22, k23 = d.k2
    dd = g1 * d.gamma1 - g2
    k = k21 * k21
    return RvForm(
        theta=k * dd * dd,
        log_tau1=2.0 * (k * k23 * dd * dd + k * d.c12 * g1 * d.gamma1 * dd),
        tau2=2.0 * (k * k22 * dd * dd + k * d.c11 * g1 * d.gamma1 * dd),
    )


def _sqrt_amp(coef: float) -> RvForm:
    # |coef| * sqrt(-2 log u)
    return RvForm(0.0, math.log(abs(coef)) + 0.5 * math.log(2.0), 0.5)


def amplitude_prefactors(d: DerivedQuantities, params: Parameters) -> dict:
    """RV forms of |F2^{-1}|, |A1|, |B| and Phi(lambda2 F2^{-1}) for the oriented parameters."""
    a1, a2, rho = params.alpha1, params.alpha2, params.rho
    k21 = d.k2[0]
    out = {"abs_F2": _sqrt_amp(k21)}
    if d.gamma1 - rho != 0:
        out["abs_A1"] = _sqrt_amp(k21 * (d.gamma1 - rho))
    rate_b = a1 * d.gamma1 + a2
    if d.b_class.tag != TO_ZERO and rate_b != 0:
        out["abs_B"] = _sqrt_amp(k21 * rate_b)
    if d.sign2 < 0:
        out["Phi_l2F2"] = RvForm.const(0.0)
    elif d.sign2 == 0:
        out["Phi_l2F2"] = RvForm.const(-math.log(2.0))
    else:
        l2 = d.lambda2
        # phi(l2 F2) / |l2 F2|
        out["Phi_l2F2"] = (rv_form(0.0, -l2, d).scale(-LOG_SQRT_2PI)
                           / _sqrt_amp(l2 * k21))
    return out


def _summand_oriented(params: Parameters, d: DerivedQuantities) -> RvForm:
    a1, a2, rho = params.alpha1, params.alpha2, params.rho
    q = 1.0 - rho * rho
    sq = math.sqrt(q)
    amp = amplitude_prefactors(d, params)
    e_a = rv_form(1.0 / sq, rho / sq, d)
    if a1 == 0:
        # exact closed form Phi(A1 / sqrt(1 - rho^2)) in its Mills form
        if d.a_class.tag != TO_NEG_INF:
            raise InternalConsistencyError("alpha1 = 0 requires A1 -> -inf")
        return (e_a / amp["abs_A1"]).scale(0.5 * math.log(q) - LOG_SQRT_2PI)
    tag = d.b_class.tag
    if tag == TO_NEG_INF:
        if not d.beta1 > 0:
            raise ContractViolation(f"B -> -inf requires beta1 > 0, got {d.beta1}")
        e_b = rv_form(a1, -a2, d)
        den = amp["abs_F2"] * amp["Phi_l2F2"] * amp["abs_B"]
        return (e_a * e_b / den).scale(-2.0 * LOG_SQRT_2PI - 0.5 * math.log(q) - math.log(d.beta1))
    if d.a_class.tag != TO_NEG_INF:
        raise InternalConsistencyError("B does not tend to -inf, so A1 must")
    out = (e_a / (amp["abs_A1"] * amp["Phi_l2F2"])).scale(0.5 * math.log(q) - LOG_SQRT_2PI)
    if tag == TO_ZERO:
        out = out.scale(-math.log(2.0))
    elif tag != TO_POS_INF:
        raise InternalConsistencyError(f"unknown limit class {tag}")
    return out


def summand_rv(i: int, params: Parameters, d: DerivedQuantities | None = None) -> RvForm:
    """RV form of P(Z_i <= F_i^{-1}(u) | Z_{3-i} = F_{3-i}^{-1}(u))."""
    if params.alpha1 == 0 and params.alpha2 == 0:
        raise UnsupportedParameters("alpha1 = alpha2 = 0 is outside the covered cases")
    boundary = d.boundary if d is not None else frozenset()
    if i == 1:
        return _summand_oriented(params, d if d is not None else derive(params))
    if i == 2:
        p = params.swapped()
        return _summand_oriented(p, derive(p, _swap_boundary(boundary)))
    raise ValueError("i must be 1 or 2")


def _normal_summand(params: Parameters) -> RvForm:
    d = derive(params)
    return _summand_oriented(params, d)


def dcopula_rv(params: Parameters, d: DerivedQuantities | None = None) -> RvForm:
    """RV form of dC(u, u)/du, the sum of both conditional summands."""
    s1, s2 = _summands(params, d)
    return rv_sum(s1, s2)


def _summands(params: Parameters, d: DerivedQuantities | None):
    if params.alpha1 == 0 and params.alpha2 == 0:
        s = _normal_summand(params)
        return s, s
    return summand_rv(1, params, d), summand_rv(2, params, d)


def tail_dependence_asym(params: Parameters, boundary=()) -> TailOrderResult:
    """Tail order and the RV forms of dC(u,u)/du and lambda_L(u) = C(u,u)/u."""
    d = derive(params, boundary)
    warnings = []
    if params.alpha1 == 0 and params.alpha2 == 0:
        case = CaseTag("(0,0)", "nonpos/nonpos", "1")
        warnings.append(EXTRAPOLATION_WARNING)
    else:
        case = thm3_case(d, params)
        if params.alpha1 == 0 or params.alpha2 == 0:
            warnings.append("closed-form path: a zero alpha makes one summand a normal cdf")
    near = boundary_proximity(d, params)
    if near:
        warnings.append("near classification boundary: " + ", ".join(near))
    s1, s2 = _summands(params, d)
    dcdu = rv_sum(s1, s2)
    if not dcdu.theta > 0:
        raise InternalConsistencyError(f"composed theta = {dcdu.theta} is not positive")
    lam = dcdu.scale(-math.log(dcdu.theta + 1.0))
    return TailOrderResult(kappa=dcdu.theta + 1.0, dcdu=dcdu, lambdaL=lam, case=case,
                           summand1=s1, summand2=s2, warnings=tuple(warnings))


def fit_log_curve(u_log, log_vals) -> tuple[float, float, float]:
    """Least-squares (theta, tau2, rms residual) for log_vals ~ theta*u_log + tau2*log(-u_log) + c."""
    lu = np.asarray(u_log, dtype=float)
    y = np.asarray(log_vals, dtype=float)
    if lu.size < 4 or lu.size != y.size:
        raise NumericalError("need at least four grid points", {"n": int(lu.size)})
    x = np.column_stack([lu, np.log(-lu), np.ones_like(lu)])
    coef, _, rank, sv = np.linalg.lstsq(x, y, rcond=None)
    if rank < 3:
        raise NumericalError("singular design matrix", {"rank": int(rank), "singular_values": sv.tolist()})
    resid = y - x @ coef
    return float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(resid * resid)))


def empirical_exponent_fit(params: Parameters, u_log_grid) -> tuple[float, float, float]:
    """Fit (theta, tau2) to the quadrature values of log dC(u,u)/du on the grid."""
    grid = np.asarray(list(u_log_grid), dtype=float)
    if grid.size < 4:
        raise NumericalError("need at least four grid points", {"n": int(grid.size)})
    if np.any(grid > -20):
        raise NumericalError("grid points must satisfy u_log <= -20", {"max": float(grid.max())})
    vals = [log_dcdu_exact(float(lu), params)[0] for lu in grid]
    return fit_log_curve(grid, vals)


# ---------------------------------------------------------------------------
# closed-form case table, transcribed literally for comparison only

def printed_case_values(params: Parameters, boundary=()) -> dict:
    """(theta, tau2, log_tau1) as given by the closed-form case table.

    ``log_tau1`` is None where the tabulated constant cannot be evaluated
    without choosing between readings of a malformed token.
    """
    d = derive(params, boundary)
    case = thm3_case(d, params).thm3_case
    p = params
    if case.startswith("swapped-"):
        p = params.swapped()
        d = derive(p, _swap_boundary(frozenset(boundary)))
        case = case[len("swapped-"):]
    a1, a2, rho = p.alpha1, p.alpha2, p.rho
    q = 1.0 - rho * rho
    lp, lpi = math.log, math.log(math.pi)
    out = {"case": case, "theta": None, "tau2": None, "log_tau1": None}
    if case in ("1", "2"):
        out["theta"] = (1 - rho) / (1 + rho)
        out["tau2"] = -rho / (1 + rho)
        lt = 0.5 * lp((1 + rho) / (1 - rho)) - rho / (1 + rho) * lpi
        if case == "2":
            lt += lp(2.0) / (1 + rho)
        out["log_tau1"] = lt
        return out
    l1, l2 = d.lambda1, d.lambda2
    if case == "5":
        s1, s2 = math.sqrt(1 + l1 * l1), math.sqrt(1 + l2 * l2)
        m = a1 / s1 + a2 / s2
        th = (1 / s2 - rho / s1) ** 2 / q + m * m - l1 * l1 / (s1 * s1)
        out["theta"], out["tau2"] = th, th - 0.5
        e1 = (1 / s1 - rho / s2) / (q * s1) + (a1 / s1) * m
        e2 = (1 / s2 - rho / s1) / (q * s2) + (a2 / s2) * m
        out["log_tau1"] = (lp(1 / d.beta1 + 1 / d.beta2) + (th - 0.5) * lp(2 * math.pi)
                           - 0.5 * lp(2 * q) - lp(abs(m)) + e1 * lp(l1) + e2 * lp(l2))
        return out
    s = math.sqrt(1 + l2 * l2)
    qq = (1 / s - rho) ** 2 / q
    dd = a1 + a2 / s
    e = (1 / s - rho) / (2 * q * s)
    if case[1] == "a":
        out["theta"] = qq + dd * dd
        out["tau2"] = qq / 2 + e + dd * dd - a1 * dd / 2 - 1
    else:
        out["theta"] = qq
        out["tau2"] = qq / 2 + e - 0.5
    if case == "3a":
        out["log_tau1"] = ((dd * dd - a1 * dd + e) * lp(2 * l2) - lp(4 * math.sqrt(q) * abs(dd))
                           + (dd * dd - a1 * dd / 2 + e / 2 + qq / 2 - 1) * lpi
                           + lp(1 / abs(d.beta2) + (2 * l2 * math.sqrt(math.pi)) ** e / abs(d.beta1)))
    elif case in ("4b", "4c"):
        pre = 0.5 * lp(q) - (lp(2.0) if case == "4b" else 0.0) - 0.5 * lpi
        out["log_tau1"] = (pre + 2 * e * lp(l2 * math.sqrt(math.pi)) + qq * lp(2 * math.sqrt(math.pi))
                           + lp(1 / (s - rho) + 1 / abs(1 / s - rho)))
    return out


def audit_against_printed(params: Parameters, boundary=()) -> dict:
    """Composed vs tabulated values with differences."""
    res = tail_dependence_asym(params, boundary)
    pr = printed_case_values(params, boundary)
    comp = res.dcdu.as_dict()
    rows = {}
    for key in ("theta", "tau2", "log_tau1"):
        pv = pr[key]
        rows[key] = {"composed": comp[key], "printed": pv,
                     "delta": None if pv is None else comp[key] - pv}
    return {"case": pr["case"], "fields": rows}


__all__ = [
    "RvForm", "TailOrderResult", "rv_form", "rv_sum", "amplitude_prefactors", "summand_rv",
    "dcopula_rv", "tail_dependence_asym", "empirical_exponent_fit", "fit_log_curve",
    "printed_case_values", "audit_against_printed", "discriminant",
]
