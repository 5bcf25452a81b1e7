"""Normal and skew-normal primitives that stay usable deep in the lower tail.

Every function accepts scalars or numpy arrays.  Probabilities come back as
natural logarithms; ``LogValue`` carries signed quantities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import ConvergenceError, DomainError

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
LOG2 = math.log(2.0)
ZERO_TOL = 1e-12
MILLS_SWITCH = -8.0
_MILLS_TERMS = 40


@dataclass(frozen=True)
class LogValue:
    """A real number stored as sign * exp(log_v)."""

    log_v: float
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise DomainError(f"sign must be -1, 0 or 1, got {self.sign}")
        if self.sign != 0 and math.isnan(self.log_v):
            raise DomainError("log_v is nan")

    @classmethod
    def zero(cls) -> "LogValue":
        return cls(-math.inf, 0)

    @classmethod
    def from_float(cls, x: float) -> "LogValue":
        if x == 0:
            return cls.zero()
        return cls(math.log(abs(x)), 1 if x > 0 else -1)

    def __float__(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_v)

    def __neg__(self) -> "LogValue":
        return LogValue(self.log_v, -self.sign)

    def __mul__(self, other: "LogValue") -> "LogValue":
        if self.sign == 0 or other.sign == 0:
            return LogValue.zero()
        return LogValue(self.log_v + other.log_v, self.sign * other.sign)

    def __truediv__(self, other: "LogValue") -> "LogValue":
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero LogValue")
        if self.sign == 0:
            return LogValue.zero()
        return LogValue(self.log_v - other.log_v, self.sign * other.sign)

    def __add__(self, other: "LogValue") -> "LogValue":
        if self.sign == 0:
            return other
        if other.sign == 0:
            return self
        big, small = (self, other) if self.log_v >= other.log_v else (other, self)
        d = small.log_v - big.log_v
        if big.sign == small.sign:
            return LogValue(big.log_v + math.log1p(math.exp(d)), big.sign)
        if d == 0.0:
            return LogValue.zero()
        return LogValue(big.log_v + math.log1p(-math.exp(d)), big.sign)

    def __sub__(self, other: "LogValue") -> "LogValue":
        return self + (-other)

    def scale(self, log_factor: float) -> "LogValue":
        """Multiply by exp(log_factor)."""
        if self.sign == 0:
            return self
        return LogValue(self.log_v + log_factor, self.sign)


def _check_finite(*xs):
    for x in xs:
        if not np.all(np.isfinite(x)):
            raise DomainError("arguments must be finite")


def _out(x, scalar: bool):
    return float(x) if scalar else x


def log_norm_pdf(x):
    """log phi(x)."""
    _check_finite(x)
    xa = np.asarray(x, dtype=float)
    return _out(-0.5 * xa * xa - LOG_SQRT_2PI, xa.ndim == 0)


def _mills_log_cdf(x: np.ndarray) -> np.ndarray:
    # log Phi(x) = log phi(x) - log|x| + log sum_k (-1)^k (2k-1)!! / x^(2k), optimally truncated
    inv = 1.0 / (x * x)
    k = np.arange(1, _MILLS_TERMS + 1)
    ratios = -(2 * k - 1)[None, :] * inv[:, None]
    terms = np.concatenate([np.ones((x.size, 1)), np.cumprod(ratios, axis=1)], axis=1)
    stop = np.argmin(np.abs(terms), axis=1)
    keep = np.arange(_MILLS_TERMS + 1)[None, :] < stop[:, None]
    series = np.where(keep, terms, 0.0).sum(axis=1)
    return -0.5 * x * x - LOG_SQRT_2PI - np.log(-x) + np.log(series)


def _erfc_log_cdf(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x > 0
    out[pos] = np.log1p(-0.5 * special.erfc(x[pos] / math.sqrt(2.0)))
    out[~pos] = np.log(0.5 * special.erfc(-x[~pos] / math.sqrt(2.0)))
    return out


def log_norm_cdf(x):
    """log Phi(x); erfc kernel for x >= -8, Mills-ratio series below."""
    _check_finite(x)
    xa = np.asarray(x, dtype=float)
    flat = np.atleast_1d(xa).ravel()
    out = np.empty_like(flat)
    tail = flat < MILLS_SWITCH
    if tail.any():
        out[tail] = _mills_log_cdf(flat[tail])
    if (~tail).any():
        out[~tail] = _erfc_log_cdf(flat[~tail])
    return _out(out.reshape(xa.shape), xa.ndim == 0)


def _log_mills_inverse(y: np.ndarray) -> np.ndarray:
    """log(phi(y)/Phi(y))."""
    return log_norm_pdf(y) - log_norm_cdf(y)


def owen_t(h, a):
    """Owen's T function T(h, a)."""
    _check_finite(h, a)
    return special.owens_t(h, a)


def sn_log_pdf(x, lam):
    """log of the SN(lambda) density 2 phi(x) Phi(lambda x)."""
    _check_finite(x, lam)
    x = np.asarray(x, dtype=float)
    lam = np.asarray(lam, dtype=float)
    out = LOG2 + log_norm_pdf(x) + log_norm_cdf(lam * x)
    return _out(out, np.ndim(out) == 0)


# Gauss-Legendre rule for the tail integral, mapped to [0, 1].
_GL_X, _GL_W = np.polynomial.legendre.leggauss(64)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W
_TAIL_DROP = 45.0


def _sn_dlog_pdf(t: np.ndarray, lam: np.ndarray) -> np.ndarray:
    y = lam * t
    return -t + lam * np.exp(_log_mills_inverse(y))


def _sn_tail_log_cdf(x: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """log int_{-inf}^x of the SN density, for points where the density is increasing at x.

    With s = x - t the log-integrand g(s) = f(x - s) - f(x) is concave with
    g(0) = 0, g'(0) = -f'(x) < 0 and g'' <= -1, so the drop of _TAIL_DROP is
    reached by s <= min(drop/f'(x), sqrt(2 drop)).  Newton from that bound
    converges monotonically to the exact drop point; the integrand is then
    smooth on [0, S] and a fixed 64-point rule resolves it.
    """
    fx = sn_log_pdf(x, lam)
    d = _sn_dlog_pdf(x, lam)
    with np.errstate(divide="ignore", over="ignore"):
        s = np.minimum(_TAIL_DROP / d, math.sqrt(2 * _TAIL_DROP))
    for _ in range(8):
        g = sn_log_pdf(x - s, lam) - fx + _TAIL_DROP
        s = s - g / (-_sn_dlog_pdf(x - s, lam))
    t = x[:, None] - s[:, None] * _GL_X[None, :]
    vals = np.exp(sn_log_pdf(t, lam[:, None]) - fx[:, None])
    return fx + np.log(s * (vals @ _GL_W))


def _sn_lower_log_cdf(x: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """log F(x; lambda) for x <= 0."""
    out = np.empty_like(x)
    owen = (lam <= 0) & (x >= -1.0)
    if owen.any():
        xo, lo = x[owen], lam[owen]
        # T(x, lam) <= 0 here, so the two terms add without cancellation
        out[owen] = np.log(special.ndtr(xo) - 2.0 * special.owens_t(xo, lo))
    if (~owen).any():
        out[~owen] = _sn_tail_log_cdf(x[~owen], lam[~owen])
    return out


def sn_log_cdf(x, lam):
    """log F(x; lambda) for the SN(lambda) distribution."""
    _check_finite(x, lam)
    xa, la = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(lam, dtype=float))
    scalar = xa.ndim == 0
    xf, lf = np.atleast_1d(xa).ravel().copy(), np.atleast_1d(la).ravel().copy()
    out = np.empty_like(xf)
    normal = lf == 0.0
    if normal.any():
        out[normal] = log_norm_cdf(xf[normal])
    low = ~normal & (xf <= 0)
    if low.any():
        out[low] = _sn_lower_log_cdf(xf[low], lf[low])
    high = ~normal & (xf > 0)
    if high.any():
        # 1 - F(x; lam) = F(-x; -lam)
        comp = _sn_lower_log_cdf(-xf[high], -lf[high])
        out[high] = np.log1p(-np.exp(comp))
    return _out(out.reshape(xa.shape), scalar)


def quantile_coefficients(lam: float, zero: bool = False) -> tuple[float, float, float]:
    """(K1, K2, K3) of the three-term lower-tail quantile expansion."""
    if zero or abs(lam) < ZERO_TOL:
        return 1.0, 0.25, math.log(4.0 * math.pi) / 4.0
    if lam > 0:
        return 1.0 / math.sqrt(1.0 + lam * lam), 0.5, math.log(2.0 * math.pi * lam) / 2.0
    return 1.0, 0.25, math.log(math.pi) / 4.0


def sn_quantile_expansion(log_u, lam: float, zero: bool = False):
    """Three-term approximation to F^{-1}(u) as u -> 0, in terms of log u."""
    _check_finite(log_u, lam)
    lu = np.asarray(log_u, dtype=float)
    if np.any(lu >= -1.0):
        raise DomainError("expansion needs log_u < -1")
    k1, k2, k3 = quantile_coefficients(float(lam), zero)
    out = -k1 * np.sqrt(-2.0 * lu) * (1.0 + k2 * np.log(-lu) / lu + k3 / lu)
    return _out(out, lu.ndim == 0)


def _expansion_array(lu: np.ndarray, lam: np.ndarray) -> np.ndarray:
    pos = lam >= ZERO_TOL
    zero = np.abs(lam) < ZERO_TOL
    safe = np.where(pos, lam, 1.0)
    k1 = np.where(pos, 1.0 / np.sqrt(1.0 + safe * safe), 1.0)
    k2 = np.where(pos, 0.5, 0.25)
    k3 = np.where(pos, 0.5 * np.log(2.0 * math.pi * safe),
                  np.where(zero, 0.25 * math.log(4.0 * math.pi), 0.25 * math.log(math.pi)))
    return -k1 * np.sqrt(-2.0 * lu) * (1.0 + k2 * np.log(-lu) / lu + k3 / lu)


def _initial_guess(lu: np.ndarray, lam: np.ndarray) -> np.ndarray:
    deep = lu < -1.0
    g = special.ndtri_exp(np.where(deep, -1.0, lu))
    return np.where(deep, _expansion_array(np.where(deep, lu, -2.0), lam), g)


def sn_quantile(log_u, lam, *, max_iter: int = 200):
    """Solve sn_log_cdf(x, lam) = log_u for x (vectorized, lam broadcasts).

    Upper-half levels are mapped through F^{-1}(u; lam) = -F^{-1}(1 - u; -lam)
    so that Newton always runs on the side where log F is well scaled.
    """
    _check_finite(log_u, lam)
    lu_in, lam_in = np.broadcast_arrays(np.asarray(log_u, dtype=float), np.asarray(lam, dtype=float))
    if np.any(lu_in >= 0):
        raise DomainError("log_u must be negative")
    lu = np.atleast_1d(lu_in).ravel()
    la = np.atleast_1d(lam_in).ravel()
    out = np.empty_like(lu)
    upper = lu > -LOG2
    if (~upper).any():
        out[~upper] = _lower_quantile(lu[~upper], la[~upper], max_iter)
    if upper.any():
        out[upper] = -_lower_quantile(np.log(-np.expm1(lu[upper])), -la[upper], max_iter)
    return _out(out.reshape(lu_in.shape), lu_in.ndim == 0)


def _lower_quantile(lu: np.ndarray, lam: np.ndarray, max_iter: int) -> np.ndarray:
    n = lu.size
    x = _initial_guess(lu, lam)
    lo, hi = x - 2.0, x + 2.0
    for side, bound in ((-1, lo), (1, hi)):
        step = np.full(n, 2.0)
        for _ in range(80):
            hv = sn_log_cdf(bound, lam) - lu
            bad = hv > 0 if side < 0 else hv < 0
            if not bad.any():
                break
            bound[bad] += side * step[bad]
            step[bad] *= 2.0
        else:
            raise ConvergenceError("could not bracket the quantile")

    active = np.ones(n, dtype=bool)
    for _ in range(max_iter):
        ia = np.flatnonzero(active)
        if ia.size == 0:
            break
        xa, la = x[ia], lam[ia]
        lf = sn_log_cdf(xa, la)
        hv = lf - lu[ia]
        lo[ia] = np.where(hv < 0, xa, lo[ia])
        hi[ia] = np.where(hv > 0, xa, hi[ia])
        slope = np.exp(sn_log_pdf(xa, la) - lf)
        with np.errstate(divide="ignore", invalid="ignore"):
            xn = xa - hv / slope
        outside = ~np.isfinite(xn) | (xn <= lo[ia]) | (xn >= hi[ia])
        xn = np.where(outside, 0.5 * (lo[ia] + hi[ia]), xn)
        scale = np.maximum(1.0, np.abs(xa))
        done = (hv == 0) | (np.abs(xn - xa) <= 1e-15 * scale) | (hi[ia] - lo[ia] <= 4e-16 * scale)
        x[ia] = np.where(hv == 0, xa, xn)
        active[ia[done]] = False
    if active.any():
        raise ConvergenceError("quantile iteration cap reached")
    return x
