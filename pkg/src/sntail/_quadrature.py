"""Log-domain adaptive quadrature for log-concave integrands.

The integrand is supplied through its logarithm ``logf`` (vectorized over
numpy arrays).  The mass is located around the mode, the interval is
truncated where ``logf`` has dropped by ``DROP`` below its maximum, and the
shifted integrand ``exp(logf - fmax)`` is integrated with adaptive
Gauss-Kronrod (7/15) panels.  Nothing is ever exponentiated unshifted, so
results far below the double range are returned as plain logarithms.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import NumericalError

# Kronrod 15-point nodes/weights; the Gauss 7-point rule uses every other node.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])          # 15 nodes, ascending
W_KRONROD = np.concatenate([_WGK[:-1], _WGK[::-1]])
W_GAUSS = np.zeros(15)
W_GAUSS[1::2] = np.concatenate([_WG[:-1], _WG[::-1]])

DROP = 60.0
LogFn = Callable[[np.ndarray], np.ndarray]


def _scalar(fn: LogFn, x: float) -> float:
    return float(np.asarray(fn(np.array([x], dtype=float)))[0])


def find_mode(logf: LogFn, dlogf: LogFn | None, lo: float, hi: float) -> float:
    """Maximizer of a concave ``logf`` on [lo, hi] (either end may be infinite)."""
    if dlogf is None:
        def dlogf(x):
            h = 1e-6 * np.maximum(1.0, np.abs(x))
            return (logf(x + h) - logf(x - h)) / (2 * h)
    if math.isfinite(hi) and _scalar(dlogf, hi) >= 0:
        return hi
    if math.isfinite(lo) and _scalar(dlogf, lo) <= 0:
        return lo
    # expand a bracket around the sign change of the derivative
    left = lo if math.isfinite(lo) else (min(hi, 0.0) if math.isfinite(hi) else 0.0) - 1.0
    right = hi if math.isfinite(hi) else max(left, 0.0) + 1.0
    step = 1.0
    for _ in range(200):
        if _scalar(dlogf, left) > 0:
            break
        left -= step
        step *= 2
    step = 1.0
    for _ in range(200):
        if _scalar(dlogf, right) < 0:
            break
        right += step
        step *= 2
    dl, dr = _scalar(dlogf, left), _scalar(dlogf, right)
    if not (dl > 0 > dr):
        raise NumericalError("could not bracket the mode",
                             {"left": left, "right": right, "dleft": dl, "dright": dr})
    return brentq(lambda t: _scalar(dlogf, t), left, right, xtol=1e-15, rtol=1e-15, maxiter=200)


def _extent(logf: LogFn, m: float, fmax: float, bound: float, direction: int) -> float:
    """Walk away from the mode until logf falls DROP below its maximum."""
    if math.isfinite(bound) and _scalar(logf, bound) > fmax - DROP:
        return bound
    h = 1e-3 * max(1.0, abs(m))
    for _ in range(400):
        x = m + direction * h
        if math.isfinite(bound) and (x - bound) * direction >= 0:
            return bound
        fx = _scalar(logf, x)
        if not fx > fmax - DROP:        # also catches -inf / nan past the support
            return x
        h *= 2.0
    raise NumericalError("integrand does not decay", {"mode": m, "direction": direction})


def _gk_panels(logf: LogFn, fmax: float, left: np.ndarray, right: np.ndarray):
    half = 0.5 * (right - left)
    mid = 0.5 * (right + left)
    x = mid[:, None] + half[:, None] * NODES[None, :]
    vals = np.exp(np.asarray(logf(x.ravel())).reshape(x.shape) - fmax)
    vals = np.where(np.isfinite(vals), vals, 0.0)
    k = half * (vals @ W_KRONROD)
    g = half * (vals @ W_GAUSS)
    return k, np.abs(k - g)


def log_quad(logf: LogFn, lo: float, hi: float, *, dlogf: LogFn | None = None,
             mode: float | None = None, rtol: float = 1e-12,
             max_panels: int = 20000) -> float:
    """log of the integral of exp(logf) over [lo, hi] for concave logf."""
    if not lo < hi:
        raise NumericalError("empty interval", {"lo": lo, "hi": hi})
    m = find_mode(logf, dlogf, lo, hi) if mode is None else float(mode)
    fmax = _scalar(logf, m)
    if not math.isfinite(fmax):
        raise NumericalError("log-integrand not finite at the mode", {"mode": m, "fmax": fmax})
    left = _extent(logf, m, fmax, lo, -1)
    right = _extent(logf, m, fmax, hi, +1)
    edges = []
    if left < m:
        edges.append(np.linspace(left, m, 5))
    if m < right:
        edges.append(np.linspace(m, right, 5))
    if not edges:
        raise NumericalError("degenerate integration range", {"mode": m})
    a = np.concatenate([e[:-1] for e in edges])
    b = np.concatenate([e[1:] for e in edges])
    k, err = _gk_panels(logf, fmax, a, b)
    # logf carries rounding of order eps*|fmax|; asking for less is futile
    rtol = max(rtol, 4.0 * np.finfo(float).eps * abs(fmax))
    # converged panels are retired into `done`; only the rest are refined
    done_val = 0.0
    done_err = 0.0
    for _ in range(80):
        total = done_val + k.sum()
        if total <= 0:
            raise NumericalError("non-positive integral estimate", {"mode": m})
        tol = rtol * total
        if done_err + err.sum() <= tol:
            return fmax + math.log(total)
        share = tol / (len(k) + 8)
        keep = err > share
        done_val += k[~keep].sum()
        done_err += err[~keep].sum()
        a, b = a[keep], b[keep]
        if len(a) * 2 > max_panels:
            break
        mid = 0.5 * (a + b)
        a, b = np.concatenate([a, mid]), np.concatenate([mid, b])
        k, err = _gk_panels(logf, fmax, a, b)
    raise NumericalError("adaptive quadrature did not converge",
                         {"mode": m, "left": left, "right": right,
                          "estimate": done_val + k.sum(), "error": done_err + err.sum()})
