"""Exponential-generalized truncated logarithmic (EGTL) lifetime distribution.

The EGTL law is the distribution of the k-th smallest of Z iid exponential
lifetimes with rate ``theta``, where Z follows a logarithmic-series law with
parameter ``p`` truncated below ``k``. For ``k = 1`` it is the
exponential-logarithmic (EL) distribution.

All evaluators accept scalars or arrays for the time argument and return
``numpy.float64`` values of matching shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import gammaln

__all__ = [
    "EgtlParams",
    "SeriesControl",
    "SeriesConvergenceError",
    "a_norm",
    "y_transform",
    "pdf",
    "log_pdf",
    "cdf",
    "survival",
    "hazard",
    "raw_moment",
    "mgf",
    "quantile",
    "sample",
]

P_MAX = 1.0 - 1e-12

# Number of extra terms after q**k in the direct series; 0.5**56 < 2e-17.
_SERIES_TERMS = 56
_SERIES_SWITCH = 0.5


class SeriesConvergenceError(ArithmeticError):
    """An infinite series hit its term cap before reaching tolerance."""


@dataclass(frozen=True)
class EgtlParams:
    """Shape ``p``, rate ``theta`` and order-statistic index ``k``."""

    p: float
    theta: float
    k: int = 1

    def __post_init__(self):
        p, theta, k = self.p, self.theta, self.k
        if isinstance(k, bool) or int(k) != k:
            raise ValueError(f"k must be an integer, got {k!r}")
        if not (np.isfinite(p) and 0.0 < p < 1.0):
            raise ValueError(f"p must lie in (0, 1), got {p!r}")
        if p > P_MAX:
            raise ValueError(f"p must not exceed 1 - 1e-12, got {p!r}")
        if not (np.isfinite(theta) and theta > 0.0):
            raise ValueError(f"theta must be positive, got {theta!r}")
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k!r}")
        object.__setattr__(self, "p", float(p))
        object.__setattr__(self, "theta", float(theta))
        object.__setattr__(self, "k", int(k))


@dataclass(frozen=True)
class SeriesControl:
    """Truncation rule for the moment and mgf double series."""

    rel_tol: float = 1e-12
    max_terms: int = 1_000_000

    def __post_init__(self):
        if not 0.0 < self.rel_tol < 1.0:
            raise ValueError("rel_tol must lie in (0, 1)")
        if self.max_terms < 64:
            raise ValueError("max_terms must be >= 64")


# ---------------------------------------------------------------------------
# log-series tails
# ---------------------------------------------------------------------------


def _head_sum(q, k):
    """sum_{j=1}^{k-1} q**j / j (zero for k = 1)."""
    out = np.zeros_like(q)
    qj = np.ones_like(q)
    for j in range(1, k):
        qj = qj * q
        out = out + qj / j
    return out


def _log_tail(q, k: int):
    """A(q, k) = sum_{j>=k} q**j / j for q in [0, 1).

    Direct summation below 0.5 avoids the cancellation in
    ``-log(1-q) - sum_{j<k} q**j/j``; above 0.5 that cancellation costs
    at most a factor 2**(k-1) and the closed form is used.
    """
    q = np.asarray(q, dtype=float)
    small = q <= _SERIES_SWITCH
    out = np.empty_like(q)
    if np.any(small):
        qs = q[small]
        acc = np.zeros_like(qs)
        for m in range(_SERIES_TERMS, -1, -1):
            acc = acc * qs + 1.0 / (k + m)
        out[small] = qs**k * acc
    if np.any(~small):
        ql = q[~small]
        out[~small] = -np.log1p(-ql) - _head_sum(ql, k)
    return out


def _one_minus_pow(one_minus_y, j):
    """1 - y**j from 1 - y without cancellation."""
    with np.errstate(divide="ignore"):
        return -np.expm1(j * np.log1p(-one_minus_y))


def _tail_diff(p: float, v, k: int):
    """A(p, k) - A(p*y, k) expressed through v = 1 - y.

    Equals sum_{j>=k} p**j (1 - y**j) / j, which is the survival function
    times A(p, k); accurate when the survival probability is tiny.
    """
    v = np.asarray(v, dtype=float)
    if p <= _SERIES_SWITCH:
        out = np.zeros_like(v)
        pj = p**k
        for j in range(k, k + _SERIES_TERMS + 1):
            out = out + pj * _one_minus_pow(v, j) / j
            pj *= p
        return out
    # -log(1-p) + log(1-py) = -log(1 - p e^{-theta x}) and
    # p e^{-theta x} = p v / (1 - p + p v).
    pu = p * v / (1.0 - p * (1.0 - v))
    out = -np.log1p(-pu)
    pj = 1.0
    for j in range(1, k):
        pj *= p
        out = out - pj * _one_minus_pow(v, j) / j
    return out


def _log_tail_scalar(q: float, k: int) -> float:
    if q <= _SERIES_SWITCH:
        term = q**k
        total = 0.0
        j = k
        while True:
            t = term / j
            total += t
            if t <= 1e-17 * total or term == 0.0:
                return total
            term *= q
            j += 1
    head = 0.0
    qj = 1.0
    for j in range(1, k):
        qj *= q
        head += qj / j
    return -math.log1p(-q) - head


def a_norm(p, k: int):
    """Normalizer A(p, k) = sum_{j>=k} p**j / j of the truncated log-series law."""
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k!r}")
    if isinstance(p, float):
        if not 0.0 < p < 1.0:
            raise ValueError("p must lie in (0, 1)")
        return _log_tail_scalar(p, int(k))
    arr = np.asarray(p, dtype=float)
    if np.any(~((arr > 0.0) & (arr < 1.0))):
        raise ValueError("p must lie in (0, 1)")
    out = _log_tail(np.atleast_1d(arr), int(k))
    return out.reshape(arr.shape)[()]


# ---------------------------------------------------------------------------
# pointwise functions
# ---------------------------------------------------------------------------


def _times(x) -> NDArray[np.float64]:
    x = np.asarray(x, dtype=float)
    if np.any(np.isnan(x)):
        raise ValueError("x contains NaN")
    if np.any(x < 0.0):
        raise ValueError("x must be nonnegative; the support is [0, inf)")
    return x


def y_transform(params: EgtlParams, x: ArrayLike):
    """y = (1 - e^{-theta x}) / (1 - p e^{-theta x}), in [0, 1)."""
    x = _times(x)
    tx = params.theta * x
    return (-np.expm1(-tx) / (1.0 - params.p * np.exp(-tx)))[()]


def _one_minus_y(params: EgtlParams, x):
    u = np.exp(-params.theta * x)
    return (1.0 - params.p) * u / (1.0 - params.p * u)


def log_pdf(params: EgtlParams, x: ArrayLike):
    """Log density; -inf at x = 0 when k >= 2."""
    x = _times(x)
    p, theta, k = params.p, params.theta, params.k
    tx = theta * x
    out = (
        np.log(theta)
        + k * np.log(p)
        - np.log(a_norm(p, k))
        - tx
        - k * np.log1p(-p * np.exp(-tx))
    )
    if k > 1:
        with np.errstate(divide="ignore"):
            out = out + (k - 1) * np.log(-np.expm1(-tx))
    return out[()]


def pdf(params: EgtlParams, x: ArrayLike):
    """Density theta p^k e^{-theta x} (1-e^{-theta x})^{k-1} / (A(p,k) (1-p e^{-theta x})^k)."""
    return np.exp(log_pdf(params, x))[()]


def cdf(params: EgtlParams, x: ArrayLike):
    """Distribution function A(p y, k) / A(p, k).

    Above the median it is taken as 1 - survival, which keeps it monotone
    where the ratio form rounds near 1.
    """
    y = np.atleast_1d(y_transform(params, x))
    out = _log_tail(params.p * y, params.k) / a_norm(params.p, params.k)
    upper = out > 0.5
    if np.any(upper):
        xs = np.atleast_1d(np.asarray(x, dtype=float))[upper]
        out[upper] = 1.0 - survival(params, xs)
    return np.minimum(out, 1.0).reshape(np.shape(x))[()]


def survival(params: EgtlParams, x: ArrayLike):
    """Reliability 1 - cdf, computed directly so that the upper tail keeps precision."""
    x = _times(x)
    v = np.atleast_1d(_one_minus_y(params, x))
    out = _tail_diff(params.p, v, params.k) / a_norm(params.p, params.k)
    return np.clip(out, 0.0, 1.0).reshape(x.shape)[()]


def hazard(params: EgtlParams, x: ArrayLike):
    """Failure rate pdf / survival.

    Where the survival probability underflows the limiting value ``theta``
    is returned.
    """
    x = _times(x)
    f = np.atleast_1d(pdf(params, x))
    s = np.atleast_1d(survival(params, x))
    with np.errstate(divide="ignore", invalid="ignore"):
        h = np.where(s > 0.0, f / s, params.theta)
    return h.reshape(x.shape)[()]


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------

_BLOCK = 512


def _inner_alternating(k: int, base: NDArray[np.float64], power: float):
    """sum_j C(k-1, j) (-1)^j / (base + j)**power, summed in +/- pairs."""
    j = np.arange(k)
    binom = np.exp(gammaln(k) - gammaln(j + 1) - gammaln(k - j))
    terms = binom[None, :] / (base[:, None] + j[None, :]) ** power
    pos = terms[:, 0::2]
    neg = terms[:, 1::2]
    m = neg.shape[1]
    paired = (pos[:, :m] - neg).sum(axis=1)
    if pos.shape[1] > m:
        paired = paired + pos[:, m]
    return paired


def _double_series(params: EgtlParams, power: float, shift: float, ctl: SeriesControl):
    """sum_i sum_j C(k-1+i, i) C(k-1, j) p^i (-1)^j / (i + j + 1 - shift)**power."""
    p, k = params.p, params.k
    total = 0.0
    carry = np.zeros(2, dtype=bool)
    log_p = np.log(p)
    start = 0
    block = _BLOCK
    while start < ctl.max_terms:
        i = np.arange(start, min(start + block, ctl.max_terms), dtype=float)
        outer = np.exp(gammaln(k + i) - gammaln(i + 1) - gammaln(k) + i * log_p)
        terms = outer * _inner_alternating(k, i + 1.0 - shift, power)
        partial = total + np.cumsum(terms)
        small = np.concatenate([carry, np.abs(terms) < ctl.rel_tol * np.abs(partial)])
        # stop at the third consecutive negligible term
        run3 = np.flatnonzero(small[:-2] & small[1:-1] & small[2:])
        if run3.size:
            return float(partial[run3[0]])
        carry = small[-2:]
        total = float(partial[-1])
        start += i.size
        block = min(2 * block, 65536)
    raise SeriesConvergenceError(
        f"series did not reach rel_tol={ctl.rel_tol:g} within {ctl.max_terms} terms "
        f"(p={p!r}, k={k})"
    )


def raw_moment(params: EgtlParams, r: int, ctl: SeriesControl | None = None) -> float:
    """E[X**r] from the double series representation."""
    if isinstance(r, bool) or int(r) != r or r < 1:
        raise ValueError(f"r must be a positive integer, got {r!r}")
    ctl = ctl or SeriesControl()
    p, theta, k = params.p, params.theta, params.k
    s = _double_series(params, r + 1, 0.0, ctl)
    lead = np.exp(gammaln(r + 1) - r * np.log(theta) + k * np.log(p)) / a_norm(p, k)
    return float(lead * s)


def mgf(params: EgtlParams, t: float, ctl: SeriesControl | None = None) -> float:
    """Moment generating function E[exp(t X)] for t < theta."""
    if not t < params.theta:
        raise ValueError(f"mgf requires t < theta={params.theta!r}, got {t!r}")
    if t == 0.0:
        return 1.0
    ctl = ctl or SeriesControl()
    p, k = params.p, params.k
    s = _double_series(params, 1.0, t / params.theta, ctl)
    return float(p**k / a_norm(p, k) * s)


# ---------------------------------------------------------------------------
# quantile and sampling
# ---------------------------------------------------------------------------


def _bracketed_newton(f, lo, hi, x0, max_iter=200):
    """Vectorized Newton iteration safeguarded by bisection.

    ``f(x)`` returns ``(value, derivative)`` for an increasing function;
    the root is kept inside ``[lo, hi]``.
    """
    x = x0.copy()
    for _ in range(max_iter):
        g, dg = f(x)
        lo = np.where(g < 0.0, x, lo)
        hi = np.where(g > 0.0, x, hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(g == 0.0, 0.0, g / dg)
        x_new = x - step
        outside = ~((x_new > lo) & (x_new < hi)) & (g != 0.0)
        x_new = np.where(outside, 0.5 * (lo + hi), x_new)
        done = np.abs(x_new - x) <= 4 * np.finfo(float).eps * np.maximum(1.0, np.abs(x))
        x = x_new
        if np.all(done | (hi - lo <= 4 * np.finfo(float).eps * np.maximum(1.0, np.abs(x)))):
            return x
    raise AssertionError("quantile root-solve failed to converge; this is a defect")


def _quantile_lower(params: EgtlParams, u):
    """Quantile for u <= 1/2 by solving A(w, k) = u A(p, k) for w = p y in log w."""
    p, k = params.p, params.k
    target = u * a_norm(p, k)
    log_target = np.log(target)
    lo = (np.log(k) + log_target + np.log1p(-p)) / k
    hi = np.minimum((np.log(k) + log_target) / k, np.log(p))

    def f(s):
        w = np.exp(s)
        a = _log_tail(w, k)
        return np.log(a) - log_target, w**k / ((1.0 - w) * a)

    s = _bracketed_newton(f, lo, hi, 0.5 * (lo + hi))
    y = np.exp(s) / p
    # x = -(1/theta) log((1 - y) / (1 - p y))
    return (np.log1p(-p * y) - np.log1p(-y)) / params.theta


def _quantile_upper(params: EgtlParams, u):
    """Quantile for u > 1/2 by solving the survival equation in log(1 - y)."""
    p, k = params.p, params.k
    a = a_norm(p, k)
    target = (1.0 - u) * a
    log_target = np.log(target)
    lo = np.log(target) + np.log1p(-p) - k * np.log(p)
    hi = np.minimum(np.log1p(-u), 0.0)
    lo = np.minimum(lo, hi)

    def f(t):
        v = np.exp(t)
        d = _tail_diff(p, v, k)
        y = 1.0 - v
        slope = v * p**k * y ** (k - 1) / (1.0 - p * y)
        return np.log(d) - log_target, slope / d

    t = _bracketed_newton(f, lo, hi, 0.5 * (lo + hi))
    v = np.exp(t)
    return (np.log1p(-p * (1.0 - v)) - t) / params.theta


def _quantile_k1(params: EgtlParams, u):
    p, theta = params.p, params.theta
    lq = np.log1p(-p)
    out = np.empty_like(u)
    low = u <= 0.5
    # x = -(1/theta) log((1 - (1-p)^(1-u)) / p), arranged per branch to avoid cancellation
    ul = u[low]
    out[low] = -np.log1p(-(1.0 - p) / p * np.expm1(-ul * lq)) / theta
    uh = u[~low]
    out[~low] = -np.log(-np.expm1((1.0 - uh) * lq) / p) / theta
    return out


def quantile(params: EgtlParams, u: ArrayLike):
    """Inverse distribution function on [0, 1)."""
    u = np.asarray(u, dtype=float)
    if np.any(~((u >= 0.0) & (u < 1.0))):
        raise ValueError("u must lie in [0, 1)")
    flat = np.atleast_1d(u).ravel()
    out = np.zeros_like(flat)
    pos = flat > 0.0
    if params.k == 1:
        out[pos] = _quantile_k1(params, flat[pos])
    else:
        low = pos & (flat <= 0.5)
        high = flat > 0.5
        if np.any(low):
            out[low] = _quantile_lower(params, flat[low])
        if np.any(high):
            out[high] = _quantile_upper(params, flat[high])
    return np.maximum(out, 0.0).reshape(u.shape)[()]


def sample(params: EgtlParams, n: int, seed=None) -> NDArray[np.float64]:
    """Draw ``n`` variates by inversion of standard uniforms.

    ``seed`` is anything accepted by :func:`numpy.random.default_rng`, or
    any object with a ``random(n)`` method returning uniforms on [0, 1).
    """
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    rng = seed if hasattr(seed, "random") else np.random.default_rng(seed)
    return quantile(params, rng.random(int(n)))
