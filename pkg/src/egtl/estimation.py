"""Estimators for (p, theta) of the EGTL family at a fixed order k.

Four procedures are provided: direct maximum likelihood (quasi-Newton in
``(logit p, log theta)``), the EM iteration over the latent defect count,
the method of moments, and Bayesian posterior means under a
uniform x gamma prior evaluated by tensor-product Gauss-Legendre quadrature.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import brentq, minimize
from scipy.special import expit, logit

from .distribution import (
    EgtlParams,
    SeriesControl,
    _double_series,
    a_norm,
    log_pdf,
)

__all__ = [
    "Dataset",
    "FitResult",
    "BayesConfig",
    "DataQualityError",
    "NoMomentRootError",
    "log_likelihood",
    "score",
    "fisher_information",
    "standard_errors",
    "fit_mle",
    "fit_mle_multistart",
    "fit_em",
    "fit_moments",
    "fit_moments_from_moments",
    "moment_ratio",
    "fit_bayes",
]

P_FLOOR = 1e-12
P_BOUNDARY = 1e-10


class DataQualityError(ValueError):
    """Data cannot be used for the requested fit (e.g. zeros with k >= 2)."""


class NoMomentRootError(ValueError):
    """The moment equation has no root on the admissible range of p."""


@dataclass(frozen=True)
class Dataset:
    """Sorted, validated nonnegative lifetimes."""

    values: NDArray[np.float64]
    label: str = ""

    def __post_init__(self):
        v = np.sort(np.asarray(self.values, dtype=float).ravel())
        if v.size < 2:
            raise ValueError("a dataset needs at least 2 observations")
        if not np.all(np.isfinite(v)):
            raise ValueError("dataset contains non-finite values")
        if v[0] < 0.0:
            bad = np.flatnonzero(np.asarray(self.values, dtype=float).ravel() < 0.0)
            raise ValueError(f"negative lifetimes at indices {bad.tolist()}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def __len__(self):
        return self.n

    def scaled(self, c: float) -> "Dataset":
        return Dataset(self.values * c, self.label)


@dataclass
class FitResult:
    params: EgtlParams
    log_lik: float
    method: str
    std_errors: tuple[float, float] | None = None
    iterations: int = 0
    converged: bool = True
    boundary: bool = False
    trace: list[tuple[float, float, float]] | None = None
    diagnostics: list[str] = field(default_factory=list)
    local_optima: list[tuple[float, float, float]] = field(default_factory=list)

    @property
    def p(self) -> float:
        return self.params.p

    @property
    def theta(self) -> float:
        return self.params.theta

    @property
    def k(self) -> int:
        return self.params.k

    def as_dict(self) -> dict:
        se = self.std_errors or (None, None)
        return {
            "method": self.method,
            "p": self.p,
            "theta": self.theta,
            "k": self.k,
            "log_lik": self.log_lik,
            "se_p": se[0],
            "se_theta": se[1],
            "converged": self.converged,
            "boundary": self.boundary,
            "iterations": self.iterations,
        }


@dataclass(frozen=True)
class BayesConfig:
    """Gamma(a, b) prior on theta (b is a rate) and quadrature sizes.

    ``theta_max`` overrides the automatic upper cutoff of the theta grid.
    """

    a: float = 1.0
    b: float = 1.0
    grid_p: int = 128
    grid_theta: int = 512
    theta_max: float | None = None

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError("prior parameters a, b must be positive")
        if self.grid_p < 32 or self.grid_theta < 32:
            raise ValueError("grid sizes must be >= 32")
        if self.theta_max is not None and not self.theta_max > 0:
            raise ValueError("theta_max must be positive")


def _values(data) -> NDArray[np.float64]:
    if isinstance(data, Dataset):
        return data.values
    x = np.asarray(data, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("no observations")
    if np.any(x < 0.0) or not np.all(np.isfinite(x)):
        raise ValueError("observations must be finite and nonnegative")
    return x


def _check_k(k):
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k!r}")
    return int(k)


def _require_positive(x, k):
    if k >= 2 and np.any(x == 0.0):
        idx = np.flatnonzero(x == 0.0).tolist()
        raise DataQualityError(
            f"zero lifetimes at (sorted) indices {idx} have zero density for k={k}"
        )


# ---------------------------------------------------------------------------
# likelihood
# ---------------------------------------------------------------------------


def log_likelihood(data, params: EgtlParams) -> float:
    """Complete-sample log-likelihood; -inf if an observation has zero density."""
    x = _values(data)
    p, theta, k = params.p, params.theta, params.k
    n = x.size
    if k >= 2 and np.any(x == 0.0):
        return -np.inf
    tx = theta * x
    ll = (
        n * np.log(theta)
        + n * k * np.log(p)
        - theta * x.sum()
        - n * np.log(a_norm(p, k))
        - k * np.log1p(-p * np.exp(-tx)).sum()
    )
    if k > 1:
        ll += (k - 1) * np.log(-np.expm1(-tx)).sum()
    return float(ll)


def _dlog_a(p: float, k: int) -> float:
    """d/dp log A(p, k) = p^(k-1) / ((1-p) A(p, k))."""
    return p ** (k - 1) / ((1.0 - p) * a_norm(p, k))


def score(data, params: EgtlParams) -> NDArray[np.float64]:
    """Gradient (d lnL/dp, d lnL/dtheta)."""
    x = _values(data)
    p, theta, k = params.p, params.theta, params.k
    n = x.size
    u = np.exp(-theta * x)
    ratio = u / (1.0 - p * u)  # 1 / (e^{theta x} - p)
    d_p = n * k / p - n * _dlog_a(p, k) + k * ratio.sum()
    d_theta = n / theta - x.sum() - k * p * (x * ratio).sum()
    if k > 1:
        if np.any(x == 0.0):
            raise DataQualityError("score undefined at zero lifetimes for k >= 2")
        d_theta += (k - 1) * (x * u / -np.expm1(-theta * x)).sum()
    return np.array([d_p, d_theta])


def fisher_information(data, params: EgtlParams, rel_step: float = 1e-5) -> NDArray[np.float64]:
    """Observed information: minus the central-difference Jacobian of :func:`score`.

    Row/column order is (p, theta). The matrix is returned as computed,
    without symmetrization.
    """
    p, theta, k = params.p, params.theta, params.k
    hp = rel_step * min(p, 1.0 - p)
    ht = rel_step * theta
    dp = (score(data, EgtlParams(p + hp, theta, k)) - score(data, EgtlParams(p - hp, theta, k))) / (2 * hp)
    dt = (score(data, EgtlParams(p, theta + ht, k)) - score(data, EgtlParams(p, theta - ht, k))) / (2 * ht)
    hess = np.column_stack([dp, dt])
    return -hess


def standard_errors(info: NDArray[np.float64]) -> tuple[float, float] | None:
    """Wald standard errors, or None when the information is not positive definite."""
    sym = 0.5 * (info + info.T)
    try:
        np.linalg.cholesky(sym)
    except np.linalg.LinAlgError:
        return None
    cov = np.linalg.inv(sym)
    return float(np.sqrt(cov[0, 0])), float(np.sqrt(cov[1, 1]))


def _attach_se(res: FitResult, x) -> FitResult:
    if res.boundary:
        res.diagnostics.append("standard errors omitted: estimate on the boundary of (0, 1)")
        return res
    try:
        se = standard_errors(fisher_information(x, res.params))
    except ValueError:
        se = None
    if se is None:
        res.diagnostics.append("singular or indefinite observed information; no standard errors")
    res.std_errors = se
    return res


# ---------------------------------------------------------------------------
# direct maximum likelihood
# ---------------------------------------------------------------------------


def default_init(x, k: int) -> tuple[float, float]:
    """p0 = 0.5 and theta0 = k / mean(x)."""
    return 0.5, k / float(np.mean(x))


def _objective(z, x, k):
    """Mean negative log-likelihood and its gradient in (logit p, log theta)."""
    with np.errstate(over="ignore"):
        p, theta = float(expit(z[0])), float(np.exp(z[1]))
    if not np.isfinite(theta):
        return np.inf, np.zeros(2)
    params = EgtlParams(min(max(p, P_FLOOR), 1 - P_FLOOR), theta, k)
    n = x.size
    f = -log_likelihood(x, params) / n
    g = score(x, params)
    jac = np.array([g[0] * p * (1.0 - p), g[1] * theta])
    return f, -jac / n


def _newton_polish(z, x, k, lo, hi, gtol, steptol, max_iter=25):
    """Newton steps with a finite-difference Hessian, once near the optimum."""
    f, g = _objective(z, x, k)
    it = 0
    for it in range(1, max_iter + 1):
        if np.max(np.abs(g)) < gtol:
            break
        h = 1e-6 * np.maximum(1.0, np.abs(z))
        cols = []
        for i in range(2):
            e = np.zeros(2)
            e[i] = h[i]
            cols.append((_objective(z + e, x, k)[1] - _objective(z - e, x, k)[1]) / (2 * h[i]))
        H = 0.5 * (np.column_stack(cols) + np.column_stack(cols).T)
        try:
            np.linalg.cholesky(H)
            step = -np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            break
        t = 1.0
        while t > 1e-4:
            z_new = z + t * step
            z_new[0] = np.clip(z_new[0], lo, hi)
            f_new, g_new = _objective(z_new, x, k)
            if f_new <= f + 1e-14 * abs(f):
                break
            t *= 0.5
        else:
            break
        moved = np.max(np.abs(z_new - z))
        z, f, g = z_new, f_new, g_new
        if moved < steptol and np.max(np.abs(g)) < gtol:
            break
    return z, f, g, it


def _profile_theta(x, p: float, k: int, theta: float) -> float:
    """Root of d lnL / d theta at fixed p (the theta score is decreasing)."""
    g = lambda t: score(x, EgtlParams(p, t, k))[1]  # noqa: E731
    lo, hi = theta, theta
    while g(lo) <= 0:
        lo *= 0.5
    while g(hi) >= 0:
        hi *= 2.0
    return brentq(g, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps)


def fit_mle(
    data,
    k: int,
    init: tuple[float, float] | None = None,
    *,
    gtol: float = 1e-8,
    max_iter: int = 500,
    with_se: bool = True,
) -> FitResult:
    """Maximum-likelihood estimate of (p, theta) for fixed k.

    L-BFGS-B runs on the mean negative log-likelihood in
    ``(logit p, log theta)`` using the analytic score; a short Newton
    polish follows. ``converged`` means the (projected) gradient sup-norm
    is below ``gtol``. Estimates of p outside ``[1e-10, 1 - 1e-10]`` set
    ``boundary``.
    """
    k = _check_k(k)
    x = _values(data)
    if np.unique(x[x > 0]).size < 2:
        raise DataQualityError("need at least 2 distinct positive observations")
    _require_positive(x, k)
    p0, t0 = init if init is not None else default_init(x, k)
    start = EgtlParams(p0, t0, k)
    ll0 = log_likelihood(x, start)
    lo, hi = float(logit(P_FLOOR)), float(logit(1 - P_FLOOR))
    z0 = np.array([logit(start.p), np.log(start.theta)])

    res = minimize(
        _objective,
        z0,
        args=(x, k),
        jac=True,
        method="L-BFGS-B",
        bounds=[(lo, hi), (None, None)],
        options={"maxiter": max_iter, "ftol": 0.0, "gtol": gtol * 1e-2, "maxls": 50},
    )
    z = np.array(res.x, dtype=float)
    iterations = int(res.nit)
    at_bound = z[0] <= lo + 1e-8 or z[0] >= hi - 1e-8
    if not at_bound:
        z, _, _, extra = _newton_polish(z, x, k, lo, hi, gtol, 1e-10)
        iterations += extra
    p_hat = float(np.clip(expit(z[0]), P_FLOOR, 1 - P_FLOOR))
    boundary = not (P_BOUNDARY <= p_hat <= 1 - P_BOUNDARY)
    if boundary:
        # the likelihood is flat in logit p out here; pin p and profile theta
        z[0] = lo if p_hat < 0.5 else hi
        p_hat = float(expit(z[0]))
        z[1] = np.log(_profile_theta(x, p_hat, k, float(np.exp(z[1]))))
    f, g = _objective(z, x, k)
    params = EgtlParams(p_hat, float(np.exp(z[1])), k)

    proj = g.copy()
    if boundary:
        proj[0] = 0.0
    converged = bool(np.max(np.abs(proj)) < gtol)
    out = FitResult(
        params=params,
        log_lik=log_likelihood(x, params),
        method="mle_direct",
        iterations=iterations,
        converged=converged,
        boundary=boundary,
    )
    if boundary:
        out.diagnostics.append(f"p estimate drifted to the boundary (p={p_hat:.3g})")
    if not converged:
        out.diagnostics.append(
            f"gradient sup-norm {np.max(np.abs(proj)):.3g} above {gtol:g} after {iterations} iterations"
        )
    if out.log_lik < ll0:
        out.diagnostics.append("log-likelihood below the starting value")
    return _attach_se(out, x) if with_se else out


def fit_mle_multistart(
    data,
    k: int,
    starts: Sequence[tuple[float, float]] | None = None,
    *,
    with_se: bool = True,
) -> FitResult:
    """Best of several :func:`fit_mle` runs; distinct optima are kept in ``local_optima``."""
    k = _check_k(k)
    x = _values(data)
    _, t0 = default_init(x, k)
    if starts is None:
        starts = [(p0, t0 * s) for p0 in (0.1, 0.5, 0.9) for s in (0.5, 1.0, 2.0)]
    fits = [fit_mle(x, k, init=s, with_se=False) for s in starts]
    best = max(fits, key=lambda r: (r.converged, r.log_lik))
    optima: list[tuple[float, float, float]] = []
    for r in sorted(fits, key=lambda r: -r.log_lik):
        if not r.converged:
            continue
        if all(abs(r.p - o[0]) > 1e-4 or abs(r.theta / o[1] - 1) > 1e-4 for o in optima):
            optima.append((r.p, r.theta, r.log_lik))
    best.local_optima = optima
    return _attach_se(best, x) if with_se else best


# ---------------------------------------------------------------------------
# EM
# ---------------------------------------------------------------------------


def _mean_truncated_logseries(p: float, k: int) -> float:
    """E[Z] under the log-series law truncated below k: p^k / ((1-p) A(p, k))."""
    return p**k / ((1.0 - p) * a_norm(p, k))


def _em_p_update(zbar: float, k: int) -> float:
    """Solve E[Z](p) = zbar for p; E[Z] increases from k (p -> 0) to infinity."""
    f = lambda p: _mean_truncated_logseries(p, k) - zbar  # noqa: E731
    lo, hi = 1e-15, 1 - P_FLOOR
    if f(lo) >= 0.0:
        return lo
    if f(hi) <= 0.0:
        return hi
    return brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def _em_theta_update(x, w, k, theta, damping=0.5, max_fp=200):
    """Solve n / theta = sum w x - (k-1) sum x / (1 - e^{-theta x}) for theta.

    Damped fixed-point iteration first; bracketed root-finding if it stalls
    or the bracket term goes nonpositive.
    """
    n = x.size
    swx = float((w * x).sum())
    if k == 1:
        return n / swx, "closed"

    def rhs(t):
        return n / (swx - (k - 1) * (x / -np.expm1(-t * x)).sum())

    t = theta
    for _ in range(max_fp):
        try:
            new = rhs(t)
        except FloatingPointError:
            break
        if not (np.isfinite(new) and new > 0):
            break
        new = damping * t + (1 - damping) * new
        if abs(new - t) <= 1e-14 * t:
            return new, "fixed_point"
        t = new

    def g(t):
        return n / t - swx + (k - 1) * (x / -np.expm1(-t * x)).sum()

    lo, hi = theta, theta
    while g(lo) <= 0:
        lo *= 0.5
    while g(hi) >= 0:
        hi *= 2.0
    return brentq(g, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps), "bracketed"


def fit_em(
    data,
    k: int,
    init: tuple[float, float] | None = None,
    *,
    tol: float = 1e-9,
    max_iter: int = 5000,
    keep_trace: bool = True,
    with_se: bool = True,
) -> FitResult:
    """EM iteration treating the defect count Z as missing data.

    E-step: w_i = k / (1 - p e^{-theta x_i}). M-step: p solves
    E[Z](p) = mean(w); theta solves the complete-data score equation.
    Stops when max(|dp|, |dtheta|/theta) < tol.
    """
    k = _check_k(k)
    x = _values(data)
    if np.unique(x[x > 0]).size < 2:
        raise DataQualityError("need at least 2 distinct positive observations")
    _require_positive(x, k)
    p, theta = init if init is not None else default_init(x, k)
    params = EgtlParams(p, theta, k)
    ll = log_likelihood(x, params)
    trace = [(params.p, params.theta, ll)] if keep_trace else None
    diagnostics: list[str] = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        w = k / (1.0 - params.p * np.exp(-params.theta * x))
        p_new = _em_p_update(float(w.mean()), k)
        theta_new, how = _em_theta_update(x, w, k, params.theta)
        if how == "bracketed":
            diagnostics.append(f"iteration {it}: theta update fell back to bracketed root")
        new = EgtlParams(min(max(p_new, 1e-15), 1 - P_FLOOR), theta_new, k)
        ll_new = log_likelihood(x, new)
        if ll_new < ll - 1e-10 * max(1.0, abs(ll)):
            diagnostics.append(f"iteration {it}: log-likelihood decreased by {ll - ll_new:.3g}")
        step = max(abs(new.p - params.p), abs(new.theta - params.theta) / params.theta)
        params, ll = new, ll_new
        if keep_trace:
            trace.append((params.p, params.theta, ll))
        if step < tol:
            converged = True
            break
    if not converged:
        diagnostics.append(f"EM did not converge in {max_iter} iterations")
    boundary = not (P_BOUNDARY <= params.p <= 1 - P_BOUNDARY)
    out = FitResult(
        params=params,
        log_lik=ll,
        method="em",
        iterations=it,
        converged=converged,
        boundary=boundary,
        trace=trace,
        diagnostics=diagnostics,
    )
    return _attach_se(out, x) if with_se else out


# ---------------------------------------------------------------------------
# method of moments
# ---------------------------------------------------------------------------

MOMENT_P_RANGE = (1e-6, 1 - 1e-4)
_SCAN_POINTS = 256


def _moment_sums(p: float, k: int, ctl: SeriesControl) -> tuple[float, float]:
    params = EgtlParams(p, 1.0, k)
    return _double_series(params, 2.0, 0.0, ctl), _double_series(params, 3.0, 0.0, ctl)


def moment_ratio(p: float, k: int, ctl: SeriesControl | None = None) -> float:
    """E[X^2] / E[X]^2, which depends on p and k only."""
    ctl = ctl or SeriesControl()
    s2, s3 = _moment_sums(p, k, ctl)
    return 2.0 * a_norm(p, k) * s3 / (p**k * s2**2)


@lru_cache(maxsize=64)
def _ratio_grid(k: int, ctl: SeriesControl):
    grid = np.linspace(*MOMENT_P_RANGE, _SCAN_POINTS)
    return grid, np.array([moment_ratio(float(p), k, ctl) for p in grid])


def fit_moments_from_moments(
    m1: float, m2: float, k: int, ctl: SeriesControl | None = None, on_no_root: str = "raise"
) -> FitResult:
    """Solve the two moment equations given first and second raw sample moments.

    p solves m2 - 2 m1^2 A(p,k) S3(p) / (p^k S2(p)^2) = 0, then
    theta = p^k S2(p) / (m1 A(p,k)).

    When the sample ratio m2/m1^2 is outside the attainable range the
    equation has no root. ``on_no_root="raise"`` raises NoMomentRootError;
    ``"boundary"`` returns the scan point with the smallest residual,
    marked ``boundary=True``, in the same way an MLE drifts to the edge.
    """
    k = _check_k(k)
    if on_no_root not in ("raise", "boundary"):
        raise ValueError("on_no_root must be 'raise' or 'boundary'")
    ctl = ctl or SeriesControl()
    if not (m1 > 0 and m2 > 0):
        raise ValueError("moments must be positive")
    if m2 - m1 * m1 <= 1e-14 * m2:
        raise NoMomentRootError("sample variance is zero; the moment equation has no root")
    grid, ratios = _ratio_grid(k, ctl)
    h = m2 - m1 * m1 * ratios
    sign = np.sign(h)
    changes = np.flatnonzero(sign[:-1] * sign[1:] < 0)
    exact = np.flatnonzero(h == 0.0)
    if changes.size == 0 and exact.size == 0:
        lo, hi = ratios.min(), ratios.max()
        msg = (
            f"moment ratio {m2 / m1**2:.6g} outside the attainable range "
            f"[{lo:.6g}, {hi:.6g}] for k={k}"
        )
        if on_no_root == "raise":
            raise NoMomentRootError(msg)
        p_hat = float(grid[np.argmin(np.abs(h))])
        s2, _ = _moment_sums(p_hat, k, ctl)
        theta_hat = p_hat**k * s2 / (m1 * a_norm(p_hat, k))
        return FitResult(
            params=EgtlParams(p_hat, theta_hat, k),
            log_lik=np.nan,
            method="moments",
            boundary=True,
            diagnostics=["no root: " + msg],
        )
    diagnostics = []
    if exact.size:
        candidates = [float(grid[i]) for i in exact]
    else:
        f = lambda p: m2 - m1 * m1 * moment_ratio(p, k, ctl)  # noqa: E731
        candidates = [
            brentq(f, grid[i], grid[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps)
            for i in changes
        ]
    if len(candidates) > 1:
        msg = f"moment equation has {len(candidates)} roots; returning the one nearest p=0.5"
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        diagnostics.append(msg)
    p_hat = min(candidates, key=lambda c: abs(c - 0.5))
    s2, _ = _moment_sums(p_hat, k, ctl)
    theta_hat = p_hat**k * s2 / (m1 * a_norm(p_hat, k))
    return FitResult(
        params=EgtlParams(p_hat, theta_hat, k),
        log_lik=np.nan,
        method="moments",
        diagnostics=diagnostics,
    )


def fit_moments(
    data, k: int, ctl: SeriesControl | None = None, on_no_root: str = "raise"
) -> FitResult:
    """Method-of-moments estimate from the first two raw sample moments.

    Zero-variance data always raises; see ``fit_moments_from_moments`` for
    ``on_no_root``.
    """
    x = _values(data)
    if np.unique(x).size < 2:
        raise NoMomentRootError("data has fewer than 2 distinct values; variance is zero")
    res = fit_moments_from_moments(float(np.mean(x)), float(np.mean(x * x)), k, ctl, on_no_root)
    res.log_lik = log_likelihood(x, res.params)
    return res


# ---------------------------------------------------------------------------
# Bayes
# ---------------------------------------------------------------------------


def _gauss_legendre(n: int, a: float, b: float):
    nodes, weights = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (nodes + 1.0), half * weights


def _log_lik_grid(x, k, p_nodes, theta_nodes) -> NDArray[np.float64]:
    """Log-likelihood on the tensor grid, shape (len(theta_nodes), len(p_nodes))."""
    n = x.size
    sx = x.sum()
    logA = np.log(a_norm(p_nodes, k))
    p_part = n * k * np.log(p_nodes) - n * logA
    out = np.empty((theta_nodes.size, p_nodes.size))
    for i, t in enumerate(theta_nodes):
        u = np.exp(-t * x)
        base = n * np.log(t) - t * sx
        if k > 1:
            base += (k - 1) * np.log(-np.expm1(-t * x)).sum()
        mix = np.log1p(-np.outer(p_nodes, u)).sum(axis=1)
        out[i] = base + p_part - k * mix
    return out


def fit_bayes(data, k: int, cfg: BayesConfig | None = None) -> FitResult:
    """Posterior means of (p, theta) under p ~ U(0,1), theta ~ Gamma(a, rate b).

    The double integrals use Gauss-Legendre nodes on (0, 1) x (0, theta_max)
    with theta_max = max(20 theta0, 10 / mean(x)), theta0 = k / mean(x),
    and are evaluated in log space with max-subtraction.
    """
    k = _check_k(k)
    cfg = cfg or BayesConfig()
    x = _values(data)
    if np.unique(x[x > 0]).size < 2:
        raise DataQualityError("need at least 2 distinct positive observations")
    _require_positive(x, k)
    xbar = float(np.mean(x))
    theta_max = cfg.theta_max or max(20.0 * k / xbar, 10.0 / xbar)
    p_nodes, p_w = _gauss_legendre(cfg.grid_p, 0.0, 1.0)
    t_nodes, t_w = _gauss_legendre(cfg.grid_theta, 0.0, theta_max)
    logpost = _log_lik_grid(x, k, p_nodes, t_nodes)
    logpost += ((cfg.a - 1.0) * np.log(t_nodes) - cfg.b * t_nodes)[:, None]
    logpost += np.log(t_w)[:, None] + np.log(p_w)[None, :]
    logpost -= logpost.max()
    mass = np.exp(logpost)
    total = mass.sum()
    mass /= total
    p_mean = float((mass.sum(axis=0) * p_nodes).sum())
    t_mean = float((mass.sum(axis=1) * t_nodes).sum())
    params = EgtlParams(p_mean, t_mean, k)
    diagnostics = []
    if mass.max() > 0.999:
        diagnostics.append("degenerate posterior: >99.9% of mass on one grid node; refine the grid")
    edge = mass[-1].sum()
    if edge > 1e-6:
        diagnostics.append(f"posterior mass {edge:.2g} at the theta cutoff; raise theta_max")
    return FitResult(
        params=params,
        log_lik=log_likelihood(x, params),
        method="bayes",
        converged=not diagnostics or not diagnostics[0].startswith("degenerate"),
        diagnostics=diagnostics,
    )


METHODS = {
    "mle_direct": fit_mle,
    "mle": fit_mle,
    "em": fit_em,
    "moments": fit_moments,
    "bayes": fit_bayes,
}


def fit(data, k: int, method: str = "mle_direct", **kwargs) -> FitResult:
    """Dispatch to one of the four estimators by tag."""
    try:
        fn = METHODS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; choose from {sorted(METHODS)}") from None
    return fn(data, k, **kwargs)
