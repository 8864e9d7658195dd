"""Monte Carlo comparison of the EGTL estimators (bias, variance, MSE)."""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .distribution import EgtlParams, sample
from .estimation import fit

__all__ = [
    "SimDesign",
    "CellRecord",
    "SimulationReport",
    "run_cell",
    "run_study",
    "replication_seed",
    "method_rows",
    "render_by_method",
]

METHOD_ORDER = ("mle_direct", "em", "moments", "bayes")
FAILURE_FLAG_FRACTION = 0.10


@dataclass(frozen=True)
class SimDesign:
    sample_sizes: tuple[int, ...] = (20, 50, 100)
    k_values: tuple[int, ...] = (1, 2, 3)
    param_settings: tuple[tuple[float, float], ...] = ((0.5, 0.5), (0.7, 1.5), (0.3, 2.0))
    replications: int = 1000
    methods: tuple[str, ...] = ("mle_direct", "moments", "bayes")
    base_seed: int = 20180105
    moments_no_root: str = "raise"

    def __post_init__(self):
        if self.moments_no_root not in ("raise", "boundary"):
            raise ValueError("moments_no_root must be 'raise' or 'boundary'")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        for p, theta in self.param_settings:
            for k in self.k_values:
                EgtlParams(p, theta, k)
        for m in self.methods:
            if m not in METHOD_ORDER and m != "mle":
                raise ValueError(f"unknown method {m!r}")
        if any(n < 2 for n in self.sample_sizes):
            raise ValueError("sample sizes must be >= 2")


@dataclass
class CellRecord:
    n: int
    k: int
    p: float
    theta: float
    method: str
    replications: int
    bias_p: float
    bias_theta: float
    var_p: float
    var_theta: float
    mse_p: float
    mse_theta: float
    failures: int
    flagged: bool = False

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class SimulationReport:
    records: list[CellRecord] = field(default_factory=list)

    @property
    def flagged(self) -> list[CellRecord]:
        return [r for r in self.records if r.flagged]

    def get(self, n, k, p, theta, method) -> CellRecord:
        for r in self.records:
            if (r.n, r.k, r.p, r.theta, r.method) == (n, k, p, theta, method):
                return r
        raise KeyError((n, k, p, theta, method))

    def as_rows(self) -> list[dict]:
        return [r.as_dict() for r in self.records]


def replication_seed(base_seed: int, n: int, k: int, p: float, theta: float, r: int) -> np.random.SeedSequence:
    """Seed for replication ``r`` of a cell; independent of the estimator so
    all methods in a cell see the same samples."""
    key = [int(base_seed), int(n), int(k), int(round(p * 1e9)), int(round(theta * 1e9)), int(r)]
    return np.random.SeedSequence(key)


def run_cell(
    n: int,
    k: int,
    p: float,
    theta: float,
    method: str,
    replications: int,
    base_seed: int = 0,
    moments_no_root: str = "raise",
) -> CellRecord:
    """Bias, variance and MSE of one estimator in one design cell.

    Replications whose fit raises or does not converge are counted in
    ``failures`` and excluded; the cell is flagged above 10% failures.
    With ``moments_no_root="boundary"`` a moment fit without a root yields
    its edge estimate instead of a failure.
    """
    truth = EgtlParams(p, theta, k)
    estimates = []
    failures = 0
    for r in range(replications):
        x = sample(truth, n, replication_seed(base_seed, n, k, p, theta, r))
        try:
            kwargs = {"with_se": False} if method in ("mle", "mle_direct", "em") else {}
            if method == "em":
                kwargs["keep_trace"] = False
            if method == "moments":
                kwargs["on_no_root"] = moments_no_root
            res = fit(x, k, method, **kwargs)
        except (ValueError, ArithmeticError, RuntimeError):
            failures += 1
            continue
        if not res.converged:
            failures += 1
            continue
        estimates.append((res.p, res.theta))
    est = np.array(estimates, dtype=float).reshape(-1, 2)
    if est.shape[0] == 0:
        nan = float("nan")
        stats = dict(bias_p=nan, bias_theta=nan, var_p=nan, var_theta=nan, mse_p=nan, mse_theta=nan)
    else:
        err = est - np.array([p, theta])
        bias = err.mean(axis=0)
        var = est.var(axis=0)
        mse = (err**2).mean(axis=0)
        stats = dict(
            bias_p=float(bias[0]), bias_theta=float(bias[1]),
            var_p=float(var[0]), var_theta=float(var[1]),
            mse_p=float(mse[0]), mse_theta=float(mse[1]),
        )
    return CellRecord(
        n=n, k=k, p=p, theta=theta, method=method, replications=replications,
        failures=failures, flagged=failures > FAILURE_FLAG_FRACTION * replications,
        **stats,
    )


def _cells(design: SimDesign):
    for n, k, (p, theta), method in itertools.product(
        design.sample_sizes, design.k_values, design.param_settings, design.methods
    ):
        yield (n, k, p, theta, method, design.replications, design.base_seed, design.moments_no_root)


def _run(args):
    return run_cell(*args)


def run_study(design: SimDesign, workers: int | None = None) -> SimulationReport:
    """Run every (n, k, setting, method) cell; records are ordered n, k, setting, method.

    With ``workers > 1`` cells run in a process pool; the output is identical
    to the sequential run because seeds depend only on the cell and replication.
    """
    cells = list(_cells(design))
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run, cells))
    else:
        records = [_run(c) for c in cells]
    return SimulationReport(records)


_STATS = ("bias_p", "var_p", "mse_p", "bias_theta", "var_theta", "mse_theta")


def method_rows(report: SimulationReport) -> list[dict]:
    """One row per (n, k, setting) with ``method:stat`` columns for every method."""
    rows: dict[tuple, dict] = {}
    for r in report.records:
        key = (r.n, r.k, r.p, r.theta)
        row = rows.setdefault(key, {"n": r.n, "k": r.k, "p": r.p, "theta": r.theta})
        for s in _STATS:
            row[f"{r.method}:{s}"] = getattr(r, s)
        row[f"{r.method}:failures"] = r.failures
    return list(rows.values())


def render_by_method(report: SimulationReport, digits: int = 4) -> str:
    """Aligned text with one column group per method."""
    methods = list(dict.fromkeys(r.method for r in report.records))
    lead = ["n", "k", "p", "theta"]
    heads = lead + [s for _ in methods for s in _STATS]
    body = []
    for row in method_rows(report):
        cells = [str(row["n"]), str(row["k"]), f"{row['p']:g}", f"{row['theta']:g}"]
        for m in methods:
            cells += [f"{row.get(f'{m}:{s}', float('nan')):.{digits}f}" for s in _STATS]
        body.append(cells)
    widths = [max([len(h)] + [len(b[i]) for b in body]) for i, h in enumerate(heads)]
    lead_w = sum(widths[:4]) + 2 * 4
    group_w = [sum(widths[4 + 6 * j: 10 + 6 * j]) + 2 * 5 for j in range(len(methods))]
    lines = [" " * lead_w + "  ".join(m.center(w) for m, w in zip(methods, group_w))]
    lines.append("  ".join(h.rjust(w) for h, w in zip(heads, widths)))
    lines += ["  ".join(c.rjust(w) for c, w in zip(b, widths)) for b in body]
    return "\n".join(lines)
