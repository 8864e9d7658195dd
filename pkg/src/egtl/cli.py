"""Command-line front end: ``egtl {fit,gof,simulate,sample,curve}``."""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

import numpy as np

from . import distribution as dist
from .distribution import EgtlParams, SeriesControl, SeriesConvergenceError
from .estimation import BayesConfig, DataQualityError, NoMomentRootError, fit_bayes, fit_em, fit_mle_multistart, fit_moments
from .gof import model_selection_table
from .io import FORMATS, RunConfig, load_dataset, render
from .simulation import SimDesign, render_by_method, run_study, method_rows

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NONCONVERGENCE = 4
EXIT_DATA = 5


class _Fail(Exception):
    def __init__(self, code: int, msg: str):
        super().__init__(msg)
        self.code = code


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="seed for random draws")
    common.add_argument("--format", dest="output_format", choices=FORMATS, default="json")
    common.add_argument("--rel-tol", type=float, default=None, help="series truncation tolerance")
    common.add_argument("--max-terms", type=int, default=None, help="series term cap")

    ap = argparse.ArgumentParser(prog="egtl", description="EGTL lifetime distribution tools")
    sub = ap.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", parents=[common], help="fit EGTL parameters to a dataset")
    f.add_argument("--data", dest="input_path", required=True, help="file path or bundled name")
    f.add_argument("--k", type=int, required=True)
    f.add_argument("--method", choices=("mle", "em", "moments", "bayes"), default="mle")

    g = sub.add_parser("gof", parents=[common], help="K-S model-selection table")
    g.add_argument("--data", dest="input_path", required=True)
    g.add_argument("--k-max", type=int, default=4)

    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo estimator study")
    s.add_argument("--n-values", type=_int_list, default=(20, 50, 100))
    s.add_argument("--k-values", type=_int_list, default=(1, 2, 3))
    s.add_argument("--replications", type=int, default=1000)
    s.add_argument("--methods", default="mle_direct,moments,bayes")
    s.add_argument("--moments-no-root", choices=("raise", "boundary"), default="raise")
    s.add_argument("--workers", type=int, default=None)
    s.add_argument("--layout", choices=("cells", "by-method"), default="cells")

    for name, helptext in (("sample", "draw random variates"), ("curve", "pdf/cdf/survival/hazard on a grid")):
        c = sub.add_parser(name, parents=[common], help=helptext)
        c.add_argument("--p", type=float, required=True)
        c.add_argument("--theta", type=float, required=True)
        c.add_argument("--k", type=int, required=True)
        if name == "sample":
            c.add_argument("--n", type=int, default=10)
        else:
            c.add_argument("--points", type=int, default=101)
            c.add_argument("--x-max", type=float, default=None)
    return ap


def _config(ns: argparse.Namespace) -> RunConfig:
    known = set(RunConfig.__dataclass_fields__) - {"extra"}
    args = vars(ns)
    return RunConfig(
        **{k: v for k, v in args.items() if k in known},
        extra={k: v for k, v in args.items() if k not in known},
    )


def _ctl(cfg: RunConfig) -> SeriesControl:
    base = SeriesControl()
    return SeriesControl(
        rel_tol=cfg.rel_tol if cfg.rel_tol is not None else base.rel_tol,
        max_terms=cfg.max_terms if cfg.max_terms is not None else base.max_terms,
    )


def _load(cfg: RunConfig):
    try:
        return load_dataset(cfg.input_path)
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot read {cfg.input_path}: {exc.strerror or exc}") from None


def cmd_fit(cfg: RunConfig) -> tuple[str, int]:
    data = _load(cfg)
    ctl = _ctl(cfg)
    if cfg.method == "mle":
        res = fit_mle_multistart(data, cfg.k)
    elif cfg.method == "em":
        res = fit_em(data, cfg.k, keep_trace=False)
    elif cfg.method == "moments":
        res = fit_moments(data, cfg.k, ctl)
    else:
        res = fit_bayes(data, cfg.k, BayesConfig())
    row = res.as_dict()
    row["diagnostics"] = "; ".join(res.diagnostics)
    code = EXIT_OK if res.converged else EXIT_NONCONVERGENCE
    return render(row, cfg.output_format), code


def cmd_gof(cfg: RunConfig) -> tuple[str, int]:
    data = _load(cfg)
    rows = []
    for r in model_selection_table(data, cfg.k_max):
        a, b = (r.fitted + (None, None))[:2]
        rows.append({
            "model": r.model,
            "k": r.k,
            "p_or_rate": a,
            "theta_or_shape": b,
            "ks_stat": r.ks_stat,
            "p_value": r.p_value,
            "n": r.n,
            "error": r.error or "",
            "flags": "; ".join(r.flags),
        })
    return render(rows, cfg.output_format), EXIT_OK


def cmd_simulate(cfg: RunConfig) -> tuple[str, int]:
    ex = cfg.extra
    design = SimDesign(
        sample_sizes=tuple(ex["n_values"]),
        k_values=tuple(ex["k_values"]),
        replications=ex["replications"],
        methods=tuple(m.strip() for m in ex["methods"].split(",") if m.strip()),
        base_seed=cfg.seed if cfg.seed is not None else SimDesign.base_seed,
        moments_no_root=ex["moments_no_root"],
    )
    report = run_study(design, workers=ex["workers"])
    if ex["layout"] == "by-method":
        if cfg.output_format == "table":
            return render_by_method(report), EXIT_OK
        return render(method_rows(report), cfg.output_format), EXIT_OK
    return render(report.as_rows(), cfg.output_format), EXIT_OK


def _params(cfg: RunConfig) -> EgtlParams:
    return EgtlParams(cfg.p, cfg.theta, cfg.k)


def cmd_sample(cfg: RunConfig) -> tuple[str, int]:
    params = _params(cfg)
    if cfg.n is None or cfg.n < 1:
        raise ValueError("--n must be a positive integer")
    x = dist.sample(params, cfg.n, cfg.seed)
    return render([{"x": float(v)} for v in x], cfg.output_format), EXIT_OK


def cmd_curve(cfg: RunConfig) -> tuple[str, int]:
    params = _params(cfg)
    if cfg.points < 2:
        raise ValueError("--points must be >= 2")
    x_max = cfg.x_max if cfg.x_max is not None else float(dist.quantile(params, 0.999))
    if not x_max > 0:
        raise ValueError("--x-max must be positive")
    x = np.linspace(0.0, x_max, cfg.points)
    rows = [
        {"x": a, "pdf": b, "cdf": c, "survival": d, "hazard": e}
        for a, b, c, d, e in zip(
            x, dist.pdf(params, x), dist.cdf(params, x), dist.survival(params, x), dist.hazard(params, x)
        )
    ]
    return render(rows, cfg.output_format), EXIT_OK


COMMAND_TABLE = {
    "fit": cmd_fit,
    "gof": cmd_gof,
    "simulate": cmd_simulate,
    "sample": cmd_sample,
    "curve": cmd_curve,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    try:
        cfg = _config(ns)
        text, code = COMMAND_TABLE[cfg.command](cfg)
    except _Fail as exc:
        print(f"egtl: {exc}", file=sys.stderr)
        return exc.code
    except (DataQualityError, NoMomentRootError) as exc:
        print(f"egtl: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (SeriesConvergenceError, ArithmeticError) as exc:
        print(f"egtl: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except ValueError as exc:
        print(f"egtl: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(text)
    if code == EXIT_NONCONVERGENCE:
        print("egtl: fit did not converge", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
