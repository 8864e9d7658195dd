"""EGTL lifetime distribution: density, fitting, goodness of fit and simulation."""

from __future__ import annotations

from .distribution import (
    EgtlParams,
    SeriesControl,
    SeriesConvergenceError,
    a_norm,
    cdf,
    hazard,
    log_pdf,
    mgf,
    pdf,
    quantile,
    raw_moment,
    sample,
    survival,
    y_transform,
)
from .estimation import (
    BayesConfig,
    DataQualityError,
    Dataset,
    FitResult,
    NoMomentRootError,
    fisher_information,
    fit,
    fit_bayes,
    fit_em,
    fit_mle,
    fit_mle_multistart,
    fit_moments,
    log_likelihood,
    score,
    standard_errors,
)
from .gof import GofReport, fit_gamma, fit_weibull, ks_p_value, ks_statistic, model_selection_table
from .io import load_dataset, render
from .simulation import SimDesign, SimulationReport, render_by_method, run_cell, run_study

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
