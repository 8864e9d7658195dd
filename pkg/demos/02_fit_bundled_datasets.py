"""
Fitting the bundled lifetime datasets
=====================================

Every estimator on the brake-failure and yarn-fatigue data, then the
K-S model-selection table against gamma and Weibull fits.
"""

from egtl import fit_bayes, fit_em, fit_mle_multistart, fit_moments, load_dataset, model_selection_table
from egtl.estimation import NoMomentRootError

for name in ("barlow1975", "quesenberry1982"):
    data = load_dataset(name)
    print(f"\n{name}: n={data.n}, range {data.values.min():g}..{data.values.max():g}")

    for k in (2, 3, 4):
        mle = fit_mle_multistart(data, k)
        em = fit_em(data, k, keep_trace=False)
        bayes = fit_bayes(data, k)
        try:
            mom = fit_moments(data, k)
            mom_txt = f"p={mom.p:.4f} theta={mom.theta:.4g}"
        except NoMomentRootError as exc:
            mom_txt = f"no root ({exc})"
        flag = " [p at boundary]" if mle.boundary else ""
        print(f"  k={k} MLE   p={mle.p:.4f} theta={mle.theta:.4g} loglik={mle.log_lik:.3f}{flag}")
        print(f"      EM    p={em.p:.4f} theta={em.theta:.4g} ({em.iterations} iterations)")
        print(f"      Bayes p={bayes.p:.4f} theta={bayes.theta:.4g}")
        print(f"      MoM   {mom_txt}")

    print("  model          K-S     p-value")
    for row in model_selection_table(data, k_max=4):
        print(f"  {row.model:12s} {row.ks_stat:7.4f}  {row.p_value:7.4f}")
