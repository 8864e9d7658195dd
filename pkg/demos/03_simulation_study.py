"""
Comparing estimators by simulation
==================================

A reduced version of the bias/variance/MSE study. The full design
(1000 replications, three sample sizes) is ``SimDesign()`` with defaults;
here 100 replications keep the run to a couple of minutes.
"""

from egtl.simulation import SimDesign, render_by_method, run_study

design = SimDesign(sample_sizes=(20, 100), k_values=(1, 2), replications=100, methods=("mle_direct", "moments", "bayes"))
report = run_study(design)
print(render_by_method(report))

# moment fits fail when the sample's second-moment ratio is out of reach
for rec in report.flagged:
    print(f"flagged: n={rec.n} k={rec.k} (p={rec.p}, theta={rec.theta}) {rec.method}: {rec.failures} failures")

# keeping those samples as edge estimates scores both methods on the same draws
edge = run_study(SimDesign(sample_sizes=(20,), k_values=(1,), replications=100,
                           methods=("mle_direct", "moments"), moments_no_root="boundary"))
print(render_by_method(edge))
