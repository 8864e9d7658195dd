"""
A tour of the EGTL family
=========================

Density, survival and hazard for a few orders k, moments from the series
and a quick check of the inversion sampler.
"""

import numpy as np

from egtl import EgtlParams, cdf, hazard, pdf, quantile, raw_moment, sample, survival

# the same (p, theta) for the first four orders
orders = [EgtlParams(0.5, 1.0, k) for k in (1, 2, 3, 4)]

x = np.linspace(0.0, 6.0, 7)
for P in orders:
    print(f"k={P.k}")
    print("   x      pdf      cdf      S(x)     h(x)")
    for xi, f, F, S, h in zip(x, pdf(P, x), cdf(P, x), survival(P, x), hazard(P, x)):
        print(f"{xi:4.1f}  {f:7.4f}  {F:7.4f}  {S:7.4f}  {h:7.4f}")

# k = 1 has a decreasing hazard, larger k an increasing one; both tend to theta
for P in orders:
    h = hazard(P, np.array([0.0, 0.5, 5.0, 40.0]))
    print(f"k={P.k}: h(0)={h[0]:.4f}  h(0.5)={h[1]:.4f}  h(5)={h[2]:.4f}  h(40)={h[3]:.4f}")

# mean and variance from the moment series
for P in orders:
    m1, m2 = raw_moment(P, 1), raw_moment(P, 2)
    print(f"k={P.k}: mean {m1:.5f}  variance {m2 - m1 * m1:.5f}  median {float(quantile(P, 0.5)):.5f}")

# draws by inversion; sample moments should sit close to the series values
P = orders[2]
draws = sample(P, 200_000, seed=1)
print(f"sample mean {draws.mean():.5f} vs {raw_moment(P, 1):.5f}")
