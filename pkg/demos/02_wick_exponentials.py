"""
Wick products and the two closed-form exponentials
==================================================

The Wick exponential of delta(h) is exp(<w,h> - |h|^2/2); the Wick
exponential of delta^2(h^2)/2 has its own closed form, is a Gaussian mixture
of the first, and is in L^p exactly when |h|^2 < 1/(p-1).
"""
import numpy as np

from wickstd import ChaosExpansion, evaluate, wick_exp_truncated, wick_product
from wickstd.verify import lp_refinement
from wickstd.wick import (LinearWickExp, QuadraticWickExp, eval_linear_exp, eval_quadratic_exp,
                          quadratic_exp_as_mixture, s_transform)

rng = np.random.default_rng(0)
h = np.array([0.6, 0.3])
w = rng.standard_normal((5, 2))

# delta(h) <> delta(h) = delta(h)^2 - |h|^2
lin = ChaosExpansion.linear(h)
print(evaluate(wick_product(lin, lin), w) - ((w @ h) ** 2 - h @ h))

# Truncated series against the closed form; the tail is the size of the last term
series = wick_exp_truncated(lin, terms=20, max_order=20)
print("tail indicator:", series.tail)
print("max error:", np.abs(evaluate(series.expansion, w) - eval_linear_exp(LinearWickExp(h), w)).max())

# The S-transform turns Wick products into ordinary products
g = np.array([0.2, -0.5])
phi = np.array([0.4, 0.1])
prod = wick_product(lin, ChaosExpansion.linear(g))
print(s_transform(prod, phi), "=", (h @ phi) * (g @ phi))

# Quadratic exponential: closed form vs mixture over lambda ~ N(0, 1)
e2 = QuadraticWickExp(0.8 * h / np.linalg.norm(h))
print(eval_quadratic_exp(e2, w) - quadratic_exp_as_mixture(e2, w))

# L^p membership: watch the truncated log-integral settle or blow up
for norm_sq in (0.8, 1.2):
    d = lp_refinement([np.sqrt(norm_sq)], p=2.0)
    print(f"|h|^2={norm_sq}: {d.classification}", np.round(d.log_estimates, 4))
