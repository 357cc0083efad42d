"""
The quartic example and its identity-covariance transform
=========================================================

f = 1 - delta^2(g^2)/2 + delta^4(g^4) is a density for |g| < c*, has mean
zero and covariance I - g g^T.  Wick-multiplying with E_2(g) restores the
identity covariance.
"""
import numpy as np

from wickstd import (covariance_of, example_density, identity_covariance_density,
                     max_admissible_norm, standardize)
from wickstd.standardize import quartic_minimum
from wickstd.verify import QuadratureGrid, characteristic_functional

cstar = max_admissible_norm()
print(f"c* = {cstar:.12f}")
for c in (0.0, 0.3, 0.5, cstar, 0.6):
    print(f"  min_t quartic at |g|={c:.4f}: {quartic_minimum(c):+.6f}")

g = np.array([0.3, 0.4])  # |g| = 0.5
f = example_density(g)
print("covariance before:\n", covariance_of(f).matrix)

out = identity_covariance_density(f, g)
print("covariance after:\n", covariance_of(out).matrix)
print("kept orders up to", out.body.max_order, "with tail", out.tail)

grid = QuadratureGrid(2, 40)
phi = np.array([1.0, 0.5])
lhs = characteristic_functional(out, phi, grid)
rhs = characteristic_functional(f, phi, grid) * np.exp(-0.5 * (g @ phi) ** 2)
print("CF identity error:", abs(lhs - rhs))

# standardize recovers the direction (up to sign) from the second kernel alone
density, m, direction = standardize(f)
print("m =", m, " g =", direction)
