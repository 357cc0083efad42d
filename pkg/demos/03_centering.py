"""
Centering a density by a Wick shift
===================================

A polynomial density with non-zero mean m is centered by Wick-multiplying
with E(-m).  The order-1 kernel vanishes exactly, and the characteristic
functional picks up the phase exp(-i<m,phi>).
"""
import numpy as np

from wickstd import center_density, density_check, from_polynomial_in_linear, mean_of
from wickstd.verify import QuadratureGrid, characteristic_functional
from wickstd.wick import gjessing_evaluate

# (1 + t)^2 + 0.1 in t = <w, h>, scaled to unit mass
h = np.array([0.5, 0.2])
body = from_polynomial_in_linear([1.1, 2.0, 1.0], h)
f = density_check(body / body.mean())
m = mean_of(f)
print("mean:", m)

c = center_density(f)
print("centered order-1 kernel:", c.body.first_kernel_vector())
print("mass:", c.body.mean(), " truncation tail:", c.tail)

# Pointwise, the centered density is f(w + m) E(-m)(w)
w = np.random.default_rng(1).standard_normal((4, 2))
print(c(w) - gjessing_evaluate(f.body, -m, w))

grid = QuadratureGrid(2, 40)
phi = np.array([0.7, -1.2])
lhs = characteristic_functional(c, phi, grid)
rhs = np.exp(-1j * (m @ phi)) * characteristic_functional(f, phi, grid)
print("CF identity error:", abs(lhs - rhs))
