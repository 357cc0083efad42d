"""
Chaos expansions on a small Gaussian space
==========================================

Build a few expansions by hand, evaluate them, and compare the algebraic
inner product with brute-force quadrature.
"""
import numpy as np

from wickstd import ChaosExpansion, SymmetricTensor, evaluate, expansion_inner, rank_one_power
from wickstd.verify import QuadratureGrid, quadrature_inner

# A symmetric kernel is stored once per sorted multi-index.  The mixed entry
# (0, 1) stands for both (0, 1) and (1, 0) of the full matrix.
k2 = SymmetricTensor(2, 2, {(0, 0): 0.5, (0, 1): -0.25})
print(k2.to_full())

# f = 1 + delta(h) + delta^2(k2)
h = np.array([0.3, -0.4])
f = ChaosExpansion(2, [SymmetricTensor.scalar(2, 1.0), rank_one_power(h, 1), k2])
w = np.array([[0.0, 0.0], [1.0, 2.0]])
print("f(w) =", evaluate(f, w))

# delta^2(h (x) h) is the Hermite polynomial <w,h>^2 - |h|^2
sq = ChaosExpansion.multiple_integral(rank_one_power(h, 2))
print("chaos:", evaluate(sq, w), " direct:", (w @ h) ** 2 - h @ h)

# Isometry: E[f g] = sum_k k! <f_k, g_k>, checked against Gauss-Hermite
grid = QuadratureGrid(2, 12)
print("algebraic  <f, f> =", expansion_inner(f, f))
print("quadrature <f, f> =", quadrature_inner(f, f, grid))
