"""Acceptance criteria, one test each, at their stated tolerances.

Each test records a PASS/FAIL line (printed in the terminal summary) before
asserting, so a failing criterion is reported rather than hidden.
"""
import math

import numpy as np
import pytest

from wickstd.chaos import ChaosExpansion, evaluate, expansion_inner, from_polynomial_in_linear
from wickstd.standardize import (center_density, covariance_of, density_check, example_density,
                                 example_expansion, identity_covariance_density,
                                 max_admissible_norm, mean_of)
from wickstd.verify import (QuadratureGrid, characteristic_functional, empirical_cf, grid_values,
                            lp_refinement, quadrature_inner, simulate_standardized)
from wickstd.wick import (LinearWickExp, QuadraticWickExp, eval_linear_exp, eval_quadratic_exp,
                          quadratic_exp_as_mixture, quadratic_exp_lp_integrable, s_transform,
                          wick_exp_truncated, wick_product)

from conftest import (ACCEPTANCE, admissible_norm_by_grid, brute_sym_product, full_from_sorted,
                      random_density, random_expansion, unit)

SEED = 20261015  # pre-registered before any criterion was run


def record(key, ok, detail):
    ACCEPTANCE[key] = (bool(ok), detail)
    print(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def _test_vectors(rng, d, count, radius):
    v = rng.standard_normal((count, d))
    return v * (radius * rng.random(count) / np.linalg.norm(v, axis=1))[:, None]


def test_criterion_1_wick_kernel_law():
    rng = np.random.default_rng(SEED + 1)
    worst_kernel = worst_s = 0.0
    for _ in range(200):
        d = int(rng.integers(1, 4))
        f = random_expansion(rng, d, int(rng.integers(0, 4)))
        g = random_expansion(rng, d, int(rng.integers(0, 4)))
        prod = wick_product(f, g)
        for n in range(f.max_order + g.max_order + 1):
            brute = np.zeros((d,) * n)
            for k in range(max(0, n - g.max_order), min(n, f.max_order) + 1):
                brute = brute + brute_sym_product(f.kernel(k), g.kernel(n - k))
            worst_kernel = max(worst_kernel,
                               float(np.max(np.abs(full_from_sorted(prod.kernel(n)) - brute),
                                            initial=0.0)))
        h = rng.uniform(-1, 1, d)
        worst_s = max(worst_s, abs(s_transform(prod, h) - s_transform(f, h) * s_transform(g, h)))
    record(1, worst_kernel <= 1e-12 and worst_s <= 1e-10,
           f"max kernel error {worst_kernel:.2e} (tol 1e-12), "
           f"max S-factorization error {worst_s:.2e} (tol 1e-10)")


def test_criterion_2_closed_forms():
    rng = np.random.default_rng(SEED + 2)
    worst_exp = worst_mix = 0.0
    for norm in (0.25, 0.5, 0.75, 1.0):
        d = int(rng.integers(1, 4))
        h = norm * unit(rng.standard_normal(d))
        w = rng.standard_normal((100, d))
        series = wick_exp_truncated(ChaosExpansion.linear(h), terms=20, max_order=20).expansion
        worst_exp = max(worst_exp, float(np.max(np.abs(
            evaluate(series, w) - eval_linear_exp(LinearWickExp(h), w)))))
    for norm in (0.0, 0.3, 0.6, 0.9):
        d = int(rng.integers(1, 4))
        e = QuadraticWickExp(norm * unit(rng.standard_normal(d)))
        w = rng.standard_normal((100, d))
        worst_mix = max(worst_mix, float(np.max(np.abs(
            quadratic_exp_as_mixture(e, w) - eval_quadratic_exp(e, w)))))
    record(2, worst_exp <= 1e-8 and worst_mix <= 1e-8,
           f"series vs closed form {worst_exp:.2e}, mixture vs closed form {worst_mix:.2e} "
           "(tol 1e-8)")


def test_criterion_3_lp_boundary():
    outcomes = []
    for p in (1.5, 2.0, 3.0):
        for sign, expected in ((-1, "convergent"), (1, "divergent")):
            norm_sq = (1.0 + sign * 0.2) / (p - 1.0)
            h = [math.sqrt(norm_sq)]
            got = lp_refinement(h, p).classification
            truth = "convergent" if quadratic_exp_lp_integrable(h, p) else "divergent"
            outcomes.append(got == expected == truth)
    record(3, all(outcomes), f"{sum(outcomes)}/6 cases classified as predicted")


def test_criterion_4_centering():
    rng = np.random.default_rng(SEED + 4)
    worst_first = worst_mass = worst_cf = 0.0
    for i in range(20):
        f = density_check(random_density(rng, shift=0.4 if i % 2 else 0.0))
        m = mean_of(f)
        c = center_density(f)
        worst_first = max(worst_first, float(np.max(np.abs(c.body.first_kernel_vector()))))
        worst_mass = max(worst_mass, abs(c.body.mean() - 1.0))
        d = f.dimension
        grid = QuadratureGrid(d, {1: 60, 2: 40, 3: 24}[d])
        vc, vf = grid_values(c, grid), grid_values(f, grid)
        for phi in _test_vectors(rng, d, 10, 2.0):
            lhs = characteristic_functional(vc, phi, grid)
            rhs = np.exp(-1j * (m @ phi)) * characteristic_functional(vf, phi, grid)
            worst_cf = max(worst_cf, abs(lhs - rhs))
    record(4, worst_first == 0.0 and worst_mass <= 1e-9 and worst_cf <= 1e-6,
           f"order-1 kernel max {worst_first:.1e} (exact 0), mass error {worst_mass:.2e} "
           f"(tol 1e-9), CF error {worst_cf:.2e} (tol 1e-6)")


def test_criterion_5_identity_covariance():
    rng = np.random.default_rng(SEED + 5)
    worst_k2 = worst_cov = worst_cf = 0.0
    for norm in (0.1, 0.3, 0.5):
        g = norm * unit([1.0, -0.7])
        f = example_density(g)
        out = identity_covariance_density(f, g)
        worst_k2 = max(worst_k2, out.body.kernel(2).norm())
        worst_cov = max(worst_cov, float(np.max(np.abs(covariance_of(out).matrix - np.eye(2)))))
        grid = QuadratureGrid(2, 40)
        vo, vf = grid_values(out, grid), grid_values(f, grid)
        for phi in _test_vectors(rng, 2, 10, 2.0):
            lhs = characteristic_functional(vo, phi, grid)
            rhs = characteristic_functional(vf, phi, grid) * math.exp(-0.5 * (g @ phi) ** 2)
            worst_cf = max(worst_cf, abs(lhs - rhs))
    record(5, worst_k2 <= 1e-12 and worst_cov <= 1e-10 and worst_cf <= 1e-6,
           f"order-2 kernel {worst_k2:.1e} (tol 1e-12), covariance error {worst_cov:.1e} "
           f"(tol 1e-10), CF error {worst_cf:.2e} (tol 1e-6)")


def test_criterion_6_randomization():
    n = 1_000_000
    g = 0.3 * unit([1.0, 2.0])
    f = example_density(g)
    batch = simulate_standardized(f, g, n, seed=SEED)
    again = simulate_standardized(f, g, n, seed=SEED)
    deterministic = np.array_equal(batch.points, again.points)
    cov_err = float(np.max(np.abs(np.cov(batch.points, rowvar=False) - np.eye(2))))
    target = identity_covariance_density(f, g)
    grid = QuadratureGrid(2, 40)
    vt = grid_values(target, grid)
    worst_z = 0.0
    for phi in _test_vectors(np.random.default_rng(SEED), 2, 5, 2.0):
        emp, se_re, se_im = empirical_cf(batch.points, phi)
        ref = characteristic_functional(vt, phi, grid)
        worst_z = max(worst_z, abs(emp.real - ref.real) / se_re, abs(emp.imag - ref.imag) / se_im)
    tol = 6 / math.sqrt(n)
    record(6, deterministic and cov_err <= tol and worst_z <= 3.0,
           f"covariance error {cov_err:.2e} (tol {tol:.0e}), worst CF deviation "
           f"{worst_z:.2f} SE (tol 3), deterministic={deterministic}")


def test_criterion_7_example():
    # exact conversion for a direction whose arithmetic is exact in binary
    g = np.array([0.25, 0.0, -0.25])
    c2 = float(g @ g)
    poly = [3 * c2 * c2 + 0.5 * c2 + 1, 0.0, -(0.5 + 6 * c2), 0.0, 1.0]
    exact = from_polynomial_in_linear(poly, g) == example_expansion(g)
    bisect, grid = max_admissible_norm(), admissible_norm_by_grid()
    rng = np.random.default_rng(SEED + 7)
    g5 = 0.5 * unit(rng.standard_normal(2))
    pts = rng.uniform(-6, 6, (100_000, 2))
    min_ok = float(example_density(g5)(pts).min())
    gbad = (bisect + 0.05) * unit(rng.standard_normal(2))
    ts = np.linspace(-4, 4, 8001)
    line = np.outer(ts, gbad / np.linalg.norm(gbad))
    min_bad = float(evaluate(example_expansion(gbad), line).min())
    ok = exact and abs(bisect - grid) <= 1e-6 and min_ok >= 0 and min_bad < 0
    record(7, ok, f"kernels exact={exact}, c* bisection {bisect:.10f} vs grid {grid:.10f}, "
                  f"min at |g|=0.5 {min_ok:.3e}, min at c*+0.05 {min_bad:.3e}")


def test_criterion_8_framework():
    rng = np.random.default_rng(SEED + 8)
    worst_cf = worst_inner = 0.0
    one = {d: ChaosExpansion.constant(d) for d in (1, 2, 3)}
    grids = {d: QuadratureGrid(d, {1: 60, 2: 40, 3: 24}[d]) for d in (1, 2, 3)}
    for d in (1, 2, 3):
        for phi in _test_vectors(rng, d, 10, 2.0):
            cf = characteristic_functional(one[d], phi, grids[d])
            worst_cf = max(worst_cf, abs(cf - math.exp(-0.5 * phi @ phi)))
    for _ in range(50):
        d = int(rng.integers(1, 4))
        f = random_expansion(rng, d, int(rng.integers(0, 5)))
        g = random_expansion(rng, d, int(rng.integers(0, 5)))
        worst_inner = max(worst_inner,
                          abs(expansion_inner(f, g) - quadrature_inner(f, g, grids[d])))
    record(8, worst_cf <= 1e-8 and worst_inner <= 1e-8,
           f"Gaussian CF error {worst_cf:.2e}, inner-product error {worst_inner:.2e} (tol 1e-8)")
