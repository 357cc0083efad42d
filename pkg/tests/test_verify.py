import math

import numpy as np
import pytest
from scipy import stats

from wickstd.chaos import ChaosExpansion
from wickstd.exceptions import EnvelopeError, ValidationError
from wickstd.standardize import density_check, example_density
from wickstd.verify import (QuadratureGrid, VerificationReport, characteristic_functional,
                            check_centering_cf, check_covariance_cf, check_gaussian_cf,
                            check_inner_product, check_lp_boundary, check_mixture,
                            check_representations, check_s_transform, empirical_cf,
                            integrate_mu, lp_refinement, sample_density, simulate_standardized)
from wickstd.wick import LinearWickExp, wick_product

from conftest import random_density, random_expansion, unit


def test_grid_weights():
    for d in (1, 2, 3):
        grid = QuadratureGrid(d, 8)
        assert len(grid) == 8 ** d
        assert math.fsum(grid.weights) == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(ValidationError):
        QuadratureGrid(0, 4)


def test_integrate_moments():
    grid = QuadratureGrid(2, 10)
    assert integrate_mu(lambda p: p[:, 0] ** 2, grid) == pytest.approx(1.0, abs=1e-14)
    assert integrate_mu(lambda p: p[:, 0] ** 4 * p[:, 1] ** 2, grid) == pytest.approx(3.0,
                                                                                     abs=1e-13)
    assert integrate_mu(lambda p: p[:, 0] * p[:, 1], grid) == pytest.approx(0.0, abs=1e-15)


def test_cf_of_gaussian(rng):
    grid = QuadratureGrid(2, 40)
    for _ in range(5):
        phi = rng.uniform(-2, 2, 2)
        assert abs(characteristic_functional(ChaosExpansion.constant(2), phi, grid)
                   - math.exp(-0.5 * phi @ phi)) < 1e-12


def test_cf_of_shifted_gaussian():
    # E(m) dmu is N(m, I): CF = exp(-|phi|^2/2 + i<m,phi>)
    m = np.array([0.3, -0.4])
    grid = QuadratureGrid(2, 40)
    f = LinearWickExp(m)
    phi = np.array([0.7, 1.1])
    cf = characteristic_functional(lambda p: np.exp(p @ m - 0.5 * m @ m), phi, grid)
    expected = np.exp(-0.5 * phi @ phi + 1j * m @ phi)
    assert abs(cf - expected) < 1e-12
    cf_kernels = characteristic_functional(f.expansion(30), phi, grid)
    assert abs(cf_kernels - expected) < 1e-10


def test_cf_accepts_node_values():
    grid = QuadratureGrid(1, 20)
    f = example_density([0.3])
    phi = [0.5]
    assert characteristic_functional(f(grid.nodes), phi, grid) == \
        characteristic_functional(f, phi, grid)


def test_check_gaussian_cf():
    rep = check_gaussian_cf([[0.0, 0.0], [1.0, -1.0], [2.0, 0.0]], QuadratureGrid(2, 40))
    assert rep.passed and len(rep.records) == 3


def test_check_centering_cf(rng):
    f = density_check(random_density(np.random.default_rng(3), shift=0.3))
    grid = QuadratureGrid(f.dimension, 24 if f.dimension < 3 else 20)
    phis = [rng.uniform(-1, 1, f.dimension) for _ in range(4)]
    rep = check_centering_cf(f, phis, grid)
    assert rep.passed, rep.to_lines()


@pytest.mark.parametrize("norm", [0.1, 0.3, 0.5])
def test_check_covariance_cf(rng, norm):
    g = norm * unit([1.0, 0.5])
    grid = QuadratureGrid(2, 40)
    phis = [rng.uniform(-2, 2, 2) for _ in range(4)]
    rep = check_covariance_cf(example_density(g), g, phis, grid)
    assert rep.passed, rep.to_lines()


def test_check_s_transform_and_inner(rng):
    grid = QuadratureGrid(2, 24)
    f = random_expansion(rng, 2, 4)
    assert check_s_transform(f, [rng.uniform(-1, 1, 2) for _ in range(3)], grid).passed
    pairs = [(random_expansion(rng, 2, 3), random_expansion(rng, 2, 3)) for _ in range(3)]
    assert check_inner_product(pairs, grid).passed


def test_check_mixture(rng):
    rep = check_mixture([0.9 * unit(rng.standard_normal(2)), [0.0, 0.0]],
                        rng.standard_normal((20, 2)))
    assert rep.passed


def test_check_representations(rng):
    g = 0.4 * unit([1.0, -1.0])
    shifted = wick_product(example_density(g).body, LinearWickExp([0.2, 0.1]).expansion(20),
                           max_order=24, truncate=True)
    rep = check_representations(density_check(shifted), g, rng.standard_normal((100, 2)))
    assert rep.passed, rep.to_lines()


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_lp_classification(p):
    below = math.sqrt(0.8 / (p - 1))
    above = math.sqrt(1.2 / (p - 1))
    assert lp_refinement([below], p).classification == "convergent"
    assert lp_refinement([0.0, above], p).classification == "divergent"
    assert check_lp_boundary([below], p).passed
    assert check_lp_boundary([above], p).passed


def test_lp_value():
    # Gaussian integral: int E_2^p dmu = (1+c)^{-p/2} (1 - pc/(1+c))^{-1/2}
    c, p = 0.25, 2.0
    closed = (1 + c) ** (-p / 2) / math.sqrt(1 - p * c / (1 + c))
    diag = lp_refinement([math.sqrt(c)], p)
    assert diag.log_estimates[-1] == pytest.approx(math.log(closed), abs=1e-10)


def test_lp_rejects_small_p():
    with pytest.raises(ValidationError):
        lp_refinement([0.1], 1.0)


def test_report_roundtrip():
    rep = VerificationReport()
    rep.add("a", 1e-12, 1e-8)
    rep.add("b", 2.0, 1.0, detail="too big")
    rep.skip("c", "hypotheses not met")
    text = rep.to_lines()
    assert "NaN" not in text
    back = VerificationReport.from_lines(text)
    assert [r.status for r in back.records] == ["pass", "fail", "skip"]
    assert back.to_lines() == text
    assert not back.passed
    assert back.max_error == 2.0


def test_sampling_deterministic():
    f = example_density([0.3, 0.0])
    a = sample_density(f, 2000, seed=5)
    b = sample_density(f, 2000, seed=5)
    c = sample_density(f, 2000, seed=6)
    np.testing.assert_array_equal(a.points, b.points)
    assert not np.array_equal(a.points, c.points)
    assert a.bias_bound < 1e-14


def test_sampling_standard_gaussian_ks():
    batch = sample_density(ChaosExpansion.constant(2), 20000, seed=11)
    for j in range(2):
        assert stats.kstest(batch.points[:, j], "norm").pvalue > 0.01


def test_sampling_example_moments():
    g = 0.4 * unit([1.0, 1.0])
    n = 200_000
    batch = sample_density(example_density(g), n, seed=3)
    assert np.all(np.abs(batch.points.mean(axis=0)) < 4 / math.sqrt(n))
    cov = np.cov(batch.points, rowvar=False)
    assert np.max(np.abs(cov - (np.eye(2) - np.outer(g, g)))) < 6 / math.sqrt(n)


def test_simulate_standardized_covariance():
    g = np.array([0.0, 0.45])
    n = 200_000
    batch = simulate_standardized(example_density(g), g, n, seed=9)
    assert np.max(np.abs(np.cov(batch.points, rowvar=False) - np.eye(2))) < 6 / math.sqrt(n)


def test_empirical_cf_standard_errors(rng):
    pts = rng.standard_normal((10000, 1))
    cf, se_re, se_im = empirical_cf(pts, [1.0])
    assert abs(cf.real - math.exp(-0.5)) < 4 * se_re
    assert abs(cf.imag) < 4 * se_im


def test_sampler_rejects_unvalidated():
    from wickstd.standardize import DensityExpansion
    with pytest.raises(ValidationError):
        sample_density(DensityExpansion(ChaosExpansion.constant(1)), 10)


def test_sampler_zero_envelope():
    # a function that vanishes everywhere has no usable envelope
    with pytest.raises(EnvelopeError):
        sample_density(ChaosExpansion.constant(1, 0.0), 10, proposal_scale=1.0)
