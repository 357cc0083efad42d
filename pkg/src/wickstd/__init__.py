"""Wick calculus on finite-dimensional Gaussian spaces.

Chaos expansions with symmetric tensor kernels, Wick products and Wick
exponentials, and the transforms that bring a density (w.r.t. the standard
Gaussian measure) to mean zero and identity covariance.
"""
from .chaos import (ChaosExpansion, GaussianSpace, evaluate, expansion_inner, expectation,
                    from_polynomial_in_linear, hermite_prob)
from .exceptions import (EnvelopeError, HypothesisError, TruncationError, ValidationError,
                         WickError)
from .standardize import (CovarianceOperator, DensityExpansion, center_density, covariance_of,
                          density_check, example_density, extract_deficiency_direction,
                          identity_covariance_density, max_admissible_norm, mean_of,
                          standardize)
from .tensor import SymmetricTensor, rank_one_power, sym_tensor_product, tensor_inner
from .verify import (QuadratureGrid, SampleBatch, VerificationReport, characteristic_functional,
                     integrate_mu, sample_density, simulate_standardized)
from .wick import (LinearWickExp, QuadraticWickExp, eval_linear_exp, eval_quadratic_exp,
                   quadratic_exp_as_mixture, quadratic_exp_lp_integrable, s_transform,
                   wick_exp_truncated, wick_power, wick_product)

__version__ = "0.1.0"
