"""Shared fixtures and independent brute-force oracles.

The oracles here work on full ``d**k`` numpy arrays and never call the
sorted-key machinery they are used to check.
"""
import itertools
import math

import numpy as np
import pytest

from wickstd import ChaosExpansion, SymmetricTensor, from_polynomial_in_linear

ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")


# -- full-array oracles ------------------------------------------------------------

def full_from_sorted(tensor: SymmetricTensor) -> np.ndarray:
    d, k = tensor.dimension, tensor.order
    out = np.zeros((d,) * k)
    coeffs = tensor.coefficients
    for idx in itertools.product(range(d), repeat=k):
        out[idx] = coeffs.get(tuple(sorted(idx)), 0.0)
    return out


def brute_symmetrize(array: np.ndarray) -> np.ndarray:
    k = array.ndim
    acc = np.zeros_like(array)
    perms = list(itertools.permutations(range(k)))
    for p in perms:
        acc += np.transpose(array, p)
    return acc / len(perms)


def brute_sym_product(a: SymmetricTensor, b: SymmetricTensor) -> np.ndarray:
    return brute_symmetrize(np.multiply.outer(full_from_sorted(a), full_from_sorted(b)))


def brute_inner(a: SymmetricTensor, b: SymmetricTensor) -> float:
    return float(np.sum(full_from_sorted(a) * full_from_sorted(b)))


def brute_eval_multiple_integral(full: np.ndarray, w: np.ndarray) -> float:
    """delta^k of a full symmetric kernel at w, via the chaos of each basis tuple.

    For a tuple (i_1..i_k) the basis element e_{i_1}(x)...(x)e_{i_k} has
    multiplicities alpha and delta^k of its symmetrization is
    prod He_{alpha_j}(w_j); summing full[idx] over all tuples gives the value.
    """
    from numpy.polynomial.hermite_e import hermeval
    k = full.ndim
    d = w.shape[0]
    total = 0.0
    for idx in itertools.product(range(d), repeat=k):
        alpha = np.bincount(np.array(idx, dtype=int), minlength=d) if k else np.zeros(d, int)
        term = 1.0
        for j in range(d):
            term *= hermeval(w[j], [0] * alpha[j] + [1])
        total += full[idx] * term
    return total


# -- random objects ------------------------------------------------------------------

def random_tensor(rng, d: int, k: int, scale: float = 1.0) -> SymmetricTensor:
    keys = itertools.combinations_with_replacement(range(d), k)
    return SymmetricTensor(d, k, {key: scale * rng.uniform(-1, 1) for key in keys})


def random_expansion(rng, d: int, max_order: int, scale: float = 1.0) -> ChaosExpansion:
    return ChaosExpansion(d, [random_tensor(rng, d, k, scale) for k in range(max_order + 1)])


def random_density(rng, shift: float = 0.0, max_mean: float = 0.5):
    """Non-negative unit-mass polynomial density, optionally Wick-shifted.

    Each part is ``(b0 + b1 t + b2 t^2)^2 + 0.1`` in ``t = <w, h>``, divided by
    its mass so the order-0 kernel is exactly 1; parts are averaged.  Draws
    are repeated until the mean has norm at most ``max_mean``.
    """
    while True:
        f = _random_density_once(rng, shift)
        if np.linalg.norm(f.first_kernel_vector()) <= max_mean:
            return f


def _random_density_once(rng, shift):
    from wickstd.wick import LinearWickExp, wick_product
    d = int(rng.integers(1, 4))
    parts = []
    for _ in range(int(rng.integers(1, 3))):
        h = rng.standard_normal(d)
        h *= rng.uniform(0.3, 1.0) / np.linalg.norm(h)
        b = rng.uniform(-1, 1, 3)
        sq = np.polynomial.polynomial.polymul(b, b)
        sq[0] += 0.1
        f = from_polynomial_in_linear(sq, h)
        parts.append(f / f.mean())
    f = parts[0]
    if len(parts) == 2:
        f = (parts[0] + parts[1]) / 2
    if shift:
        s = rng.standard_normal(d)
        s *= rng.uniform(0.05, shift) / np.linalg.norm(s)
        f = wick_product(f, LinearWickExp(s).expansion(16), max_order=16, truncate=True)
    return f


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


def unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def example_quartic_direct(t, c):
    """The example density as a polynomial in t = <w, g>, c = |g|."""
    return t ** 4 - (0.5 + 6 * c ** 2) * t ** 2 + 3 * c ** 4 + 0.5 * c ** 2 + 1.0


def admissible_norm_by_grid(tgrid=None, lo=0.0, hi=1.0, iters=60):
    """Bisection on c with min over a dense t-grid; independent of the s = t^2 trick."""
    if tgrid is None:
        tgrid = np.linspace(-10.0, 10.0, 2_000_001)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if example_quartic_direct(tgrid, mid).min() >= 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


CSTAR_CLOSED_FORM = math.sqrt((-4.0 + math.sqrt(376.0)) / 48.0)
