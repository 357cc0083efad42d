"""Finite Wiener-Ito chaos expansions on (R^d, standard Gaussian).

A :class:`ChaosExpansion` holds symmetric kernels ``f_0, ..., f_K`` and
represents ``f = sum_k delta^k(f_k)``.  Pointwise, the multiple integral of
a basis kernel with multiplicities ``alpha`` is ``prod_i He_{alpha_i}(w_i)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import TruncationError, ValidationError
from .tensor import (SymmetricTensor, as_cm_vector, multiplicities, permutation_count,
                     rank_one_power, tensor_inner)

_EVAL_CHUNK = 2_000_000  # max points * keys held at once during evaluation


def hermite_prob(n: int, x):
    """Probabilists' Hermite polynomial ``He_n`` evaluated at ``x``.

    Uses the three-term recurrence ``He_{n+1} = x He_n - n He_{n-1}``.
    Scalars and arrays both work.
    """
    if n < 0:
        raise ValidationError(f"Hermite degree must be non-negative, got {n}")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev if prev.ndim else float(prev)
    cur = x.copy()
    for k in range(1, n):
        prev, cur = cur, x * cur - k * prev
    return cur if cur.ndim else float(cur)


def hermite_table(x, max_degree: int) -> np.ndarray:
    """Stack ``He_0(x), ..., He_max_degree(x)`` along a new last axis."""
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape + (max_degree + 1,))
    out[..., 0] = 1.0
    if max_degree >= 1:
        out[..., 1] = x
    for k in range(1, max_degree):
        out[..., k + 1] = x * out[..., k] - k * out[..., k - 1]
    return out


@dataclass(frozen=True)
class GaussianSpace:
    """Finite-dimensional Gaussian space (R^d, N(0, I)) plus numerical settings."""

    dimension: int
    quad_order: int | None = None
    samples: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.dimension < 1:
            raise ValidationError("dimension must be >= 1")
        if self.quad_order is None:
            object.__setattr__(self, "quad_order", 24 if self.dimension <= 3 else 12)
        if self.quad_order < 1:
            raise ValidationError("quadrature order must be >= 1")

    def grid(self):
        from .verify import QuadratureGrid
        return QuadratureGrid(self.dimension, self.quad_order)


class ChaosExpansion:
    """Finite chaos expansion ``sum_{k<=K} delta^k(f_k)``.

    Parameters
    ----------
    dimension : int
    kernels : sequence of SymmetricTensor
        ``kernels[k]`` must have order ``k`` and the given dimension.
        ``None`` entries are read as zero kernels.
    """

    __slots__ = ("_dimension", "_kernels")

    def __init__(self, dimension: int, kernels: Sequence[SymmetricTensor | None]):
        if dimension < 1:
            raise ValidationError(f"dimension must be positive, got {dimension}")
        ks = []
        for k, kern in enumerate(kernels):
            if kern is None:
                kern = SymmetricTensor.zeros(dimension, k)
            if kern.order != k:
                raise ValidationError(f"kernel at position {k} has order {kern.order}")
            if kern.dimension != dimension:
                raise ValidationError(
                    f"kernel of order {k} has dimension {kern.dimension}, expected {dimension}")
            ks.append(kern)
        if not ks:
            ks.append(SymmetricTensor.zeros(dimension, 0))
        self._dimension = dimension
        self._kernels = tuple(ks)

    # -- constructors -------------------------------------------------------
    @classmethod
    def constant(cls, dimension: int, value: float = 1.0) -> "ChaosExpansion":
        return cls(dimension, [SymmetricTensor.scalar(dimension, value)])

    @classmethod
    def linear(cls, h) -> "ChaosExpansion":
        """``delta(h) = <w, h>``."""
        h = as_cm_vector(h)
        return cls(h.shape[0], [None, rank_one_power(h, 1)])

    @classmethod
    def multiple_integral(cls, kernel: SymmetricTensor) -> "ChaosExpansion":
        """``delta^k(kernel)`` as a single-chaos expansion."""
        return cls(kernel.dimension, [None] * kernel.order + [kernel])

    # -- accessors ----------------------------------------------------------
    @property
    def dimension(self) -> int:
        return self._dimension

    @property
    def max_order(self) -> int:
        return len(self._kernels) - 1

    @property
    def kernels(self) -> tuple:
        return self._kernels

    def kernel(self, k: int) -> SymmetricTensor:
        if 0 <= k < len(self._kernels):
            return self._kernels[k]
        return SymmetricTensor.zeros(self._dimension, k)

    def effective_order(self) -> int:
        """Highest order carrying a non-zero kernel (0 for the zero expansion)."""
        for k in range(self.max_order, -1, -1):
            if not self._kernels[k].is_zero():
                return k
        return 0

    def mean(self) -> float:
        return self._kernels[0].value

    def first_kernel_vector(self) -> np.ndarray:
        """Order-1 kernel as a vector of R^d."""
        k1 = self.kernel(1)
        return np.array([k1[(i,)] for i in range(self._dimension)])

    def truncate(self, max_order: int) -> "ChaosExpansion":
        """Drop all kernels above ``max_order`` (explicit truncation)."""
        return ChaosExpansion(self._dimension, self._kernels[: max_order + 1])

    def pad(self, max_order: int) -> "ChaosExpansion":
        ks = list(self._kernels) + [None] * (max_order - self.max_order)
        return ChaosExpansion(self._dimension, ks)

    # -- arithmetic ---------------------------------------------------------
    def _check(self, other):
        if not isinstance(other, ChaosExpansion):
            return NotImplemented
        if other._dimension != self._dimension:
            raise ValidationError(
                f"dimension mismatch: {self._dimension} vs {other._dimension}")

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        n = max(self.max_order, other.max_order)
        return ChaosExpansion(self._dimension,
                              [self.kernel(k) + other.kernel(k) for k in range(n + 1)])

    def __neg__(self):
        return ChaosExpansion(self._dimension, [-k for k in self._kernels])

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __mul__(self, scalar):
        if isinstance(scalar, ChaosExpansion):
            return NotImplemented
        return ChaosExpansion(self._dimension, [k * scalar for k in self._kernels])

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return ChaosExpansion(self._dimension, [k / scalar for k in self._kernels])

    def __eq__(self, other):
        if not isinstance(other, ChaosExpansion) or other._dimension != self._dimension:
            return NotImplemented if not isinstance(other, ChaosExpansion) else False
        n = max(self.max_order, other.max_order)
        return all(self.kernel(k) == other.kernel(k) for k in range(n + 1))

    __hash__ = None

    def max_kernel_diff(self, other: "ChaosExpansion") -> float:
        """Largest absolute coefficient difference over all kernels."""
        self._check(other)
        n = max(self.max_order, other.max_order)
        return max(self.kernel(k).max_abs_diff(other.kernel(k)) for k in range(n + 1))

    def l2_norm(self) -> float:
        """``||f||_{L^2(mu)}`` computed from the kernels."""
        return math.sqrt(max(expansion_inner(self, self), 0.0))

    def __call__(self, w):
        return evaluate(self, w)

    def __repr__(self):
        return f"ChaosExpansion(dimension={self._dimension}, kernels={list(self._kernels)!r})"


def evaluate(f: ChaosExpansion, w):
    """Evaluate ``f`` at a point ``w`` (shape ``(d,)``) or points (shape ``(n, d)``)."""
    pts = np.asarray(w, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    d = f.dimension
    if pts.shape[-1] != d:
        raise ValidationError(f"dimension mismatch: points have {pts.shape[-1]} coordinates, "
                              f"expected {d}")
    exps, coefs = [], []
    for kern in f.kernels:
        for key, value in kern.items():
            exps.append(multiplicities(key, d))
            coefs.append(permutation_count(key) * value)
    if not coefs:
        out = np.zeros(pts.shape[0])
        return float(out[0]) if single else out
    exps = np.array(exps, dtype=int)
    coefs = np.array(coefs)
    table = hermite_table(pts, f.max_order)  # (n, d, K+1)
    out = np.empty(pts.shape[0])
    step = max(1, _EVAL_CHUNK // len(coefs))
    for start in range(0, pts.shape[0], step):
        sl = slice(start, start + step)
        prod = np.ones((table[sl].shape[0], len(coefs)))
        for i in range(d):
            prod *= table[sl, i, :][:, exps[:, i]]
        out[sl] = prod @ coefs
    return float(out[0]) if single else out


def expansion_inner(f: ChaosExpansion, g: ChaosExpansion) -> float:
    """``E[f g] = sum_k k! <f_k, g_k>``."""
    if f.dimension != g.dimension:
        raise ValidationError(f"dimension mismatch: {f.dimension} vs {g.dimension}")
    n = min(f.max_order, g.max_order)
    return math.fsum(math.factorial(k) * tensor_inner(f.kernel(k), g.kernel(k))
                     for k in range(n + 1))


def expectation(f: ChaosExpansion) -> float:
    """Mean of ``f`` under the Gaussian measure: the order-0 kernel."""
    return f.mean()


def _times_linear(coeffs: list, c: float) -> list:
    # t * delta^j(h^j) = delta^{j+1}(h^{j+1}) + j c delta^{j-1}(h^{j-1}), c = |h|^2
    out = [0.0] * (len(coeffs) + 1)
    for j, a in enumerate(coeffs):
        out[j + 1] += a
        if j:
            out[j - 1] += j * c * a
    return out


def hermite_coefficients_in_linear(poly: Sequence[float], norm_sq: float) -> list:
    """Coefficients ``c_j`` with ``sum_m a_m t^m = sum_j c_j delta^j(h^{(x)j})``.

    Here ``t = delta(h)`` and ``norm_sq = |h|^2``; powers of ``t`` are pushed
    through the Hermite recurrence one multiplication at a time (Horner form),
    so no factorials appear.
    """
    result = [0.0]
    for a in reversed(list(poly)):
        result = _times_linear(result, norm_sq)
        result[0] += float(a)
    # strip the leading zero introduced by the first shift
    while len(result) > 1 and result[-1] == 0.0:
        result.pop()
    return result


def from_polynomial_in_linear(poly: Sequence[float], h) -> ChaosExpansion:
    """Chaos expansion of ``sum_m poly[m] * delta(h)**m``."""
    h = as_cm_vector(h)
    c = float(h @ h)
    if c == 0.0:
        raise ValidationError("direction h must be non-zero")
    coeffs = hermite_coefficients_in_linear(poly, c)
    kernels = [rank_one_power(h, j) * cj for j, cj in enumerate(coeffs)]
    return ChaosExpansion(h.shape[0], kernels)


def check_order_budget(f: ChaosExpansion, max_order: int, what: str = "expansion"):
    """Raise :class:`TruncationError` if ``f`` has non-zero kernels beyond ``max_order``."""
    if f.effective_order() > max_order:
        raise TruncationError(
            f"{what} reaches chaos order {f.effective_order()} > max_order={max_order}; "
            "raise max_order or truncate explicitly")
