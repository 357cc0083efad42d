"""Symmetric tensors over R^d stored on sorted multi-indices.

A symmetric tensor of order ``k`` is stored as a map from sorted index
tuples ``(i_1 <= ... <= i_k)`` to the *per-permutation* value, i.e. the
entry of the full ``d**k`` array at any permutation of that tuple.
Multiplicity factors enter only through :func:`tensor_inner` and the chaos
evaluation rule.

Indices are 0-based in Python; configuration files use 1-based indices
(see :mod:`wickstd.cli`).
"""
from __future__ import annotations

import itertools
import math
from functools import lru_cache
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from .exceptions import ValidationError

MultiIndex = tuple  # sorted tuple of 0-based basis indices


def as_cm_vector(h, dimension: int | None = None) -> np.ndarray:
    """Coerce ``h`` to a finite 1-D float array (an element of H = R^d)."""
    arr = np.array(h, dtype=float, ndmin=1)
    if arr.ndim != 1:
        raise ValidationError(f"Cameron-Martin vector must be 1-D, got shape {arr.shape}")
    if dimension is not None and arr.shape[0] != dimension:
        raise ValidationError(
            f"dimension mismatch: vector has {arr.shape[0]} components, expected {dimension}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("Cameron-Martin vector has non-finite components")
    return arr


def sorted_keys(dimension: int, order: int):
    """All sorted multi-indices of the given order, in lexicographic order."""
    return itertools.combinations_with_replacement(range(dimension), order)


@lru_cache(maxsize=None)
def multiplicities(key: tuple, dimension: int) -> tuple:
    """Repetition counts ``(alpha_0, ..., alpha_{d-1})`` of a sorted key."""
    counts = [0] * dimension
    for i in key:
        counts[i] += 1
    return tuple(counts)


@lru_cache(maxsize=None)
def permutation_count(key: tuple) -> int:
    """Number of distinct index tuples that sort to ``key``: k!/prod(alpha_i!)."""
    n = math.factorial(len(key))
    for _, grp in itertools.groupby(key):
        n //= math.factorial(len(list(grp)))
    return n


@lru_cache(maxsize=None)
def _split_weight(alpha: tuple, beta: tuple) -> float:
    n = sum(alpha)
    j = sum(beta)
    num = 1
    for a, b in zip(alpha, beta):
        num *= math.comb(a, b)
    return num / math.comb(n, j)


class SymmetricTensor:
    """Order-``k`` symmetric tensor on R^d.

    Parameters
    ----------
    dimension : int
        Dimension ``d`` of the underlying space.
    order : int
        Tensor order ``k``.
    coefficients : mapping, optional
        Sorted multi-index -> per-permutation value. Unsorted or
        out-of-range keys raise :class:`ValidationError`.
    """

    __slots__ = ("_dimension", "_order", "_coeffs")

    def __init__(self, dimension: int, order: int,
                 coefficients: Mapping[tuple, float] | None = None):
        if dimension < 1:
            raise ValidationError(f"dimension must be positive, got {dimension}")
        if order < 0:
            raise ValidationError(f"order must be non-negative, got {order}")
        coeffs = {}
        for key, value in (coefficients or {}).items():
            key = tuple(int(i) for i in key)
            if len(key) != order:
                raise ValidationError(f"multi-index {key} has length {len(key)}, expected {order}")
            if any(b < a for a, b in zip(key, key[1:])):
                raise ValidationError(f"multi-index {key} is not sorted")
            if key and (key[0] < 0 or key[-1] >= dimension):
                raise ValidationError(f"multi-index {key} out of range for dimension {dimension}")
            value = float(value)
            if not math.isfinite(value):
                raise ValidationError(f"non-finite coefficient at {key}")
            if value != 0.0:
                coeffs[key] = value
        self._dimension = int(dimension)
        self._order = int(order)
        self._coeffs = coeffs

    # -- constructors -------------------------------------------------------
    @classmethod
    def _trusted(cls, dimension: int, order: int, coeffs: dict) -> "SymmetricTensor":
        # internal fast path: keys already sorted and in range, values finite floats
        obj = cls.__new__(cls)
        obj._dimension = dimension
        obj._order = order
        obj._coeffs = {k: v for k, v in coeffs.items() if v != 0.0}
        return obj

    @classmethod
    def zeros(cls, dimension: int, order: int) -> "SymmetricTensor":
        return cls(dimension, order)

    @classmethod
    def scalar(cls, dimension: int, value: float) -> "SymmetricTensor":
        return cls(dimension, 0, {(): value})

    @classmethod
    def from_full(cls, array, atol: float = 1e-12) -> "SymmetricTensor":
        """Build from a full ``d**k`` array, which must be symmetric."""
        array = np.asarray(array, dtype=float)
        order = array.ndim
        if order == 0:
            return cls.scalar(1, float(array))
        dimension = array.shape[0]
        if any(s != dimension for s in array.shape):
            raise ValidationError(f"full tensor must be cubic, got shape {array.shape}")
        sym = symmetrize_full(array)
        if not np.allclose(sym, array, atol=atol, rtol=0):
            raise ValidationError("full tensor is not symmetric")
        return cls(dimension, order, {key: array[key] for key in sorted_keys(dimension, order)})

    # -- accessors ----------------------------------------------------------
    @property
    def dimension(self) -> int:
        return self._dimension

    @property
    def order(self) -> int:
        return self._order

    @property
    def coefficients(self) -> Mapping[tuple, float]:
        return MappingProxyType(self._coeffs)

    def items(self):
        return self._coeffs.items()

    def __getitem__(self, index: Iterable[int]) -> float:
        """Entry of the full tensor at any (not necessarily sorted) index tuple."""
        return self._coeffs.get(tuple(sorted(index)), 0.0)

    @property
    def value(self) -> float:
        """The scalar of an order-0 tensor."""
        if self._order != 0:
            raise ValidationError("value is only defined for order-0 tensors")
        return self._coeffs.get((), 0.0)

    def is_zero(self) -> bool:
        return not self._coeffs

    def to_full(self) -> np.ndarray:
        out = np.zeros((self._dimension,) * self._order)
        for key, value in self._coeffs.items():
            for perm in set(itertools.permutations(key)):
                out[perm] = value
        return out

    def to_matrix(self) -> np.ndarray:
        if self._order != 2:
            raise ValidationError("to_matrix requires an order-2 tensor")
        return self.to_full()

    def norm(self) -> float:
        """Hilbert-Schmidt norm in H^{(x)k}."""
        return math.sqrt(max(tensor_inner(self, self), 0.0))

    # -- arithmetic ---------------------------------------------------------
    def _check_compatible(self, other: "SymmetricTensor"):
        if not isinstance(other, SymmetricTensor):
            return NotImplemented
        if other._dimension != self._dimension:
            raise ValidationError(
                f"dimension mismatch: {self._dimension} vs {other._dimension}")
        if other._order != self._order:
            raise ValidationError(f"order mismatch: {self._order} vs {other._order}")

    def __add__(self, other):
        if self._check_compatible(other) is NotImplemented:
            return NotImplemented
        out = dict(self._coeffs)
        for key, value in other._coeffs.items():
            out[key] = out.get(key, 0.0) + value
        return SymmetricTensor._trusted(self._dimension, self._order, out)

    def __neg__(self):
        return SymmetricTensor._trusted(self._dimension, self._order,
                                        {k: -v for k, v in self._coeffs.items()})

    def __sub__(self, other):
        if self._check_compatible(other) is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __mul__(self, scalar):
        if isinstance(scalar, SymmetricTensor):
            return NotImplemented
        s = float(scalar)
        return SymmetricTensor._trusted(self._dimension, self._order,
                                        {k: v * s for k, v in self._coeffs.items()})

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        s = float(scalar)
        return SymmetricTensor._trusted(self._dimension, self._order,
                                        {k: v / s for k, v in self._coeffs.items()})

    def __eq__(self, other):
        if not isinstance(other, SymmetricTensor):
            return NotImplemented
        return (self._dimension == other._dimension and self._order == other._order
                and self._coeffs == other._coeffs)

    __hash__ = None

    def allclose(self, other: "SymmetricTensor", atol: float = 1e-12) -> bool:
        self._check_compatible(other)
        keys = set(self._coeffs) | set(other._coeffs)
        return all(abs(self._coeffs.get(k, 0.0) - other._coeffs.get(k, 0.0)) <= atol
                   for k in keys)

    def max_abs_diff(self, other: "SymmetricTensor") -> float:
        self._check_compatible(other)
        keys = set(self._coeffs) | set(other._coeffs)
        return max((abs(self._coeffs.get(k, 0.0) - other._coeffs.get(k, 0.0)) for k in keys),
                   default=0.0)

    def __repr__(self):
        return (f"SymmetricTensor(dimension={self._dimension}, order={self._order}, "
                f"coefficients={self._coeffs!r})")


def symmetrize_full(array) -> np.ndarray:
    """Average a full tensor over all axis permutations."""
    array = np.asarray(array, dtype=float)
    perms = list(itertools.permutations(range(array.ndim)))
    return sum(np.transpose(array, p) for p in perms) / len(perms)


def sym_tensor_product(a: SymmetricTensor, b: SymmetricTensor) -> SymmetricTensor:
    """Symmetric tensor product ``a (x)^ b`` of orders ``j`` and ``k``.

    For a sorted output key with multiplicities ``alpha`` the per-permutation
    value is ``sum_beta a_beta b_{alpha-beta} prod_i C(alpha_i, beta_i) / C(j+k, j)``.
    """
    if a.dimension != b.dimension:
        raise ValidationError(f"dimension mismatch: {a.dimension} vs {b.dimension}")
    d = a.dimension
    n = a.order + b.order
    out: dict = {}
    for ka, va in a.items():
        beta = multiplicities(ka, d)
        for kb, vb in b.items():
            key = tuple(sorted(ka + kb))
            w = _split_weight(multiplicities(key, d), beta)
            out[key] = out.get(key, 0.0) + va * vb * w
    return SymmetricTensor._trusted(d, n, out)


def tensor_inner(a: SymmetricTensor, b: SymmetricTensor) -> float:
    """Unweighted inner product ``<a, b>`` in H^{(x)k}."""
    if a.dimension != b.dimension:
        raise ValidationError(f"dimension mismatch: {a.dimension} vs {b.dimension}")
    if a.order != b.order:
        raise ValidationError(f"order mismatch: {a.order} vs {b.order}")
    small, large = (a, b) if len(a.coefficients) <= len(b.coefficients) else (b, a)
    lc = large.coefficients
    return math.fsum(permutation_count(k) * v * lc[k] for k, v in small.items() if k in lc)


def rank_one_power(h, k: int) -> SymmetricTensor:
    """The tensor power ``h^{(x)k}``; ``k = 0`` gives the scalar 1."""
    h = as_cm_vector(h)
    if k < 0:
        raise ValidationError(f"order must be non-negative, got {k}")
    d = h.shape[0]
    coeffs = {}
    for key in sorted_keys(d, k):
        v = 1.0
        for i in key:
            v *= h[i]
        coeffs[key] = float(v)
    return SymmetricTensor._trusted(d, k, coeffs)


def vector_tensor(h) -> SymmetricTensor:
    """An order-1 tensor with the components of ``h``."""
    return rank_one_power(h, 1)


def from_matrix(matrix) -> SymmetricTensor:
    """An order-2 tensor from a symmetric ``d x d`` matrix."""
    return SymmetricTensor.from_full(np.asarray(matrix, dtype=float), atol=1e-12)
