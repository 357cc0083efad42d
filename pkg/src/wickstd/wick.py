"""Wick product, Wick powers and Wick exponentials on chaos expansions."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .chaos import ChaosExpansion, evaluate
from .exceptions import TruncationError, ValidationError
from .tensor import (SymmetricTensor, as_cm_vector, rank_one_power, sym_tensor_product,
                     tensor_inner)

DEFAULT_TERMS = 16
DEFAULT_MAX_ORDER = 16


def wick_product(f: ChaosExpansion, g: ChaosExpansion, max_order: int | None = None,
                 truncate: bool = False) -> ChaosExpansion:
    """Wick product ``f <> g``; kernel ``n`` is ``sum_{k+j=n} f_k (x)^ g_j``.

    Parameters
    ----------
    max_order : int, optional
        Largest chaos order kept. Defaults to ``f.max_order + g.max_order``.
    truncate : bool
        If False (default) a non-zero kernel above ``max_order`` raises
        :class:`~wickstd.exceptions.TruncationError`; if True it is dropped.
    """
    if f.dimension != g.dimension:
        raise ValidationError(f"dimension mismatch: {f.dimension} vs {g.dimension}")
    d = f.dimension
    full = f.max_order + g.max_order
    if max_order is None:
        max_order = full
    if not truncate and f.effective_order() + g.effective_order() > max_order:
        raise TruncationError(
            f"Wick product reaches chaos order {f.effective_order() + g.effective_order()}"
            f" > max_order={max_order}; raise max_order or pass truncate=True")
    top = max_order
    out = [SymmetricTensor.zeros(d, n) for n in range(top + 1)]
    for k, fk in enumerate(f.kernels):
        if fk.is_zero() or k > top:
            continue
        for j, gj in enumerate(g.kernels):
            if gj.is_zero():
                continue
            if k + j > top:
                break
            out[k + j] = out[k + j] + sym_tensor_product(fk, gj)
    return ChaosExpansion(d, out)


def wick_power(f: ChaosExpansion, n: int, max_order: int | None = None,
               truncate: bool = False) -> ChaosExpansion:
    """``f^{<>n}``, the ``n``-fold Wick product; ``n = 0`` gives 1."""
    if n < 0:
        raise ValidationError(f"Wick power must be non-negative, got {n}")
    if max_order is None:
        max_order = n * f.max_order
    result = ChaosExpansion.constant(f.dimension, 1.0)
    for _ in range(n):
        result = wick_product(result, f, max_order=max_order, truncate=truncate)
    return result


class WickSeries(NamedTuple):
    """A truncated Wick exponential and its tail indicator."""

    expansion: ChaosExpansion
    tail: float  # L2 norm of the last retained increment Z^{<>N}/N!


def wick_exp_truncated(z: ChaosExpansion, terms: int = DEFAULT_TERMS,
                       max_order: int = DEFAULT_MAX_ORDER) -> WickSeries:
    """``sum_{n<=terms} z^{<>n}/n!`` with kernels above ``max_order`` dropped."""
    if terms < 0:
        raise ValidationError("number of terms must be non-negative")
    d = z.dimension
    power = ChaosExpansion.constant(d, 1.0)
    total = power
    increment = power
    for n in range(1, terms + 1):
        power = wick_product(power, z, max_order=max_order, truncate=True)
        increment = power / math.factorial(n)
        total = total + increment
    return WickSeries(total, increment.l2_norm())


# -- closed-form Wick exponentials ------------------------------------------------

@dataclass(frozen=True)
class LinearWickExp:
    """``E(h) = exp<>{delta(h)} = exp{<w,h> - |h|^2/2}``."""

    h: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "h", as_cm_vector(self.h))

    @property
    def dimension(self) -> int:
        return self.h.shape[0]

    @property
    def norm_sq(self) -> float:
        return float(self.h @ self.h)

    def expansion(self, max_order: int = DEFAULT_MAX_ORDER) -> ChaosExpansion:
        """Kernels ``h^{(x)k}/k!`` for ``k <= max_order``."""
        return ChaosExpansion(self.dimension, [rank_one_power(self.h, k) / math.factorial(k)
                                               for k in range(max_order + 1)])


@dataclass(frozen=True)
class QuadraticWickExp:
    """``E_2(h) = exp<>{(delta(h)^2 - |h|^2)/2}``."""

    h: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "h", as_cm_vector(self.h))

    @property
    def dimension(self) -> int:
        return self.h.shape[0]

    @property
    def norm_sq(self) -> float:
        return float(self.h @ self.h)

    def expansion(self, max_order: int = DEFAULT_MAX_ORDER) -> ChaosExpansion:
        """Kernels ``h^{(x)2n}/(2^n n!)`` at even orders ``2n <= max_order``."""
        ks = [None] * (max_order + 1)
        for n in range(max_order // 2 + 1):
            ks[2 * n] = rank_one_power(self.h, 2 * n) / (2.0 ** n * math.factorial(n))
        return ChaosExpansion(self.dimension, ks)


def _points(w, d):
    pts = np.asarray(w, dtype=float)
    if pts.shape[-1] != d:
        raise ValidationError(f"dimension mismatch: points have {pts.shape[-1]} coordinates, "
                              f"expected {d}")
    return pts


def eval_linear_exp(e: LinearWickExp, w):
    """Closed form ``exp{<w,h> - |h|^2/2}`` at a point or an ``(n, d)`` array."""
    pts = _points(w, e.dimension)
    return np.exp(pts @ e.h - 0.5 * e.norm_sq)


def eval_quadratic_exp(e: QuadraticWickExp, w):
    """Closed form ``exp{<w,h>^2 / (2(1+|h|^2))} / sqrt(1+|h|^2)``."""
    pts = _points(w, e.dimension)
    c = e.norm_sq
    t = pts @ e.h
    return np.exp(t * t / (2.0 * (1.0 + c))) / math.sqrt(1.0 + c)


def quadratic_exp_lp_integrable(h, p: float) -> bool:
    """Whether ``E_2(h)`` lies in ``L^p``: ``|h|^2 < 1/(p-1)``."""
    if not p > 1:
        raise ValidationError(f"p must exceed 1, got {p}")
    h = as_cm_vector(h)
    return bool(float(h @ h) * (p - 1.0) < 1.0)


def gauss_hermite_1d(order: int):
    """Nodes and weights integrating against the standard normal on R."""
    x, w = np.polynomial.hermite_e.hermegauss(order)
    return x, w / math.sqrt(2.0 * math.pi)


def quadratic_exp_as_mixture(e: QuadraticWickExp, w, quad_order: int = 40):
    """``E_2(h)(w) = int E(lambda h)(w) dmu_1(lambda)`` by 1-D Gauss-Hermite."""
    pts = _points(w, e.dimension)
    lam, wts = gauss_hermite_1d(quad_order)
    t = np.asarray(pts @ e.h)
    c = e.norm_sq
    vals = np.exp(np.multiply.outer(t, lam) - 0.5 * c * lam ** 2)
    return vals @ wts


def s_transform(f: ChaosExpansion, h) -> float:
    """``S f(h) = int f E(h) dmu = sum_k <f_k, h^{(x)k}>``."""
    h = as_cm_vector(h, f.dimension)
    return math.fsum(tensor_inner(fk, rank_one_power(h, k))
                     for k, fk in enumerate(f.kernels) if not fk.is_zero())


def gjessing_evaluate(f: ChaosExpansion, h, w):
    """Pointwise ``(f <> E(h))(w) = f(w - h) E(h)(w)``."""
    h = as_cm_vector(h, f.dimension)
    pts = _points(w, f.dimension)
    return evaluate(f, pts - h) * eval_linear_exp(LinearWickExp(h), pts)


def mixture_evaluate(f: ChaosExpansion, h, w, quad_order: int = 40):
    """Pointwise ``(f <> E_2(h))(w) = int f(w - lam h) E(lam h)(w) dmu_1(lam)``."""
    h = as_cm_vector(h, f.dimension)
    pts = np.atleast_2d(_points(w, f.dimension))
    lam, wts = gauss_hermite_1d(quad_order)
    c = float(h @ h)
    t = pts @ h
    acc = np.zeros(pts.shape[0])
    for lj, wj in zip(lam, wts):
        acc += wj * evaluate(f, pts - lj * h) * np.exp(lj * t - 0.5 * c * lj * lj)
    return acc if np.ndim(w) > 1 else float(acc[0])
