"""Standardizing densities with respect to the Gaussian measure.

A density ``f`` (w.r.t. ``mu``) of a random vector ``X`` is centered by
Wick-multiplying with ``E(-E[X])`` and brought to identity covariance by
Wick-multiplying with ``E_2(g)`` when ``cov(X) = I - g g^T``.  The second step
corresponds to the randomization ``X + Z g`` with ``Z ~ N(0, 1)`` independent
of ``X``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import optimize

from .chaos import ChaosExpansion, GaussianSpace, evaluate, from_polynomial_in_linear
from .exceptions import HypothesisError, TruncationError, ValidationError
from .tensor import SymmetricTensor, as_cm_vector, rank_one_power
from .wick import (DEFAULT_MAX_ORDER, LinearWickExp, QuadraticWickExp, wick_product)

MASS_TOL = 1e-9
POSITIVITY_TOL = 1e-9
STRUCTURE_TOL = 1e-9
NORM_CAP = 0.5
TAIL_TOL = 1e-4
# E_2(g) kernels decay like |g|^{2n}/sqrt(n) rather than |m|^k/sqrt(k!), so the
# covariance transform needs a longer chaos budget than centering.
COVARIANCE_MAX_ORDER = 32
_TAIL_WINDOW = 8


@dataclass(frozen=True)
class DensityExpansion:
    """A chaos expansion known to be a probability density w.r.t. ``mu``.

    ``tail`` records the L2 size of chaos content dropped by truncation when
    the density was produced by a transform (0 for exact inputs).
    """

    body: ChaosExpansion
    validated: bool = False
    tail: float = 0.0

    @property
    def dimension(self) -> int:
        return self.body.dimension

    def __call__(self, w):
        return evaluate(self.body, w)


@dataclass(frozen=True)
class CovarianceOperator:
    """Covariance ``cov(<X, e_i>, <X, e_j>)`` as a symmetric matrix.

    ``centered`` is False when the density had non-zero mean; the matrix is
    then the raw second-moment form ``E[<X,e_i><X,e_j>]``.
    """

    matrix: np.ndarray
    centered: bool = True

    def __call__(self, phi1, phi2) -> float:
        return float(np.asarray(phi1) @ self.matrix @ np.asarray(phi2))

    def is_psd(self, tol: float = STRUCTURE_TOL) -> bool:
        return bool(np.linalg.eigvalsh(self.matrix).min() >= -tol)


def density_check(body: ChaosExpansion, grid=None, mass_tol: float = MASS_TOL,
                  positivity_tol: float = POSITIVITY_TOL, tail: float = 0.0) -> DensityExpansion:
    """Validate unit mass and non-negativity at the quadrature nodes.

    Non-unit mass is rejected rather than renormalized.
    """
    mass = body.mean()
    if abs(mass - 1.0) > mass_tol:
        raise ValidationError(f"total mass is {mass!r}, expected 1 within {mass_tol}")
    if grid is None:
        grid = GaussianSpace(body.dimension).grid()
    values = evaluate(body, grid.nodes)
    worst = float(values.min())
    if worst < -positivity_tol:
        at = grid.nodes[int(values.argmin())]
        raise ValidationError(
            f"density is negative ({worst:.3e}) at quadrature node {at.tolist()}")
    return DensityExpansion(body, validated=True, tail=tail)


def _as_density(f) -> DensityExpansion:
    if isinstance(f, DensityExpansion):
        if not f.validated:
            return density_check(f.body, tail=f.tail)
        return f
    if isinstance(f, ChaosExpansion):
        return density_check(f)
    raise ValidationError(f"expected a density expansion, got {type(f).__name__}")


def mean_of(f: DensityExpansion) -> np.ndarray:
    """``E[X]``: the order-1 kernel of the density, as a vector of H."""
    return f.body.first_kernel_vector()


def second_kernel_matrix(f: ChaosExpansion) -> np.ndarray:
    return f.kernel(2).to_matrix()


def covariance_of(f: DensityExpansion, tol: float = STRUCTURE_TOL) -> CovarianceOperator:
    """``C_ij = delta_ij + 2 (f_2)_ij``, or the raw second moment if E[X] != 0."""
    body = f.body if isinstance(f, DensityExpansion) else f
    mat = np.eye(body.dimension) + 2.0 * second_kernel_matrix(body)
    centered = bool(np.max(np.abs(body.first_kernel_vector()), initial=0.0) <= tol)
    return CovarianceOperator(mat, centered=centered)


def _truncated_product(f: ChaosExpansion, factor: ChaosExpansion, max_order: int):
    # Returns (f <> factor truncated at max_order, L2 norm of the next
    # _TAIL_WINDOW orders), the latter being what truncation discards first.
    full = wick_product(f, factor, max_order=max_order + _TAIL_WINDOW, truncate=True)
    dropped = ChaosExpansion(f.dimension,
                             [None] * (max_order + 1) + list(full.kernels[max_order + 1:]))
    return full.truncate(max_order), dropped.l2_norm()


def center_density(f: DensityExpansion, max_order: int | None = None,
                   tail_tol: float = TAIL_TOL, grid=None) -> DensityExpansion:
    """Density of ``X - E[X]``: ``f <> E(-m)`` with ``m = E[X]``.

    The chaos kernels are truncated at ``max_order``; the L2 size of what
    truncation drops is stored in ``tail``.  Pointwise the same function is
    ``f(w + m) E(-m)(w)`` (see :func:`wickstd.wick.gjessing_evaluate`).

    Raises
    ------
    TruncationError
        If the dropped tail exceeds ``tail_tol``.
    """
    f = _as_density(f)
    if max_order is None:
        max_order = DEFAULT_MAX_ORDER
    m = mean_of(f)
    if not np.any(m):
        return f
    factor = LinearWickExp(-m).expansion(max_order + _TAIL_WINDOW)
    top = max(max_order, f.body.effective_order())
    out, tail = _truncated_product(f.body, factor, top)
    if tail > tail_tol:
        raise TruncationError(
            f"centering tail {tail:.3e} exceeds {tail_tol:.1e} at max_order={top}; "
            "increase max_order")
    return density_check(out, grid=grid, tail=f.tail + tail)


def extract_deficiency_direction(f: DensityExpansion, tol: float = STRUCTURE_TOL) -> np.ndarray:
    """Recover ``g`` from ``f_2 = -g (x) g / 2``.

    The sign is fixed so that the first non-zero component is positive.

    Raises
    ------
    HypothesisError
        If the mean is non-zero, if ``f_2`` is not ``-g (x) g / 2`` for any
        ``g``, or if ``|g| >= 1`` (``I - g g^T`` is then not a covariance).
    """
    body = f.body if isinstance(f, DensityExpansion) else f
    m = body.first_kernel_vector()
    if np.max(np.abs(m), initial=0.0) > tol:
        raise HypothesisError(f"density is not centered: first kernel is {m.tolist()}")
    mat = second_kernel_matrix(body)
    vals, vecs = np.linalg.eigh(mat)
    neg = vals < -tol
    if np.any(np.abs(vals[~neg]) > tol) or neg.sum() > 1:
        raise HypothesisError(
            f"covariance deficiency is not rank-one: second kernel is not -1/2 g(x)g "
            f"(eigenvalues {vals.tolist()})")
    if not np.any(neg):
        return np.zeros(body.dimension)
    lam = -vals[0]
    g = math.sqrt(2.0 * lam) * vecs[:, 0]
    nz = np.flatnonzero(np.abs(g) > tol)
    if nz.size and g[nz[0]] < 0:
        g = -g
    if float(g @ g) >= 1.0:
        raise HypothesisError(
            f"|g| = {math.sqrt(float(g @ g)):.6g} >= 1: I - g g^T is not a covariance")
    return g


def identity_covariance_density(f: DensityExpansion, g, max_order: int | None = None,
                                norm_cap: float = NORM_CAP, tol: float = STRUCTURE_TOL,
                                p: float | None = None, tail_tol: float = TAIL_TOL,
                                grid=None) -> DensityExpansion:
    """Density of ``X + Z g``: ``f <> E_2(g)``.

    Hypotheses (each failure names itself in a :class:`HypothesisError`):
    the mean kernel vanishes, ``f_2 = -g (x) g / 2`` within ``tol``, and
    ``|g| <= norm_cap`` with ``|g| < 1``.  If ``p`` is given, ``E_2(g)`` must also be in
    ``L^p``, i.e. ``|g|^2 < 1/(p-1)``.

    Pointwise the result equals ``int f(w - lam g) E(lam g)(w) dmu_1(lam)``
    (see :func:`wickstd.wick.mixture_evaluate`).
    """
    f = _as_density(f)
    if max_order is None:
        max_order = COVARIANCE_MAX_ORDER
    g = as_cm_vector(g, f.dimension)
    body = f.body
    m = body.first_kernel_vector()
    if np.max(np.abs(m), initial=0.0) > tol:
        raise HypothesisError(f"mean is not zero: first kernel is {m.tolist()}")
    expected = rank_one_power(g, 2) * -0.5
    err = body.kernel(2).max_abs_diff(expected)
    if err > tol:
        raise HypothesisError(
            f"second kernel is not -1/2 g(x)g (max deviation {err:.3e} > tol {tol:.1e})")
    norm = math.sqrt(float(g @ g))
    if norm >= 1.0:
        raise HypothesisError(f"|g| = {norm:.6g} >= 1: I - g g^T is not a covariance")
    if norm > norm_cap:
        raise HypothesisError(f"|g| = {norm:.6g} exceeds norm_cap = {norm_cap:.6g}")
    if p is not None:
        if not p > 1:
            raise ValidationError(f"p must exceed 1, got {p}")
        if norm * norm * (p - 1.0) >= 1.0:
            raise HypothesisError(
                f"E_2(g) is not in L^{p}: |g|^2 = {norm * norm:.6g} >= 1/(p-1)")
    if norm == 0.0:
        return f
    factor = QuadraticWickExp(g).expansion(max_order + _TAIL_WINDOW)
    top = max(max_order, body.effective_order())
    out, tail = _truncated_product(body, factor, top)
    if tail > tail_tol:
        raise TruncationError(
            f"covariance-transform tail {tail:.3e} exceeds {tail_tol:.1e} at max_order={top}")
    return density_check(out, grid=grid, tail=f.tail + tail)


@dataclass(frozen=True)
class Standardized:
    """Result of :func:`standardize`: density plus transform parameters."""

    density: DensityExpansion
    mean: np.ndarray
    direction: np.ndarray
    centered: DensityExpansion = field(repr=False, default=None)

    def __iter__(self):
        return iter((self.density, self.mean, self.direction))


def standardize(f: DensityExpansion, max_order: int | None = None,
                norm_cap: float = NORM_CAP, tol: float = STRUCTURE_TOL,
                tail_tol: float = TAIL_TOL, grid=None) -> Standardized:
    """Center, then bring to identity covariance: ``f <> E(-m) <> E_2(g)``.

    Unpacks as ``(density, m, g)``.  ``max_order=None`` lets each step use
    its own default budget.
    """
    f = _as_density(f)
    m = mean_of(f)
    centered = center_density(f, max_order=max_order, tail_tol=tail_tol, grid=grid)
    g = extract_deficiency_direction(centered, tol=tol)
    out = identity_covariance_density(centered, g, max_order=max_order, norm_cap=norm_cap,
                                      tol=tol, tail_tol=tail_tol, grid=grid)
    return Standardized(out, m, g, centered)


# -- the quartic example density ------------------------------------------------

def example_quartic(t, norm):
    """``t^4 - (1/2 + 6c^2) t^2 + 3c^4 + c^2/2 + 1`` with ``c = |g|``."""
    t = np.asarray(t, dtype=float)
    c2 = norm * norm
    return t ** 4 - (0.5 + 6.0 * c2) * t ** 2 + 3.0 * c2 * c2 + 0.5 * c2 + 1.0


def quartic_minimum(norm: float) -> float:
    """Minimum over real ``t`` of :func:`example_quartic`, via ``s = t^2 >= 0``."""
    c2 = norm * norm
    b = 0.5 + 6.0 * c2
    const = 3.0 * c2 * c2 + 0.5 * c2 + 1.0
    # s^2 - b s + const has vertex at s = b/2 > 0
    return const - 0.25 * b * b


@lru_cache(maxsize=None)
def max_admissible_norm() -> float:
    """Largest ``c*`` with the example quartic non-negative for all ``|g| < c*``."""
    return float(optimize.bisect(quartic_minimum, 0.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps,
                                 maxiter=200))


def example_expansion(g) -> ChaosExpansion:
    """Kernels ``(1, 0, -g(x)g/2, 0, g^{(x)4})`` without any positivity check."""
    g = as_cm_vector(g)
    d = g.shape[0]
    return ChaosExpansion(d, [SymmetricTensor.scalar(d, 1.0), None,
                              rank_one_power(g, 2) * -0.5, None, rank_one_power(g, 4)])


def example_density(g) -> DensityExpansion:
    """The quartic density ``1 - delta^2(g^2)/2 + delta^4(g^4)``.

    Raises
    ------
    ValidationError
        If ``|g| >= max_admissible_norm()``: the quartic's discriminant in
        ``t^2`` turns non-negative and the function takes negative values.
    """
    g = as_cm_vector(g)
    norm = math.sqrt(float(g @ g))
    cstar = max_admissible_norm()
    if norm >= cstar:
        raise ValidationError(
            f"|g| = {norm:.6g} >= c* = {cstar:.6f}: the quartic density takes negative values")
    # non-negativity is analytic here (quartic_minimum > 0), so no grid scan
    return DensityExpansion(example_expansion(g), validated=True)


def example_from_quartic(g) -> ChaosExpansion:
    """The example density rebuilt from its quartic form in ``t = <w, g>``."""
    g = as_cm_vector(g)
    c2 = float(g @ g)
    poly = [3.0 * c2 * c2 + 0.5 * c2 + 1.0, 0.0, -(0.5 + 6.0 * c2), 0.0, 1.0]
    if c2 == 0.0:
        return ChaosExpansion.constant(g.shape[0], 1.0)
    return from_polynomial_in_linear(poly, g)

