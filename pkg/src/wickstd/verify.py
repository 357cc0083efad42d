"""Numerical verification: Gaussian quadrature, characteristic functionals,
seeded sampling, and the identity checks behind the standardization transforms.

Every check returns a :class:`VerificationReport`; nothing here raises on a
failed comparison.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import optimize, special

from .chaos import ChaosExpansion, evaluate, expansion_inner
from .exceptions import EnvelopeError, ValidationError
from .standardize import (DensityExpansion, center_density, covariance_of,
                          identity_covariance_density, mean_of)
from .tensor import as_cm_vector
from .wick import (LinearWickExp, QuadraticWickExp, eval_linear_exp, eval_quadratic_exp,
                   gjessing_evaluate, mixture_evaluate, quadratic_exp_as_mixture,
                   quadratic_exp_lp_integrable, s_transform)

_CHUNK = 1 << 16  # proposals per RNG chunk; fixes the stream layout
_STREAM_X, _STREAM_Z = 0, 1


# -- quadrature ----------------------------------------------------------------

class QuadratureGrid:
    """Tensorized Gauss-Hermite rule for the standard Gaussian on R^d.

    Exact for polynomials of degree below ``2 * order`` in each coordinate.
    """

    def __init__(self, dimension: int, order: int):
        if dimension < 1 or order < 1:
            raise ValidationError("dimension and order must be >= 1")
        x, w = np.polynomial.hermite_e.hermegauss(order)
        w = w / math.sqrt(2.0 * math.pi)
        self.dimension = dimension
        self.order = order
        self.axis_nodes = x
        self.axis_weights = w
        mesh = np.meshgrid(*([x] * dimension), indexing="ij")
        self.nodes = np.stack([m.ravel() for m in mesh], axis=-1)
        wmesh = np.meshgrid(*([w] * dimension), indexing="ij")
        self.weights = np.prod(np.stack([m.ravel() for m in wmesh], axis=-1), axis=-1)

    def __len__(self):
        return self.weights.shape[0]


def _fsum_weighted(weights, values) -> float:
    return math.fsum(np.asarray(weights * values, dtype=float))


def integrate_mu(fn: Callable, grid: QuadratureGrid):
    """``int fn dmu`` where ``fn`` maps an ``(n, d)`` array of points to ``n`` values."""
    values = np.asarray(fn(grid.nodes))
    if np.iscomplexobj(values):
        return complex(_fsum_weighted(grid.weights, values.real),
                       _fsum_weighted(grid.weights, values.imag))
    return _fsum_weighted(grid.weights, values)


def _density_fn(f) -> Callable:
    if isinstance(f, DensityExpansion):
        f = f.body
    if isinstance(f, ChaosExpansion):
        return lambda pts: evaluate(f, pts)
    return f


def characteristic_functional(f, phi, grid: QuadratureGrid) -> complex:
    """``int exp(i <w, phi>) f(w) dmu(w)``.

    ``f`` may be a density, an expansion, a callable on ``(n, d)`` arrays, or
    an array of its values at ``grid.nodes`` (useful when many ``phi`` share
    one density).
    """
    phi = as_cm_vector(phi, grid.dimension)
    if isinstance(f, np.ndarray):
        values = f
    else:
        values = _density_fn(f)(grid.nodes)
    arg = grid.nodes @ phi
    return complex(_fsum_weighted(grid.weights, np.cos(arg) * values),
                   _fsum_weighted(grid.weights, np.sin(arg) * values))


def grid_values(f, grid: QuadratureGrid) -> np.ndarray:
    """Values of a density or expansion at the quadrature nodes."""
    return _density_fn(f)(grid.nodes)


def quadrature_inner(f: ChaosExpansion, g: ChaosExpansion, grid: QuadratureGrid) -> float:
    return integrate_mu(lambda pts: evaluate(f, pts) * evaluate(g, pts), grid)


# -- reports -------------------------------------------------------------------

@dataclass
class CheckRecord:
    name: str
    tolerance: float
    error: float
    status: str  # "pass", "fail" or "skip"
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status != "fail"

    def to_json(self) -> str:
        def num(x):
            return x if math.isfinite(x) else None  # skipped checks carry no numbers

        rec = {"check": self.name, "tolerance": num(self.tolerance), "error": num(self.error),
               "status": self.status}
        if self.detail:
            rec["detail"] = self.detail
        return json.dumps(rec, sort_keys=True)


@dataclass
class VerificationReport:
    records: list = field(default_factory=list)

    def add(self, name: str, error: float, tolerance: float, detail: str = "",
            passed: bool | None = None) -> CheckRecord:
        if passed is None:
            passed = bool(error <= tolerance)
        rec = CheckRecord(name, float(tolerance), float(error), "pass" if passed else "fail",
                          detail)
        self.records.append(rec)
        return rec

    def skip(self, name: str, detail: str) -> CheckRecord:
        rec = CheckRecord(name, float("nan"), float("nan"), "skip", detail)
        self.records.append(rec)
        return rec

    def extend(self, other: "VerificationReport") -> "VerificationReport":
        self.records.extend(other.records)
        return self

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    @property
    def max_error(self) -> float:
        errs = [r.error for r in self.records if r.status != "skip"]
        return max(errs, default=0.0)

    def to_lines(self) -> str:
        return "".join(r.to_json() + "\n" for r in self.records)

    @staticmethod
    def from_lines(text: str) -> "VerificationReport":
        rep = VerificationReport()
        for line in text.splitlines():
            if line.strip():
                d = json.loads(line)
                num = [math.nan if d[k] is None else d[k] for k in ("tolerance", "error")]
                rep.records.append(CheckRecord(d["check"], *num, d["status"],
                                               d.get("detail", "")))
        return rep


# -- identity checks -----------------------------------------------------------

def check_gaussian_cf(phis: Iterable, grid: QuadratureGrid, tol: float = 1e-8) -> VerificationReport:
    """Characteristic functional of ``mu`` against ``exp(-|phi|^2/2)``."""
    rep = VerificationReport()
    one = ChaosExpansion.constant(grid.dimension, 1.0)
    for k, phi in enumerate(phis):
        phi = as_cm_vector(phi, grid.dimension)
        err = abs(characteristic_functional(one, phi, grid) - math.exp(-0.5 * float(phi @ phi)))
        rep.add(f"gaussian-cf[{k}]", err, tol)
    return rep


def check_centering_cf(f: DensityExpansion, phis: Iterable, grid: QuadratureGrid,
                       tol: float = 1e-6, max_order: int | None = None) -> VerificationReport:
    """``CF(f <> E(-m))(phi) == exp(-i<m,phi>) CF(f)(phi)`` for each ``phi``."""
    rep = VerificationReport()
    m = mean_of(f)
    centered = center_density(f, max_order=max_order, grid=grid)
    vc, vf = grid_values(centered, grid), grid_values(f, grid)
    for k, phi in enumerate(phis):
        phi = as_cm_vector(phi, grid.dimension)
        lhs = characteristic_functional(vc, phi, grid)
        rhs = np.exp(-1j * float(m @ phi)) * characteristic_functional(vf, phi, grid)
        rep.add(f"cf-centering[{k}]", abs(lhs - rhs), tol)
    return rep


def check_covariance_cf(f: DensityExpansion, g, phis: Iterable, grid: QuadratureGrid,
                        tol: float = 1e-6, max_order: int | None = None,
                        norm_cap: float = 0.5) -> VerificationReport:
    """``CF(f <> E_2(g))(phi) == CF(f)(phi) exp(-<g,phi>^2/2)`` for each ``phi``."""
    rep = VerificationReport()
    g = as_cm_vector(g, grid.dimension)
    out = identity_covariance_density(f, g, max_order=max_order, norm_cap=norm_cap, grid=grid)
    vo, vf = grid_values(out, grid), grid_values(f, grid)
    for k, phi in enumerate(phis):
        phi = as_cm_vector(phi, grid.dimension)
        lhs = characteristic_functional(vo, phi, grid)
        rhs = characteristic_functional(vf, phi, grid) * math.exp(-0.5 * float(g @ phi) ** 2)
        rep.add(f"cf-covariance[{k}]", abs(lhs - rhs), tol)
    return rep


def check_s_transform(f: ChaosExpansion, hs: Iterable, grid: QuadratureGrid,
                      tol: float = 1e-8) -> VerificationReport:
    """Algebraic ``S f(h)`` against quadrature of ``f E(h)``."""
    rep = VerificationReport()
    if isinstance(f, DensityExpansion):
        f = f.body
    for k, h in enumerate(hs):
        h = as_cm_vector(h, f.dimension)
        e = LinearWickExp(h)
        quad = integrate_mu(lambda pts: evaluate(f, pts) * eval_linear_exp(e, pts), grid)
        rep.add(f"s-transform[{k}]", abs(s_transform(f, h) - quad), tol)
    return rep


def check_mixture(hs: Iterable, points, tol: float = 1e-8,
                  quad_order: int = 40) -> VerificationReport:
    """Mixture representation of ``E_2(h)`` against its closed form."""
    rep = VerificationReport()
    points = np.atleast_2d(points)
    for k, h in enumerate(hs):
        e = QuadraticWickExp(h)
        err = np.max(np.abs(quadratic_exp_as_mixture(e, points, quad_order)
                            - eval_quadratic_exp(e, points)))
        rep.add(f"mixture[{k}]", float(err), tol)
    return rep


def check_representations(f: DensityExpansion, g, points, max_order: int | None = None,
                          norm_cap: float = 0.5, tol: float = 1e-8,
                          grid: QuadratureGrid | None = None) -> VerificationReport:
    """Chaos-kernel vs pointwise (Gjessing / mixture) forms of both transforms."""
    rep = VerificationReport()
    points = np.atleast_2d(points)
    m = mean_of(f)
    centered = center_density(f, max_order=max_order, grid=grid)
    err = np.max(np.abs(evaluate(centered.body, points)
                        - gjessing_evaluate(f.body, -m, points)))
    rep.add("representation-centering", float(err), centered.tail + tol)
    g = as_cm_vector(g, f.dimension)
    out = identity_covariance_density(centered, g, max_order=max_order, norm_cap=norm_cap,
                                      grid=grid)
    err = np.max(np.abs(evaluate(out.body, points) - mixture_evaluate(centered.body, g, points)))
    rep.add("representation-covariance", float(err), out.tail + tol)
    return rep


# -- L^p boundary ----------------------------------------------------------------

@dataclass(frozen=True)
class LpDiagnostic:
    norm_sq: float
    p: float
    half_widths: tuple
    log_estimates: tuple
    classification: str  # "convergent", "divergent" or "inconclusive"


def _log_truncated_integral(coef: float, half_width: float, panel: float = 0.5,
                            nodes: int = 10) -> float:
    # log of int_{-L}^{L} exp(coef s^2) ds / sqrt(2 pi) by composite Gauss-Legendre
    x, w = np.polynomial.legendre.leggauss(nodes)
    edges = np.arange(-half_width, half_width + 0.5 * panel, panel)
    mids = 0.5 * (edges[:-1] + edges[1:])
    s = (mids[:, None] + 0.5 * panel * x[None, :]).ravel()
    logw = np.log(np.tile(0.5 * panel * w, mids.size))
    return float(special.logsumexp(coef * s * s + logw) - 0.5 * math.log(2.0 * math.pi))


def lp_refinement(h, p: float, half_widths: Sequence[float] = (4, 8, 16, 32, 64, 128),
                  rtol: float = 1e-9, blowup: float = 1.0) -> LpDiagnostic:
    """Estimate ``log int E_2(h)^p dmu`` on growing truncation domains.

    The integral only depends on ``t = <w, h>``; in ``s = t/|h|`` the integrand
    is ``(1+c)^{-p/2} exp((pc/(1+c) - 1) s^2/2)`` against Lebesgue measure,
    ``c = |h|^2``.  Convergent: the last two log-estimates differ by less than
    ``rtol``.  Divergent: the estimates increase strictly over the last three
    refinements with a final jump above ``blowup``.
    """
    if not p > 1:
        raise ValidationError(f"p must exceed 1, got {p}")
    h = as_cm_vector(h)
    c = float(h @ h)
    coef = 0.5 * (p * c / (1.0 + c) - 1.0)
    base = -0.5 * p * math.log1p(c)
    logs = tuple(base + _log_truncated_integral(coef, float(L)) for L in half_widths)
    diffs = np.diff(logs)
    if abs(diffs[-1]) < rtol:
        cls = "convergent"
    elif np.all(diffs[-3:] > 0) and diffs[-1] > blowup:
        cls = "divergent"
    else:
        cls = "inconclusive"
    return LpDiagnostic(c, float(p), tuple(float(L) for L in half_widths), logs, cls)


def check_lp_boundary(h, p: float, **kwargs) -> VerificationReport:
    """Refinement diagnostic must agree with ``|h|^2 < 1/(p-1)``."""
    rep = VerificationReport()
    diag = lp_refinement(h, p, **kwargs)
    expected = "convergent" if quadratic_exp_lp_integrable(h, p) else "divergent"
    detail = (f"|h|^2={diag.norm_sq:.6g} p={p:g} expected={expected} "
              f"observed={diag.classification} final_log_estimate={diag.log_estimates[-1]:.6g}")
    rep.add(f"lp-boundary[|h|^2={diag.norm_sq:.6g},p={p:g}]",
            0.0 if diag.classification == expected else 1.0, 0.0, detail,
            passed=diag.classification == expected)
    return rep


# -- sampling --------------------------------------------------------------------

@dataclass(frozen=True)
class SampleBatch:
    seed: int
    count: int
    points: np.ndarray
    acceptance_rate: float = 1.0
    proposal_scale: float = 1.0
    envelope: float = float("nan")
    bias_bound: float = 0.0


def _stream(seed: int, stream: int, chunk: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(stream, chunk))
    return np.random.Generator(np.random.Philox(ss))


def _log_ratio_fn(fn: Callable, d: int, scale: float) -> Callable:
    shrink = 1.0 - 1.0 / (scale * scale)
    logs = d * math.log(scale)

    def ratio(pts):
        pts = np.atleast_2d(pts)
        vals = fn(pts)
        return vals * np.exp(logs - 0.5 * shrink * np.einsum("ij,ij->i", pts, pts))
    return ratio


def _envelope(fn: Callable, d: int, scale: float, box: float) -> float:
    # sup of the target/proposal ratio over the proposal box, by grid search
    # followed by local refinement; inflated by 10%
    per_axis = {1: 4001, 2: 401, 3: 61}.get(d, 21)
    half = box * scale
    axis = np.linspace(-half, half, per_axis)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    ratio = _log_ratio_fn(fn, d, scale)
    vals = ratio(pts)
    if not np.all(np.isfinite(vals)):
        raise EnvelopeError("density is not finite on the envelope search box")
    best = float(vals.max())
    for start in pts[np.argsort(vals)[-5:]]:
        res = optimize.minimize(lambda x: -ratio(np.clip(x, -half, half))[0], start,
                                method="Nelder-Mead",
                                options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000})
        best = max(best, float(-res.fun))
    if not math.isfinite(best) or best > 1e12:
        raise EnvelopeError(f"density appears unbounded on the search box (sup ~ {best:.3g})")
    if best <= 0:
        raise EnvelopeError("density vanishes on the search box")
    return 1.1 * best


def sample_density(f, count: int, seed: int = 0, proposal_scale: float | None = None,
                   box: float = 8.0, stream: int = _STREAM_X) -> SampleBatch:
    """Rejection sampling from ``f dmu``.

    Proposals are ``N(0, s^2 I)`` restricted to the box ``[-box*s, box*s]^d``;
    ``s`` defaults to whichever of a few scales gives the smallest envelope.
    The envelope is the grid-searched supremum of the target/proposal ratio,
    inflated by 10%; any proposal exceeding it raises :class:`EnvelopeError`.
    Randomness is drawn from Philox streams keyed by ``(seed, stream, chunk)``.
    """
    if count < 1:
        raise ValidationError("count must be >= 1")
    if isinstance(f, DensityExpansion) and not f.validated:
        raise ValidationError("density must be validated before sampling")
    body = f.body if isinstance(f, DensityExpansion) else f
    d = body.dimension
    fn = _density_fn(body)
    scales = (proposal_scale,) if proposal_scale else (1.0, 1.25, math.sqrt(2.0), 1.75, 2.0)
    best_scale, best_env = None, math.inf
    for s in scales:
        try:
            env = _envelope(fn, d, s, box)
        except EnvelopeError:
            if proposal_scale:
                raise
            continue
        if env < best_env:
            best_scale, best_env = s, env
    if best_scale is None:
        raise EnvelopeError("no proposal scale gave a bounded envelope")
    ratio = _log_ratio_fn(fn, d, best_scale)
    half = box * best_scale
    accepted, proposed, chunk = [], 0, 0
    total = 0
    while total < count:
        rng = _stream(seed, stream, chunk)
        prop = best_scale * rng.standard_normal((_CHUNK, d))
        u = rng.random(_CHUNK)
        inside = np.all(np.abs(prop) <= half, axis=1)
        r = np.where(inside, ratio(prop), 0.0)
        if np.any(r > best_env):
            raise EnvelopeError(
                f"envelope {best_env:.6g} exceeded by {r.max():.6g}; density too peaked")
        keep = prop[u * best_env < r]
        accepted.append(keep)
        total += keep.shape[0]
        proposed += _CHUNK
        chunk += 1
        if chunk > 10_000:
            raise EnvelopeError("acceptance rate too low")
    pts = np.concatenate(accepted)[:count]
    bias = d * float(special.erfc(box / math.sqrt(2.0)))
    return SampleBatch(seed, count, pts, total / proposed, best_scale, best_env, bias)


def simulate_standardized(f: DensityExpansion, g, count: int, seed: int = 0,
                          **kwargs) -> SampleBatch:
    """Draw ``X + Z g`` with ``X ~ f dmu`` and an independent ``Z ~ N(0, 1)``."""
    g = as_cm_vector(g, f.dimension)
    xs = sample_density(f, count, seed, stream=_STREAM_X, **kwargs)
    z = _stream(seed, _STREAM_Z, 0).standard_normal(count)
    return SampleBatch(seed, count, xs.points + np.outer(z, g), xs.acceptance_rate,
                       xs.proposal_scale, xs.envelope, xs.bias_bound)


def empirical_cf(points, phi):
    """Sample CF at ``phi`` with standard errors of its real and imaginary parts."""
    arg = np.asarray(points) @ as_cm_vector(phi)
    c, s = np.cos(arg), np.sin(arg)
    n = arg.shape[0]
    return complex(c.mean(), s.mean()), c.std(ddof=1) / math.sqrt(n), s.std(ddof=1) / math.sqrt(n)


def check_sampling(f: DensityExpansion, g, phis: Iterable, grid: QuadratureGrid,
                   count: int = 100_000, seed: int = 0, cov_k: float = 6.0,
                   cf_k: float = 3.0, max_order: int | None = None,
                   norm_cap: float = 0.5) -> VerificationReport:
    """Randomization ``X + Z g`` against the density ``f <> E_2(g)``.

    Empirical covariance must equal ``I`` within ``cov_k/sqrt(N)`` entrywise,
    and the empirical CF must match the quadrature CF of ``f <> E_2(g)``
    within ``cf_k`` standard errors (real and imaginary parts separately).
    """
    rep = VerificationReport()
    g = as_cm_vector(g, f.dimension)
    target = identity_covariance_density(f, g, max_order=max_order, norm_cap=norm_cap, grid=grid)
    batch = simulate_standardized(f, g, count, seed)
    vt = grid_values(target, grid)
    cov = np.cov(batch.points, rowvar=False).reshape(f.dimension, f.dimension)
    rep.add("sampling-covariance", float(np.max(np.abs(cov - np.eye(f.dimension)))),
            cov_k / math.sqrt(count),
            detail=f"acceptance={batch.acceptance_rate:.4f} scale={batch.proposal_scale:.4g}")
    for k, phi in enumerate(phis):
        emp, se_re, se_im = empirical_cf(batch.points, phi)
        ref = characteristic_functional(vt, phi, grid)
        z = max(abs(emp.real - ref.real) / se_re, abs(emp.imag - ref.imag) / max(se_im, 1e-300))
        rep.add(f"sampling-cf[{k}]", float(z), cf_k, detail="error in standard errors")
    return rep


def check_inner_product(pairs: Iterable, grid: QuadratureGrid, tol: float = 1e-8) -> VerificationReport:
    """Algebraic ``sum_k k! <f_k, g_k>`` against quadrature of ``f g``."""
    rep = VerificationReport()
    for k, (f, g) in enumerate(pairs):
        err = abs(expansion_inner(f, g) - quadrature_inner(f, g, grid))
        rep.add(f"inner-product[{k}]", err, tol)
    return rep


def check_covariance_identity(f: DensityExpansion, tol: float = 1e-10) -> VerificationReport:
    rep = VerificationReport()
    cov = covariance_of(f)
    rep.add("covariance-identity", float(np.max(np.abs(cov.matrix - np.eye(f.dimension)))), tol)
    return rep
