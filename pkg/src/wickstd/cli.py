"""Command-line interface: ``wickstd {inspect,center,standardize,verify,example}``.

Exit codes: 0 success, 1 validation or hypothesis failure, 2 numeric or
check failure.

Config files are JSON::

    {"dimension": 2, "max_order": 2,
     "kernels": [{"order": 0, "entries": [{"multi_index": [], "value": 1.0}]},
                 {"order": 2, "entries": [{"multi_index": [1, 1], "value": -0.045}]}],
     "metadata": {"name": "...", "description": "..."}}

Multi-indices are 1-based and sorted; values are per-permutation entries of
the symmetric kernel.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .chaos import ChaosExpansion
from .exceptions import (EnvelopeError, HypothesisError, TruncationError, ValidationError)
from .standardize import (DensityExpansion, center_density, covariance_of, density_check,
                          example_expansion, example_quartic, extract_deficiency_direction,
                          max_admissible_norm, mean_of, standardize)
from .tensor import SymmetricTensor
from .verify import (QuadratureGrid, VerificationReport, characteristic_functional,
                     check_centering_cf, check_covariance_cf, check_lp_boundary, check_mixture,
                     check_s_transform, check_sampling)

SEED_ENV = "WICKSTD_SEED"
SUITES = ("cf-centering", "cf-covariance", "s-transform", "lp-boundary", "mixture", "sampling")
EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2

_TOP_FIELDS = {"dimension", "max_order", "kernels", "metadata"}
_KERNEL_FIELDS = {"order", "entries"}
_ENTRY_FIELDS = {"multi_index", "value"}
_META_FIELDS = {"name", "description"}


# -- config I/O ------------------------------------------------------------------

def _unknown(obj: dict, allowed: set, where: str):
    extra = set(obj) - allowed
    if extra:
        raise ValidationError(f"{where}: unknown field(s) {sorted(extra)}")


def parse_config(doc: dict) -> tuple[ChaosExpansion, dict]:
    """Parse a config document into an expansion and its metadata."""
    if not isinstance(doc, dict):
        raise ValidationError("config must be a JSON object")
    _unknown(doc, _TOP_FIELDS, "config")
    for key in ("dimension", "max_order", "kernels"):
        if key not in doc:
            raise ValidationError(f"config: missing field '{key}'")
    d, top = doc["dimension"], doc["max_order"]
    if not isinstance(d, int) or d < 1:
        raise ValidationError("config.dimension must be a positive integer")
    if not isinstance(top, int) or top < 0:
        raise ValidationError("config.max_order must be a non-negative integer")
    kernels: list = [None] * (top + 1)
    for n, kern in enumerate(doc["kernels"]):
        where = f"kernels[{n}]"
        _unknown(kern, _KERNEL_FIELDS, where)
        k = kern.get("order")
        if not isinstance(k, int) or not 0 <= k <= top:
            raise ValidationError(f"{where}.order must be an integer in [0, {top}]")
        if kernels[k] is not None:
            raise ValidationError(f"{where}: duplicate kernel of order {k}")
        coeffs = {}
        for e, entry in enumerate(kern.get("entries", [])):
            ewhere = f"{where}.entries[{e}]"
            _unknown(entry, _ENTRY_FIELDS, ewhere)
            idx = entry.get("multi_index")
            if not isinstance(idx, list) or len(idx) != k:
                raise ValidationError(f"{ewhere}.multi_index must be a list of length {k}")
            if any(not isinstance(i, int) or not 1 <= i <= d for i in idx):
                raise ValidationError(f"{ewhere}.multi_index {idx} out of range 1..{d}")
            if idx != sorted(idx):
                raise ValidationError(f"{ewhere}.multi_index {idx} is not sorted")
            key = tuple(i - 1 for i in idx)
            if key in coeffs:
                raise ValidationError(f"{ewhere}: duplicate multi_index {idx}")
            value = entry.get("value")
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValidationError(f"{ewhere}.value must be a number")
            coeffs[key] = float(value)
        kernels[k] = SymmetricTensor(d, k, coeffs)
    meta = doc.get("metadata", {}) or {}
    _unknown(meta, _META_FIELDS, "metadata")
    return ChaosExpansion(d, kernels), dict(meta)


def dump_config(f: ChaosExpansion, metadata: dict | None = None) -> dict:
    kernels = []
    for kern in f.kernels:
        entries = [{"multi_index": [i + 1 for i in key], "value": value}
                   for key, value in sorted(kern.items())]
        kernels.append({"order": kern.order, "entries": entries})
    doc = {"dimension": f.dimension, "max_order": f.max_order, "kernels": kernels}
    if metadata:
        doc["metadata"] = dict(metadata)
    return doc


def read_config(path) -> tuple[ChaosExpansion, dict, str]:
    raw = Path(path).read_bytes()
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from exc
    f, meta = parse_config(doc)
    return f, meta, hashlib.sha256(raw).hexdigest()


def _dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_config(path, f: ChaosExpansion, metadata: dict | None = None):
    Path(path).write_text(_dumps(dump_config(f, metadata)))


def manifest(command: str, digest: str | None, seed: int | None, tolerances: dict,
             parameters: dict | None = None) -> dict:
    doc = {"command": command, "input_digest": digest, "seed": seed,
           "tolerances": tolerances, "tool_version": __version__}
    if parameters:
        doc["parameters"] = parameters
    return doc


def write_manifest(output_path, doc: dict):
    Path(str(output_path) + ".manifest.json").write_text(_dumps(doc))


# -- commands --------------------------------------------------------------------

def _default_seed() -> int:
    return int(os.environ.get(SEED_ENV, "0"))


def _fmt_vec(v) -> str:
    return "[" + ", ".join(repr(float(x)) for x in v) + "]"


def cmd_inspect(args, out) -> int:
    f, meta, _ = read_config(args.config)
    print(f"dimension: {f.dimension}", file=out)
    orders = [k for k, kern in enumerate(f.kernels) if not kern.is_zero()]
    print(f"orders: {orders}", file=out)
    print(f"mass: {f.mean()!r}", file=out)
    print(f"mean: {_fmt_vec(f.first_kernel_vector())}", file=out)
    cov = covariance_of(f)
    label = "covariance" if cov.centered else "second-moment (mean non-zero)"
    print(f"{label}:", file=out)
    for row in cov.matrix:
        print("  " + _fmt_vec(row), file=out)
    try:
        density_check(f)
        status = "valid density"
    except ValidationError as exc:
        status = f"invalid: {exc}"
    print(f"density: {status}", file=out)
    if args.table:
        grid = QuadratureGrid(f.dimension, args.grid_order)
        e1 = np.eye(f.dimension)[0]
        lines = ["# |phi|\tre\tim  (phi along e_1)"]
        for s in np.linspace(0.0, 3.0, 31):
            cf = characteristic_functional(f, s * e1, grid)
            lines.append(f"{float(s)!r}\t{cf.real!r}\t{cf.imag!r}")
        Path(args.table).write_text("\n".join(lines) + "\n")
    return EXIT_OK if status == "valid density" else EXIT_INVALID


def cmd_center(args, out) -> int:
    f, meta, digest = read_config(args.config)
    dens = density_check(f)
    m = mean_of(dens)
    res = center_density(dens, max_order=args.max_order)
    write_config(args.output, res.body, meta)
    write_manifest(args.output, manifest("center", digest, None,
                                         {"tail": res.tail},
                                         {"mean": m.tolist(), "max_order": args.max_order}))
    print(f"mean: {_fmt_vec(m)}", file=out)
    print(f"tail: {res.tail!r}", file=out)
    return EXIT_OK


def cmd_standardize(args, out) -> int:
    f, meta, digest = read_config(args.config)
    res = standardize(density_check(f), max_order=args.max_order, norm_cap=args.norm_cap,
                      tol=args.tol)
    write_config(args.output, res.density.body, meta)
    write_manifest(args.output, manifest(
        "standardize", digest, None,
        {"tol": args.tol, "norm_cap": args.norm_cap, "tail": res.density.tail},
        {"mean": res.mean.tolist(), "g": res.direction.tolist(), "max_order": args.max_order}))
    print(f"mean: {_fmt_vec(res.mean)}", file=out)
    print(f"g: {_fmt_vec(res.direction)}", file=out)
    return EXIT_OK


def _test_vectors(rng, d: int, count: int, radius: float) -> list:
    vecs = rng.standard_normal((count, d))
    scale = radius * rng.random(count) / np.linalg.norm(vecs, axis=1)
    return list(vecs * scale[:, None])


def run_suites(f: ChaosExpansion, suites, seed: int, grid_order: int, samples: int,
               max_order: int | None = None, norm_cap: float = 0.5, lp_cases=None) -> VerificationReport:
    """Run the selected verification suites on a density; deterministic per seed."""
    dens = density_check(f)
    d = f.dimension
    grid = QuadratureGrid(d, grid_order)
    rng = np.random.default_rng(seed)
    phis = _test_vectors(rng, d, 10, 2.0)
    hs = _test_vectors(rng, d, 10, 1.0)
    rep = VerificationReport()
    centered, g, why = None, None, ""
    if {"cf-covariance", "sampling"} & set(suites):
        try:
            centered = center_density(dens, max_order=max_order, grid=grid)
            g = extract_deficiency_direction(centered)
            if float(np.linalg.norm(g)) > norm_cap:
                why = f"|g| = {np.linalg.norm(g):.6g} exceeds norm_cap = {norm_cap}"
                g = None
        except HypothesisError as exc:
            why = str(exc)
    for suite in suites:
        if suite == "cf-centering":
            rep.extend(check_centering_cf(dens, phis, grid, max_order=max_order))
        elif suite == "cf-covariance":
            if g is None:
                rep.skip("cf-covariance", why)
            else:
                rep.extend(check_covariance_cf(centered, g, phis, grid, max_order=max_order,
                                               norm_cap=norm_cap))
        elif suite == "s-transform":
            rep.extend(check_s_transform(f, hs, grid))
        elif suite == "lp-boundary":
            cases = lp_cases or [((1.0 + s * 0.2) / (p - 1.0), p)
                                 for p in (1.5, 2.0, 3.0) for s in (-1, 1)]
            e1 = np.eye(d)[0]
            for norm_sq, p in cases:
                rep.extend(check_lp_boundary(math.sqrt(norm_sq) * e1, p))
        elif suite == "mixture":
            mix_hs = [0.9 * h for h in hs]
            pts = rng.standard_normal((100, d))
            rep.extend(check_mixture(mix_hs, pts))
        elif suite == "sampling":
            if g is None:
                rep.skip("sampling", why)
            else:
                rep.extend(check_sampling(centered, g, phis[:5], grid, count=samples, seed=seed,
                                          max_order=max_order, norm_cap=norm_cap))
        else:
            raise ValidationError(f"unknown suite {suite!r}")
    return rep


def cmd_verify(args, out) -> int:
    f, _, _ = read_config(args.config)
    suites = SUITES if "all" in args.suite else tuple(args.suite)
    lp_cases = None
    if args.lp_norm_sq is not None or args.lp_p is not None:
        if args.lp_norm_sq is None or args.lp_p is None:
            raise ValidationError("--lp-norm-sq and --lp-p must be given together")
        lp_cases = [(args.lp_norm_sq, args.lp_p)]
    rep = run_suites(f, suites, args.seed, args.grid_order, args.samples,
                     max_order=args.max_order, norm_cap=args.norm_cap, lp_cases=lp_cases)
    out.write(rep.to_lines())
    return EXIT_OK if rep.passed else EXIT_NUMERIC


def cmd_example(args, out) -> int:
    cstar = max_admissible_norm()
    if args.g_norm < 0:
        raise ValidationError("--g-norm must be non-negative")
    if args.g_norm >= cstar:
        raise ValidationError(
            f"--g-norm {args.g_norm} >= c* = {cstar:.6f}: the quartic density takes "
            "negative values (its discriminant in t^2 is non-negative)")
    direction = np.asarray(args.direction or [1.0], dtype=float)
    nrm = float(np.linalg.norm(direction))
    if nrm == 0.0:
        raise ValidationError("--direction must be non-zero")
    g = args.g_norm * direction / nrm
    f = example_expansion(g)
    if args.g_norm == 0.0:
        f = ChaosExpansion.constant(len(direction), 1.0)
    meta = {"name": "quartic example",
            "description": f"1 - delta^2(g^2)/2 + delta^4(g^4) with g = {g.tolist()}"}
    write_config(args.output, f, meta)
    write_manifest(args.output, manifest("example", None, None, {},
                                         {"g": g.tolist(), "c_star": cstar}))
    if args.table:
        ts = np.linspace(-3.0, 3.0, 121)
        vals = example_quartic(ts, args.g_norm)
        lines = ["# t\tquartic(t)"] + [f"{float(t)!r}\t{float(v)!r}" for t, v in zip(ts, vals)]
        Path(args.table).write_text("\n".join(lines) + "\n")
    print(f"g: {_fmt_vec(g)}", file=out)
    return EXIT_OK


# -- entry point -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wickstd", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("inspect", help="print mass, mean, covariance and validity")
    p.add_argument("config")
    p.add_argument("--table", help="write CF (re, im) vs |phi| along e_1 to this file")
    p.add_argument("--grid-order", type=int, default=24)
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("center", help="write the density of X - E[X]")
    p.add_argument("config")
    p.add_argument("output")
    p.add_argument("--max-order", type=int, default=None,
                   help="chaos budget (default 16 for centering, 32 for the covariance step)")
    p.set_defaults(func=cmd_center)

    p = sub.add_parser("standardize", help="write the mean-zero, identity-covariance density")
    p.add_argument("config")
    p.add_argument("output")
    p.add_argument("--max-order", type=int, default=None,
                   help="chaos budget (default 16 for centering, 32 for the covariance step)")
    p.add_argument("--norm-cap", type=float, default=0.5)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_standardize)

    p = sub.add_parser("verify", help="run verification suites; exit 0 iff all pass")
    p.add_argument("config")
    p.add_argument("--suite", action="append", choices=SUITES + ("all",), default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--grid-order", type=int, default=24)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--max-order", type=int, default=None,
                   help="chaos budget (default 16 for centering, 32 for the covariance step)")
    p.add_argument("--norm-cap", type=float, default=0.5)
    p.add_argument("--lp-norm-sq", type=float, default=None)
    p.add_argument("--lp-p", type=float, default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("example", help="write the quartic example density")
    p.add_argument("output")
    p.add_argument("--g-norm", type=float, required=True)
    p.add_argument("--direction", type=float, nargs="+", default=None)
    p.add_argument("--table", help="write t vs quartic(t) to this file")
    p.set_defaults(func=cmd_example)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    if getattr(args, "suite", "x") is None:
        args.suite = ["all"]
    if getattr(args, "seed", "x") is None:
        args.seed = _default_seed()
    try:
        return args.func(args, out)
    except (ValidationError, HypothesisError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (TruncationError, EnvelopeError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
