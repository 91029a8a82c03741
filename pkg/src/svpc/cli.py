"""Command-line front end.

Exit codes: 0 SVPC, 1 NotSVPC, 2 Inconclusive (``certify`` only; other
commands exit 0 on success), 10 bad input, 11 grid incompatibility or
non-invariant input, 12 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

import numpy as np

from . import gridfn
from .certify import INCONCLUSIVE, NOT_SVPC, SVPC, is_svpc
from .conjugate import (
    ConjugationConfig,
    adaptive_beta_grid,
    auto_beta_grid,
    cross_check,
    envelope_details,
    sv_conjugate,
)
from .errors import GridError, InputError, SvpcError
from .gridfn import GridFunction, GridSpec, parse_axis_descriptor
from .lifting import lifted_dim
from .models import get_model, model_names

EXIT = {SVPC: 0, NOT_SVPC: 1, INCONCLUSIVE: 2}
EXIT_INPUT, EXIT_GRID, EXIT_INTERNAL = 10, 11, 12

DEFAULT_NU = {2: "-2:2:41", 3: "-2:2:9"}
DEFAULT_BETA = {2: "adaptive", 3: "auto"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _num(x):
    x = float(x)
    if x == np.inf:
        return "+inf"
    if x == -np.inf:
        return "-inf"
    return x


def _dumps(obj) -> str:
    def default(o):
        if isinstance(o, np.ndarray):
            return [_num(v) for v in o.reshape(-1)]
        if isinstance(o, (np.floating, np.integer)):
            return _num(o)
        if isinstance(o, np.bool_):
            return bool(o)
        raise TypeError(f"cannot serialise {type(o).__name__}")

    return json.dumps(_clean(obj), indent=2, allow_nan=False, default=default)


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)) and not np.isfinite(obj):
        return _num(obj)
    return obj


def _write_text(path: Optional[str], text: str):
    if path is None or path == "-":
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text if text.endswith("\n") else text + "\n")


def _read_axes_file(path: str) -> list:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read node file {path}: {exc}") from None
    if isinstance(doc, dict):
        doc = doc.get("axes")
    if not isinstance(doc, list) or not doc:
        raise InputError(f"node file {path} must hold a list of nodes or a list of axes")
    if all(isinstance(x, (int, float)) for x in doc):
        return [np.array(doc, dtype=float)]
    return [np.array(a, dtype=float) for a in doc]


def _parse_axes(text: str, n_axes: int) -> tuple:
    """``min:max:count`` (all axes), comma-separated per-axis list, or ``@file``."""
    if text.startswith("@"):
        axes = _read_axes_file(text[1:])
    else:
        axes = [parse_axis_descriptor(t.strip()) for t in text.split(",")]
    if len(axes) == 1:
        axes = axes * n_axes
    if len(axes) != n_axes:
        raise InputError(f"expected 1 or {n_axes} axis descriptors, got {len(axes)}")
    return tuple(axes)


def _load_phi(args) -> GridFunction:
    if args.input:
        if args.model:
            raise InputError("give either --model or --input, not both")
        try:
            phi = gridfn.read(args.input)
        except OSError as exc:
            raise InputError(f"cannot read {args.input}: {exc}") from None
        if phi.spec.kind != "nu":
            raise GridError("input must be a function on a nu-grid")
        if args.nu_grid is not None:
            spec = GridSpec("nu", _parse_axes(args.nu_grid, phi.spec.ndim))
            if not spec.same_as(phi.spec):
                raise GridError("--nu-grid does not match the grid of the input file")
        if args.dim is not None and args.dim != phi.spec.dim:
            raise GridError(f"--dim {args.dim} does not match the input (d={phi.spec.dim})")
        return phi
    if not args.model:
        raise InputError("one of --model or --input is required")
    dim = args.dim or 2
    try:
        params = json.loads(args.params) if args.params else {}
    except json.JSONDecodeError as exc:
        raise InputError(f"--params is not valid JSON: {exc}") from None
    if not isinstance(params, dict):
        raise InputError("--params must be a JSON object")
    model = get_model(args.model, dim, params)
    spec = GridSpec("nu", _parse_axes(args.nu_grid or DEFAULT_NU[dim], dim))
    return model.sample(spec)


def _config(args, phi: GridFunction) -> ConjugationConfig:
    d = phi.spec.dim
    mode = args.beta_grid or DEFAULT_BETA[d]
    if mode == "auto":
        beta = auto_beta_grid(phi, args.beta_count)
    elif mode == "adaptive":
        beta = adaptive_beta_grid(phi, args.beta_count)
    else:
        beta = GridSpec("beta", _parse_axes(mode, lifted_dim(d)))
    return ConjugationConfig(phi.spec, beta)


def _grid_args(p):
    p.add_argument("--model", help="catalog model name (see the models command)")
    p.add_argument("--params", help="JSON object of model parameters")
    p.add_argument("--dim", type=int, choices=(2, 3), help="dimension d (default 2)")
    p.add_argument("--input", help="gridfn JSON file with samples on a nu-grid")
    p.add_argument("--nu-grid", help="min:max:count, or @file with explicit nodes (default -2:2:41 for d=2, -2:2:9 for d=3)")
    p.add_argument("--beta-grid", help="auto | adaptive | min:max:count[,...] per axis | @file")
    p.add_argument("--beta-count", type=int, help="nodes per axis for auto/adaptive slope grids")
    p.add_argument("--out", help="output path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="svpc", description="Singular value polyconvexity toolkit")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    c = sub.add_parser("certify", help="three-way polyconvexity verdict")
    _grid_args(c)
    c.add_argument("--certify-tol", type=float)
    c.add_argument("--refute-margin", type=float)
    c.add_argument("--cross-check", type=int, default=0, metavar="N",
                   help="also compare dual and LP envelopes at N random interior nodes")
    c.add_argument("--seed", type=int, default=0, help="seed for randomized diagnostics")

    e = sub.add_parser("envelope", help="discrete envelope as gridfn JSON")
    _grid_args(e)
    e.add_argument("--report", help="path for the conjugation report JSON")
    e.add_argument("--csv", help="path for a CSV export of the envelope")

    j = sub.add_parser("conjugate", help="slope-space conjugate as gridfn JSON")
    _grid_args(j)
    j.add_argument("--csv", help="path for a CSV export of the conjugate")

    m = sub.add_parser("models", help="list catalog models")
    m.add_argument("--dim", type=int, choices=(2, 3), default=2)
    m.add_argument("--json", action="store_true", help="machine-readable listing")
    return parser


def cmd_certify(args) -> int:
    phi = _load_phi(args)
    config = _config(args, phi)
    cert = is_svpc(phi, config, args.certify_tol, args.refute_margin)
    doc = cert.to_dict()
    if args.cross_check:
        rng = np.random.default_rng(args.seed)
        spec = phi.spec
        interior = np.flatnonzero(~spec.boundary_mask() & phi.finite)
        k = min(args.cross_check, interior.size)
        pick = np.sort(rng.choice(interior, size=k, replace=False))
        rep = cross_check(phi, config, spec.nodes()[pick])
        doc["cross_check"] = {k2: v for k2, v in rep.items() if k2 != "rows"}
        doc["cross_check"]["seed"] = args.seed
    _write_text(args.out, _dumps(doc))
    return EXIT[cert.verdict]


def cmd_envelope(args) -> int:
    phi = _load_phi(args)
    config = _config(args, phi)
    det = envelope_details(phi, config)
    env = det.envelope.result
    _write_text(args.out, gridfn.to_json(env))
    report = dict(det.report)
    fin = phi.finite
    report["max_deviation"] = float(np.max(np.abs(phi.values[fin] - env.values[fin]))) if fin.any() else 0.0
    if args.report:
        _write_text(args.report, _dumps(report))
    if args.csv:
        _write_text(args.csv, gridfn.to_csv(env))
    return 0


def cmd_conjugate(args) -> int:
    phi = _load_phi(args)
    config = _config(args, phi)
    conj = sv_conjugate(phi, config.beta_grid)
    _write_text(args.out, gridfn.to_json(conj))
    if args.csv:
        _write_text(args.csv, gridfn.to_csv(conj))
    return 0


def cmd_models(args) -> int:
    listing = [get_model(n, args.dim).describe() for n in model_names()]
    if args.json:
        _write_text(None, _dumps(listing))
    else:
        for m in listing:
            params = ", ".join(f"{k}={json.dumps(v)}" for k, v in m["parameters"].items()) or "-"
            sys.stdout.write(f"{m['name']:<20} svpc={m['known_svpc']:<4} {m['description']}  [{params}]\n")
    return 0


_VALUE_OPTIONS = ("--nu-grid", "--beta-grid", "--params", "--certify-tol", "--refute-margin")


def _join_values(argv: list) -> list:
    """Glue ``--nu-grid -3:3:31`` into ``--nu-grid=-3:3:31`` (argparse would
    take the leading minus for an option)."""
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in _VALUE_OPTIONS and i + 1 < len(argv):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
        else:
            out.append(a)
            i += 1
    return out


COMMANDS = {"certify": cmd_certify, "envelope": cmd_envelope, "conjugate": cmd_conjugate, "models": cmd_models}


def main(argv=None) -> int:
    try:
        argv = sys.argv[1:] if argv is None else list(argv)
        args = build_parser().parse_args(_join_values(argv))
        if args.command is None:
            raise InputError("a command is required: certify, envelope, conjugate or models")
        return COMMANDS[args.command](args)
    except InputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except GridError as exc:
        sys.stderr.write(f"grid error: {exc}\n")
        return EXIT_GRID
    except SvpcError as exc:
        sys.stderr.write(f"internal error: {exc}\n")
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 - last-resort mapping to the internal exit code
        sys.stderr.write(f"internal error: {type(exc).__name__}: {exc}\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
