"""Command-line entry point.

Every command writes its outputs plus ``config.json`` (the resolved
configuration) into ``--out``. Failures print one line

    error: <category>: <message>

to stderr and exit with the category's code from ``EXIT_CODES``.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InputNotFound, InvalidArgument, NonConvergence, ParseError, StarScatterError
from .forward.solver import BoundaryCondition
from .forward.table import compute_far_field_table
from .geometry import RadialShape, volume
from .inverse import (
    ReconstructionConfig,
    distinguishability,
    initial_sphere_from_data,
    noise_floor,
    reconstruct_shape,
    synthesize_cross_section_data,
)
from .smatrix import CrossSectionData, format_residuals, identity_residuals
from .textio import format_table, read_table

log = logging.getLogger("starscatter")

EXIT_CODES = {
    "internal": 1,
    "usage": 2,
    "input-not-found": 3,
    "parse-error": 4,
    "duplicate-coefficient": 5,
    "invalid-shape": 6,
    "solver-failure": 7,
    "insufficient-bandwidth": 8,
    "non-convergence": 9,
    "invalid-argument": 10,
    "domain-error": 11,
    "invalid-grid": 12,
    "incomplete-data": 13,
    "unreliable-s": 14,
    "step-too-large": 15,
    "invalid-iterate": 16,
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


# ---------------------------------------------------------------------------
# Input parsing
# ---------------------------------------------------------------------------
def parse_shape_file(path) -> RadialShape:
    path = os.fspath(path)
    try:
        text = Path(path).read_text()
    except FileNotFoundError:
        raise InputNotFound(f"no such shape file: {path}") from None
    except (IsADirectoryError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read shape file {path}: {exc}") from exc
    return RadialShape.from_json(text)


def _lambda_list(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InvalidArgument(f"cannot parse wavenumber list {text!r}") from None
    if not vals or any(not (math.isfinite(v) and v > 0) for v in vals):
        raise InvalidArgument(f"wavenumbers must be positive: {text!r}")
    return vals


def _window(text: str) -> list[float]:
    parts = text.split(":")
    try:
        a, b = (float(p) for p in parts)
    except ValueError:
        raise InvalidArgument(f"t window must look like A:B, got {text!r}") from None
    if not 0 < a < b:
        raise InvalidArgument(f"t window needs 0 < A < B, got {text!r}")
    return [a, b]


def _sphere_radius(shape: RadialShape) -> float:
    if np.any(shape.coeffs[1:] != 0.0):
        raise InvalidArgument("the partial-wave phase needs a spherical shape (only c_00 nonzero)")
    return float(shape.coeffs[0] / math.sqrt(4.0 * math.pi))


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------
def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_config(out: Path, args, resolved: dict) -> None:
    record = {"command": args.command, "version": __version__}
    for key, val in sorted(vars(args).items()):
        if key in ("func", "command", "verbose"):
            continue
        record[key] = val
    record.update(resolved)
    (out / "config.json").write_text(json.dumps(record, indent=1, sort_keys=True) + "\n")


def _abspath(p):
    return None if p is None else os.path.abspath(p)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------
def cmd_forward(args) -> int:
    shape = parse_shape_file(args.shape)
    lams = _lambda_list(args.lam)
    out = _out_dir(args)
    table = compute_far_field_table(shape, lams, args.order, args.bc, obs_order=args.obs_order)
    (out / "farfield.txt").write_text(table.to_text())
    _write_config(out, args, {"lambdas": lams, "obs_order": table.obs_grid.order})
    return 0


def cmd_cross_section(args) -> int:
    shape = parse_shape_file(args.shape)
    lams = _lambda_list(args.lam)
    out = _out_dir(args)
    data = synthesize_cross_section_data(shape, lams, args.order, args.bc, obs_order=args.obs_order,
                                         noise_sigma=args.noise_sigma, seed=args.seed)
    (out / "cross_section.txt").write_text(data.to_text())
    _write_config(out, args, {"lambdas": lams})
    return 0


def cmd_verify(args) -> int:
    shape = parse_shape_file(args.shape)
    lams = _lambda_list(args.lam)
    out = _out_dir(args)
    table = compute_far_field_table(shape, lams, args.order, args.bc)
    reports = [identity_residuals(table, k) for k in range(len(lams))]
    text = "# starscatter residuals v1\n" + format_residuals(reports)
    (out / "residuals.txt").write_text(text)
    _write_config(out, args, {"lambdas": lams})
    return 0


def cmd_phase(args) -> int:
    from .trace import PhaseSamples, det_phase_derivative, sphere_phase_samples

    shape = parse_shape_file(args.shape)
    lams = _lambda_list(args.lam)
    out = _out_dir(args)
    if args.method == "partial-wave":
        samples = sphere_phase_samples(_sphere_radius(shape), lams, args.bc)
    else:
        vals = [det_phase_derivative(shape, lam, args.order, args.bc) for lam in lams]
        samples = PhaseSamples(lams, vals, "det-S")
    (out / "phase.txt").write_text(samples.to_text())
    _write_config(out, args, {"lambdas": lams})
    return 0


def cmd_heat(args) -> int:
    from .trace import PhaseSamples, heat_trace_and_a0, sphere_phase_samples

    window = _window(args.t_window)
    out = _out_dir(args)
    resolved = {"t_window_resolved": window}
    if args.data:
        _, meta, rows = read_table(args.data, "phase")
        samples = PhaseSamples(rows[:, 0], rows[:, 1], meta.get("method", "partial-wave"))
    elif args.shape:
        shape = parse_shape_file(args.shape)
        if args.lambda_max <= 0 or args.samples < 3:
            raise InvalidArgument("need --lambda-max > 0 and --samples >= 3")
        lams = np.linspace(args.lambda_max / args.samples, args.lambda_max, args.samples)
        samples = sphere_phase_samples(_sphere_radius(shape), lams, args.bc)
        (out / "phase.txt").write_text(samples.to_text())
        resolved["volume"] = volume(shape)
    else:
        raise InvalidArgument("heat needs --shape or --data")
    fit = heat_trace_and_a0(samples, window)
    (out / "heat.txt").write_text(fit.to_text())
    _write_config(out, args, resolved)
    return 0


def cmd_reconstruct(args) -> int:
    if args.data:
        path = os.fspath(args.data)
        if not Path(path).is_file():
            raise InputNotFound(f"no such data file: {path}")
        data = CrossSectionData.from_text(Path(path).read_text())
    elif args.shape:
        shape = parse_shape_file(args.shape)
        data = synthesize_cross_section_data(shape, _lambda_list(args.lam), args.order, args.bc,
                                             obs_order=args.obs_order, noise_sigma=args.noise_sigma,
                                             seed=args.seed)
    else:
        raise InvalidArgument("reconstruct needs --data or --shape")
    init = parse_shape_file(args.init) if args.init else initial_sphere_from_data(data)
    config = ReconstructionConfig(linv=args.linv, alpha=args.alpha, max_iter=args.max_iter,
                                  order=args.order, bc=args.bc)
    out = _out_dir(args)
    result = reconstruct_shape(data, init, config)
    (out / "shape.json").write_text(result.shape.to_json())
    (out / "convergence.txt").write_text(result.log_text())
    resid = CrossSectionData(data.lambdas, data.grid, result.report.residuals,
                             {"source": "residual", "status": result.status})
    (out / "residuals.txt").write_text(resid.to_text())
    _write_config(out, args, {"init": init.to_dict(), "status": result.status,
                              "converged": result.converged})
    if not result.converged:
        raise NonConvergence(f"stopped with status {result.status}; best iterate written")
    return 0


def cmd_distinguish(args) -> int:
    s1 = parse_shape_file(args.shape)
    s2 = parse_shape_file(args.shape2)
    lams = _lambda_list(args.lam)
    if len(lams) != 1:
        raise InvalidArgument("distinguish takes a single center wavenumber")
    out = _out_dir(args)
    sep = distinguishability(s1, s2, lams[0], args.order, args.bc, obs_order=args.obs_order)
    floor = max(noise_floor(s, lams[0], args.order, args.bc, obs_order=args.obs_order) for s in (s1, s2))
    meta = {"lambda0": lams[0], "order": args.order}
    (out / "distinguish.txt").write_text(
        format_table("distinguish", meta, ["separation", "noise_floor"], [[sep, floor]])
    )
    _write_config(out, args, {})
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="starscatter", description="Acoustic obstacle scattering laboratory.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(sp, shape=True, lam=True):
        if shape:
            sp.add_argument("--shape", type=_abspath, help="shape file (JSON)")
        if lam:
            sp.add_argument("--lambda", dest="lam", default="2.0", help="wavenumber(s), comma separated")
        sp.add_argument("--order", type=int, default=24, help="solver grid order")
        sp.add_argument("--bc", choices=[b.value for b in BoundaryCondition], default="dirichlet")
        sp.add_argument("--out", required=True, type=_abspath, help="output directory")

    sp = sub.add_parser("forward", help="far-field amplitude table")
    common(sp)
    sp.add_argument("--obs-order", type=int, default=None)
    sp.set_defaults(func=cmd_forward)

    sp = sub.add_parser("cross-section", help="cross-section data")
    common(sp)
    sp.add_argument("--obs-order", type=int, default=6)
    sp.add_argument("--noise-sigma", type=float, default=0.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_cross_section)

    sp = sub.add_parser("verify", help="amplitude and scattering-matrix identity residuals")
    common(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("phase", help="scattering phase derivative samples")
    common(sp)
    sp.add_argument("--method", choices=["partial-wave", "det-S"], default="partial-wave")
    sp.set_defaults(func=cmd_phase)

    sp = sub.add_parser("heat", help="heat trace and leading invariant")
    common(sp, lam=False)
    sp.add_argument("--data", type=_abspath, help="phase sample table instead of a shape")
    sp.add_argument("--lambda-max", type=float, default=40.0)
    sp.add_argument("--samples", type=int, default=4000)
    sp.add_argument("--t-window", default="0.02:0.08")
    sp.set_defaults(func=cmd_heat)

    sp = sub.add_parser("reconstruct", help="recover a radial function from cross sections")
    common(sp)
    sp.add_argument("--data", type=_abspath, help="cross-section table (else synthesized from --shape)")
    sp.add_argument("--init", type=_abspath, help="initial shape file")
    sp.add_argument("--linv", type=int, default=2)
    sp.add_argument("--alpha", type=float, default=0.0)
    sp.add_argument("--max-iter", type=int, default=30)
    sp.add_argument("--obs-order", type=int, default=6)
    sp.add_argument("--noise-sigma", type=float, default=0.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_reconstruct)

    sp = sub.add_parser("distinguish", help="cross-section separation of two shapes")
    common(sp)
    sp.add_argument("--shape2", type=_abspath, required=True)
    sp.add_argument("--obs-order", type=int, default=6)
    sp.set_defaults(func=cmd_distinguish)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return EXIT_CODES["usage"]
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if getattr(args, "shape", None) is None and args.command in ("forward", "cross-section", "verify",
                                                                       "phase", "distinguish"):
            raise InvalidArgument(f"{args.command} needs --shape")
        return args.func(args)
    except StarScatterError as exc:
        msg = str(exc).replace("\n", " ")
        print(f"error: {exc.category}: {msg}", file=sys.stderr)
        return EXIT_CODES.get(exc.category, 1)
    except Exception as exc:  # noqa: BLE001 - last-resort mapping to the internal code
        log.debug("internal error", exc_info=True)
        print(f"error: internal: {type(exc).__name__}: {exc}".replace("\n", " "), file=sys.stderr)
        return EXIT_CODES["internal"]


if __name__ == "__main__":
    sys.exit(main())
