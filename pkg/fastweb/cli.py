"""Command-line front end.

Each subcommand builds a :class:`RunConfig` from ``--config`` and the
flags, validates the slice it needs and writes its files into a staging
directory that replaces ``--out`` only on success. Every output directory
carries ``effective_config.json``, which ``--config`` accepts back.

Exit status: 0 on success, 1 on a computation error or a failed
verification check, 2 on a usage error.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
import yaml

from fastweb import verify
from fastweb.blaschke import (
    compose_orbit,
    derivative_at_zero,
    hyperbolic_distance_disc,
    mu,
    random_blaschke,
)
from fastweb.config import ConfigValidator, RunConfig
from fastweb.exceptions import (
    ConfigurationError,
    FastWebError,
    InvalidConfigurationError,
    chain_exceptions,
    create_parameter_error,
    with_context,
)
from fastweb.extmag import ExtReal
from fastweb.fastesc import compute_RA, in_AR, ra_sequence
from fastweb.field import (
    classify_ladder,
    contains_contour,
    extract_loop,
    fatou_proxy_mask,
    fundamental_hole,
    h_field,
    oscillation_field,
    ra_field,
    vn_field,
)
from fastweb.maxmod import compute_Rf, escape_index, escape_test, get_profile, logM_ladder, phi_ladder
from fastweb.render import render_contours_svg, render_field_png, render_file
from fastweb.utility.io import staged_directory, write_csv, write_json, write_text

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

MAXMOD_LADDER = np.linspace(-5.0, 8.0, 131)
BLASCHKE_DEMO_LENGTH = 50
BLASCHKE_DEMO_START = 0.9 + 0j
EFFECTIVE_CONFIG = "effective_config.json"


# =============================================================================
# Argument parsing
# =============================================================================


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON or YAML run configuration")
    common.add_argument("--function", help="half_exp, scaled_exp, pure_exp or baker_product")
    common.add_argument(
        "--family-param",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a parameter of the function family (repeatable)",
    )
    common.add_argument("--grid", help="grid window cx,cy,w,h,nx,ny")
    common.add_argument("--R", action="append", metavar="R", help="radius or comma list (repeatable)")
    common.add_argument("--horizon", type=int)
    common.add_argument("--escape-level", type=int, dest="escape_level")
    common.add_argument("--tol", type=float)
    common.add_argument("--nmax", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int)
    common.add_argument("--samples", type=int)
    common.add_argument("--point", help="point re,im")
    common.add_argument("--z0", help="base point re,im for h")
    common.add_argument("--n", type=int, dest="h_n", help="iterate index for h")
    common.add_argument("--suite", action="append", help="verification suite (repeatable)")
    common.add_argument("--lambda", type=float, dest="blaschke_lambda", help="Blaschke bound")
    common.add_argument("--out", type=Path, help="output directory")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true")
    verbosity.add_argument("-q", "--quiet", action="store_true")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="fastweb",
        description="Fast escaping sets, escape rates and spider's webs of entire functions",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  fastweb maxmod --function half_exp
  fastweb ra --point 2,0
  fastweb loops --R 1 --R 2 --grid 0,0,8,8,256,256
  fastweb verify --suite ra_monotone --seed 7
  fastweb render --input out/ra_field.csv --out pictures
        """,
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name, help_text in (
        ("maxmod", "log M(r) ladders and R_f"),
        ("ra", "escape rate at one point"),
        ("ra-field", "escape-rate field on the grid"),
        ("h-field", "log-modulus ratio field against --z0"),
        ("classify", "A_R membership bitfields for the R-ladder"),
        ("loops", "fundamental holes and loops for the R-ladder"),
        ("osc", "oscillation field and Julia-set proxy"),
        ("blaschke-demo", "contraction of a random Blaschke composition"),
        ("verify", "run verification suites"),
        ("render", "draw a field CSV as PNG or a contour CSV as SVG"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_text)
        if name == "render":
            p.add_argument("--input", type=Path, required=True, help="CSV written by another subcommand")
            p.add_argument("--log", action="store_true", help="log-scale colours")
    return parser


def _radii(values: list[str]) -> list[float]:
    out: list[float] = []
    for item in values:
        for part in item.split(","):
            try:
                out.append(float(part))
            except ValueError as e:
                raise chain_exceptions(
                    create_parameter_error("R", part, reason="expected a number"), e
                ) from e
    return out


def _family_params(items: list[str]) -> dict[str, Any]:
    params: dict[str, Any] = {}
    for item in items:
        key, sep, raw = item.partition("=")
        if not sep or not key.strip():
            raise create_parameter_error("family-param", item, reason="expected key=value")
        try:
            params[key.strip()] = yaml.safe_load(raw)
        except yaml.YAMLError as e:
            raise chain_exceptions(
                create_parameter_error("family-param", item, reason="value is not parseable"), e
            ) from e
    return params


_FLAG_KEYS = (
    "grid", "horizon", "escape_level", "tol", "nmax", "seed", "threads", "samples",
    "point", "z0", "h_n", "blaschke_lambda", "out",
)


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """``--config`` first, then flags; family parameters after the function.

    Raises:
        ConfigurationError: Naming the offending key
    """
    config = RunConfig.from_file(args.config) if args.config is not None else RunConfig()
    if args.function is not None:
        with with_context(key="function"):
            config.with_function(args.function)
    if args.family_param:
        with with_context(key="family-param"):
            config.with_family_params(_family_params(args.family_param))
    if args.R:
        with with_context(key="R"):
            config.with_R_ladder(_radii(args.R))
    if args.suite:
        with with_context(key="suite"):
            config.with_suites(args.suite)
    for key in _FLAG_KEYS:
        value = getattr(args, key)
        if value is not None:
            with with_context(key=key):
                getattr(config, f"with_{key}")(value)
    return config


def _require_valid(config: RunConfig) -> None:
    result = ConfigValidator.validate_run_config(config)
    if not result.is_valid:
        raise InvalidConfigurationError(
            result.get_error_summary(), config_section="run", validation_errors=result.errors
        )


def _configure_logging(args: argparse.Namespace) -> None:
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    logging.getLogger("fastweb").setLevel(level)


def _meta_json(meta: dict[str, Any]) -> dict[str, Any]:
    """Field metadata without per-cell arrays."""
    return {k: v for k, v in meta.items() if not isinstance(v, np.ndarray)}


# =============================================================================
# Subcommands
# =============================================================================


def cmd_maxmod(config: RunConfig, out: Path) -> int:
    f = config.function
    p = get_profile(f)
    rows = phi_ladder(p, [float(t) for t in MAXMOD_LADDER])
    write_csv(pd.DataFrame(rows, columns=["t", "phi"]), out / "phi_ladder.csv")

    ladder_rows = []
    escapes = {}
    for R in config.R_ladder:
        t0 = math.log(R)
        index = escape_index(p, t0, config.horizon, config.threshold)
        escapes[str(R)] = index
        steps = config.horizon if index is None else index + 1
        for n, value in enumerate(logM_ladder(p, t0, steps)):
            ladder_rows.append({"R": R, "n": n, "log_M_n": str(value) if isinstance(value, ExtReal) else value})
    write_csv(pd.DataFrame(ladder_rows, columns=["R", "n", "log_M_n"]), out / "ladder.csv")

    summary: dict[str, Any] = {"function": f.to_dict(), "escape_index": escapes}
    if f.fixes_origin:
        r_f = compute_Rf(p, config.horizon, config.threshold)
        summary["R_f"] = r_f
        logger.info("R_f = %.15g", r_f)
    write_json(summary, out / "maxmod.json")
    return EXIT_OK


def cmd_ra(config: RunConfig, out: Path) -> int:
    f = config.function
    point = config.require_point()
    if f.fixes_origin:
        result = compute_RA(f, point, config.tol, config.nmax, config.horizon, config.threshold)
        data = result.to_dict()
        rows = list(zip(range(len(result.sequence)), result.sequence, result.approximate))
        membership = {}
        p = get_profile(f)
        for R in config.R_ladder:
            if escape_test(p, R, config.horizon, config.threshold):
                membership[str(R)] = in_AR(f, point, R, config.horizon, config.threshold).to_dict()
        data["membership"] = membership
        print(f"R_A({point}) = {data['value']} [{data['status']}]")
    else:
        seq = ra_sequence(f, point, config.nmax, config.horizon)
        data = {
            "point": [point.re, point.im],
            "sequence": seq.values,
            "approximate": list(seq.approximate),
            "truncation": None if seq.truncated is None else seq.truncated.value,
            "truncated_at": seq.truncated_at,
        }
        rows = list(zip(range(len(seq)), seq.values, seq.approximate))
    write_json(data, out / "ra.json")
    write_csv(pd.DataFrame(rows, columns=["n", "value", "approximate"]), out / "ra_sequence.csv")
    return EXIT_OK


def cmd_ra_field(config: RunConfig, out: Path) -> int:
    c = config
    s = ra_field(c.function, c.grid, c.tol, c.nmax, c.horizon, c.threshold, c.threads)
    write_csv(s.to_frame(), out / "ra_field.csv")
    write_json({**_meta_json(s.meta), "missing": s.missing_count}, out / "ra_field.json")
    render_field_png(s, out / "ra_field.png", log_scale=True)
    return EXIT_OK


def cmd_h_field(config: RunConfig, out: Path) -> int:
    c = config
    z0 = c.require_z0()
    s = h_field(c.function, c.grid, z0, c.h_n, c.horizon, c.threshold, threads=c.threads)
    frame = s.to_frame()
    frame["index"] = s.meta["index"].ravel()
    write_csv(frame, out / "h_field.csv")
    write_json({**_meta_json(s.meta), "missing": s.missing_count}, out / "h_field.json")
    return EXIT_OK


def cmd_classify(config: RunConfig, out: Path) -> int:
    c = config
    _require_valid(c)
    fields = classify_ladder(c.function, c.grid, c.R_ladder, c.horizon, c.threshold, c.threads)
    summary = []
    for b in fields:
        R = b.meta["R"]
        write_csv(b.to_frame(), out / f"classify_R{R:g}.csv")
        summary.append({**b.meta, "count": b.count})
    write_json({"grid": c.grid.to_dict(), "fields": summary}, out / "classify.json")
    return EXIT_OK


def cmd_loops(config: RunConfig, out: Path) -> int:
    c = config
    _require_valid(c)
    fields = classify_ladder(c.function, c.grid, c.R_ladder, c.horizon, c.threshold, c.threads)
    loops = []
    summary = []
    for b in fields:
        R = b.meta["R"]
        hole = fundamental_hole(b)
        loop = extract_loop(hole, R)
        write_csv(loop.to_frame(), out / f"loop_R{R:g}.csv")
        loops.append(loop)
        summary.append(
            {
                "R": R,
                "hole_cells": hole.cell_count,
                "hole_area": hole.area,
                "vertex_count": loop.vertex_count,
                "enclosed_area": loop.enclosed_area(),
                "length": loop.length(),
            }
        )
    for inner, outer, row in zip(loops, loops[1:], summary):
        row["inside_next"] = contains_contour(outer, inner)
    write_json({"grid": c.grid.to_dict(), "loops": summary}, out / "loops.json")
    render_contours_svg(loops, out / "loops.svg", c.grid)
    return EXIT_OK


def cmd_osc(config: RunConfig, out: Path) -> int:
    c = config
    if c.function.fixes_origin:
        base = ra_field(c.function, c.grid, c.tol, c.nmax, c.horizon, c.threshold, c.threads)
        osc = oscillation_field(base)
    else:
        base = vn_field(c.function, c.grid, c.h_n, c.horizon, c.threshold, c.threads)
        osc = oscillation_field(base, log_scale=False)
    proxy = fatou_proxy_mask(osc)
    frame = osc.to_frame()
    frame["fatou_proxy"] = proxy.ravel().astype(np.int8)
    write_csv(frame, out / "osc.csv")
    write_json(
        {"source": base.label, "missing": osc.missing_count, "fatou_proxy_cells": int(proxy.sum())},
        out / "osc.json",
    )
    render_field_png(osc, out / "osc.png")
    return EXIT_OK


def cmd_blaschke_demo(config: RunConfig, out: Path) -> int:
    lam = config.blaschke_lambda
    rng = np.random.default_rng(config.seed)
    seq = [random_blaschke(rng, lam=lam) for _ in range(BLASCHKE_DEMO_LENGTH)]
    start = config.point.to_complex() if config.point is not None else BLASCHKE_DEMO_START
    partner = -start
    orbit = compose_orbit(seq, start, lam)
    other = compose_orbit(seq, partner, lam)
    bound = [abs(start)]
    for _ in seq:
        r = bound[-1]
        bound.append(mu(r, lam) if r > 0 else 0.0)
    rows = []
    for n, (a, b) in enumerate(zip(orbit, other)):
        rows.append(
            {
                "n": n,
                "re": a.value.real,
                "im": a.value.imag,
                "modulus": a.modulus,
                "mu_bound": bound[n],
                "distance": hyperbolic_distance_disc(a, b),
            }
        )
    write_csv(pd.DataFrame(rows), out / "blaschke_orbit.csv")
    write_json(
        {
            "lambda": lam,
            "start": [start.real, start.imag],
            "products": [
                {**b.to_dict(), "derivative_at_zero": derivative_at_zero(b)} for b in seq
            ],
        },
        out / "blaschke.json",
    )
    return EXIT_OK


def cmd_verify(config: RunConfig, out: Path) -> int:
    reports = verify.run_suites(config)
    write_json(verify.build_report(config, reports), out / "report.json")
    summary = verify.summarize(reports)
    write_text(summary + "\n", out / "summary.txt")
    print(summary)
    return EXIT_FAILURE if verify.any_failed(reports) else EXIT_OK


def cmd_render(config: RunConfig, out: Path, args: argparse.Namespace) -> int:
    render_file(args.input, out, log_scale=args.log)
    return EXIT_OK


_COMMANDS: dict[str, Callable[[RunConfig, Path], int]] = {
    "maxmod": cmd_maxmod,
    "ra": cmd_ra,
    "ra-field": cmd_ra_field,
    "h-field": cmd_h_field,
    "classify": cmd_classify,
    "loops": cmd_loops,
    "osc": cmd_osc,
    "blaschke-demo": cmd_blaschke_demo,
    "verify": cmd_verify,
}


def main(argv: Sequence[str] | None = None) -> int:
    """Run one subcommand and return its exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_USAGE
    _configure_logging(args)

    try:
        config = config_from_args(args)
        with staged_directory(config.out) as stage:
            if args.command == "render":
                status = cmd_render(config, stage, args)
            else:
                status = _COMMANDS[args.command](config, stage)
            config.save_to_disk(stage / EFFECTIVE_CONFIG)
    except ConfigurationError as e:
        print(f"fastweb {args.command}: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except FastWebError as e:
        print(f"fastweb {args.command}: error: {e}", file=sys.stderr)
        return EXIT_FAILURE
    return status


__all__ = ["build_parser", "config_from_args", "main"]
