"""Command-line interface.

Subcommands expose the operators and experiments; numeric outputs land in
CSV/raw files under --out plus a JSON run summary.  A flat key = value
config file (INI sections named after subcommands) supplies defaults;
explicit flags win.  Runs are deterministic: --threads only changes the
parallel chunking of associative reductions, never the result bytes.

Exit codes: 0 success, 1 invalid exponents or parameters, 2 resolution or
geometry failure, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
import time

import numpy as np

from . import dyadic, experiments, exponents, grid, spherical, weights
from .errors import (
    BoundaryError,
    DomainError,
    ExponentOrderError,
    GeometryError,
    InvalidDimensionError,
    ResolutionError,
    UndefinedExponentError,
)

_PARAM_ERRORS = (
    DomainError,
    ExponentOrderError,
    UndefinedExponentError,
    BoundaryError,
    InvalidDimensionError,
    ValueError,
)
_RESOLUTION_ERRORS = (ResolutionError, GeometryError)


def load_config(path: str) -> configparser.ConfigParser:
    """Read a flat key = value config file with one section per subcommand."""
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)
    return parser


def _merge_config(args: argparse.Namespace, parser_defaults: dict) -> argparse.Namespace:
    """Fill options left at None from the config file, then from defaults."""
    section = args.command
    config = load_config(args.config) if args.config else None
    for key, default in parser_defaults.items():
        if getattr(args, key, None) is not None:
            continue
        value = None
        if config is not None and config.has_option(section, key):
            value = config.get(section, key)
            if default is not None and not isinstance(default, str):
                value = type(default)(value)
        setattr(args, key, default if value is None else value)
    return args


def parse_fn(text: str) -> grid.TestFunctionSpec:
    """Parse "kind:key=value,..." into a test function spec."""
    kind, _, rest = text.partition(":")
    params = {}
    if rest:
        for item in rest.split(","):
            key, _, val = item.partition("=")
            params[key.strip()] = float(val)
    if kind == "ball":
        return grid.ball(params.get("rho", 1.0))
    if kind == "annulus":
        return grid.annulus(params.get("delta", 0.1), params.get("center_radius", 1.0))
    if kind == "knapp_box_r1":
        return grid.knapp_box_r1(params["delta"], params.get("C", 1.0))
    if kind == "knapp_box_r2":
        return grid.knapp_box_r2(params["delta"])
    if kind == "log_weight":
        return grid.log_weight()
    if kind == "power":
        return grid.power(params["b"])
    if kind == "constant":
        return grid.constant(params.get("value", 1.0))
    raise DomainError(f"unknown test function {text!r}")


def _floats(text: str) -> list[float]:
    return [float(v) for v in str(text).split(",") if v != ""]


def _summary(args, outputs: dict, started: float, extra: dict | None = None) -> str:
    payload = {
        "command": args.command,
        "threads": args.threads,
        "outputs": outputs,
        "wall_time_s": round(time.time() - started, 3),
    }
    if extra:
        payload.update(extra)
    path = os.path.join(args.out, f"{args.command}_summary.json")
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    return path


def _geometry(args) -> tuple[grid.Box, int]:
    return grid.Box.cube(float(args.half_side), int(args.n)), int(args.cells)


def cmd_avg(args) -> int:
    started = time.time()
    box, cells = _geometry(args)
    f = grid.sample(parse_fn(args.fn), box, cells)
    quad = spherical.sphere_quadrature(int(args.n), int(args.quad))
    out = spherical.spherical_average(f, float(args.radius), quad)
    csv_path = os.path.join(args.out, "avg.csv")
    raw_path = os.path.join(args.out, "avg.raw")
    grid.to_csv(out, csv_path)
    grid.to_raw(out, raw_path)
    _summary(args, {"csv": csv_path, "raw": raw_path}, started,
             {"max": f"{out.values.max():.12g}"})
    return 0


def cmd_maximal(args) -> int:
    started = time.time()
    box, cells = _geometry(args)
    f1 = grid.sample(parse_fn(args.fn1), box, cells)
    f2 = grid.sample(parse_fn(args.fn2), box, cells)
    quad = spherical.sphere_quadrature(int(args.n), int(args.quad))
    out = spherical.maximal(f1, f2, quad, kind=args.kind, threads=int(args.threads))
    csv_path = os.path.join(args.out, "maximal.csv")
    grid.to_csv(out, csv_path)
    _summary(args, {"csv": csv_path}, started, {"max": f"{out.values.max():.12g}"})
    return 0


def cmd_sparse(args) -> int:
    started = time.time()
    box, cells = _geometry(args)
    f1 = grid.sample(parse_fn(args.fn1), box, cells)
    f2 = grid.sample(parse_fn(args.fn2), box, cells)
    h = grid.sample(parse_fn(args.fnh), box, cells)
    exps = (float(args.r1), float(args.r2), float(args.t))
    lattice = dyadic.DyadicLattice(f1, int(args.depth))
    family = dyadic.build_sparse_family(f1, f2, h, lattice, exps)
    csv_path = os.path.join(args.out, "sparse_family.csv")
    dyadic.family_to_csv(family, lattice, csv_path)
    form = dyadic.sparse_form(family, f1, f2, h, exps, lattice)
    ok = dyadic.verify_sparsity(family, lattice)
    _summary(args, {"csv": csv_path}, started,
             {"sparse_form": f"{form:.12g}", "sparsity_verified": ok})
    return 0


def cmd_weights(args) -> int:
    started = time.time()
    w = weights.PowerWeight(float(args.b))
    family = weights.nested_centered(int(args.n))
    levels = [int(v) for v in _floats(args.levels)]
    scan = weights.characteristic_scan(
        lambda fam: weights.ap_characteristic_numeric(w, float(args.p), fam),
        family,
        levels,
    )
    csv_path = os.path.join(args.out, "weights_scan.csv")
    weights.scan_to_csv(levels, scan, csv_path)
    member = weights.ap_power_membership(args.b, args.p, int(args.n))
    _summary(args, {"csv": csv_path}, started, {
        "member": member,
        "stable": weights.scan_is_stable(scan),
        "final": f"{scan[-1]:.12g}",
    })
    return 0


def cmd_exponents(args) -> int:
    started = time.time()
    config = exponents.ExponentConfig(
        n=int(args.n),
        r1=1.0 / float(args.inv_r1),
        s1=1.0 / float(args.inv_s1),
        r2=1.0 / float(args.inv_r2),
        s2=1.0 / float(args.inv_s2),
    )
    report = exponents.necessary_report(args.kind, config)
    polygon = exponents.region_polygon(args.kind, int(args.n))
    interior = all(
        exponents.is_interior((float(ir), float(isv)), polygon)
        for ir, isv in ((args.inv_r1, args.inv_s1), (args.inv_r2, args.inv_s2))
    )
    payload = {
        "interior": interior,
        "t": f"{float(config.t):.12g}",
        "all_hold": report.all_hold,
        "conditions": {
            c.name: {"lhs": f"{float(c.lhs):.12g}", "bound": f"{float(c.bound):.12g}",
                     "strict": c.strict, "holds": c.holds}
            for c in report.conditions
        },
    }
    json_path = os.path.join(args.out, "exponents.json")
    with open(json_path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _summary(args, {"json": json_path}, started, {"all_hold": report.all_hold})
    return 0


def cmd_knapp(args) -> int:
    started = time.time()
    run = experiments.knapp_run(
        args.case,
        int(args.n),
        _floats(args.deltas),
        (float(args.r1), float(args.r2), float(args.t)),
    )
    csv_path = os.path.join(args.out, "knapp.csv")
    json_path = os.path.join(args.out, "knapp.json")
    experiments.run_to_csv(run, csv_path)
    experiments.run_to_json(run, json_path)
    _summary(args, {"csv": csv_path, "json": json_path}, started, {
        "pairing_slope": f"{run.pairing_slope:.12g}",
        "sparse_slope": f"{run.sparse_slope:.12g}",
        "consistent": experiments.slope_consistency(run),
    })
    return 0


def cmd_radial(args) -> int:
    started = time.time()
    run = experiments.radial_run(
        int(args.n),
        float(args.alpha),
        float(args.beta),
        _floats(args.scales),
        cells=int(args.cells),
        threads=int(args.threads),
    )
    csv_path = os.path.join(args.out, "radial.csv")
    with open(csv_path, "w") as fh:
        fh.write("scale,ratio\n")
        for s, r in zip(run.scales, run.ratios):
            fh.write(f"{s:.12g},{r:.12g}\n")
    _summary(args, {"csv": csv_path}, started, {
        "trend_slope": f"{run.trend_slope:.12g}",
        "in_range": run.in_range,
    })
    return 0


def cmd_report(args) -> int:
    started = time.time()
    payload = experiments.section5_report(
        int(args.n), args.delta, args.eps, _floats(args.alphas)
    )
    json_path = os.path.join(args.out, "section5.json")
    with open(json_path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _summary(args, {"json": json_path}, started)
    return 0


_DEFAULTS = {
    "avg": {"n": 2, "cells": 128, "half_side": 4.0, "fn": "ball:rho=1",
            "radius": 1.0, "quad": 512},
    "maximal": {"n": 2, "cells": 128, "half_side": 4.0, "fn1": "ball:rho=1",
                "fn2": "ball:rho=1", "quad": 256, "kind": "lacunary"},
    "sparse": {"n": 1, "cells": 128, "half_side": 0.5, "fn1": "ball:rho=0.25",
               "fn2": "constant:value=1", "fnh": "constant:value=1",
               "r1": 2.0, "r2": 2.0, "t": 2.0, "depth": 4},
    "weights": {"n": 2, "b": 1.0, "p": 2.0, "levels": "2,3,4,5,6,7,8"},
    "exponents": {"n": 2, "kind": "lacunary", "inv_r1": 0.45, "inv_s1": 0.65,
                  "inv_r2": 0.45, "inv_s2": 0.65},
    "knapp": {"n": 2, "case": "lac_annulus_ball",
              "deltas": "0.125,0.0625,0.03125,0.015625,0.0078125",
              "r1": 2.2222222222222223, "r2": 2.2222222222222223,
              "t": 3.3333333333333335},
    "radial": {"n": 2, "alpha": -0.9, "beta": -0.9, "cells": 256,
               "scales": "0.125,0.25,0.5,1,2,4,8"},
    "report": {"n": 2, "delta": "2", "eps": "1", "alphas": "0.5,1,1.5"},
}

_HANDLERS = {
    "avg": cmd_avg,
    "maximal": cmd_maximal,
    "sparse": cmd_sparse,
    "weights": cmd_weights,
    "exponents": cmd_exponents,
    "knapp": cmd_knapp,
    "radial": cmd_radial,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sphmax",
        description="Spherical averages, product maximal operators, sparse "
        "domination diagnostics, and weight-class scans on grids.",
    )
    parser.add_argument("--config", help="INI config file with per-subcommand sections")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                        help="worker threads for radius reductions")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, defaults in _DEFAULTS.items():
        p = sub.add_parser(name)
        for key in defaults:
            p.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _merge_config(args, _DEFAULTS[args.command])
        os.makedirs(args.out, exist_ok=True)
        return _HANDLERS[args.command](args)
    except _RESOLUTION_ERRORS as exc:
        print(f"resolution error: {exc}", file=sys.stderr)
        return 2
    except _PARAM_ERRORS as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
