"""``atlas`` command line interface."""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from .amoeba import (
    Window,
    amoeba_points,
    classify,
    complement_components,
    raster_to_json,
)
from .lattice import LatticePolytope, lattice_points
from .moment import Sampling, compactified_amoeba, wca
from .poly import CoefficientRangeError, ParseError, format_polynomial, parse_polynomial, polynomial_from_json
from .polyhedral import (
    DEFAULT_SCHEDULE,
    NotTriangulation,
    check_hypotheses,
    direct_complex,
    limit_complex_estimate,
    pi0_compare,
)
from .svg import CloudLayer, ComplexLayer, LatticeLayer, OutlineLayer, RasterLayer, render_panels, render_svg

COMMANDS = ("amoeba", "compactified", "wca", "complex", "classify", "check", "pi0")
EXIT_OK, EXIT_INPUT, EXIT_REFUSED = 0, 1, 2
CLOUD_THIN = 1e-3  # output clouds keep one point per box of this fraction of diam(N)


class InputError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    poly: str | None = None
    poly_file: str | None = None
    window: str = "auto"
    grid: int = 400
    complement_grid: int = 600
    thetas: int = 256
    slices: int = 400
    r: float = 1.0
    schedule: str = ",".join(str(r) for r in DEFAULT_SCHEDULE)
    eps: float | None = None
    seed: int = 0
    method: str | None = None  # complex: direct; pi0: direct when possible
    out: str | None = None
    svg: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        if (self.poly is None) == (self.poly_file is None):
            raise InputError("give exactly one of --poly and --poly-file")
        for name in ("grid", "complement_grid", "thetas", "slices"):
            if int(getattr(self, name)) <= 0:
                raise InputError(f"{name.replace('_', '-')} must be positive")
        if self.eps is not None and not float(self.eps) > 0:
            raise InputError("eps must be positive")
        if not float(self.r) > 0:
            raise InputError("r must be positive")
        if self.method not in (None, "direct", "limit"):
            raise InputError("method must be direct or limit")
        self.parsed_window()
        self.parsed_schedule()

    def parsed_window(self):
        if self.window == "auto":
            return None
        try:
            return Window.parse(self.window)
        except ValueError as err:
            raise InputError(f"bad window {self.window!r}: {err}") from None

    def parsed_schedule(self):
        try:
            values = [float(v) for v in str(self.schedule).split(",") if v.strip()]
        except ValueError:
            raise InputError(f"bad schedule {self.schedule!r}") from None
        if not values or any(b <= a for a, b in zip(values, values[1:])) or values[0] <= 0:
            raise InputError("schedule must be positive and increasing")
        return values

    def polynomial(self):
        try:
            if self.poly is not None:
                return parse_polynomial(self.poly)
            text = Path(self.poly_file).read_text()
            if text.lstrip().startswith("{"):
                return polynomial_from_json(json.loads(text))
            return parse_polynomial(text.strip())
        except (ParseError, ValueError, OSError) as err:
            raise InputError(f"cannot read polynomial: {err}") from None

    def sampling(self):
        return Sampling(window=self.parsed_window(), thetas=int(self.thetas), slices=int(self.slices))


def threads_cap():
    """Value of ATLAS_THREADS; computations here run in one thread, which
    respects any positive cap."""
    raw = os.environ.get("ATLAS_THREADS")
    if raw is None:
        return None
    try:
        value = int(raw)
    except ValueError:
        raise InputError(f"ATLAS_THREADS must be a positive integer, got {raw!r}") from None
    if value <= 0:
        raise InputError("ATLAS_THREADS must be a positive integer")
    return value


def _newton_layers(f):
    N = LatticePolytope.from_points(f.support)
    return [OutlineLayer(N.vertices), LatticeLayer(tuple(lattice_points(N)))]


def _thin(cloud, f):
    return cloud.thin(CLOUD_THIN * LatticePolytope.from_points(f.support).diameter())


def _run_amoeba(cfg, f):
    raster = amoeba_points(f, cfg.parsed_window(), (cfg.grid, cfg.grid), cfg.thetas)
    comps = complement_components(raster, seed=cfg.seed, f=f)
    payload = {
        "raster": raster_to_json(raster),
        "bridged_cells": raster.bridged,
        "components": [
            {
                "representative": list(c.representative),
                "order": None if c.order is None else list(c.order),
                "order_status": c.order_status,
                "bounded": c.bounded,
                "cells": c.size,
            }
            for c in comps
        ],
    }
    summary = f"{len(comps)} complement components"
    return payload, summary, lambda: render_svg([RasterLayer(raster)])


def _run_cloud(cfg, f, kind):
    cloud = compactified_amoeba(f, cfg.sampling()) if kind == "compactified" else wca(f, float(cfg.r), cfg.sampling())
    cloud = _thin(cloud, f)
    payload = {"cloud": cloud.to_json()}
    if kind == "wca":
        payload["r"] = float(cfg.r)
    return payload, f"{len(cloud)} points", lambda: render_svg([CloudLayer(cloud), *_newton_layers(f)])


def _run_complex(cfg, f):
    if cfg.method in (None, "direct"):
        P = direct_complex(f)
        payload = {"method": "direct", "complex": P.to_json()}
        layers = [ComplexLayer(P)] if f.n == 2 else None
        summary = f"{len(P.cells)} cells"
    else:
        cloud, report = limit_complex_estimate(f, cfg.parsed_schedule(), cfg.eps, cfg.sampling())
        payload = {"method": "limit", "cloud": cloud.to_json(), "convergence": report.to_json()}
        layers = [CloudLayer(cloud)]
        summary = f"converged at r={report.converged_at}" if report.converged else "not converged"
    render = None if layers is None else (lambda: render_svg([*layers, *_newton_layers(f)]))
    return payload, summary, render


def _run_classify(cfg, f):
    raster = amoeba_points(f, cfg.parsed_window(), (cfg.grid, cfg.grid), cfg.thetas)
    result = classify(f, thetas=cfg.thetas, seed=cfg.seed, raster=raster)
    summary = f"{result.verdict}: {len(result.realized)} of {len(result.lattice)} orders realized"
    if result.missing:
        summary += "; missing " + " ".join(f"({a},{b})" for a, b in result.missing)
    return result.to_json(), summary, lambda: render_svg([RasterLayer(raster)])


def _run_check(cfg, f):
    report = check_hypotheses(f)
    summary = "eligible" if report.eligible else "not eligible: " + "; ".join(report.failed())
    return report.to_json(), summary, None


def _run_pi0(cfg, f):
    method = cfg.method or "auto"
    report = pi0_compare(
        f, cfg.parsed_window(), (cfg.grid, cfg.grid), cfg.thetas, method, cfg.complement_grid, cfg.seed, cfg.sampling()
    )

    def render():
        raster = amoeba_points(f, cfg.parsed_window(), (cfg.grid, cfg.grid), cfg.thetas)
        cloud = _thin(compactified_amoeba(f, cfg.sampling()), f)
        if report.method == "direct":
            third = ComplexLayer(direct_complex(f))
        else:
            third = CloudLayer(limit_complex_estimate(f, cfg.parsed_schedule(), cfg.eps, cfg.sampling())[0])
        return render_panels(
            [[RasterLayer(raster)], [CloudLayer(cloud), *_newton_layers(f)], [third, *_newton_layers(f)]],
            titles=["affine amoeba", "compactified amoeba", "polyhedral complex"],
        )

    summary = f"{report.verdict}: {report.amoeba_count} amoeba components, {report.complex_count} complex components"
    return report.to_json(), summary, render


def run(cfg):
    """Execute one command; returns the exit status."""
    threads_cap()
    f = cfg.polynomial()
    if cfg.command in ("amoeba", "compactified", "wca", "classify", "pi0") and f.n != 2:
        raise InputError(f"{cfg.command} needs a polynomial in two variables")
    handlers = {
        "amoeba": lambda: _run_amoeba(cfg, f),
        "compactified": lambda: _run_cloud(cfg, f, "compactified"),
        "wca": lambda: _run_cloud(cfg, f, "wca"),
        "complex": lambda: _run_complex(cfg, f),
        "classify": lambda: _run_classify(cfg, f),
        "check": lambda: _run_check(cfg, f),
        "pi0": lambda: _run_pi0(cfg, f),
    }
    payload, summary, render = handlers[cfg.command]()
    document = {"command": cfg.command, "polynomial": format_polynomial(f), "seed": cfg.seed, **payload}
    text = json.dumps(document, separators=(",", ":")) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text)
        print(summary)
    else:
        sys.stdout.write(text)
    if cfg.svg:
        if render is None:
            print(f"no figure for {cfg.command}", file=sys.stderr)
        else:
            Path(cfg.svg).write_text(render())
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="atlas", description="Amoebas, compactified amoebas and their polyhedral limits.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="JSON file with default values for the flags below")
    parser.add_argument("--poly", help='polynomial text, e.g. "1 + x + y"')
    parser.add_argument("--poly-file", help="file holding polynomial text or JSON")
    parser.add_argument("--window", help="x0,x1,y0,y1 in log coordinates, or auto")
    parser.add_argument("--grid", type=int, help="raster resolution N (N x N cells)")
    parser.add_argument("--complement-grid", type=int, help="grid for complements inside the Newton polygon")
    parser.add_argument("--thetas", type=int, help="argument samples per fiber")
    parser.add_argument("--slices", type=int, help="fibers per axis for point clouds")
    parser.add_argument("--r", type=float, help="Hadamard exponent for wca")
    parser.add_argument("--schedule", help="increasing Hadamard exponents, e.g. 1,2,4,8")
    parser.add_argument("--eps", type=float, help="Hausdorff convergence threshold")
    parser.add_argument("--seed", type=int, help="seed for random fiber arguments")
    parser.add_argument("--out", help="write JSON here instead of stdout")
    parser.add_argument("--svg", help="write a figure here")
    parser.add_argument("--method", choices=("direct", "limit"), help="how to build the complex")
    return parser


def build_config(args):
    """Merge defaults, the optional JSON config file and command-line flags,
    later sources winning."""
    values = {}
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as err:
            raise InputError(f"cannot read config: {err}") from None
        if not isinstance(loaded, dict):
            raise InputError("config file must hold a JSON object")
        known = {f.name for f in fields(RunConfig)} - {"command"}
        unknown = sorted(set(k.replace("-", "_") for k in loaded) - known)
        if unknown:
            raise InputError(f"unknown config keys: {', '.join(unknown)}")
        values.update({k.replace("-", "_"): v for k, v in loaded.items()})
    if args.poly is not None or args.poly_file is not None:
        # a polynomial on the command line replaces the configured one
        values.pop("poly", None)
        values.pop("poly_file", None)
    for name, value in vars(args).items():
        if name not in ("command", "config") and value is not None:
            values[name] = value
    if isinstance(values.get("schedule"), list):
        values["schedule"] = ",".join(str(v) for v in values["schedule"])
    try:
        return RunConfig(command=args.command, **values)
    except TypeError as err:
        raise InputError(str(err)) from None


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        return run(cfg)
    except InputError as err:
        print(f"atlas: input error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except (NotTriangulation, CoefficientRangeError) as err:
        print(f"atlas: refused: {err}", file=sys.stderr)
        return EXIT_REFUSED
    except ValueError as err:
        print(f"atlas: input error: {err}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
