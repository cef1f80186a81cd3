"""Command-line surface.

Verbs: synth (generate a dataset), run (full pipeline), ahp (evaluate a
pairwise matrix file), sensitivity (leave-one-out table), render (class grid
to PNG), serve (HTTP service). Exit codes: 0 success, 2 validation failure,
1 runtime error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import ahp, mcda, pipeline, synth
from .ahp import AhpError
from .config import ConfigError
from .grid import GridError, read_grid_file
from .kriging import KrigingError
from .mcda import McdaError
from .reclass import RuleError

VALIDATION_ERRORS = (ConfigError, AhpError, GridError, RuleError, McdaError, KrigingError)


def _cmd_synth(args) -> int:
    spec = synth.SynthSpec(seed=args.seed, nrows=args.rows, ncols=args.cols,
                           cellsize=args.cellsize,
                           constraint_fraction=args.constraint_fraction)
    out = synth.generate(spec, args.out)
    print(f"dataset written to {out}")
    return 0


def _cmd_run(args) -> int:
    result = pipeline.run(args.config, args.out, override_cr=args.override_cr)
    a = result.areas
    print(f"scored area: {a.total_km2:.2f} km2, exploitable: {a.total_exploitable_km2:.2f} km2")
    for k in sorted(a.full_km2):
        print(f"  class {k} ({mcda.CLASS_LABELS[k]}): "
              f"full {a.full_km2[k]:.2f} km2, exploitable {a.exploitable_km2[k]:.2f} km2")
    if result.capacity_mw_per_km2 is not None:
        print(f"best-class capacity density: {result.capacity_mw_per_km2:.2f} MW/km2")
    print(f"artifacts in {args.out}")
    return 0


def _cmd_ahp(args) -> int:
    m = ahp.read_matrix_file(args.matrix)
    w = ahp.priority_vector(m)
    report = ahp.consistency(m, w)
    print("weights: " + " ".join(f"{x:.6f}" for x in w))
    print(f"lambda_max: {report.lambda_max:.6f}")
    print(f"CI: {report.ci:.6f}  RI: {report.ri:.2f}  CR: {report.cr:.6f}")
    print("consistent (CR <= 0.05): " + ("yes" if report.consistent else "no"))
    return 0 if report.consistent else 2


def _cmd_sensitivity(args) -> int:
    scenario = pipeline.load_scenario(args.config, override_cr=args.override_cr)
    baseline = mcda.evaluate(scenario)
    rows = mcda.sensitivity_table(scenario, baseline)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        mcda.write_sensitivity_table(rows, args.out, len(scenario.class_breaks) - 1)
        print(f"sensitivity table written to {args.out}")
    for row in rows:
        cells = ", ".join(
            f"class {k}: " + ("n/a" if v is None else f"{v:+.2f}%")
            for k, v in sorted(row.delta_pct.items()))
        print(f"excluding {row.excluded}: {cells}")
    return 0


def _cmd_render(args) -> int:
    classes = read_grid_file(args.classes)
    png = pipeline.render_class_map(classes)
    Path(args.out).write_bytes(png)
    print(f"map written to {args.out}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    host, _, port = args.bind.partition(":")
    app = create_app(Path(args.data_root))
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="solarsite",
                                description="Raster multi-criteria solar site suitability")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("synth", help="generate a deterministic synthetic dataset")
    sp.add_argument("--out", required=True)
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--rows", type=int, default=128)
    sp.add_argument("--cols", type=int, default=128)
    sp.add_argument("--cellsize", type=float, default=1000.0)
    sp.add_argument("--constraint-fraction", type=float, default=0.6695)
    sp.set_defaults(func=_cmd_synth)

    rp = sub.add_parser("run", help="run the full suitability pipeline")
    rp.add_argument("config")
    rp.add_argument("--out", required=True)
    rp.add_argument("--override-cr", action="store_true",
                    help="accept a pairwise matrix even when CR > 0.05")
    rp.set_defaults(func=_cmd_run)

    ap = sub.add_parser("ahp", help="evaluate a pairwise comparison matrix file")
    ap.add_argument("matrix")
    ap.set_defaults(func=_cmd_ahp)

    cp = sub.add_parser("sensitivity", help="leave-one-criterion-out table")
    cp.add_argument("config")
    cp.add_argument("--out")
    cp.add_argument("--override-cr", action="store_true")
    cp.set_defaults(func=_cmd_sensitivity)

    gp = sub.add_parser("render", help="render a class grid to a PNG map")
    gp.add_argument("classes")
    gp.add_argument("--out", required=True)
    gp.set_defaults(func=_cmd_render)

    vp = sub.add_parser("serve", help="start the HTTP service")
    vp.add_argument("--bind", default="127.0.0.1:8000")
    vp.add_argument("--data-root", required=True)
    vp.set_defaults(func=_cmd_serve)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except VALIDATION_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
