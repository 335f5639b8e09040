import argparse

import numpy as np

from fracfem.core.exceptions import ConfigError, FracFemError, InvariantViolationError
from fracfem.core.models import MlParams
from fracfem.core.special_functions import mittag_leffler_array
from fracfem.core.usecases import build_reference_e, export_plotdata, ml_grid, run_experiment, write_tables
from fracfem.harness import storage
from fracfem.harness.config import ExperimentConfig, apply_overrides, load_config, parse_floats, parse_levels

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3


def _add_experiment_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, help="JSON experiment file")
    p.add_argument("--example", default=None, help="a, b, c1, c2, c3, d or e")
    p.add_argument("--method", default=None, help="galerkin, lumped or l1")
    p.add_argument("--alpha", default=None, help="comma-separated fractional orders")
    p.add_argument("--t", default=None, help="comma-separated times")
    p.add_argument("--levels", default=None, help="lo:hi, h = 2^-k")
    p.add_argument("--projection", default=None, help="ritz, l2, dirac or interpolation")
    p.add_argument("--format", dest="output_format", default=None, help="csv or markdown")
    p.add_argument("--out", dest="output_path", default=None, help="output directory")
    p.add_argument("--tau", dest="l1_tau", default=None, type=float, help="time step for method l1")
    p.add_argument("--gauss-points", dest="gauss_points", default=None, type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracfem", description="Time-fractional diffusion FEM experiments")
    subparsers = parser.add_subparsers(dest="command")

    p_table = subparsers.add_parser("table", help="convergence tables")
    _add_experiment_args(p_table)

    p_plot = subparsers.add_parser("plotdata", help="log2(1/h), log10(error) pairs per curve")
    _add_experiment_args(p_plot)

    p_ml = subparsers.add_parser("ml", help="Mittag-Leffler function values")
    p_ml.add_argument("--alpha", type=float, required=True)
    p_ml.add_argument("--beta", type=float, default=1.0)
    p_ml.add_argument("--z", default=None, help="comma-separated arguments z <= 0")
    p_ml.add_argument("--grid", default=None, help="zmin:zmax:n")

    p_ref = subparsers.add_parser("reference-e", help="build the cached fine reference for example e")
    p_ref.add_argument("--force", action="store_true")
    p_ref.add_argument("--alpha", type=float, default=None)
    p_ref.add_argument("--t", dest="t_end", type=float, default=None)
    p_ref.add_argument("--cells", dest="n_cells", type=int, default=None)
    p_ref.add_argument("--tau", type=float, default=None)
    p_ref.add_argument("--scheme", choices=("l1", "spectral"), default="l1", help="L1 time stepping or exact in time")

    return parser


def _experiment_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else ExperimentConfig()
    cfg = apply_overrides(
        cfg,
        example=args.example,
        method=args.method,
        alphas=parse_floats("alphas", args.alpha) if args.alpha is not None else None,
        times=parse_floats("times", args.t) if args.t is not None else None,
        levels=parse_levels(args.levels) if args.levels is not None else None,
        projection=args.projection,
        output_format=args.output_format,
        output_path=args.output_path,
        l1_tau=args.l1_tau,
        gauss_points=args.gauss_points,
    )
    cfg.validate()
    return cfg


def _ml_values(args) -> str:
    if args.z is None and args.grid is None:
        raise ConfigError("z", "give --z or --grid")
    zs: list[float] = []
    if args.z is not None:
        zs.extend(parse_floats("z", args.z))
    if args.grid is not None:
        zs.extend(ml_grid(args.grid))
    values = mittag_leffler_array(MlParams(args.alpha, args.beta), np.array(zs, dtype=float))
    lines = ["z,value"]
    lines.extend(f"{z:.17g},{v:.17g}" for z, v in zip(zs, values))
    return "\n".join(lines)


def execute(args) -> tuple[int, str]:
    try:
        if args.command == "table":
            cfg = _experiment_config(args)
            tables = run_experiment(cfg)
            write_tables(cfg, tables)
            return EXIT_OK, "\n".join(storage.render(t, cfg.output_format) for t in tables).rstrip("\n")

        if args.command == "plotdata":
            cfg = _experiment_config(args)
            tables, _ = export_plotdata(cfg)
            return EXIT_OK, storage.format_plotdata(tables).rstrip("\n")

        if args.command == "ml":
            return EXIT_OK, _ml_values(args)

        if args.command == "reference-e":
            ref = build_reference_e(n_cells=args.n_cells, tau=args.tau, t_end=args.t_end, alpha=args.alpha, force=args.force, scheme=args.scheme)
            return EXIT_OK, f"reference ready: {ref.mesh.n_cells} cells, t={ref.t:g}, u(1/2)={ref.evaluate(0.5, ref.t):.17g}"

        return EXIT_CONFIG, "usage: fracfem {table,plotdata,ml,reference-e} ..."
    except InvariantViolationError as e:
        return EXIT_INVARIANT, f"error: {e}"
    except (FracFemError, OSError) as e:
        return EXIT_CONFIG, f"error: {e}"
