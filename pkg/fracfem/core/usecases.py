from __future__ import annotations

import logging
import math
from pathlib import Path

from fracfem.core.analysis import ConvergenceTable, build_table, l1_step_count
from fracfem.core.exact_solutions import FourierSeriesSolution, ReferenceSolution, example_problem
from fracfem.core.exceptions import ConfigError, ReferenceCacheError
from fracfem.core.fem import assemble_lumped_mass, assemble_stiffness, eval_fe, lumped_l2_project
from fracfem.core.models import Mesh1D
from fracfem.core.spectral import build_eigensystem, homogeneous_solve
from fracfem.core.timestep_l1 import l1_solve
from fracfem.decorators import log_action
from fracfem.harness import storage
from fracfem.harness.config import ExperimentConfig
from fracfem.harness.runner import TableRunner
from fracfem.infra.settings import SettingsLoader

SETTINGS = SettingsLoader()

logger = logging.getLogger("fracfem.usecases")


def _series_solution(example: str, alpha: float) -> FourierSeriesSolution:
    data, _ = example_problem(example)
    return FourierSeriesSolution(
        data,
        alpha,
        tail_tol=SETTINGS.get("TAIL_TOL"),
        deriv_tail_tol=SETTINGS.get("DERIV_TAIL_TOL"),
        max_modes=SETTINGS.get("MAX_MODES"),
    )


REFERENCE_SCHEMES = ("l1", "spectral")


@log_action("BUILD_REFERENCE_E")
def build_reference_e(
    n_cells: int | None = None,
    tau: float | None = None,
    t_end: float | None = None,
    alpha: float | None = None,
    force: bool = False,
    scheme: str = "l1",
) -> ReferenceSolution:
    """Fine lumped-mass solution of example e, cached on disk.

    `l1` steps with `tau` and logs its gap to the eigenexpansion on the same mesh. `spectral` is that
    eigenexpansion itself, exact in time, and is the reference for the semidiscrete methods.
    A cache hit is returned as is; `force` rebuilds.
    """
    if scheme not in REFERENCE_SCHEMES:
        raise ConfigError("scheme", f"unknown reference scheme '{scheme}', expected one of {', '.join(REFERENCE_SCHEMES)}")
    n_cells = int(n_cells if n_cells is not None else SETTINGS.get("REFERENCE_CELLS"))
    tau = float(tau if tau is not None else SETTINGS.get("REFERENCE_TAU"))
    t_end = float(t_end if t_end is not None else SETTINGS.get("REFERENCE_T_END"))
    alpha = float(alpha if alpha is not None else SETTINGS.get("REFERENCE_ALPHA"))

    mesh = Mesh1D(n_cells)
    data, k = example_problem("e")
    stepped = scheme == "l1"
    n_steps = l1_step_count(t_end, tau) if stepped else 0
    path = storage.reference_path(SETTINGS.get("CACHE_DIR"), alpha, n_cells, tau if stepped else None, t_end)

    if path.exists() and not force:
        values = storage.read_reference(path)
        if values.mesh != mesh:
            raise ReferenceCacheError(path, f"cached mesh has {values.mesh.n_cells} cells, expected {n_cells}")
        logger.info(f"reference cache hit path={path}")
        return ReferenceSolution(mesh, values, t_end, data.l2_norm)

    with storage.cache_lock(path):
        v_h = lumped_l2_project(mesh, data.load_vector(mesh))
        if t_end == 0.0:
            values = v_h
        elif not stepped:
            logger.info(f"reference build scheme=spectral n_cells={n_cells} alpha={alpha}")
            values = homogeneous_solve(build_eigensystem(mesh, k, "lumped"), v_h, alpha, t_end)
        else:
            logger.info(f"reference build scheme=l1 n_cells={n_cells} tau={tau:g} steps={n_steps} alpha={alpha}")
            traj = l1_solve(assemble_stiffness(mesh, k), assemble_lumped_mass(mesh), alpha, tau, v_h, n_steps)
            values = traj.final(mesh)
            spectral = homogeneous_solve(build_eigensystem(mesh, k, "lumped"), v_h, alpha, t_end)
            gap = (values - spectral).norm_inf()
            mid_gap = abs(eval_fe(mesh, values, 0.5) - eval_fe(mesh, spectral, 0.5))
            logger.info(f"reference vs eigenexpansion max_gap={gap:.3e} gap_at_half={mid_gap:.3e}")
        storage.write_reference(path, values)
    logger.info(f"reference written path={path}")
    return ReferenceSolution(mesh, values, t_end, data.l2_norm)


def _l1_tau(cfg: ExperimentConfig) -> float | None:
    if cfg.method != "l1":
        return None
    if cfg.l1_tau is not None:
        return cfg.l1_tau
    # example e steps with the reference step so the temporal errors cancel
    return float(SETTINGS.get("REFERENCE_TAU" if cfg.example == "e" else "L1_TAU"))


@log_action("RUN_EXPERIMENT", verbose=True)
def run_experiment(cfg: ExperimentConfig) -> list[ConvergenceTable]:
    cfg.validate()
    tau = _l1_tau(cfg)
    if cfg.example == "e":
        ref_cells = int(SETTINGS.get("REFERENCE_CELLS"))
        for level in cfg.levels:
            if ref_cells % (2**level):
                raise ConfigError("levels", f"level {level} does not divide the {ref_cells}-cell reference mesh")

    def build(alpha: float, t: float) -> ConvergenceTable:
        if cfg.example == "e":
            exact = build_reference_e(alpha=alpha, t_end=t, scheme="l1" if cfg.method == "l1" else "spectral")
        else:
            exact = _series_solution(cfg.example, alpha)
        return build_table(cfg.example, cfg.method, alpha, t, cfg.levels, cfg.projection, exact, tau, cfg.gauss_points)

    return TableRunner(build, int(SETTINGS.get("MAX_WORKERS"))).run(cfg.pairs())


def output_dir(cfg: ExperimentConfig) -> Path:
    return Path(cfg.output_path) if cfg.output_path else Path(SETTINGS.get("OUT_DIR"))


def write_tables(cfg: ExperimentConfig, tables: list[ConvergenceTable]) -> list[Path]:
    out = output_dir(cfg)
    return [storage.emit(table, cfg.output_format, out / storage.table_filename(table, cfg.output_format)) for table in tables]


@log_action("EXPORT_PLOTDATA")
def export_plotdata(cfg: ExperimentConfig) -> tuple[list[ConvergenceTable], Path]:
    tables = run_experiment(cfg)
    name = f"{cfg.example}_{cfg.method}_plotdata.csv"
    return tables, storage.emit_plotdata(tables, output_dir(cfg) / name)


def ml_grid(spec: str) -> list[float]:
    """Points of a "zmin:zmax:n" grid, ends included."""
    try:
        lo, hi, n = spec.split(":")
        lo_f, hi_f, n_i = float(lo), float(hi), int(n)
    except ValueError as e:
        raise ConfigError("grid", f"expected 'zmin:zmax:n', got '{spec}'") from e
    if n_i < 1 or not (math.isfinite(lo_f) and math.isfinite(hi_f)):
        raise ConfigError("grid", f"invalid grid '{spec}'")
    if n_i == 1:
        return [lo_f]
    step = (hi_f - lo_f) / (n_i - 1)
    return [lo_f + i * step for i in range(n_i)]
