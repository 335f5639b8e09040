"""Error norms, convergence tables and observed rates."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np
from numpy.polynomial.legendre import leggauss

from fracfem.core.exact_solutions import EXAMPLES, FourierSeriesSolution, InitialData, example_problem
from fracfem.core.exceptions import DomainError, MeshMismatchError
from fracfem.core.fem import (
    assemble_lumped_mass,
    assemble_stiffness,
    dirac_load,
    eval_fe,
    eval_fe_deriv,
    method_l2_project,
    ritz_project,
)
from fracfem.core.models import CoefficientField, Mesh1D, MlParams, NodalVector, ProblemSpec
from fracfem.core.special_functions import mittag_leffler_regions
from fracfem.core.spectral import build_eigensystem, homogeneous_solve
from fracfem.core.timestep_l1 import l1_solve

logger = logging.getLogger("fracfem.analysis")

METHODS = ("galerkin", "lumped", "l1")
PROJECTIONS = ("ritz", "l2", "dirac", "interpolation")
RECOVERIES = ("averaged", "midpoint")
EXPECTED_RATES = {"l2": 2.0, "h1": 1.0, "gh": 2.0}
GAUSS_POINTS = 5
MIN_LEVEL = 2
MAX_LEVEL = 12


class ExactSolution(Protocol):
    normalized: bool
    initial_norm: float
    min_cells: int

    def evaluate(self, x, t: float): ...

    def evaluate_deriv(self, x, t: float): ...

    def deriv_tail_bound(self, t: float) -> float: ...


@dataclass(frozen=True)
class ErrorRecord:
    h: float
    alpha: float
    t: float
    l2_error: float
    h1_error: float
    gh_error: float | None = None

    def __post_init__(self) -> None:
        for name in ("l2_error", "h1_error", "gh_error"):
            value = getattr(self, name)
            if value is None:
                continue
            if not math.isfinite(value) or value < 0.0:
                raise DomainError(name, value, "errors must be finite and non-negative")
        if not 0.0 < self.h < 1.0:
            raise DomainError("h", self.h, "mesh size must lie in (0, 1)")


def _ratios(values: list[float | None]) -> list[float | None]:
    out: list[float | None] = []
    for a, b in zip(values[:-1], values[1:]):
        out.append(a / b if a is not None and b is not None and b > 0.0 else None)
    return out


@dataclass(frozen=True)
class ConvergenceTable:
    """Errors of one (example, method, alpha, t) run, rows ordered by halving h."""

    example: str
    method: str
    alpha: float
    t: float
    projection: str
    rows: tuple[ErrorRecord, ...] = ()
    normalized: bool = True
    expected_rates: dict[str, float] = field(default_factory=lambda: dict(EXPECTED_RATES))
    h1_floor: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "rows", tuple(self.rows))
        for row in self.rows:
            if row.alpha != self.alpha or row.t != self.t:
                raise DomainError("rows", (row.alpha, row.t), "rows must share alpha and t with the table")
        hs = [row.h for row in self.rows]
        if any(b >= a for a, b in zip(hs[:-1], hs[1:])):
            raise DomainError("rows", hs, "rows must be ordered by decreasing h")

    @property
    def l2_ratios(self) -> list[float | None]:
        return _ratios([r.l2_error for r in self.rows])

    @property
    def h1_ratios(self) -> list[float | None]:
        return _ratios([r.h1_error for r in self.rows])

    @property
    def gh_ratios(self) -> list[float | None]:
        return _ratios([r.gh_error for r in self.rows])

    @property
    def log_factors(self) -> list[float]:
        """l_h = |ln h| per row; reported, never fitted."""
        return [abs(math.log(r.h)) for r in self.rows]

    @property
    def has_gh(self) -> bool:
        return any(r.gh_error is not None for r in self.rows)


def _check_vector(mesh: Mesh1D, u_h: NodalVector) -> None:
    if u_h.mesh != mesh:
        raise MeshMismatchError(mesh.n_interior, u_h.mesh.n_interior, "finite element function")


def _quadrature(mesh: Mesh1D, sol: ExactSolution, gauss_points: int) -> tuple[np.ndarray, np.ndarray]:
    n_q = max(mesh.n_cells, int(sol.min_cells))
    if n_q % mesh.n_cells:
        raise MeshMismatchError(mesh.n_cells, n_q, "error quadrature partition")
    xi, w = leggauss(int(gauss_points))
    hq = 1.0 / n_q
    left = np.arange(n_q, dtype=float) * hq
    pts = left[:, None] + 0.5 * hq * (xi + 1.0)[None, :]
    wts = np.broadcast_to(0.5 * hq * w[None, :], pts.shape)
    return pts, wts


def _scale(sol: ExactSolution) -> float:
    return float(sol.initial_norm) if sol.normalized else 1.0


def l2_error(mesh: Mesh1D, u_h: NodalVector, sol: ExactSolution, t: float, gauss_points: int = GAUSS_POINTS) -> float:
    _check_vector(mesh, u_h)
    pts, wts = _quadrature(mesh, sol, gauss_points)
    diff = np.asarray(sol.evaluate(pts, t)) - eval_fe(mesh, u_h, pts)
    return math.sqrt(float(np.sum(wts * diff * diff))) / _scale(sol)


def h1_error(mesh: Mesh1D, u_h: NodalVector, sol: ExactSolution, t: float, gauss_points: int = GAUSS_POINTS) -> float:
    _check_vector(mesh, u_h)
    pts, wts = _quadrature(mesh, sol, gauss_points)
    diff = np.asarray(sol.evaluate_deriv(pts, t)) - eval_fe_deriv(mesh, u_h, pts)
    return math.sqrt(float(np.sum(wts * diff * diff))) / _scale(sol)


def recovered_gradient(mesh: Mesh1D, u_h: NodalVector) -> np.ndarray:
    """Averaged gradient G_h u_h at all nodes, boundary included.

    Interior nodes take the mean of the two neighbouring element slopes. The end values extrapolate the two
    nearest midpoint slopes linearly, so G_h reproduces the gradient of any quadratic exactly.
    """
    _check_vector(mesh, u_h)
    slopes = np.diff(u_h.with_boundary()) / mesh.h
    g = np.empty(mesh.n_cells + 1)
    g[1:-1] = 0.5 * (slopes[:-1] + slopes[1:])
    g[0] = 1.5 * slopes[0] - 0.5 * slopes[1]
    g[-1] = 1.5 * slopes[-1] - 0.5 * slopes[-2]
    return g


def recovered_gradient_error(
    mesh: Mesh1D,
    u_h: NodalVector,
    sol: ExactSolution,
    t: float,
    recovery: str = "averaged",
    gauss_points: int = GAUSS_POINTS,
) -> float:
    """Normalized |u' - G_h u_h|.

    `averaged`: L2 norm of the difference with the piecewise linear averaged gradient, by Gauss quadrature.
    `midpoint`: discrete norm over the element midpoints, where the plain slope is superconvergent.
    """
    _check_vector(mesh, u_h)
    if recovery == "midpoint":
        m = mesh.midpoints
        diff = np.asarray(sol.evaluate_deriv(m, t)) - eval_fe_deriv(mesh, u_h, m)
        return math.sqrt(mesh.h * float(np.sum(diff * diff))) / _scale(sol)
    if recovery != "averaged":
        raise DomainError("recovery", recovery, f"expected one of {RECOVERIES}")
    pts, wts = _quadrature(mesh, sol, gauss_points)
    diff = np.asarray(sol.evaluate_deriv(pts, t)) - np.interp(pts, mesh.all_nodes, recovered_gradient(mesh, u_h))
    return math.sqrt(float(np.sum(wts * diff * diff))) / _scale(sol)


def observed_rate(errors) -> list[float]:
    values = [float(e) for e in errors]
    if len(values) < 2:
        raise DomainError("errors", len(values), "need at least two errors")
    if any(not math.isfinite(e) or e <= 0.0 for e in values):
        raise DomainError("errors", values, "errors must be positive")
    return [math.log2(a / b) for a, b in zip(values[:-1], values[1:])]


def default_projection(example: str) -> str:
    if example not in EXAMPLES:
        raise DomainError("example", example, f"expected one of {tuple(EXAMPLES)}")
    if example in ("a", "b"):
        return "ritz"
    return "dirac" if example == "d" else "l2"


def method_mass(method: str) -> str:
    if method not in METHODS:
        raise DomainError("method", method, f"expected one of {METHODS}")
    return "consistent" if method == "galerkin" else "lumped"


def initial_vector(mesh: Mesh1D, data: InitialData, k: CoefficientField, projection: str, mass: str = "lumped") -> NodalVector:
    """v_h for a projection; Dirac data pair only with the dirac projection.

    `l2` projects in the inner product of the method (`mass`); a point mass always uses the consistent mass.
    """
    if projection not in PROJECTIONS:
        raise DomainError("projection", projection, f"expected one of {PROJECTIONS}")
    if data.is_dirac != (projection == "dirac"):
        raise DomainError("projection", projection, f"not compatible with {data.kind} data")
    if projection == "dirac":
        return dirac_load(mesh, data.dirac_point)
    if projection == "ritz":
        if not data.in_h10:
            raise DomainError("projection", projection, f"{data.kind} data is not in H^1_0")
        return ritz_project(mesh, k, data.energy_load(mesh, k))
    if projection == "l2":
        return method_l2_project(mesh, data.load_vector(mesh), mass)
    return data.interpolant(mesh)


def l1_step_count(t: float, tau: float) -> int:
    if not tau or tau <= 0.0:
        raise DomainError("tau", tau, "time step must be positive")
    steps = t / tau
    n = round(steps)
    if abs(steps - n) > 1e-9 * max(1.0, steps):
        raise DomainError("tau", tau, f"t={t:g} is not an integer multiple of the step")
    return int(n)


def solve_level(
    problem: ProblemSpec, mesh: Mesh1D, method: str, projection: str, tau: float | None = None
) -> tuple[NodalVector, dict[str, object]]:
    """u_h(t_end) on one mesh plus diagnostics for the table log."""
    mass = method_mass(method)
    k = problem.coefficient
    v_h = initial_vector(mesh, problem.data, k, projection, mass)
    if method == "l1":
        n_steps = l1_step_count(problem.t_end, tau)
        traj = l1_solve(assemble_stiffness(mesh, k), assemble_lumped_mass(mesh), problem.alpha, tau, v_h, n_steps)
        return traj.final(mesh), {"steps": n_steps}
    eig = build_eigensystem(mesh, k, mass)
    u_h = homogeneous_solve(eig, v_h, problem.alpha, problem.t_end)
    regions = mittag_leffler_regions(MlParams(problem.alpha), eig.z_values(problem.alpha, problem.t_end))
    return u_h, {"max_residual": eig.max_residual(), "ml_regions": regions}


def build_table(
    example: str,
    method: str,
    alpha: float,
    t: float,
    levels,
    projection: str | None = None,
    exact: ExactSolution | None = None,
    tau: float | None = None,
    gauss_points: int = GAUSS_POINTS,
    recovery: str = "averaged",
) -> ConvergenceTable:
    """One error row per level k (h = 2^-k).

    Example e has no series solution; pass its fine-mesh reference as `exact`. `h1_floor` is the normalized
    bound on the truncated derivative tail of `exact`; rows less than ten times above it are logged.
    """
    data, k = example_problem(example)
    projection = projection or default_projection(example)
    problem = ProblemSpec(float(alpha), k, data, float(t))
    if exact is None:
        if example == "e":
            raise DomainError("exact", None, "example e needs a reference solution")
        exact = FourierSeriesSolution(data, problem.alpha)

    levels = [int(level) for level in levels]
    for level in levels:
        if not MIN_LEVEL <= level <= MAX_LEVEL:
            raise DomainError("levels", level, f"levels must lie in [{MIN_LEVEL}, {MAX_LEVEL}]")
    levels = sorted(set(levels))
    if recovery not in RECOVERIES:
        raise DomainError("recovery", recovery, f"expected one of {RECOVERIES}")
    h1_floor = exact.deriv_tail_bound(problem.t_end) / _scale(exact)

    logger.info(f"table example={example} method={method} alpha={problem.alpha} t={problem.t_end:g} projection={projection} levels={levels}")
    rows = []
    for level in levels:
        mesh = Mesh1D.from_level(level)
        u_h, diag = solve_level(problem, mesh, method, projection, tau)
        gh = recovered_gradient_error(mesh, u_h, exact, problem.t_end, recovery, gauss_points) if data.is_smooth else None
        rows.append(
            ErrorRecord(
                h=mesh.h,
                alpha=problem.alpha,
                t=problem.t_end,
                l2_error=l2_error(mesh, u_h, exact, problem.t_end, gauss_points),
                h1_error=h1_error(mesh, u_h, exact, problem.t_end, gauss_points),
                gh_error=gh,
            )
        )
        details = " ".join(f"{key}={value:.3e}" if isinstance(value, float) else f"{key}={value}" for key, value in diag.items())
        logger.info(f"level h=1/{mesh.n_cells} l2={rows[-1].l2_error:.3e} h1={rows[-1].h1_error:.3e} {details}")
        if rows[-1].h1_error < 10.0 * h1_floor:
            logger.warning(f"h1 error at h=1/{mesh.n_cells} is within 10x of the reference tail bound {h1_floor:.3e}")

    return ConvergenceTable(
        example, method, problem.alpha, problem.t_end, projection, tuple(rows), normalized=exact.normalized, h1_floor=h1_floor
    )
