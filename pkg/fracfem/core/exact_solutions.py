"""Initial data of the test problems and their Fourier / Mittag-Leffler series solutions."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from fracfem.core.exceptions import DomainError
from fracfem.core.fem import eval_fe, eval_fe_deriv
from fracfem.core.models import CoefficientField, Mesh1D, MlParams, NodalVector
from fracfem.core.special_functions import gamma, mittag_leffler_array

logger = logging.getLogger("fracfem.exact_solutions")

KINDS = ("quadratic_a", "hat_b", "one_c1", "linear_c2", "characteristic_c3", "dirac_d")

EXAMPLES = {
    "a": ("quadratic_a", "constant"),
    "b": ("hat_b", "constant"),
    "c1": ("one_c1", "constant"),
    "c2": ("linear_c2", "constant"),
    "c3": ("characteristic_c3", "constant"),
    "d": ("dirac_d", "constant"),
    "e": ("one_c1", "sine"),
}

# |c_n| <= A n^{-p}
_COEFFICIENT_BOUNDS = {
    "quadratic_a": (32.0 / math.pi**3, 3),
    "hat_b": (4.0 / math.pi**2, 2),
    "one_c1": (4.0 / math.pi, 1),
    "linear_c2": (2.0 / math.pi, 1),
    "characteristic_c3": (4.0 / math.pi, 1),
    "dirac_d": (2.0, 0),
}

_L2_NORMS = {
    "quadratic_a": math.sqrt(8.0 / 15.0),
    "hat_b": math.sqrt(1.0 / 12.0),
    "one_c1": 1.0,
    "linear_c2": math.sqrt(1.0 / 3.0),
    "characteristic_c3": math.sqrt(0.5),
}

_SUM_CHUNK = 2_000_000
_HEAD_MODES = 64


@dataclass(frozen=True)
class InitialData:
    kind: str
    dirac_point: float = 0.5

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise DomainError("kind", self.kind, f"expected one of {KINDS}")

    @property
    def is_dirac(self) -> bool:
        return self.kind == "dirac_d"

    @property
    def in_h10(self) -> bool:
        """Whether the Ritz projection is defined for this datum."""
        return self.kind in ("quadratic_a", "hat_b")

    @property
    def is_smooth(self) -> bool:
        """Data regular enough for the recovered-gradient estimate."""
        return self.kind == "quadratic_a"

    @property
    def slow_series(self) -> bool:
        return self.kind not in ("quadratic_a", "hat_b")

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return (0.5,) if self.kind in ("hat_b", "characteristic_c3") else ()

    @property
    def l2_norm(self) -> float | None:
        return _L2_NORMS.get(self.kind)

    @property
    def coefficient_bound(self) -> tuple[float, int]:
        return _COEFFICIENT_BOUNDS[self.kind]

    def sine_coefficients(self, n):
        """c_n with v(x) = sum_n c_n sin(n pi x)."""
        n_arr = np.asarray(n)
        if np.any(n_arr < 1) or not np.all(np.equal(np.mod(n_arr, 1), 0)):
            raise DomainError("n", n, "mode numbers start at 1")
        n_f = n_arr.astype(float)
        if self.kind == "quadratic_a":
            c = 16.0 / math.pi**3 * (1.0 - (-1.0) ** n_f) / n_f**3
        elif self.kind == "hat_b":
            c = 4.0 / (n_f**2 * math.pi**2) * _sin_half_pi(n_arr)
        elif self.kind == "one_c1":
            c = 2.0 * (1.0 - (-1.0) ** n_f) / (n_f * math.pi)
        elif self.kind == "linear_c2":
            c = 2.0 * (-1.0) ** (n_f + 1.0) / (n_f * math.pi)
        elif self.kind == "characteristic_c3":
            c = 2.0 * (1.0 - _cos_half_pi(n_arr)) / (n_f * math.pi)
        else:
            c = 2.0 * _sin_half_pi(n_arr)
        return float(c) if np.ndim(c) == 0 else c

    def evaluate(self, x):
        if self.is_dirac:
            raise DomainError("kind", self.kind, "a point mass has no pointwise values")
        x = np.asarray(x, dtype=float)
        if self.kind == "quadratic_a":
            return 4.0 * x * (1.0 - x)
        if self.kind == "hat_b":
            return np.where(x <= 0.5, x, 1.0 - x)
        if self.kind == "one_c1":
            return np.ones_like(x)
        if self.kind == "linear_c2":
            return x.copy()
        return np.where(x <= 0.5, 1.0, 0.0)

    def load_vector(self, mesh: Mesh1D) -> np.ndarray:
        """(v, phi_i) for every interior hat, exact for piecewise-polynomial data."""
        if self.is_dirac:
            e = np.zeros(mesh.n_interior)
            e[mesh.node_index(self.dirac_point) - 1] = 1.0
            return e
        edges = np.union1d(mesh.all_nodes, np.asarray(self.breakpoints, dtype=float))
        a, b = edges[:-1], edges[1:]
        cell = np.minimum(np.floor(0.5 * (a + b) * mesh.n_cells).astype(int), mesh.n_cells - 1)
        xi, w = leggauss(5)
        pts = 0.5 * (a + b)[:, None] + 0.5 * (b - a)[:, None] * xi[None, :]
        wts = 0.5 * (b - a)[:, None] * w[None, :]
        vals = self.evaluate(pts) * wts
        right = (pts - cell[:, None] * mesh.h) / mesh.h
        full = np.zeros(mesh.n_cells + 1)
        np.add.at(full, cell, np.sum(vals * (1.0 - right), axis=1))
        np.add.at(full, cell + 1, np.sum(vals * right, axis=1))
        return full[1:-1]

    def energy_load(self, mesh: Mesh1D, k: CoefficientField | None = None) -> np.ndarray:
        """a(v, phi_i) for H^1_0 data and a constant coefficient."""
        k = k or CoefficientField.constant(1.0)
        if not self.in_h10:
            raise DomainError("kind", self.kind, "the Ritz projection needs data in H^1_0")
        if not k.is_constant:
            raise DomainError("k", k.kind, "closed-form energy loads need a constant coefficient")
        v = self.evaluate(mesh.all_nodes)
        return k.value * (2.0 * v[1:-1] - v[:-2] - v[2:]) / mesh.h

    def interpolant(self, mesh: Mesh1D) -> NodalVector:
        return NodalVector(mesh, self.evaluate(mesh.nodes))


def _sin_half_pi(n: np.ndarray) -> np.ndarray:
    # exact sin(n pi / 2) for integer n
    return np.choose(np.mod(np.asarray(n, dtype=int), 4), [0.0, 1.0, 0.0, -1.0])


def _cos_half_pi(n: np.ndarray) -> np.ndarray:
    return np.choose(np.mod(np.asarray(n, dtype=int), 4), [1.0, 0.0, -1.0, 0.0])


def example_problem(example: str) -> tuple[InitialData, CoefficientField]:
    if example not in EXAMPLES:
        raise DomainError("example", example, f"expected one of {tuple(EXAMPLES)}")
    kind, field = EXAMPLES[example]
    return InitialData(kind), (CoefficientField.constant(1.0) if field == "constant" else CoefficientField.sine())


class FourierSeriesSolution:
    """u(x, t) = sum_n c_n E_{alpha,1}(-n^2 pi^2 t^alpha) sin(n pi x) with a bounded truncation tail.

    The tail bound uses |E_{alpha,1}(-x)| <= C_b / x with C_b = `bound_constant` and the integral
    test on |c_n| <= A n^{-p}; the mode count is the smallest one meeting
    `tail_tol` (values) or `deriv_tail_tol` (derivatives) relative to the series head, capped at
    `max_modes`.
    """

    min_cells = 1

    def __init__(
        self,
        data: InitialData,
        alpha: float,
        tail_tol: float = 1e-10,
        deriv_tail_tol: float = 1e-8,
        max_modes: int = 200_000,
        bound_constant: float = 2.0,
    ):
        MlParams(alpha)
        if tail_tol <= 0.0 or deriv_tail_tol <= 0.0:
            raise DomainError("tail_tol", min(tail_tol, deriv_tail_tol), "tolerances must be positive")
        if int(max_modes) < _HEAD_MODES:
            raise DomainError("max_modes", max_modes, f"need at least {_HEAD_MODES} modes")
        self.data = data
        self.alpha = float(alpha)
        self.tail_tol = float(tail_tol)
        self.deriv_tail_tol = float(deriv_tail_tol)
        self.max_modes = int(max_modes)
        self.bound_constant = float(bound_constant)

    @property
    def normalized(self) -> bool:
        return not self.data.is_dirac

    @property
    def initial_norm(self) -> float:
        norm = self.data.l2_norm
        return 1.0 if norm is None else norm

    def _check_time(self, t: float) -> float:
        t = float(t)
        if not math.isfinite(t) or t < 0.0:
            raise DomainError("t", t, "time must be finite and non-negative")
        if t == 0.0 and self.data.slow_series:
            raise DomainError("t", t, f"series for {self.data.kind} does not converge pointwise at t=0")
        return t

    def _weights(self, t: float, n_modes: int) -> np.ndarray:
        n = np.arange(1, n_modes + 1)
        c = self.data.sine_coefficients(n)
        if t == 0.0:
            return c
        z = -((n * math.pi) ** 2) * t**self.alpha
        return c * mittag_leffler_array(MlParams(self.alpha, 1.0), z)

    def mode_count(self, t: float, derivative: bool = False) -> tuple[int, bool]:
        """(N, certified): modes used and whether the tail bound met its tolerance."""
        t = self._check_time(t)
        A, p = self.data.coefficient_bound
        head_w = self._weights(t, _HEAD_MODES)
        n = np.arange(1, _HEAD_MODES + 1)
        if derivative:
            head = float(np.sum(np.abs(head_w) * n * math.pi))
            tol = self.deriv_tail_tol * max(head, 1e-300)
        else:
            head = float(np.sum(np.abs(head_w)))
            tol = self.tail_tol * max(head, 1e-300)

        candidates = []
        # sum_{n>N} B n^{-q} <= B N^{1-q} / (q - 1)
        if t > 0.0:
            scale = A * self.bound_constant / (math.pi ** (1 if derivative else 2) * t**self.alpha)
            q = p + (1 if derivative else 2)
            if q > 1:
                candidates.append((scale / ((q - 1) * tol)) ** (1.0 / (q - 1)))
        scale = A * (math.pi if derivative else 1.0)
        q = p - (1 if derivative else 0)
        if q > 1:
            candidates.append((scale / ((q - 1) * tol)) ** (1.0 / (q - 1)))

        needed = math.ceil(min(candidates)) if candidates else math.inf
        certified = needed <= self.max_modes
        n_modes = int(min(max(needed, _HEAD_MODES), self.max_modes))
        if not certified:
            extra = f" l2_tail_bound={self.deriv_tail_bound(t, n_modes):.3e}" if derivative else ""
            logger.warning(
                f"series tail not certified kind={self.data.kind} alpha={self.alpha} t={t:g} "
                f"derivative={derivative} modes={n_modes}{extra}"
            )
        return n_modes, certified

    def deriv_tail_bound(self, t: float, n_modes: int | None = None) -> float:
        """L2(0,1) bound on the derivative modes beyond `n_modes` (default: the modes the series uses).

        Uses E_{alpha,1}(-x) <= Gamma(1+alpha) / (Gamma(1+alpha) + x) and |c_n| <= A n^{-p}; at t = 0 only
        the coefficient decay is left. A point mass gives a finite bound although the pointwise series does not
        converge absolutely, so this is the floor below which H1 errors against the series mean nothing.
        """
        t = self._check_time(t)
        if n_modes is None:
            n_modes = self.mode_count(t, derivative=True)[0]
        N = float(n_modes)
        A, p = self.data.coefficient_bound
        # || sum_{n>N} b_n cos(n pi x) ||^2 = 1/2 sum_{n>N} b_n^2 and sum_{n>N} n^{-s} <= N^{1-s} / (s - 1)
        bounds = [math.inf]
        if t > 0.0:
            scale = A * gamma(1.0 + self.alpha) / (math.pi * t**self.alpha)
            bounds.append(scale * math.sqrt(N ** (-1 - 2 * p) / (2.0 * (1 + 2 * p))))
        if p >= 2:
            bounds.append(A * math.pi * math.sqrt(N ** (3 - 2 * p) / (2.0 * (2 * p - 3))))
        return min(bounds)

    def _series(self, x, t: float, derivative: bool) -> np.ndarray:
        x_arr = np.asarray(x, dtype=float)
        if np.any(~np.isfinite(x_arr)) or np.any(x_arr < 0.0) or np.any(x_arr > 1.0):
            raise DomainError("x", "out of range", "evaluation points must lie in [0, 1]")
        t = self._check_time(t)
        n_modes, _ = self.mode_count(t, derivative)
        w = self._weights(t, n_modes)
        freqs = np.arange(1, n_modes + 1) * math.pi
        if derivative:
            w = w * freqs
        flat = x_arr.reshape(-1)
        out = np.empty_like(flat)
        step = max(1, _SUM_CHUNK // n_modes)
        trig = np.cos if derivative else np.sin
        for s in range(0, flat.size, step):
            out[s : s + step] = trig(np.outer(flat[s : s + step], freqs)) @ w
        return out.reshape(x_arr.shape)

    def evaluate(self, x, t: float):
        out = self._series(x, t, derivative=False)
        return float(out) if out.ndim == 0 else out

    def evaluate_deriv(self, x, t: float):
        out = self._series(x, t, derivative=True)
        return float(out) if out.ndim == 0 else out

    def seminorm(self, t: float, p: float, n_modes: int = 4096) -> float:
        """|u(t)|_p = (sum_n lambda_n^p (u(t), phi_n)^2)^{1/2} over the first n_modes modes."""
        t = self._check_time(t)
        n = np.arange(1, int(n_modes) + 1)
        lam = (n * math.pi) ** 2
        coef = self._weights(t, int(n_modes)) / math.sqrt(2.0)
        return float(np.sqrt(np.sum(lam ** float(p) * coef * coef)))


def eval_exact(sol: FourierSeriesSolution, x, t: float):
    return sol.evaluate(x, t)


def eval_exact_deriv(sol: FourierSeriesSolution, x, t: float):
    return sol.evaluate_deriv(x, t)


class ReferenceSolution:
    """A fine-mesh finite element function standing in for an exact solution at one time."""

    normalized = True

    def __init__(self, mesh: Mesh1D, values: NodalVector, t: float, initial_norm: float = 1.0):
        if values.mesh != mesh:
            raise DomainError("values", values.mesh.n_cells, "reference values live on another mesh")
        self.mesh = mesh
        self.values = values
        self.t = float(t)
        self.initial_norm = float(initial_norm)

    @property
    def min_cells(self) -> int:
        return self.mesh.n_cells

    def deriv_tail_bound(self, t: float) -> float:
        return 0.0

    def _check_time(self, t: float) -> None:
        if abs(float(t) - self.t) > 1e-12 * max(1.0, self.t):
            raise DomainError("t", t, f"reference solution is only available at t={self.t:g}")

    def evaluate(self, x, t: float):
        self._check_time(t)
        return eval_fe(self.mesh, self.values, x)

    def evaluate_deriv(self, x, t: float):
        self._check_time(t)
        return eval_fe_deriv(self.mesh, self.values, x)
