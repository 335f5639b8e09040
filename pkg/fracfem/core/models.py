from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import LinAlgError, cho_solve_banded, cholesky_banded, solveh_banded

from fracfem.core.exceptions import DomainError, InvariantViolationError, MeshMismatchError, UnsupportedDomainError

if TYPE_CHECKING:
    from fracfem.core.exact_solutions import InitialData


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class MlParams:
    alpha: float
    beta: float = 1.0

    def __post_init__(self) -> None:
        if not isinstance(self.alpha, (int, float)) or not math.isfinite(self.alpha) or not 0.0 < self.alpha <= 1.0:
            raise DomainError("alpha", self.alpha, "must lie in (0, 1]")
        if not isinstance(self.beta, (int, float)) or not math.isfinite(self.beta) or self.beta <= 0.0:
            raise DomainError("beta", self.beta, "must be positive")


class Mesh1D:
    """Uniform partition of (0, 1) into n_cells cells; only interior nodes carry unknowns."""

    def __init__(self, n_cells: int):
        if isinstance(n_cells, bool) or not isinstance(n_cells, (int, np.integer)) or int(n_cells) < 2:
            raise DomainError("n_cells", n_cells, "must be an integer >= 2")
        self._n_cells = int(n_cells)

    @classmethod
    def from_level(cls, k: int) -> Mesh1D:
        return cls(2 ** int(k))

    @property
    def n_cells(self) -> int:
        return self._n_cells

    @property
    def h(self) -> float:
        return 1.0 / self._n_cells

    @property
    def n_interior(self) -> int:
        return self._n_cells - 1

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(1, self._n_cells, dtype=float) / self._n_cells

    @property
    def all_nodes(self) -> np.ndarray:
        return np.arange(0, self._n_cells + 1, dtype=float) / self._n_cells

    @property
    def midpoints(self) -> np.ndarray:
        return (np.arange(self._n_cells, dtype=float) + 0.5) / self._n_cells

    def node_index(self, x0: float, tol: float = 1e-12) -> int:
        """1-based interior index L with x_L == x0, or DomainError."""
        k = round(float(x0) * self._n_cells)
        if not 1 <= k <= self._n_cells - 1 or abs(k / self._n_cells - float(x0)) > tol:
            raise DomainError("x0", x0, f"not an interior node of the mesh with {self._n_cells} cells")
        return int(k)

    def __eq__(self, other) -> bool:
        return isinstance(other, Mesh1D) and other.n_cells == self._n_cells

    def __hash__(self) -> int:
        return hash(("Mesh1D", self._n_cells))

    def __repr__(self) -> str:
        return f"Mesh1D(n_cells={self._n_cells})"


class NodalVector:
    def __init__(self, mesh: Mesh1D, values):
        if not isinstance(mesh, Mesh1D):
            raise TypeError("mesh must be a Mesh1D")
        arr = np.asarray(values, dtype=float).reshape(-1)
        if arr.size != mesh.n_interior:
            raise MeshMismatchError(mesh.n_interior, arr.size, "nodal vector")
        if not np.all(np.isfinite(arr)):
            raise DomainError("values", "non-finite", "nodal values must be finite")
        self._mesh = mesh
        self._values = _frozen_array(arr)

    @classmethod
    def zeros(cls, mesh: Mesh1D) -> NodalVector:
        return cls(mesh, np.zeros(mesh.n_interior))

    @classmethod
    def hat(cls, mesh: Mesh1D, index: int) -> NodalVector:
        """Coefficient vector of the hat function at interior node `index` (1-based)."""
        if not 1 <= int(index) <= mesh.n_interior:
            raise DomainError("index", index, "hat index out of range")
        values = np.zeros(mesh.n_interior)
        values[int(index) - 1] = 1.0
        return cls(mesh, values)

    @property
    def mesh(self) -> Mesh1D:
        return self._mesh

    @property
    def values(self) -> np.ndarray:
        return self._values

    def with_boundary(self) -> np.ndarray:
        return np.concatenate(([0.0], self._values, [0.0]))

    def _check_same_mesh(self, other: NodalVector) -> None:
        if other.mesh != self._mesh:
            raise MeshMismatchError(self._mesh.n_interior, other.mesh.n_interior, "mesh")

    def __len__(self) -> int:
        return self._values.size

    def __add__(self, other: NodalVector) -> NodalVector:
        self._check_same_mesh(other)
        return NodalVector(self._mesh, self._values + other.values)

    def __sub__(self, other: NodalVector) -> NodalVector:
        self._check_same_mesh(other)
        return NodalVector(self._mesh, self._values - other.values)

    def __mul__(self, scalar: float) -> NodalVector:
        return NodalVector(self._mesh, self._values * float(scalar))

    __rmul__ = __mul__

    def norm_inf(self) -> float:
        return float(np.max(np.abs(self._values))) if self._values.size else 0.0

    def __repr__(self) -> str:
        return f"NodalVector(n_cells={self._mesh.n_cells})"


class TriDiagMatrix:
    """Symmetric tridiagonal matrix stored as its diagonal and first off-diagonal."""

    def __init__(self, diag, off):
        d = np.asarray(diag, dtype=float).reshape(-1)
        o = np.asarray(off, dtype=float).reshape(-1)
        if d.size < 1:
            raise DomainError("diag", d.size, "matrix must have at least one row")
        if o.size != d.size - 1:
            raise MeshMismatchError(d.size - 1, o.size, "off-diagonal")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(o))):
            raise DomainError("entries", "non-finite", "matrix entries must be finite")
        self._diag = _frozen_array(d)
        self._off = _frozen_array(o)

    @property
    def diag(self) -> np.ndarray:
        return self._diag

    @property
    def off(self) -> np.ndarray:
        return self._off

    @property
    def n(self) -> int:
        return self._diag.size

    @property
    def is_diagonal(self) -> bool:
        return not np.any(self._off)

    def _as_array(self, x) -> np.ndarray:
        arr = x.values if isinstance(x, NodalVector) else np.asarray(x, dtype=float)
        if arr.shape[0] != self.n:
            raise MeshMismatchError(self.n, arr.shape[0], "operand")
        return arr

    def matvec(self, x) -> np.ndarray:
        v = self._as_array(x)
        out = self._diag.reshape((-1,) + (1,) * (v.ndim - 1)) * v
        if self.n > 1:
            off = self._off.reshape((-1,) + (1,) * (v.ndim - 1))
            out[:-1] += off * v[1:]
            out[1:] += off * v[:-1]
        return out

    def quadratic_form(self, x) -> float:
        v = self._as_array(x)
        return float(v @ self.matvec(v))

    def to_dense(self) -> np.ndarray:
        return np.diag(self._diag) + np.diag(self._off, 1) + np.diag(self._off, -1)

    def upper_banded(self) -> np.ndarray:
        ab = np.zeros((2, self.n))
        ab[0, 1:] = self._off
        ab[1, :] = self._diag
        return ab

    def __add__(self, other: TriDiagMatrix) -> TriDiagMatrix:
        if other.n != self.n:
            raise MeshMismatchError(self.n, other.n, "matrix")
        return TriDiagMatrix(self._diag + other.diag, self._off + other.off)

    def scaled(self, factor: float) -> TriDiagMatrix:
        return TriDiagMatrix(self._diag * float(factor), self._off * float(factor))

    def gershgorin_lower(self) -> float:
        radius = np.zeros(self.n)
        radius[:-1] += np.abs(self._off)
        radius[1:] += np.abs(self._off)
        return float(np.min(self._diag - radius))

    def cholesky(self) -> np.ndarray:
        try:
            return cholesky_banded(self.upper_banded())
        except LinAlgError as e:
            raise InvariantViolationError("positive definiteness", float("nan"), 0.0) from e

    def solve(self, rhs) -> np.ndarray:
        """SPD solve by banded Cholesky (no pivoting)."""
        b = self._as_array(rhs)
        try:
            return solveh_banded(self.upper_banded(), b)
        except LinAlgError as e:
            raise InvariantViolationError("positive definiteness", float("nan"), 0.0) from e

    def __repr__(self) -> str:
        return f"TriDiagMatrix(n={self.n})"


class CholeskyFactor:
    """Reusable banded Cholesky factor for repeated solves with one matrix."""

    def __init__(self, matrix: TriDiagMatrix):
        self._n = matrix.n
        self._factor = matrix.cholesky()

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        if rhs.shape[0] != self._n:
            raise MeshMismatchError(self._n, rhs.shape[0], "operand")
        return cho_solve_banded((self._factor, False), rhs)


@dataclass(frozen=True)
class CoefficientField:
    """Diffusion coefficient k(x): a positive constant or k(x) = 3 + sin(2 pi x)."""

    kind: str = "constant"
    value: float = 1.0
    reaction: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("constant", "sine"):
            raise DomainError("kind", self.kind, "expected 'constant' or 'sine'")
        if self.kind == "constant" and (not math.isfinite(self.value) or self.value <= 0.0):
            raise DomainError("value", self.value, "constant coefficient must be positive")
        if self.reaction != 0.0:
            raise UnsupportedDomainError("reaction", self.reaction, "only c(x) = 0 is supported")

    @classmethod
    def constant(cls, value: float = 1.0) -> CoefficientField:
        return cls("constant", float(value))

    @classmethod
    def sine(cls) -> CoefficientField:
        return cls("sine")

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant"

    @property
    def min_value(self) -> float:
        return self.value if self.is_constant else 2.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.is_constant:
            return np.full_like(x, self.value)
        return 3.0 + np.sin(2.0 * np.pi * x)

    def antiderivative(self, x):
        x = np.asarray(x, dtype=float)
        if self.is_constant:
            return self.value * x
        return 3.0 * x - np.cos(2.0 * np.pi * x) / (2.0 * np.pi)

    def element_integrals(self, mesh: Mesh1D, gauss_order: int | None = None) -> np.ndarray:
        """Integral of k over every cell; closed form unless a Gauss order is requested."""
        edges = mesh.all_nodes
        if gauss_order is None:
            F = self.antiderivative(edges)
            return F[1:] - F[:-1]
        xi, w = leggauss(int(gauss_order))
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * mesh.h
        pts = mid[:, None] + half * xi[None, :]
        return half * (self(pts) @ w)


@dataclass(frozen=True)
class ProblemSpec:
    alpha: float
    coefficient: CoefficientField
    data: InitialData
    t_end: float

    def __post_init__(self) -> None:
        MlParams(self.alpha)
        if not math.isfinite(self.t_end) or self.t_end < 0.0:
            raise DomainError("t_end", self.t_end, "must be a finite non-negative time")
