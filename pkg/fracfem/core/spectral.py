"""Discrete eigensystems and exact-in-time semidiscrete solution operators."""

from __future__ import annotations

import logging

import numpy as np
from scipy.linalg import LinAlgError, eigh, eigh_tridiagonal

from fracfem.core.exceptions import DomainError, InvariantViolationError, MeshMismatchError
from fracfem.core.fem import assemble_lumped_mass, assemble_method_mass, assemble_stiffness
from fracfem.core.models import CoefficientField, Mesh1D, MlParams, NodalVector, TriDiagMatrix
from fracfem.core.special_functions import mittag_leffler_array

logger = logging.getLogger("fracfem.spectral")

MAX_DIMENSION = 4096


class EigenSystem:
    """Generalized eigenpairs of (K, M_*) with modes orthonormal in the M_* inner product.

    `modes` holds one mode per column; `inner_product` is "consistent" or "lumped".
    """

    def __init__(self, mesh: Mesh1D, lambdas, modes, inner_product: str, stiffness: TriDiagMatrix, mass: TriDiagMatrix):
        lam = np.asarray(lambdas, dtype=float)
        phi = np.asarray(modes, dtype=float)
        if phi.shape != (mesh.n_interior, mesh.n_interior) or lam.size != mesh.n_interior:
            raise MeshMismatchError(mesh.n_interior, lam.size, "eigensystem")
        if lam[0] <= 0.0:
            raise InvariantViolationError("smallest eigenvalue positivity", float(lam[0]), 0.0)
        if np.any(np.diff(lam) < 0.0):
            order = np.argsort(lam)
            lam, phi = lam[order], phi[:, order]
        lam.setflags(write=False)
        phi.setflags(write=False)
        self._mesh = mesh
        self._lambdas = lam
        self._modes = phi
        self._inner_product = inner_product
        self._stiffness = stiffness
        self._mass = mass

    @property
    def mesh(self) -> Mesh1D:
        return self._mesh

    @property
    def lambdas(self) -> np.ndarray:
        return self._lambdas

    @property
    def modes(self) -> np.ndarray:
        return self._modes

    @property
    def inner_product(self) -> str:
        return self._inner_product

    @property
    def mass(self) -> TriDiagMatrix:
        return self._mass

    @property
    def stiffness(self) -> TriDiagMatrix:
        return self._stiffness

    def mode(self, j: int) -> NodalVector:
        """j-th mode, 1-based."""
        return NodalVector(self._mesh, self._modes[:, int(j) - 1])

    def _check(self, v: NodalVector) -> None:
        if v.mesh != self._mesh:
            raise MeshMismatchError(self._mesh.n_interior, v.mesh.n_interior, "mesh")

    def coefficients(self, v: NodalVector) -> np.ndarray:
        self._check(v)
        return self._modes.T @ self._mass.matvec(v)

    def synthesize(self, coefficients) -> NodalVector:
        return NodalVector(self._mesh, self._modes @ np.asarray(coefficients, dtype=float))

    def residuals(self) -> np.ndarray:
        """||K phi_j - lambda_j M phi_j|| / (lambda_j ||M phi_j||) per mode."""
        Kphi = self._stiffness.matvec(self._modes)
        Mphi = self._mass.matvec(self._modes)
        num = np.linalg.norm(Kphi - Mphi * self._lambdas[None, :], axis=0)
        return num / (self._lambdas * np.linalg.norm(Mphi, axis=0))

    def max_residual(self) -> float:
        return float(np.max(self.residuals()))

    def orthonormality_error(self) -> float:
        gram = self._modes.T @ self._mass.matvec(self._modes)
        return float(np.max(np.abs(gram - np.eye(gram.shape[0]))))

    def z_values(self, alpha: float, t: float) -> np.ndarray:
        return -self._lambdas * float(t) ** alpha


def lumped_eigenvalues(mesh: Mesh1D) -> np.ndarray:
    j = np.arange(1, mesh.n_cells, dtype=float)
    return 4.0 / mesh.h**2 * np.sin(j * np.pi * mesh.h / 2.0) ** 2


def galerkin_eigenvalues(mesh: Mesh1D) -> np.ndarray:
    c = np.cos(np.arange(1, mesh.n_cells, dtype=float) * np.pi * mesh.h)
    return 6.0 / mesh.h**2 * (1.0 - c) / (2.0 + c)


def analytic_lumped_eigensystem(mesh: Mesh1D, k: CoefficientField | None = None) -> EigenSystem:
    k = k or CoefficientField.constant(1.0)
    if not k.is_constant:
        raise DomainError("k", k.kind, "closed-form eigenpairs need a constant coefficient")
    j = np.arange(1, mesh.n_cells, dtype=float)
    modes = np.sqrt(2.0) * np.sin(np.pi * np.outer(mesh.nodes, j))
    return EigenSystem(
        mesh,
        k.value * lumped_eigenvalues(mesh),
        modes,
        "lumped",
        assemble_stiffness(mesh, k),
        assemble_lumped_mass(mesh),
    )


def solve_eigensystem(K: TriDiagMatrix, M_star: TriDiagMatrix, kind: str, mesh: Mesh1D | None = None) -> EigenSystem:
    if K.n != M_star.n:
        raise MeshMismatchError(K.n, M_star.n, "mass matrix")
    if K.n > MAX_DIMENSION:
        raise DomainError("dimension", K.n, f"dense eigensolver limited to n <= {MAX_DIMENSION}")
    mesh = mesh or Mesh1D(K.n + 1)
    if mesh.n_interior != K.n:
        raise MeshMismatchError(mesh.n_interior, K.n, "stiffness matrix")

    if kind == "lumped":
        if not M_star.is_diagonal:
            raise DomainError("kind", kind, "lumped eigensystem needs a diagonal mass matrix")
        d = M_star.diag
        if np.any(d <= 0.0):
            raise InvariantViolationError("positive definiteness", float(np.min(d)), 0.0)
        s = 1.0 / np.sqrt(d)
        if K.n == 1:
            lam, vec = np.array([K.diag[0] * s[0] ** 2]), np.ones((1, 1))
        else:
            lam, vec = eigh_tridiagonal(K.diag * s * s, K.off * s[:-1] * s[1:])
        modes = s[:, None] * vec
    elif kind == "consistent":
        try:
            lam, modes = eigh(K.to_dense(), M_star.to_dense())
        except LinAlgError as e:
            raise InvariantViolationError("positive definiteness", float("nan"), 0.0) from e
    else:
        raise DomainError("kind", kind, "expected 'consistent' or 'lumped'")

    return EigenSystem(mesh, lam, modes, kind, K, M_star)


def build_eigensystem(mesh: Mesh1D, k: CoefficientField, mass: str) -> EigenSystem:
    """Eigensystem for a method: closed form when possible, generalized solve otherwise."""
    if mass == "lumped" and k.is_constant:
        return analytic_lumped_eigensystem(mesh, k)
    eig = solve_eigensystem(assemble_stiffness(mesh, k), assemble_method_mass(mesh, mass), mass, mesh)
    if mass == "consistent" and k.is_constant:
        gap = eigenvalue_formula_gap(eig, k)
        logger.info(f"galerkin eigenvalues vs lumped closed form n_cells={mesh.n_cells} max_rel_gap={gap:.3e}")
    return eig


def eigenvalue_formula_gap(eig: EigenSystem, k: CoefficientField | None = None) -> float:
    """Max relative gap between the computed spectrum and (4/h^2) sin^2(j pi h / 2)."""
    k = k or CoefficientField.constant(1.0)
    ref = k.value * lumped_eigenvalues(eig.mesh)
    return float(np.max(np.abs(eig.lambdas - ref) / ref))


def homogeneous_solve(eig: EigenSystem, v_h: NodalVector, alpha: float, t: float) -> NodalVector:
    """E_h(t) v_h (or its lumped analogue): sum_j E_{alpha,1}(-lambda_j t^alpha) (v_h, phi_j)_* phi_j."""
    if t < 0.0:
        raise DomainError("t", t, "time must be non-negative")
    a = eig.coefficients(v_h)
    if t == 0.0:
        return v_h
    decay = mittag_leffler_array(MlParams(alpha, 1.0), eig.z_values(alpha, t))
    return eig.synthesize(decay * a)


def bar_operator_apply(eig: EigenSystem, g: NodalVector, alpha: float, t: float) -> NodalVector:
    """Single-time kernel t^{alpha-1} E_{alpha,alpha}(-lambda_j t^alpha) applied to g."""
    if not t > 0.0:
        raise DomainError("t", t, "kernel is singular at t <= 0")
    a = eig.coefficients(g)
    kernel = t ** (alpha - 1.0) * mittag_leffler_array(MlParams(alpha, alpha), eig.z_values(alpha, t))
    return eig.synthesize(kernel * a)


def discrete_norm(eig: EigenSystem, psi: NodalVector, p: float) -> float:
    a = eig.coefficients(psi)
    return float(np.sqrt(np.sum(eig.lambdas ** float(p) * a * a)))
