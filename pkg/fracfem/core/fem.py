from __future__ import annotations

import numpy as np

from fracfem.core.exceptions import DomainError, MeshMismatchError
from fracfem.core.models import CoefficientField, Mesh1D, NodalVector, TriDiagMatrix

MASS_KINDS = ("consistent", "lumped")


def assemble_mass(mesh: Mesh1D) -> TriDiagMatrix:
    n = mesh.n_interior
    return TriDiagMatrix(np.full(n, 2.0 * mesh.h / 3.0), np.full(n - 1, mesh.h / 6.0))


def assemble_lumped_mass(mesh: Mesh1D) -> TriDiagMatrix:
    n = mesh.n_interior
    return TriDiagMatrix(np.full(n, mesh.h), np.zeros(n - 1))


def assemble_method_mass(mesh: Mesh1D, kind: str) -> TriDiagMatrix:
    if kind == "consistent":
        return assemble_mass(mesh)
    if kind == "lumped":
        return assemble_lumped_mass(mesh)
    raise DomainError("mass", kind, f"expected one of {MASS_KINDS}")


def assemble_stiffness(mesh: Mesh1D, k: CoefficientField | None = None, gauss_order: int | None = None) -> TriDiagMatrix:
    k = k or CoefficientField.constant(1.0)
    # hat slopes are +-1/h, so each entry is an element integral of k over h^2
    a = k.element_integrals(mesh, gauss_order) / mesh.h**2
    return TriDiagMatrix(a[:-1] + a[1:], -a[1:-1])


def lumped_inner(mesh: Mesh1D, u: NodalVector, v: NodalVector) -> float:
    """(u, v)_h: vertex quadrature."""
    return float(mesh.h * np.dot(u.values, v.values))


def _check_load(mesh: Mesh1D, load) -> np.ndarray:
    b = np.asarray(load.values if isinstance(load, NodalVector) else load, dtype=float).reshape(-1)
    if b.size != mesh.n_interior:
        raise MeshMismatchError(mesh.n_interior, b.size, "load vector")
    return b


def l2_project(mesh: Mesh1D, load) -> NodalVector:
    """P_h v from the load b_i = (v, phi_i)."""
    return NodalVector(mesh, assemble_mass(mesh).solve(_check_load(mesh, load)))


def lumped_l2_project(mesh: Mesh1D, load) -> NodalVector:
    """Lumped L2 projection: (P v, chi)_h = (v, chi), so the coefficients are b_i / h."""
    return NodalVector(mesh, _check_load(mesh, load) / mesh.h)


def method_l2_project(mesh: Mesh1D, load, mass: str) -> NodalVector:
    """L2 projection in the inner product of the semidiscrete method."""
    if mass == "consistent":
        return l2_project(mesh, load)
    if mass == "lumped":
        return lumped_l2_project(mesh, load)
    raise DomainError("mass", mass, f"expected one of {MASS_KINDS}")


def ritz_project(mesh: Mesh1D, k: CoefficientField | None, energy_load) -> NodalVector:
    """R_h v from the energy load a_i = a(v, phi_i)."""
    return NodalVector(mesh, assemble_stiffness(mesh, k).solve(_check_load(mesh, energy_load)))


def dirac_load(mesh: Mesh1D, x0: float) -> NodalVector:
    """Projection of the point mass at node x_L = x0: the L-th column of the consistent mass inverse.

    Used for every semidiscrete method; (v_h, chi) = chi(x0) for all chi in X_h.
    """
    L = mesh.node_index(x0)
    e = np.zeros(mesh.n_interior)
    e[L - 1] = 1.0
    return NodalVector(mesh, assemble_mass(mesh).solve(e))


def quadrature_error_operator(mesh: Mesh1D, chi: NodalVector) -> NodalVector:
    """Q_h chi: grad-inner-product representer of (chi, .)_h - (chi, .)."""
    if chi.mesh != mesh:
        raise MeshMismatchError(mesh.n_interior, chi.mesh.n_interior, "mesh")
    b = assemble_lumped_mass(mesh).matvec(chi) - assemble_mass(mesh).matvec(chi)
    return NodalVector(mesh, assemble_stiffness(mesh).solve(b))


def _locate(mesh: Mesh1D, x) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(x < 0.0) or np.any(x > 1.0):
        raise DomainError("x", "out of range", "evaluation points must lie in [0, 1]")
    s = x * mesh.n_cells
    # convention: interior nodes belong to the element on their left
    cell = np.clip(np.ceil(s).astype(int) - 1, 0, mesh.n_cells - 1)
    return x, cell


def eval_fe(mesh: Mesh1D, u: NodalVector, x):
    x, cell = _locate(mesh, x)
    full = u.with_boundary()
    lam = x * mesh.n_cells - cell
    out = (1.0 - lam) * full[cell] + lam * full[cell + 1]
    return float(out) if out.ndim == 0 else out


def eval_fe_deriv(mesh: Mesh1D, u: NodalVector, x):
    x, cell = _locate(mesh, x)
    full = u.with_boundary()
    out = (full[cell + 1] - full[cell]) / mesh.h
    return float(out) if out.ndim == 0 else out


def interpolate(mesh: Mesh1D, func) -> NodalVector:
    """Nodal interpolant of a callable."""
    return NodalVector(mesh, np.asarray(func(mesh.nodes), dtype=float))
