from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from fracfem.core.exceptions import DomainError, MeshMismatchError
from fracfem.core.models import CholeskyFactor, Mesh1D, NodalVector, TriDiagMatrix
from fracfem.core.special_functions import gamma

logger = logging.getLogger("fracfem.timestep_l1")


@dataclass(frozen=True, eq=False)
class L1Weights:
    alpha: float
    b: np.ndarray


@dataclass(frozen=True, eq=False)
class L1Trajectory:
    alpha: float
    tau: float
    states: np.ndarray

    @property
    def n_steps(self) -> int:
        return self.states.shape[0] - 1

    @property
    def times(self) -> np.ndarray:
        return self.tau * np.arange(self.states.shape[0])

    def at(self, mesh: Mesh1D, step: int) -> NodalVector:
        return NodalVector(mesh, self.states[step])

    def final(self, mesh: Mesh1D) -> NodalVector:
        return NodalVector(mesh, self.states[-1])


def _check_alpha(alpha: float) -> float:
    if not isinstance(alpha, (int, float)) or not 0.0 < float(alpha) < 1.0:
        raise DomainError("alpha", alpha, "the L1 scheme needs alpha in (0, 1)")
    return float(alpha)


def _check_tau(tau: float) -> float:
    if not isinstance(tau, (int, float)) or not math.isfinite(tau) or tau <= 0.0:
        raise DomainError("tau", tau, "time step must be positive")
    return float(tau)


def l1_weights(n: int, alpha: float) -> L1Weights:
    """b_j = (j+1)^{1-alpha} - j^{1-alpha}, j = 0..n-1."""
    alpha = _check_alpha(alpha)
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError("n", n, "need at least one step")
    j = np.arange(int(n) + 1, dtype=float) ** (1.0 - alpha)
    b = np.diff(j)
    b.setflags(write=False)
    return L1Weights(alpha, b)


def discrete_caputo(history, alpha: float, tau: float) -> float:
    """L1 approximation of the Caputo derivative at the last sample of a uniform history."""
    u = np.asarray(history, dtype=float).reshape(-1)
    if u.size < 2:
        raise DomainError("history", u.size, "need at least two samples")
    tau = _check_tau(tau)
    w = l1_weights(u.size - 1, alpha)
    return float(w.b @ np.diff(u)[::-1]) / (gamma(2.0 - w.alpha) * tau**w.alpha)


def l1_solve(
    K: TriDiagMatrix,
    M_star: TriDiagMatrix,
    alpha: float,
    tau: float,
    v_h: NodalVector,
    n_steps: int,
    source: Callable[[float], np.ndarray] | None = None,
) -> L1Trajectory:
    """March (M_* + gamma K) U^n = M_* (U^{n-1} - history) + gamma M_* f^n from U^0 = v_h."""
    if K.n != M_star.n:
        raise MeshMismatchError(K.n, M_star.n, "mass matrix")
    if len(v_h) != K.n:
        raise MeshMismatchError(K.n, len(v_h), "initial vector")
    tau = _check_tau(tau)
    alpha = _check_alpha(alpha)
    if isinstance(n_steps, bool) or not isinstance(n_steps, (int, np.integer)) or n_steps < 0:
        raise DomainError("n_steps", n_steps, "must be a non-negative integer")

    states = np.empty((int(n_steps) + 1, K.n))
    states[0] = v_h.values
    if n_steps == 0:
        return L1Trajectory(alpha, tau, states)

    b = l1_weights(int(n_steps), alpha).b
    g = gamma(2.0 - alpha) * tau**alpha
    factor = CholeskyFactor(M_star + K.scaled(g))
    diffs = np.empty((int(n_steps), K.n))

    for n in range(1, int(n_steps) + 1):
        combo = states[n - 1].copy()
        if n > 1:
            combo -= b[n - 1 : 0 : -1] @ diffs[: n - 1]
        rhs = M_star.matvec(combo)
        if source is not None:
            rhs += g * M_star.matvec(np.asarray(source(n * tau), dtype=float))
        states[n] = factor.solve(rhs)
        diffs[n - 1] = states[n] - states[n - 1]

    logger.debug(f"L1 march alpha={alpha} tau={tau:g} steps={n_steps} dim={K.n}")
    return L1Trajectory(alpha, tau, states)


def l1_scalar(lam: float, alpha: float, tau: float, u0: float, n_steps: int, source: Callable[[float], float] | None = None) -> np.ndarray:
    """Same scheme for one mode, D^alpha u = -lam u + f(t)."""
    tau = _check_tau(tau)
    alpha = _check_alpha(alpha)
    u = np.empty(int(n_steps) + 1)
    u[0] = float(u0)
    if n_steps == 0:
        return u
    b = l1_weights(int(n_steps), alpha).b
    g = gamma(2.0 - alpha) * tau**alpha
    d = np.empty(int(n_steps))
    for n in range(1, int(n_steps) + 1):
        combo = u[n - 1] - (float(b[n - 1 : 0 : -1] @ d[: n - 1]) if n > 1 else 0.0)
        if source is not None:
            combo += g * float(source(n * tau))
        u[n] = combo / (1.0 + g * lam)
        d[n - 1] = u[n] - u[n - 1]
    return u
