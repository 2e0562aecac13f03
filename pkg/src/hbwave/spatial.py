"""Discrete spatial operators: the negative Laplacian with per-harmonic
Robin/Dirichlet boundary rows, finite-difference norms, and the discrete
H^1-dual norm.

Robin rows use ghost-node elimination of the central stencil, so the
operator stays symmetric tridiagonal (complex symmetric for m >= 1 with an
absorbing endpoint).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .model import BoundaryCondition, Grid


@dataclass
class SpatialOperator:
    """Reduced discrete -Laplacian with harmonic-m boundary rows.

    Dirichlet nodes are eliminated; `active` maps reduced indices to full
    grid indices.
    """

    matrix: np.ndarray          # (nr, nr) complex
    active: np.ndarray          # indices of non-Dirichlet nodes
    grid: Grid
    m: int
    bc_left: BoundaryCondition
    bc_right: BoundaryCondition

    @property
    def nr(self) -> int:
        return len(self.active)

    def restrict(self, v_full: np.ndarray) -> np.ndarray:
        return np.asarray(v_full)[self.active]

    def extend(self, v_reduced: np.ndarray) -> np.ndarray:
        out = np.zeros(self.grid.nx, dtype=complex)
        out[self.active] = v_reduced
        return out

    def apply(self, v_full: np.ndarray) -> np.ndarray:
        """Apply to a full-grid vector; Dirichlet nodes read as zero."""
        return self.extend(self.matrix @ self.restrict(v_full))

    def is_singular(self) -> bool:
        # the only singular configuration is the pure-Neumann mean mode
        if self.m != 0:
            return False
        def free(bc):
            return (not bc.is_dirichlet) and bc.gamma == 0.0
        return free(self.bc_left) and free(self.bc_right)


def assemble_laplacian(grid: Grid, bc_left: BoundaryCondition,
                       bc_right: BoundaryCondition, m: int,
                       omega: float) -> SpatialOperator:
    """Second-order -d_xx with the harmonic-m Robin data i m omega beta + gamma."""
    nx, h = grid.nx, grid.h
    A = np.zeros((nx, nx), dtype=complex)
    inv_h2 = 1.0 / h**2
    for j in range(1, nx - 1):
        A[j, j - 1] = -inv_h2
        A[j, j] = 2.0 * inv_h2
        A[j, j + 1] = -inv_h2

    active = np.arange(nx)
    keep = np.ones(nx, dtype=bool)

    if bc_left.is_dirichlet:
        keep[0] = False
    else:
        q = bc_left.robin_coefficient(m, omega)
        A[0, 0] = (2.0 + 2.0 * h * q) * inv_h2
        A[0, 1] = -2.0 * inv_h2
    if bc_right.is_dirichlet:
        keep[-1] = False
    else:
        q = bc_right.robin_coefficient(m, omega)
        A[-1, -1] = (2.0 + 2.0 * h * q) * inv_h2
        A[-1, -2] = -2.0 * inv_h2

    active = active[keep]
    matrix = A[np.ix_(active, active)]
    return SpatialOperator(matrix=matrix, active=active, grid=grid, m=m,
                           bc_left=bc_left, bc_right=bc_right)


def gradient(v: np.ndarray, grid: Grid) -> np.ndarray:
    """Second-order first derivative along the last axis."""
    v = np.asarray(v)
    h = grid.h
    g = np.empty_like(v, dtype=np.result_type(v, float))
    g[..., 1:-1] = (v[..., 2:] - v[..., :-2]) / (2 * h)
    g[..., 0] = (-3 * v[..., 0] + 4 * v[..., 1] - v[..., 2]) / (2 * h)
    g[..., -1] = (3 * v[..., -1] - 4 * v[..., -2] + v[..., -3]) / (2 * h)
    return g


def laplacian_fd(v: np.ndarray, grid: Grid) -> np.ndarray:
    """Second-order second derivative along the last axis (one-sided ends)."""
    v = np.asarray(v)
    h = grid.h
    g = np.empty_like(v, dtype=np.result_type(v, float))
    g[..., 1:-1] = (v[..., 2:] - 2 * v[..., 1:-1] + v[..., :-2]) / h**2
    g[..., 0] = (2 * v[..., 0] - 5 * v[..., 1] + 4 * v[..., 2]
                 - v[..., 3]) / h**2
    g[..., -1] = (2 * v[..., -1] - 5 * v[..., -2] + 4 * v[..., -3]
                  - v[..., -4]) / h**2
    return g


def l2_norm(v: np.ndarray, grid: Grid) -> float:
    """Trapezoidal-rule L2(0, L) norm."""
    w = grid.trapezoid_weights()
    return float(np.sqrt(np.sum(w * np.abs(v) ** 2).real))


def spatial_norms(v: np.ndarray, grid: Grid) -> dict:
    """L2 norm, H1 seminorm and endpoint traces of a nodal vector."""
    g = gradient(v, grid)
    return {
        "L2": l2_norm(v, grid),
        "H1_semi": l2_norm(g, grid),
        "trace_left": v[0],
        "trace_right": v[-1],
    }


def dual_norm_h1star(v: np.ndarray, grid: Grid, bc_left: BoundaryCondition,
                     bc_right: BoundaryCondition) -> float:
    """Discrete H^1-dual norm: sqrt(<v, z>) with (I - Lap_h) z = v.

    Uses the mean-mode (m = 0) boundary rows; the identity shift makes the
    operator nonsingular for every endpoint combination.
    """
    op = assemble_laplacian(grid, bc_left, bc_right, 0, omega=1.0)
    A = np.eye(op.nr) + op.matrix
    vr = op.restrict(np.asarray(v, dtype=complex))
    z = scipy.linalg.solve(A, vr)
    w = grid.trapezoid_weights()[op.active]
    val = np.sum(w * np.conj(vr) * z).real
    return float(np.sqrt(max(val, 0.0)))
