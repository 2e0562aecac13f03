"""Per-harmonic Helmholtz-type systems for the linear third-order wave
equation and the block-coupled solve for its linearization around a state.

Substituting u_m exp(i m omega t) into
    tau u_ttt + u_tt + (b d_t + c^2)(-Lap) u + r = 0
gives the decoupled family
    A_m u_m = -r_m,
    A_m = (-i tau m^3 w^3 - m^2 w^2) I + diag(c2 + i m w b) Lap_m,
with Lap_m the discrete -Laplacian carrying the harmonic-m Robin rows.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    NonConvergedIteration,
    SingularMeanMode,
    SolveFailure,
)
from .model import HarmonicField, ValidatedModel
from .norms import l2l2_norm
from .spatial import SpatialOperator, assemble_laplacian

RESIDUAL_RTOL = 1e-10
CONDITION_LIMIT = 1e13


def kappa_squared(m: int, tau: float, omega: float, b_const: float,
                  c2_const: float) -> complex:
    """Helmholtz wavenumber squared of harmonic m for constant coefficients.

    Dividing A_m by (c2 + i m w b) gives -Lap - kappa_m^2 with
    kappa_m^2 = (m^2 w^2 + i tau m^3 w^3) / (c2 + i m w b).
    """
    mw = m * omega
    return (mw**2 + 1j * tau * mw**3) / (c2_const + 1j * mw * b_const)


@dataclass
class HarmonicSystem:
    """Reduced system A_m u_m = -r_m of one harmonic."""

    m: int
    op: SpatialOperator
    matrix: np.ndarray
    rhs: np.ndarray            # already negated: equals -r_m on active nodes

    def solve(self) -> np.ndarray:
        try:
            sol = scipy.linalg.solve(self.matrix, self.rhs)
        except scipy.linalg.LinAlgError as exc:
            raise SolveFailure(f"harmonic {self.m} factorization failed: {exc}")
        res = np.linalg.norm(self.matrix @ sol - self.rhs)
        scale = (np.linalg.norm(self.matrix, ord=np.inf)
                 * np.linalg.norm(sol) + np.linalg.norm(self.rhs))
        if scale > 0 and res > RESIDUAL_RTOL * scale:
            cond = float(np.linalg.cond(self.matrix))
            raise SolveFailure(
                f"harmonic {self.m} residual {res:.3e} exceeds tolerance "
                f"(cond ~ {cond:.3e})", condition_estimate=cond)
        return sol


def assemble_harmonic_system(m: int, model: ValidatedModel,
                             rhs_harmonic: np.ndarray) -> HarmonicSystem:
    """Build A_m and the (negated) right-hand side for one harmonic."""
    p = model.params
    omega = p.omega
    op = assemble_laplacian(model.grid, model.bc_left, model.bc_right, m, omega)
    if op.is_singular():
        raise SingularMeanMode(
            "mean-mode operator is singular: no impedance or Dirichlet "
            "endpoint")
    mw = m * omega
    coef = (p.c2 + 1j * mw * p.b)[op.active]
    matrix = coef[:, None] * op.matrix
    matrix[np.diag_indices(op.nr)] += -1j * p.tau * mw**3 - mw**2
    rhs = -np.asarray(rhs_harmonic, dtype=complex)[op.active]
    return HarmonicSystem(m=m, op=op, matrix=matrix, rhs=rhs)


def solve_linear_mgt(f: HarmonicField, model: ValidatedModel) -> HarmonicField:
    """Solve the decoupled per-harmonic systems for all m = 0..M."""
    out = HarmonicField.zeros(f.M, model.grid.nx)
    for m in range(f.M + 1):
        system = assemble_harmonic_system(m, model, f.coeffs[m])
        out.coeffs[m] = system.op.extend(system.solve())
    out.coeffs[0] = out.coeffs[0].real
    return out


def linear_residual(u: HarmonicField, rtilde: HarmonicField,
                    model: ValidatedModel) -> float:
    """Relative re-substitution residual of A_m u_m + r_m over all harmonics."""
    num_sq = 0.0
    den_sq = 0.0
    for m in range(u.M + 1):
        system = assemble_harmonic_system(m, model, rtilde.coeffs[m])
        ur = system.op.restrict(u.coeffs[m])
        num_sq += float(np.linalg.norm(system.matrix @ ur - system.rhs) ** 2)
        den_sq += float((np.linalg.norm(system.matrix, ord=np.inf)
                         * np.linalg.norm(ur)
                         + np.linalg.norm(system.rhs)) ** 2)
    if den_sq == 0.0:
        return 0.0
    return float(np.sqrt(num_sq / den_sq))


def solve_linearized(u_base: HarmonicField, f_dir: HarmonicField,
                     model: ValidatedModel, kind: str,
                     tol: float = 1e-12, max_iter: int = 200,
                     include_third_order_term: bool = True) -> HarmonicField:
    """Solve the linearized periodic equation around a converged state.

    The cross-harmonic coupling from the time-varying coefficient is applied
    pseudospectrally; the decoupled per-harmonic solves act as the
    preconditioner of a fixed-point iteration (convergent in the same
    small-data regime as the nonlinear solver).

    With include_third_order_term=False the relaxation term is dropped from
    the linearized operator (the second-order linearization variant).
    """
    from .nonlinear import eval_bilinear

    lin_model = model
    if not include_third_order_term:
        lin_model = model.with_params(model.params.with_tau(0.0))

    grid, p = model.grid, model.params
    base2 = 2.0 * u_base
    u = solve_linear_mgt(f_dir, lin_model)
    if u_base.amplitude() == 0.0:
        return u
    prev_update = None
    for it in range(1, max_iter + 1):
        coupling = eval_bilinear(base2, u, kind, model)
        u_new = solve_linear_mgt(f_dir + coupling, lin_model)
        update = l2l2_norm(u_new - u, grid, p.omega, p.T)
        scale = max(l2l2_norm(u_new, grid, p.omega, p.T), 1e-300)
        u = u_new
        if update <= tol * scale:
            coupling = eval_bilinear(base2, u, kind, model)
            res = linear_residual(u, f_dir + coupling, lin_model)
            if res > RESIDUAL_RTOL:
                raise NonConvergedIteration(
                    f"linearized solve residual {res:.3e} > {RESIDUAL_RTOL}",
                    iterations=it, residual=res)
            return u
        if prev_update is not None and update >= prev_update:
            raise NonConvergedIteration(
                "linearized coupling iteration stagnated "
                f"(update {update:.3e} after {it} iterations)",
                iterations=it, residual=update / scale)
        prev_update = update
    raise NonConvergedIteration(
        f"linearized solve did not converge in {max_iter} iterations",
        iterations=max_iter, residual=None)
