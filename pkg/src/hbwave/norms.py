"""Discrete space-time norms of harmonic fields.

Time integration uses Parseval with the one-sided convention: weight 1 for
the mean mode and 2 for m >= 1, so that
||d_t^k u||^2_{L2(0,T;X)} = T * sum_m w_m (m omega)^{2k} ||u_m||_X^2.
"""
from __future__ import annotations

import numpy as np

from .model import Grid, HarmonicField
from .spatial import gradient, l2_norm, laplacian_fd


def parseval_weights(M: int) -> np.ndarray:
    w = np.full(M + 1, 2.0)
    w[0] = 1.0
    return w


def time_space_norm_sq(u: HarmonicField, grid: Grid, omega: float, T: float,
                       t_order: int = 0, spatial=None) -> float:
    """||d_t^k u||^2_{L2(0,T;X)} where X is given by `spatial` (default L2)."""
    w = parseval_weights(u.M)
    m = np.arange(u.M + 1)
    total = 0.0
    for k in range(u.M + 1):
        c = u.coeffs[k]
        if spatial == "H1_semi":
            val = l2_norm(gradient(c, grid), grid) ** 2
        elif spatial == "laplacian":
            val = l2_norm(laplacian_fd(c, grid), grid) ** 2
        elif spatial == "grad_laplacian":
            val = l2_norm(gradient(laplacian_fd(c, grid), grid), grid) ** 2
        else:
            val = l2_norm(c, grid) ** 2
        total += w[k] * (m[k] * omega) ** (2 * t_order) * val
    return T * total


def l2l2_norm(u: HarmonicField, grid: Grid, omega: float, T: float) -> float:
    return float(np.sqrt(time_space_norm_sq(u, grid, omega, T, 0)))


def u0lo_norm(u: HarmonicField, grid: Grid, omega: float, T: float) -> float:
    """Discrete H^2(L^2) + H^1(H^1) norm (tau-independent low energy)."""
    sq = 0.0
    for k in range(3):
        sq += time_space_norm_sq(u, grid, omega, T, k)
    for k in range(2):
        sq += time_space_norm_sq(u, grid, omega, T, k, spatial="H1_semi")
    return float(np.sqrt(sq))


def u0me_norm(u: HarmonicField, grid: Grid, omega: float, T: float) -> float:
    """Discrete H^2(H^1) + H^1(L^2 with Laplacian) norm (medium level)."""
    sq = 0.0
    for k in range(3):
        sq += time_space_norm_sq(u, grid, omega, T, k)
        sq += time_space_norm_sq(u, grid, omega, T, k, spatial="H1_semi")
    for k in range(2):
        sq += time_space_norm_sq(u, grid, omega, T, k, spatial="laplacian")
    return float(np.sqrt(sq))
