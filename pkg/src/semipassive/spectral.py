"""Left Perron vectors of strongly connected Laplacians.

For a strongly connected digraph the Laplacian has a simple zero eigenvalue
whose left eigenvector ``mu`` is strictly positive. With ``M = diag(mu)`` the
symmetric matrix ``L^T M + M L`` is itself the Laplacian of an undirected
graph (weights ``mu_i a_ij``), hence positive semidefinite.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NoConvergence, NotStronglyConnected
from .graph import graph_from_laplacian, is_strongly_connected

TOL = 1e-10


@dataclass(frozen=True)
class SpectralCertificate:
    mu: np.ndarray
    min_sym_eig: float
    residual: float
    iterations: int = 0

    def lap_scale(self, lap) -> float:
        return float(np.max(np.sum(np.abs(lap), axis=1))) if np.size(lap) else 0.0

    def holds(self, lap, tol: float = TOL) -> bool:
        scale = self.lap_scale(lap)
        return (
            bool(np.all(self.mu > 0))
            and abs(self.mu.sum() - 1.0) <= 1e-12
            and self.residual <= tol * scale
            and self.min_sym_eig >= -tol * scale
        )

    def to_dict(self) -> dict:
        return {
            "mu": self.mu.tolist(),
            "min_sym_eig": self.min_sym_eig,
            "residual": self.residual,
            "iterations": self.iterations,
        }


def inf_norm(lap) -> float:
    lap = np.asarray(lap, dtype=float)
    return float(np.max(np.sum(np.abs(lap), axis=1))) if lap.size else 0.0


def left_null_vector(
    lap,
    *,
    start=None,
    max_iter: int = 50,
    tol: float = TOL,
    check_connectivity: bool = True,
) -> SpectralCertificate:
    """Normalized positive ``mu`` with ``mu^T L = 0``.

    Shifted inverse iteration on ``L^T``: the shift ``-eps ||L||`` sits next to
    the simple zero eigenvalue, so every solve contracts the other modes by
    roughly ``eps / |lambda_2|``. The default start is the all-ones vector.
    """
    lap = np.asarray(lap, dtype=float)
    if lap.ndim != 2 or lap.shape[0] != lap.shape[1]:
        raise DimensionMismatch(f"Laplacian must be square, got {lap.shape}")
    n = lap.shape[0]
    if check_connectivity and not is_strongly_connected(graph_from_laplacian(lap)):
        raise NotStronglyConnected("left Perron vector needs a strongly connected graph")
    scale = inf_norm(lap)
    if n == 1 or scale == 0.0:
        mu = np.full(n, 1.0 / n)
        return SpectralCertificate(mu, check_sym_psd(lap, mu), _residual(lap, mu), 0)

    shifted = lap.T + (1e-8 * scale) * np.eye(n)
    lu = scipy.linalg.lu_factor(shifted, check_finite=False)
    y = np.ones(n) if start is None else np.asarray(start, dtype=float).copy()
    y /= np.sum(y)
    for it in range(1, max_iter + 1):
        y = scipy.linalg.lu_solve(lu, y, check_finite=False)
        y /= np.sum(y)
        if _residual(lap, y) <= tol * scale:
            break
    else:
        raise NoConvergence(f"no left null vector after {max_iter} solves")
    # one extra solve pushes the residual down to round-off
    polished = scipy.linalg.lu_solve(lu, y, check_finite=False)
    polished /= np.sum(polished)
    if _residual(lap, polished) < _residual(lap, y):
        y = polished
    if np.any(y <= 0):
        raise NotStronglyConnected("left null vector has non-positive entries")
    return SpectralCertificate(y, check_sym_psd(lap, y), _residual(lap, y), it)


def _residual(lap, mu) -> float:
    return float(np.max(np.abs(mu @ lap))) if len(mu) else 0.0


def check_sym_psd(lap, mu) -> float:
    """Smallest eigenvalue of ``L^T M + M L`` with ``M = diag(mu)``."""
    lap = np.asarray(lap, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if lap.shape != (len(mu), len(mu)):
        raise DimensionMismatch(f"Laplacian {lap.shape} vs mu of length {len(mu)}")
    ml = mu[:, None] * lap
    return float(np.linalg.eigvalsh(ml + ml.T)[0])


def block_certificates(d) -> list[SpectralCertificate]:
    """One certificate per diagonal Laplacian part of a decomposition."""
    return [left_null_vector(lp) for lp in d.laplacian_parts]
