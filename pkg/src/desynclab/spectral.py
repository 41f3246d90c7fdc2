"""Block iteration matrix of the joint sync-desync update and its spectrum.

The stacked update is phi' = M phi + b. Permuting Desync coordinates first
block-triangularizes M, so its eigenvalues are those of an (n-1)x(n-1)
tridiagonal Toeplitz block (one copy per channel) together with those of a
CxC circulant consensus block. Deflating the single eigenvalue 1 along its
left eigenvector (the indicator of Sync coordinates) certifies convergence
whenever the deflated spectral radius is below 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .problems import MultichannelProblem

# Dense eigensolves only; anything bigger is out of scope for this lab.
MAX_MATRIX_SIZE = 4096


def build_iteration_matrix(problem: MultichannelProblem) -> tuple[np.ndarray, np.ndarray]:
    """Assemble (M, b) for the stacked update phi' = M phi + b.

    Per channel: row 0 averages with the next channel's first node
    (weights 1-gamma / gamma); rows 1..n-1 are the in-channel Desync rows
    (beta, 1-2*beta, beta with cyclic neighbours); b holds beta at each
    channel's last node, the wrap-around correction.
    """
    counts = problem.channel_counts
    beta, gamma = problem.beta, problem.gamma
    N = problem.total_nodes
    if N > MAX_MATRIX_SIZE:
        raise ValueError(f"matrix size {N} exceeds supported maximum {MAX_MATRIX_SIZE}")
    offsets = problem.offsets()
    C = problem.num_channels
    M = np.zeros((N, N))
    b = np.zeros(N)
    for c, n in enumerate(counts):
        o = offsets[c]
        nxt = offsets[(c + 1) % C]
        M[o, o] = 1.0 - gamma
        M[o, nxt] += gamma
        for i in range(1, n):
            r = o + i
            M[r, r] += 1.0 - 2.0 * beta
            M[r, o + (i - 1)] += beta
            M[r, o + ((i + 1) % n)] += beta
        b[o + n - 1] = beta
    return M, b


def sync_selector(problem: MultichannelProblem) -> np.ndarray:
    """Indicator of the first node of every channel; a left eigenvector of M
    for the eigenvalue 1."""
    u = np.zeros(problem.total_nodes)
    u[problem.offsets()] = 1.0
    return u


def desync_block_eigenvalues(n: int, beta: float) -> np.ndarray:
    """Analytic spectrum of the (n-1)x(n-1) tridiagonal Toeplitz Desync block:
    1 - 2 beta + 2 beta cos(pi j / n), j = 1..n-1."""
    j = np.arange(1, n)
    return 1.0 - 2.0 * beta + 2.0 * beta * np.cos(np.pi * j / n)


def consensus_block_eigenvalues(C: int, gamma: float) -> np.ndarray:
    """Analytic spectrum of the CxC circulant consensus block:
    1 - gamma + gamma exp(2 pi i j / C), j = 1..C (j = C gives 1)."""
    j = np.arange(1, C + 1)
    return 1.0 - gamma + gamma * np.exp(2j * np.pi * j / C)


@dataclass
class SpectralReport:
    """Analytic and numeric spectral data for the joint iteration matrix."""

    eigenvalues_T: np.ndarray | None
    eigenvalues_R: np.ndarray | None
    eigenvalues_M: np.ndarray
    spectral_radius_deflated: float
    converges: bool
    max_spectrum_mismatch: float | None = None
    eigenvalue_one_multiplicity: int = 1


def _match_spectra(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """Largest pairing distance between two multisets of eigenvalues."""
    cost = np.abs(analytic[:, None] - numeric[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def spectral_report(problem: MultichannelProblem, one_tol: float = 1e-9) -> SpectralReport:
    """Numeric spectrum of M, the deflated spectral radius, and (for uniform
    channel sizes) the analytic block spectra with their agreement."""
    M, _ = build_iteration_matrix(problem)
    u = sync_selector(problem)
    N = problem.total_nodes
    eig_M = np.linalg.eigvals(M)
    # Deflate the simple eigenvalue 1 along its eigenpair (ones, u). The
    # left eigenvector must be scaled so that u.(ones) = 1, otherwise the
    # rank-one correction shifts the eigenvalue to 1 - C instead of 0.
    deflated = M - np.outer(np.ones(N), u) / float(u @ np.ones(N))
    rho = float(np.max(np.abs(np.linalg.eigvals(deflated))))
    multiplicity = int(np.sum(np.abs(eig_M - 1.0) <= one_tol))

    eig_T = eig_R = None
    mismatch = None
    if problem.is_uniform:
        n = problem.channel_counts[0]
        C = problem.num_channels
        eig_T = desync_block_eigenvalues(n, problem.beta)
        eig_R = consensus_block_eigenvalues(C, problem.gamma)
        analytic = np.concatenate([np.tile(eig_T.astype(complex), C), eig_R])
        mismatch = _match_spectra(analytic, eig_M)

    return SpectralReport(
        eigenvalues_T=eig_T,
        eigenvalues_R=eig_R,
        eigenvalues_M=eig_M,
        spectral_radius_deflated=rho,
        converges=rho < 1.0,
        max_spectrum_mismatch=mismatch,
        eigenvalue_one_multiplicity=multiplicity,
    )
