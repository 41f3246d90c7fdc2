"""Objective functions and gradients for the desynchronization problems.

The single-channel objective measures half the squared deviation of every
consecutive phase gap (including the wrap-around gap) from the ideal 1/n.
The multichannel objective sums that per channel and adds a consensus
penalty on the first node of each channel against the next channel's first
node, cyclically.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .problems import (
    MultichannelProblem,
    SingleChannelProblem,
    as_channel_vectors,
    as_phase_vector,
    wrap_bias,
)


def gap_residual(phi: np.ndarray) -> np.ndarray:
    """Consecutive-gap residual: (phi[i+1] - phi[i]) - 1/n, with the wrap gap
    phi[0] + 1 - phi[n-1] in the last slot. Works on a trailing axis."""
    n = phi.shape[-1]
    r = np.roll(phi, -1, axis=-1) - phi
    r[..., -1] += 1.0
    r -= 1.0 / n
    return r


def desync_objective(phi, problem: SingleChannelProblem) -> float:
    """0.5 * || gap residual ||^2; zero exactly on the equispaced states."""
    phi = as_phase_vector(phi, problem.n)
    r = gap_residual(phi)
    return 0.5 * float(r @ r)


def desync_gradient(phi, problem: SingleChannelProblem) -> np.ndarray:
    """Gradient of the single-channel objective: Laplacian term plus wrap bias.

    Independent of the 1/n target term, which lies in the difference
    matrix's left null space.
    """
    phi = as_phase_vector(phi, problem.n)
    lap = 2.0 * phi - np.roll(phi, 1) - np.roll(phi, -1)
    return lap + wrap_bias(problem.n)


def _first_node_values(phis: list[np.ndarray]) -> np.ndarray:
    return np.array([p[0] for p in phis])


def multichannel_objective(phis: Sequence, problem: MultichannelProblem) -> float:
    """Sum of per-channel gap objectives plus the cyclic first-node consensus penalty."""
    phis = as_channel_vectors(phis, problem)
    total = 0.0
    for p in phis:
        r = gap_residual(p)
        total += 0.5 * float(r @ r)
    first = _first_node_values(phis)
    diffs = np.roll(first, -1) - first
    total += 0.5 * float(diffs @ diffs)
    return total


def multichannel_gradient_channel(
    c: int, phis: Sequence, problem: MultichannelProblem
) -> np.ndarray:
    """Gradient of the multichannel objective with respect to channel c's block."""
    phis = as_channel_vectors(phis, problem)
    C = problem.num_channels
    if not 0 <= c < C:
        raise ValueError(f"channel index {c} out of range [0, {C})")
    p = phis[c]
    n = p.size
    lap = 2.0 * p - np.roll(p, 1) - np.roll(p, -1)
    grad = lap + wrap_bias(n)
    first = _first_node_values(phis)
    coupling = 2.0 * first[c] - first[(c - 1) % C] - first[(c + 1) % C]
    grad[0] += coupling
    return grad
