"""Vectorized trial batches for the sweep harness.

Trials are stacked along a leading batch axis; every per-trial arithmetic
operation is elementwise, so results are identical to running the round
engine one trial at a time (tests pin that equality). Seeding is per trial
(seed_base + trial index), which makes results invariant to batch size and
worker count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problems import wrap_bias
from .rounds import momentum_coefficient

TIE_JITTER = 1e-12


def sample_initial_phases(rng: np.random.Generator, n: int) -> np.ndarray:
    """Sorted i.i.d. uniform [0,1) offsets; exact ties get a seed-derived nudge."""
    phi = np.sort(rng.random(n))
    while np.any(np.diff(phi) == 0.0):
        dup = np.concatenate(([False], np.diff(phi) == 0.0))
        phi[dup] += TIE_JITTER * (1.0 + rng.random(int(dup.sum())))
        phi = np.sort(phi)
    return phi


def initial_phase_batch(n: int, trials: int, seed_base: int) -> np.ndarray:
    return np.stack(
        [sample_initial_phases(np.random.default_rng(seed_base + t), n) for t in range(trials)]
    )


def initial_multichannel_batch(
    channels: int, nodes_per_channel: int, trials: int, seed_base: int
) -> np.ndarray:
    """(trials, C, n) batch; each channel independently sorted uniform."""
    out = np.empty((trials, channels, nodes_per_channel))
    for t in range(trials):
        rng = np.random.default_rng(seed_base + t)
        for c in range(channels):
            out[t, c] = sample_initial_phases(rng, nodes_per_channel)
    return out


def batch_gap_objective(phi: np.ndarray) -> np.ndarray:
    """Single-channel objective along the last axis of a (trials, n) batch."""
    n = phi.shape[-1]
    r = np.roll(phi, -1, axis=-1) - phi
    r[..., -1] += 1.0
    r -= 1.0 / n
    return 0.5 * np.sum(r * r, axis=-1)


def batch_multichannel_objective(phi: np.ndarray) -> np.ndarray:
    """Joint objective for a (trials, C, n) batch."""
    n = phi.shape[-1]
    r = np.roll(phi, -1, axis=2) - phi
    r[..., -1] += 1.0
    r -= 1.0 / n
    per_channel = 0.5 * np.sum(r * r, axis=(1, 2))
    first = phi[:, :, 0]
    d = np.roll(first, -1, axis=1) - first
    return per_channel + 0.5 * np.sum(d * d, axis=1)


@dataclass
class TrialBatchResult:
    rounds: np.ndarray      # per-trial rounds to convergence (= max_rounds if not converged)
    converged: np.ndarray   # per-trial flag
    aborted: np.ndarray     # per-trial non-finite-objective flag

    @property
    def ok(self) -> bool:
        return bool(self.converged.all()) and not bool(self.aborted.any())


def _finalize(rounds, done, aborted, max_rounds) -> TrialBatchResult:
    rounds = rounds.copy()
    rounds[~done] = max_rounds
    return TrialBatchResult(rounds=rounds, converged=done & ~aborted, aborted=aborted)


def run_desync_batch(
    phi0: np.ndarray, alpha: float, epsilon: float, max_rounds: int
) -> TrialBatchResult:
    m, n = phi0.shape
    d = wrap_bias(n)
    phi = phi0.copy()
    rounds = np.zeros(m, dtype=np.int64)
    aborted = np.zeros(m, dtype=bool)
    done = batch_gap_objective(phi) <= epsilon
    for k in range(1, max_rounds + 1):
        if done.all():
            break
        phi = (1.0 - alpha) * phi + (alpha / 2.0) * (
            np.roll(phi, 1, axis=1) + np.roll(phi, -1, axis=1) - d
        )
        v = batch_gap_objective(phi)
        bad = ~done & ~np.isfinite(v)
        if bad.any():
            aborted |= bad
            done |= bad
            rounds[bad] = max_rounds
            phi[bad] = 0.0
        newly = ~done & (v <= epsilon)
        rounds[newly] = k
        done |= newly
    return _finalize(rounds, done, aborted, max_rounds)


def run_fast_desync_batch(
    phi0: np.ndarray, alpha: float, epsilon: float, max_rounds: int
) -> TrialBatchResult:
    m, n = phi0.shape
    d = wrap_bias(n)
    phi = phi0.copy()
    mu = phi0.copy()
    rounds = np.zeros(m, dtype=np.int64)
    aborted = np.zeros(m, dtype=bool)
    done = batch_gap_objective(phi) <= epsilon
    for k in range(1, max_rounds + 1):
        if done.all():
            break
        nxt = (1.0 - alpha) * mu + (alpha / 2.0) * (
            np.roll(mu, 1, axis=1) + np.roll(mu, -1, axis=1) - d
        )
        mu = nxt + momentum_coefficient(k) * (nxt - phi)
        phi = nxt
        v = batch_gap_objective(phi)
        bad = ~done & ~np.isfinite(v)
        if bad.any():
            aborted |= bad
            done |= bad
            rounds[bad] = max_rounds
            phi[bad] = 0.0
            mu[bad] = 0.0
        newly = ~done & (v <= epsilon)
        rounds[newly] = k
        done |= newly
    return _finalize(rounds, done, aborted, max_rounds)


def _joint_step(src: np.ndarray, first: np.ndarray, beta: float, gamma: float, d) -> np.ndarray:
    nxt = (1.0 - 2.0 * beta) * src + beta * (
        np.roll(src, 1, axis=2) + np.roll(src, -1, axis=2) - d
    )
    nxt[:, :, 0] = (1.0 - gamma) * first + gamma * np.roll(first, -1, axis=1)
    return nxt


def run_sync_desync_batch(
    phi0: np.ndarray,
    beta: float,
    gamma: float,
    epsilon: float,
    max_rounds: int,
    fast: bool = False,
) -> TrialBatchResult:
    """Joint multichannel batch on a (trials, C, n) array, optionally with
    in-channel acceleration (Sync coordinates never carry momentum)."""
    m, C, n = phi0.shape
    d = wrap_bias(n)
    phi = phi0.copy()
    mu = phi0.copy()
    rounds = np.zeros(m, dtype=np.int64)
    aborted = np.zeros(m, dtype=bool)
    done = batch_multichannel_objective(phi) <= epsilon
    for k in range(1, max_rounds + 1):
        if done.all():
            break
        if fast:
            src = mu.copy()
            src[:, :, 0] = phi[:, :, 0]
            nxt = _joint_step(src, phi[:, :, 0], beta, gamma, d)
            mu = nxt + momentum_coefficient(k) * (nxt - phi)
            mu[:, :, 0] = nxt[:, :, 0]
            phi = nxt
        else:
            phi = _joint_step(phi, phi[:, :, 0], beta, gamma, d)
        v = batch_multichannel_objective(phi)
        bad = ~done & ~np.isfinite(v)
        if bad.any():
            aborted |= bad
            done |= bad
            rounds[bad] = max_rounds
            phi[bad] = 0.0
            mu[bad] = 0.0
        newly = ~done & (v <= epsilon)
        rounds[newly] = k
        done |= newly
    return _finalize(rounds, done, aborted, max_rounds)
