"""Synchronous per-firing-round iterations and a convergence-driven runner.

All round operations are pure: they take a state and return a new one.
Phase offsets are deliberately NOT reduced modulo 1 here; the iterations
are affine maps on R^n and the convergence theory lives there. Reduction
into [0,1) happens only at the event-simulator boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .bounds import desync_round_bound
from .objectives import desync_objective, multichannel_objective
from .problems import (
    MultichannelProblem,
    SingleChannelProblem,
    as_channel_vectors,
    as_phase_vector,
    wrap_bias,
)


@dataclass(frozen=True)
class DesyncState:
    phi: np.ndarray
    k: int = 0

    def __post_init__(self):
        object.__setattr__(self, "phi", as_phase_vector(self.phi))
        if self.k < 0:
            raise ValueError("iteration counter must be >= 0")


@dataclass(frozen=True)
class NesterovState:
    """Accelerated-iteration state; at k=0 the momentum vector equals phi."""

    phi: np.ndarray
    phi_prev: np.ndarray
    mu: np.ndarray
    k: int = 0

    def __post_init__(self):
        phi = as_phase_vector(self.phi)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "phi_prev", as_phase_vector(self.phi_prev, phi.size))
        object.__setattr__(self, "mu", as_phase_vector(self.mu, phi.size))
        if self.k == 0 and not np.array_equal(self.phi, self.mu):
            raise ValueError("at k=0 the momentum vector must equal phi")

    @classmethod
    def initial(cls, phi0) -> "NesterovState":
        phi0 = as_phase_vector(phi0)
        return cls(phi=phi0.copy(), phi_prev=phi0.copy(), mu=phi0.copy(), k=0)


@dataclass(frozen=True)
class MultichannelState:
    """Per-channel phase vectors; momentum memory covers Desync coordinates only
    (each mu vector mirrors phi at index 0, which carries no momentum)."""

    phis: tuple[np.ndarray, ...]
    mus: tuple[np.ndarray, ...] | None = None
    k: int = 0

    @classmethod
    def initial(cls, phis: Sequence, nesterov: bool = False) -> "MultichannelState":
        phis = tuple(as_phase_vector(p).copy() for p in phis)
        mus = tuple(p.copy() for p in phis) if nesterov else None
        return cls(phis=phis, mus=mus, k=0)

    def stacked(self) -> np.ndarray:
        return np.concatenate(self.phis)


@dataclass
class ConvergenceReport:
    rounds: int
    final_objective: float
    trace: np.ndarray
    converged: bool
    initial_objective: float


def _desync_map(phi: np.ndarray, alpha: float, d: np.ndarray) -> np.ndarray:
    """One synchronous round: midpoint pull toward both phase neighbours,
    with the wrap-around +-1 corrections carried by d."""
    return (1.0 - alpha) * phi + (alpha / 2.0) * (
        np.roll(phi, 1) + np.roll(phi, -1) - d
    )


def desync_round(state: DesyncState, problem: SingleChannelProblem) -> DesyncState:
    phi = as_phase_vector(state.phi, problem.n)
    nxt = _desync_map(phi, problem.alpha, wrap_bias(problem.n))
    return DesyncState(phi=nxt, k=state.k + 1)


def momentum_coefficient(k: int) -> float:
    """(k-1)/(k+2): zero at the first iteration, approaching 1."""
    return (k - 1) / (k + 2)


def fast_desync_round(state: NesterovState, problem: SingleChannelProblem) -> NesterovState:
    """Accelerated round: Desync map applied to the momentum vector, then the
    momentum extrapolation with coefficient (k-1)/(k+2)."""
    mu = as_phase_vector(state.mu, problem.n)
    k = state.k + 1
    phi_new = _desync_map(mu, problem.alpha, wrap_bias(problem.n))
    mu_new = phi_new + momentum_coefficient(k) * (phi_new - state.phi)
    return NesterovState(phi=phi_new, phi_prev=state.phi, mu=mu_new, k=k)


def _sync_desync_map(
    phis: list[np.ndarray], problem: MultichannelProblem, sources: list[np.ndarray]
) -> list[np.ndarray]:
    """Apply one joint round. `sources` supplies the vectors the Desync rows
    read (phis for the plain variant, momentum vectors for the fast one);
    the consensus row always reads current first-node values."""
    C = problem.num_channels
    beta = problem.beta
    out = []
    for c, n in enumerate(problem.channel_counts):
        src = sources[c]
        d = wrap_bias(n)
        nxt = (1.0 - 2.0 * beta) * src + beta * (
            np.roll(src, 1) + np.roll(src, -1) - d
        )
        nxt[0] = (1.0 - problem.gamma) * phis[c][0] + problem.gamma * phis[(c + 1) % C][0]
        out.append(nxt)
    return out


def sync_desync_round(
    state: MultichannelState, problem: MultichannelProblem
) -> MultichannelState:
    """One joint round: first nodes average with the next channel's first node;
    every other node performs the in-channel Desync update."""
    phis = as_channel_vectors(state.phis, problem)
    nxt = _sync_desync_map(phis, problem, phis)
    return MultichannelState(phis=tuple(nxt), mus=None, k=state.k + 1)


def fast_sync_desync_round(
    state: MultichannelState, problem: MultichannelProblem
) -> MultichannelState:
    """Joint round with in-channel acceleration: Desync coordinates run the
    momentum scheme, Sync coordinates keep the plain consensus update."""
    if state.mus is None:
        raise ValueError("state has no momentum memory; build it with nesterov=True")
    phis = as_channel_vectors(state.phis, problem)
    mus = as_channel_vectors(state.mus, problem)
    k = state.k + 1
    sources = []
    for c in range(problem.num_channels):
        src = mus[c].copy()
        src[0] = phis[c][0]
        sources.append(src)
    phi_new = _sync_desync_map(phis, problem, sources)
    coef = momentum_coefficient(k)
    mu_new = []
    for c in range(problem.num_channels):
        m = phi_new[c] + coef * (phi_new[c] - phis[c])
        m[0] = phi_new[c][0]
        mu_new.append(m)
    return MultichannelState(phis=tuple(phi_new), mus=tuple(mu_new), k=k)


def default_max_rounds(problem) -> int:
    """10x the worst-case plain bound, so runs always terminate.

    Multichannel problems reuse the single-channel formula with the total
    node count and alpha = 2*beta.
    """
    if isinstance(problem, MultichannelProblem):
        ref = SingleChannelProblem(
            n=problem.total_nodes, alpha=problem.alpha, epsilon=1e-4
        )
        return int(math.ceil(10.0 * desync_round_bound(ref)))
    return int(math.ceil(10.0 * desync_round_bound(problem)))


def _infer_round_op(state, problem) -> Callable:
    if isinstance(state, DesyncState):
        return desync_round
    if isinstance(state, NesterovState):
        return fast_desync_round
    if isinstance(state, MultichannelState):
        return fast_sync_desync_round if state.mus is not None else sync_desync_round
    raise TypeError(f"no round operation known for state type {type(state)!r}")


def _infer_objective(state, problem) -> Callable:
    if isinstance(state, MultichannelState):
        return lambda s, p: multichannel_objective(s.phis, p)
    return lambda s, p: desync_objective(s.phi, p)


def run_until_convergence(
    state,
    problem,
    epsilon: float | None = None,
    max_rounds: int | None = None,
    round_op: Callable | None = None,
    objective_fn: Callable | None = None,
) -> ConvergenceReport:
    """Iterate a round operation until the objective drops to epsilon.

    The objective is evaluated once per completed round (and once on the
    initial state, so a fixed-point start reports zero rounds). Aborts
    with a diagnostic if the objective ever becomes non-finite.
    """
    if epsilon is None:
        epsilon = problem.epsilon
    if max_rounds is None:
        max_rounds = default_max_rounds(problem)
    if max_rounds < 1:
        raise ValueError(f"max_rounds must be >= 1, got {max_rounds}")
    if round_op is None:
        round_op = _infer_round_op(state, problem)
    if objective_fn is None:
        objective_fn = _infer_objective(state, problem)

    initial = float(objective_fn(state, problem))
    if not np.isfinite(initial):
        raise FloatingPointError("non-finite objective on the initial state")
    if initial <= epsilon:
        return ConvergenceReport(
            rounds=0,
            final_objective=initial,
            trace=np.empty(0),
            converged=True,
            initial_objective=initial,
        )

    trace = []
    value = initial
    for k in range(1, max_rounds + 1):
        state = round_op(state, problem)
        value = float(objective_fn(state, problem))
        if not np.isfinite(value):
            raise FloatingPointError(
                f"non-finite objective at round {k} (alpha/beta too aggressive?)"
            )
        trace.append(value)
        if value <= epsilon:
            return ConvergenceReport(
                rounds=k,
                final_objective=value,
                trace=np.asarray(trace),
                converged=True,
                initial_objective=initial,
            )
    return ConvergenceReport(
        rounds=max_rounds,
        final_objective=value,
        trace=np.asarray(trace),
        converged=False,
        initial_objective=initial,
    )
