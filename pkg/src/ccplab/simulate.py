"""Monte Carlo cross-validation: play a strategy round by round,
sampling referee inputs uniformly and measurement outcomes from the
Born rule, and score with the payoff kernel.

The empirical mean payoff estimates the game value; the returned
standard error makes 4-sigma agreement checks possible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bell import EntangledStrategy
from .game import GameSpec, build_payoff_kernel
from .pm import PrepareMeasureStrategy
from .serialize import ClassicalStrategy

__all__ = ["SimulationResult", "simulate", "simulate_policy"]


@dataclass(frozen=True)
class SimulationResult:
    rounds: int
    mean: float
    stderr: float

    def within_sigma(self, target: float, sigmas: float = 4.0) -> bool:
        spread = max(self.stderr, 1e-15)
        return abs(self.mean - target) <= sigmas * spread


def _summarize(payoffs: np.ndarray) -> SimulationResult:
    n = len(payoffs)
    mean = float(np.mean(payoffs))
    stderr = float(np.std(payoffs, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return SimulationResult(rounds=n, mean=mean, stderr=stderr)


def _sample_inputs(d: int, rounds: int, rng: np.random.Generator):
    x0 = rng.integers(0, d, size=rounds)
    x1 = rng.integers(0, 2, size=rounds)
    y0 = rng.integers(0, d, size=rounds)
    y1 = rng.integers(0, 2, size=rounds)
    return x0, x1, y0, y1


def _sample_rows(dist: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF sample one outcome per row of a stack of pmfs."""
    cum = np.cumsum(dist, axis=-1)
    cum /= cum[..., -1:]
    u = rng.random(dist.shape[0])
    return (u[:, None] < cum).argmax(axis=1)


def simulate(spec: GameSpec, strategy, rounds: int,
             rng: np.random.Generator) -> SimulationResult:
    """Play ``rounds`` games with a classical, prepare-and-measure, or
    entangled strategy; payoffs are kernel entries rescaled by 1/(d-1)
    so their input-average is the game value."""
    d = spec.d
    kernel = build_payoff_kernel(spec)
    scale = float(spec.scale)
    x0s, x1s, y0s, y1s = _sample_inputs(d, rounds, rng)

    if isinstance(strategy, ClassicalStrategy):
        msg = np.array(strategy.message.table)  # [y0][y1]
        resp = np.zeros((d, 2, d), dtype=np.int64)
        for (x0, x1, m), g in strategy.response.items():
            resp[x0, x1, m] = g
        gs = resp[x0s, x1s, msg[y0s, y1s]]
    elif isinstance(strategy, PrepareMeasureStrategy):
        # outcome distributions per (x1, y0, y1) are x0-independent
        dist = np.empty((2, d, 2, d))
        for x1 in range(2):
            for (y0, y1), psi in strategy.states.items():
                for a, m in enumerate(strategy.measurements[x1].elements):
                    dist[x1, y0, y1, a] = max(
                        0.0, float(np.real(psi.conj() @ (m @ psi))))
        outcomes = _sample_rows(dist[x1s, y0s, y1s], rng)
        gs = (outcomes + x0s) % d
    elif isinstance(strategy, EntangledStrategy):
        # joint outcome distributions per Bell setting pair (x, y)
        psi = strategy.state.reshape(d, d)
        dist = np.empty((2, 2, d * d))
        for x in range(2):
            for y in range(2):
                p = np.empty((d, d))
                for a, ma in enumerate(strategy.alice[x].elements):
                    phi = ma @ psi
                    for b, mb in enumerate(strategy.bob[y].elements):
                        p[a, b] = max(0.0, float(np.real(
                            np.sum(phi.conj() * (psi @ mb.T)))))
                dist[x, y] = (p / p.sum()).reshape(-1)
        # Bob measures Bell setting 1 - y1 and messages m = y0 - b
        joint = _sample_rows(dist[x1s, 1 - y1s], rng)
        a_out, b_out = np.divmod(joint, d)
        gs = (x0s + (y0s - b_out) + a_out) % d
    else:
        raise TypeError(f"cannot simulate {type(strategy).__name__}")

    payoffs = kernel.entries[x0s, x1s, y0s, y1s, gs] / scale
    return _summarize(payoffs.astype(float))


def simulate_policy(spec: GameSpec, rounds: int,
                    rng: np.random.Generator) -> SimulationResult:
    """Uniform-random-output baseline; the mean payoff is zero because
    every kernel row is balanced."""
    d = spec.d
    kernel = build_payoff_kernel(spec)
    x0s, x1s, y0s, y1s = _sample_inputs(d, rounds, rng)
    gs = rng.integers(0, d, size=rounds)
    payoffs = kernel.entries[x0s, x1s, y0s, y1s, gs] / float(spec.scale)
    return _summarize(payoffs.astype(float))
