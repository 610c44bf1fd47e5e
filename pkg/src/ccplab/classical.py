"""Exact optimal classical value by exhaustive search over Bob's
message functions.

Bob sends m = msg(y0, y1) in Z_d; Alice answers with the pointwise-best
G for each (x0, x1, m).  Only the d^(2d) message functions are
enumerated; Alice's exponentially many responses collapse to a max per
cell.  All scoring is in scaled integers, no floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .game import GameSpec, LinearStrategy, build_payoff_kernel

__all__ = [
    "MessageFunction",
    "ClassicalSolution",
    "best_response",
    "classical_optimum",
    "linear_strategy_value",
    "SearchSpaceError",
]

# d^(2d) message functions; beyond d=6 the space is astronomically large
# and the bound 1/2 is already met by linear strategies.
_EXHAUSTIVE_LIMIT = 5


class SearchSpaceError(ValueError):
    pass


@dataclass(frozen=True)
class MessageFunction:
    """Bob's map (y0, y1) -> m, stored as table[y0][y1]."""

    d: int
    table: tuple[tuple[int, int], ...]

    def __call__(self, y0: int, y1: int) -> int:
        return self.table[y0][y1]

    def flat(self) -> tuple[int, ...]:
        """Lexicographic key: m(0,0), m(0,1), m(1,0), ..."""
        return tuple(m for row in self.table for m in row)

    @classmethod
    def from_flat(cls, d: int, flat) -> "MessageFunction":
        table = tuple((int(flat[2 * y0]), int(flat[2 * y0 + 1]))
                      for y0 in range(d))
        return cls(d, table)


@dataclass(frozen=True)
class ClassicalSolution:
    value: Fraction
    message: MessageFunction
    response: dict  # (x0, x1, m) -> G
    scaled_score: int
    ties: int  # message functions attaining the optimal score


def best_response(spec: GameSpec, msg: MessageFunction):
    """Pointwise-optimal Alice response to a fixed message function.

    Returns (scaled_score, response) where response[(x0, x1, m)] is the
    smallest maximizing G.
    """
    d = spec.d
    kernel = build_payoff_kernel(spec)
    response = {}
    total = 0
    for x0 in range(d):
        for x1 in range(2):
            for m in range(d):
                row = np.zeros(d, dtype=np.int64)
                for y0 in range(d):
                    for y1 in range(2):
                        if msg(y0, y1) == m:
                            row += kernel.entries[x0, x1, y0, y1]
                g = int(np.argmax(row))  # argmax takes the smallest G on ties
                response[(x0, x1, m)] = g
                total += int(row[g])
    return total, response


def _scores_for_tables(collapsed: np.ndarray, tables: np.ndarray, d: int) -> np.ndarray:
    """Scaled scores for a batch of message tables.

    ``tables`` has shape (N, 2d) in the flat() ordering.  Uses the
    shift structure of the kernel: for fixed (x1, m) Alice's score rows
    over x0 are cyclic shifts of one vector, so the batch score is
    d * sum over (x1, m) of max_g of the pooled collapsed row.
    """
    n = tables.shape[0]
    # collapsed rows in flat cell order (y0, y1): shape (2, 2d, d)
    rows = collapsed.transpose(1, 2, 0, 3).reshape(2 * d, 2, d).transpose(1, 0, 2)
    onehot = np.zeros((n, 2 * d, d), dtype=np.int64)
    np.put_along_axis(onehot, tables[:, :, None], 1, axis=2)
    # pooled[n, x1, m, g] = sum over cells with message m of collapsed row
    pooled = np.einsum("ncm,xcg->nxmg", onehot, rows)
    return d * pooled.max(axis=3).sum(axis=(1, 2))


def classical_optimum(spec: GameSpec, prune: bool = True,
                      allow_heavy: bool = False,
                      batch: int = 200_000) -> ClassicalSolution:
    """Exact maximum over all d^(2d) message functions.

    ``prune`` fixes msg(0,0) = 0: a global shift m -> m + c is absorbed
    by Alice, so one representative per shift orbit suffices and the
    lexicographically smallest optimal table has msg(0,0) = 0 anyway.
    d = 6 runs only with ``allow_heavy``; d >= 7 is refused.
    """
    d = spec.d
    if d > _EXHAUSTIVE_LIMIT + 1 or (d == _EXHAUSTIVE_LIMIT + 1 and not allow_heavy):
        raise SearchSpaceError(
            f"exhaustive classical search refused for d={d} "
            f"(d^(2d) = {d**(2*d)} message functions)")
    kernel = build_payoff_kernel(spec)
    cells = 2 * d
    free = cells - 1 if prune else cells
    total_count = d**free

    best_score = None
    best_index = None
    ties = 0
    radix = d ** np.arange(free - 1, -1, -1, dtype=np.int64)
    for start in range(0, total_count, batch):
        stop = min(start + batch, total_count)
        idx = np.arange(start, stop, dtype=np.int64)
        digits = (idx[:, None] // radix[None, :]) % d
        if prune:
            digits = np.concatenate(
                [np.zeros((len(idx), 1), dtype=np.int64), digits], axis=1)
        scores = _scores_for_tables(kernel.collapsed, digits, d)
        hi = int(scores.max())
        if best_score is None or hi > best_score:
            best_score = hi
            best_index = start + int(np.argmax(scores))
            ties = int(np.count_nonzero(scores == hi))
        elif hi == best_score:
            ties += int(np.count_nonzero(scores == hi))

    flat = [(best_index // int(r)) % d for r in radix]
    if prune:
        flat = [0] + flat
    msg = MessageFunction.from_flat(d, flat)
    scaled, response = best_response(spec, msg)
    assert scaled == best_score, "batch score disagrees with best_response"
    return ClassicalSolution(
        value=scaled * spec.normalization,
        message=msg,
        response=response,
        scaled_score=scaled,
        ties=ties * (d if prune else 1),
    )


def linear_strategy_value(spec: GameSpec, strat: LinearStrategy) -> Fraction:
    """Exact game value of G = x0 + y0 - b(y1) + a(x1) mod d."""
    d = spec.d
    kernel = build_payoff_kernel(spec)
    total = 0
    for x1 in range(2):
        for y0 in range(d):
            for y1 in range(2):
                g = (y0 - strat.b_map[y1] + strat.a_map[x1]) % d
                # summing over x0 shifts G and the kernel row together
                total += d * int(kernel.collapsed[x1, y0, y1, g])
    return total * spec.normalization
