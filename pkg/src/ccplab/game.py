"""Core definitions of the d-dimensional guessing game and the matching
CGLMP Bell functional.

Everything here is exact: game payoffs are stored as scaled integers
(d-1)*c_k so that classical scores are integers, and the Bell-side
coefficients are Fractions.  Behaviors (conditional distributions
P(a,b|x,y)) are the only floating-point objects.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

__all__ = [
    "GameSpec",
    "GameInput",
    "PayoffKernel",
    "CglmpTensor",
    "Behavior",
    "LinearStrategy",
    "coefficients",
    "target_values",
    "build_payoff_kernel",
    "build_cglmp_tensor",
    "cglmp_value",
    "game_value_of_behavior",
    "delta_of_output_policy",
]


def coefficients(d: int) -> tuple[Fraction, ...]:
    """Payoff coefficients c_k = 1 - 2k/(d-1) for k = 0..floor(d/2)-1."""
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    if d == 2:
        return (Fraction(1),)
    return tuple(1 - Fraction(2 * k, d - 1) for k in range(d // 2))


@dataclass(frozen=True)
class GameSpec:
    """Dimension and derived constants of the game."""

    d: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"dimension must be >= 2, got {self.d}")

    @property
    def kmax(self) -> int:
        return self.d // 2

    @property
    def coefficients(self) -> tuple[Fraction, ...]:
        return coefficients(self.d)

    @property
    def scale(self) -> int:
        """Multiplier (d-1) turning every c_k into the integer d-1-2k."""
        return self.d - 1

    @property
    def scaled_weights(self) -> tuple[int, ...]:
        return tuple(self.d - 1 - 2 * k for k in range(self.kmax))

    @property
    def normalization(self) -> Fraction:
        """Converts a total scaled score into the game value."""
        return Fraction(1, 4 * self.d**2 * (self.d - 1))


@dataclass(frozen=True)
class GameInput:
    """One referee draw: x0, y0 in Z_d and bits x1, y1."""

    x0: int
    x1: int
    y0: int
    y1: int

    def validate(self, d: int) -> None:
        if not (0 <= self.x0 < d and 0 <= self.y0 < d):
            raise ValueError(f"x0/y0 out of range for d={d}: {self}")
        if self.x1 not in (0, 1) or self.y1 not in (0, 1):
            raise ValueError(f"x1/y1 must be bits: {self}")


def all_inputs(d: int):
    """All 4*d^2 referee draws, lexicographic in (x0, x1, y0, y1)."""
    return [
        GameInput(x0, x1, y0, y1)
        for x0 in range(d)
        for x1 in range(2)
        for y0 in range(d)
        for y1 in range(2)
    ]


def target_values(spec: GameSpec, inp: GameInput, k: int) -> tuple[int, int]:
    """The winning output f_k and the penalized output h_k for one input."""
    if not 0 <= k < spec.kmax:
        raise ValueError(f"k={k} out of range for d={spec.d}")
    d = spec.d
    base = inp.x0 + inp.y0 - inp.x1 * inp.y1
    sign = (-1) ** (inp.x1 + inp.y1)
    f = (base - sign * k) % d
    h = (base + sign * (k + 1)) % d
    return f, h


@dataclass(frozen=True)
class PayoffKernel:
    """Scaled-integer payoff table w(G | input).

    ``entries[x0, x1, y0, y1, G]`` is +(d-1-2k) when G = f_k, -(d-1-2k)
    when G = h_k and 0 otherwise.  ``collapsed[x1, y0, y1, g]`` is the
    same table with G = g + x0; it is x0-independent because f_k - x0
    and h_k - x0 are.
    """

    d: int
    entries: np.ndarray
    collapsed: np.ndarray
    normalization: Fraction

    def payoff(self, inp: GameInput, g: int) -> int:
        return int(self.entries[inp.x0, inp.x1, inp.y0, inp.y1, g])


def build_payoff_kernel(spec: GameSpec) -> PayoffKernel:
    d = spec.d
    collapsed = np.zeros((2, d, 2, d), dtype=np.int64)
    for x1 in range(2):
        for y0 in range(d):
            for y1 in range(2):
                sign = (-1) ** (x1 + y1)
                base = y0 - x1 * y1
                for k, w in enumerate(spec.scaled_weights):
                    collapsed[x1, y0, y1, (base - sign * k) % d] += w
                    collapsed[x1, y0, y1, (base + sign * (k + 1)) % d] -= w
    entries = np.zeros((d, 2, d, 2, d), dtype=np.int64)
    for x0 in range(d):
        entries[x0] = np.roll(collapsed, x0, axis=-1)
    return PayoffKernel(d=d, entries=entries, collapsed=collapsed,
                        normalization=spec.normalization)


@dataclass(frozen=True)
class Behavior:
    """Conditional distribution P(a,b|x,y), stored as probs[a, b, x, y]."""

    d: int
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.shape != (self.d, self.d, 2, 2):
            raise ValueError(f"behavior shape {p.shape} != (d, d, 2, 2)")
        if np.min(p) < -1e-12:
            raise ValueError(f"negative probability {np.min(p)}")
        totals = p.sum(axis=(0, 1))
        if np.max(np.abs(totals - 1.0)) > 1e-12:
            raise ValueError(f"unnormalized behavior, totals {totals}")
        object.__setattr__(self, "probabilities", p)

    @classmethod
    def uniform(cls, d: int) -> "Behavior":
        return cls(d, np.full((d, d, 2, 2), 1.0 / d**2))

    @classmethod
    def deterministic(cls, d: int, a_of_x, b_of_y) -> "Behavior":
        """Local deterministic point: a = a_of_x[x], b = b_of_y[y]."""
        p = np.zeros((d, d, 2, 2))
        for x in range(2):
            for y in range(2):
                p[a_of_x[x], b_of_y[y], x, y] = 1.0
        return cls(d, p)

    @classmethod
    def random(cls, d: int, rng: np.random.Generator) -> "Behavior":
        p = rng.random((d, d, 2, 2))
        p /= p.sum(axis=(0, 1), keepdims=True)
        return cls(d, p)


@dataclass(frozen=True)
class CglmpTensor:
    """Bell-functional coefficients c_{a,b,x,y} with the 1/4 input prior
    folded in; coeffs[a, b, x, y].  Local deterministic strategies score
    at most 1/2.
    """

    d: int
    coefficients: np.ndarray
    classical_bound: Fraction = field(default=Fraction(1, 2))

    def evaluate(self, beh: Behavior) -> float:
        return cglmp_value(self, beh)


def build_cglmp_tensor(d: int) -> CglmpTensor:
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    cks = coefficients(d)
    coeffs = np.zeros((d, d, 2, 2))
    for k, ck in enumerate(cks):
        w = float(ck) / 4.0
        for a in range(d):
            # (x,y)=(0,1): +c_k at b=a+k, -c_k at b=a-k-1
            coeffs[a, (a + k) % d, 0, 1] += w
            coeffs[a, (a - k - 1) % d, 0, 1] -= w
            # (x,y)=(0,0): +c_k at a=b+k, -c_k at a=b-k-1
            coeffs[(a + k) % d, a, 0, 0] += w
            coeffs[(a - k - 1) % d, a, 0, 0] -= w
            # (x,y)=(1,1): same event pattern as (0,0)
            coeffs[(a + k) % d, a, 1, 1] += w
            coeffs[(a - k - 1) % d, a, 1, 1] -= w
            # (x,y)=(1,0): +c_k at b=a+k+1, -c_k at b=a-k
            coeffs[a, (a + k + 1) % d, 1, 0] += w
            coeffs[a, (a - k) % d, 1, 0] -= w
    return CglmpTensor(d=d, coefficients=coeffs)


def cglmp_value(tensor: CglmpTensor, beh: Behavior) -> float:
    if tensor.d != beh.d:
        raise ValueError(f"dimension mismatch: {tensor.d} vs {beh.d}")
    return float(np.sum(tensor.coefficients * beh.probabilities))


def game_value_of_behavior(spec: GameSpec, beh: Behavior) -> float:
    """Game value of the protocol built on a bipartite behavior.

    Bob measures setting 1-y1, sends m = y0 - b mod d and Alice outputs
    G = x0 + m + a mod d.  The x0 average is a no-op (the success event
    is x0-free), so the value is a direct sum over (x1, y1, k, a, b).
    With this sign convention the result coincides with the Bell
    functional value of the same behavior.
    """
    if spec.d != beh.d:
        raise ValueError(f"dimension mismatch: {spec.d} vs {beh.d}")
    d = spec.d
    p = beh.probabilities
    total = 0.0
    for x1 in range(2):
        for y1 in range(2):
            pxy = p[:, :, x1, 1 - y1]
            sign = (-1) ** (x1 + y1)
            base = -x1 * y1
            for k, ck in enumerate(spec.coefficients):
                win = (base - sign * k) % d
                lose = (base + sign * (k + 1)) % d
                # G = f_k  <=>  a - b = win (mod d); similarly for h_k
                pw = sum(pxy[(win + b) % d, b] for b in range(d))
                pl = sum(pxy[(lose + b) % d, b] for b in range(d))
                total += float(ck) * (pw - pl) / 4.0
    return total


def delta_of_output_policy(spec: GameSpec, policy) -> Fraction | float:
    """Game value of an output policy, a map GameInput -> distribution
    over G (a bare int means a point mass).  Exact Fraction for
    deterministic integer policies, float otherwise.
    """
    kernel = build_payoff_kernel(spec)
    d = spec.d
    exact = True
    total_int = 0
    total_float = 0.0
    for inp in all_inputs(d):
        dist = policy(inp) if callable(policy) else policy[inp]
        row = kernel.entries[inp.x0, inp.x1, inp.y0, inp.y1]
        if isinstance(dist, (int, np.integer)):
            total_int += int(row[int(dist)])
            continue
        probs = np.asarray(dist, dtype=float)
        if probs.shape != (d,) or abs(probs.sum() - 1.0) > 1e-9:
            raise ValueError(f"unnormalized output distribution for {inp}")
        exact = False
        total_float += float(row @ probs)
    if exact:
        return total_int * spec.normalization
    return float((total_int + total_float) * spec.normalization)


@dataclass(frozen=True)
class LinearStrategy:
    """Shift-based classical strategy G = x0 + y0 - b(y1) + a(x1) mod d."""

    a_map: tuple[int, int]
    b_map: tuple[int, int]

    def output(self, d: int, inp: GameInput) -> int:
        return (inp.x0 + inp.y0 - self.b_map[inp.y1] + self.a_map[inp.x1]) % d
