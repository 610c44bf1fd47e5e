"""Lower bounds on the game value with a transmitted d-dimensional
quantum system, by alternating optimization.

Bob encodes (y0, y1) into a pure state, Alice measures one of two
d-outcome POVMs chosen by x1 and outputs her result plus x0.  State
updates are closed-form (top eigenvector of the per-input score
operator); measurement updates are one SDP per setting.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .game import GameSpec
from .linalg import complex_to_real, hermitize, real_to_complex, top_eigenpair
from .sdp import SdpProblem, solve_sdp

__all__ = [
    "Povm",
    "PrepareMeasureStrategy",
    "SeesawTrace",
    "evaluate_pm",
    "collapsed_objective",
    "update_states",
    "update_measurements",
    "run_pm",
    "run_pm_frozen",
    "canonical_measurement_vectors",
]

POVM_TOL = 1e-9


@dataclass(frozen=True)
class Povm:
    """d Hermitian PSD elements summing to the identity."""

    d: int
    elements: tuple

    def __post_init__(self):
        if len(self.elements) != self.d:
            raise ValueError(f"expected {self.d} POVM elements")

    def validate(self, tol: float = POVM_TOL) -> None:
        total = np.zeros((self.d, self.d), dtype=complex)
        for m in self.elements:
            if np.min(np.linalg.eigvalsh(hermitize(m))) < -tol:
                raise ValueError("POVM element not PSD within tolerance")
            total += m
        dev = np.linalg.norm(total - np.eye(self.d), ord=2)
        if dev > tol:
            raise ValueError(f"POVM completeness violated by {dev}")

    @classmethod
    def projective(cls, vectors: np.ndarray) -> "Povm":
        """Rank-1 projectors onto the columns of a unitary matrix."""
        d = vectors.shape[0]
        els = tuple(np.outer(vectors[:, a], vectors[:, a].conj())
                    for a in range(d))
        return cls(d, els)


@dataclass(frozen=True)
class PrepareMeasureStrategy:
    """2d pure states indexed by (y0, y1) plus one POVM per x1."""

    d: int
    states: dict  # (y0, y1) -> complex unit vector
    measurements: tuple  # (Povm for x1=0, Povm for x1=1)

    def validate(self) -> None:
        for key, psi in self.states.items():
            if abs(np.linalg.norm(psi) - 1.0) > 1e-12:
                raise ValueError(f"state {key} not normalized")
        for povm in self.measurements:
            povm.validate()


@dataclass
class SeesawTrace:
    seed: int
    restart: int
    objectives: list = field(default_factory=list)
    converged: bool = False

    def check_monotone(self, tol: float = 1e-9) -> bool:
        obj = self.objectives
        return all(obj[i + 1] >= obj[i] - tol for i in range(len(obj) - 1))


def _outcome_shifts(spec: GameSpec, x1: int, y1: int):
    """(winning outcome offset, losing outcome offset) per k, relative to
    y0: Alice wins with a = y0 + win_k and loses with a = y0 + lose_k."""
    sign = (-1) ** (x1 + y1)
    base = -x1 * y1
    for k in range(spec.kmax):
        yield k, (base - sign * k) % spec.d, (base + sign * (k + 1)) % spec.d


def _score_operator(spec: GameSpec, measurements, y0: int, y1: int) -> np.ndarray:
    """R_{y0,y1} = (1/4d) sum_{x1,k} c_k (M^{x1}_{win} - M^{x1}_{lose})."""
    d = spec.d
    r = np.zeros((d, d), dtype=complex)
    for x1 in range(2):
        els = measurements[x1].elements
        for k, win, lose in _outcome_shifts(spec, x1, y1):
            ck = float(spec.coefficients[k])
            r += ck * (els[(y0 + win) % d] - els[(y0 + lose) % d])
    return r / (4 * d)


def collapsed_objective(spec: GameSpec, strat: PrepareMeasureStrategy) -> float:
    """Game value with the x0 sum eliminated (the success event does not
    depend on x0)."""
    total = 0.0
    for (y0, y1), psi in strat.states.items():
        r = _score_operator(spec, strat.measurements, y0, y1)
        total += float(np.real(np.vdot(psi, r @ psi)))
    return total


def evaluate_pm(spec: GameSpec, strat: PrepareMeasureStrategy) -> float:
    """Game value computed from the full sum over all 4d^2 inputs and
    Born probabilities P(a | x1, psi) = <psi|M^{x1}_a|psi>."""
    d = spec.d
    probs = {}
    for (y0, y1), psi in strat.states.items():
        for x1 in range(2):
            probs[(y0, y1, x1)] = np.array([
                float(np.real(np.vdot(psi, strat.measurements[x1].elements[a] @ psi)))
                for a in range(d)])
    total = 0.0
    for y0 in range(d):
        for y1 in range(2):
            for x0 in range(d):
                for x1 in range(2):
                    p = probs[(y0, y1, x1)]
                    sign = (-1) ** (x1 + y1)
                    base = x0 + y0 - x1 * y1
                    for k, ck in enumerate(spec.coefficients):
                        f = (base - sign * k) % d
                        h = (base + sign * (k + 1)) % d
                        # Alice outputs G = a + x0
                        total += float(ck) * (p[(f - x0) % d] - p[(h - x0) % d])
    return total / (4 * d**2)


def update_states(spec: GameSpec, measurements) -> dict:
    """Optimal pure state per (y0, y1) for fixed measurements: the top
    eigenvector of the score operator."""
    states = {}
    for y0 in range(spec.d):
        for y1 in range(2):
            r = _score_operator(spec, measurements, y0, y1)
            _, v = top_eigenpair(r)
            states[(y0, y1)] = v
    return states


def _povm_sdp(d: int, targets) -> SdpProblem:
    """maximize sum_a <M_a, F_a> over POVMs, via the real embedding.

    ``targets`` is a list of d complex Hermitian matrices F_a.  Blocks
    are the embedded M_a; constraints pin sum_a M_a = I entrywise.
    """
    n = 2 * d
    C = [complex_to_real(hermitize(f)) for f in targets]
    constraints = _povm_constraints(d)
    return SdpProblem(block_sizes=[n] * d, C=C, constraints=constraints,
                      sense="max")


_POVM_CONSTRAINT_CACHE: dict = {}


def _povm_constraints(d: int) -> list:
    """Completeness constraints for a d-outcome POVM (cached per d)."""
    if d in _POVM_CONSTRAINT_CACHE:
        return _POVM_CONSTRAINT_CACHE[d]
    constraints = []
    for i in range(d):
        for j in range(i, d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] += 0.5
            e[j, i] += 0.5
            emb = complex_to_real(e)
            rhs = float(np.sum(emb * complex_to_real(np.eye(d)))) if i == j else 0.0
            constraints.append(({blk: emb for blk in range(d)}, rhs))
            if i != j:
                o = np.zeros((d, d), dtype=complex)
                o[i, j] += 0.5j
                o[j, i] += -0.5j
                embo = complex_to_real(o)
                constraints.append(({blk: embo for blk in range(d)}, 0.0))
    _POVM_CONSTRAINT_CACHE[d] = constraints
    return constraints


def _solve_povm(d: int, targets, tol: float = 1e-10):
    """Best POVM for a linear objective; returns (Povm, objective)."""
    problem = _povm_sdp(d, targets)
    # completeness constraints are independent by construction
    sol = solve_sdp(problem, tol=tol, presolve=False)
    if sol.status == "infeasible-detected":
        raise RuntimeError("POVM subproblem reported infeasible")
    elements = tuple(real_to_complex(x) for x in sol.X)
    # embedded inner products double the complex ones
    return Povm(d, elements), 0.5 * sol.primal_obj


def update_measurements(spec: GameSpec, states: dict) -> tuple:
    """Best POVM pair for fixed states: one SDP per setting."""
    d = spec.d
    out = []
    for x1 in range(2):
        targets = [np.zeros((d, d), dtype=complex) for _ in range(d)]
        for (y0, y1), psi in states.items():
            rho = np.outer(psi, psi.conj())
            for k, win, lose in _outcome_shifts(spec, x1, y1):
                ck = float(spec.coefficients[k])
                targets[(y0 + win) % d] += ck * rho / (4 * d)
                targets[(y0 + lose) % d] -= ck * rho / (4 * d)
        povm, _ = _solve_povm(d, targets)
        out.append(povm)
    return tuple(out)


def canonical_measurement_vectors(d: int, alpha: float) -> np.ndarray:
    """Fourier-type orthonormal basis with phase offset alpha; column j is
    the outcome-j vector (1/sqrt d) sum_l w^{l(-j+alpha)} |l>."""
    omega = np.exp(2j * np.pi / d)
    l = np.arange(d)[:, None]
    j = np.arange(d)[None, :]
    return omega ** (l * (-j + alpha)) / np.sqrt(d)


def frozen_measurements(d: int) -> tuple:
    """The canonical pair of measurement bases (phases +1/4 and -1/4)."""
    return (Povm.projective(canonical_measurement_vectors(d, 0.25)),
            Povm.projective(canonical_measurement_vectors(d, -0.25)))


def classical_embedding(spec: GameSpec) -> PrepareMeasureStrategy:
    """Computational-basis encoding of the classical linear strategy
    (states |y0>, computational measurements); value exactly 1/2."""
    d = spec.d
    eye = np.eye(d, dtype=complex)
    states = {(y0, y1): eye[:, y0].copy()
              for y0 in range(d) for y1 in range(2)}
    povm = Povm.projective(eye)
    return PrepareMeasureStrategy(d, states, (povm, povm))


def _random_strategy(spec: GameSpec, rng: np.random.Generator) -> PrepareMeasureStrategy:
    d = spec.d
    states = {}
    for y0 in range(d):
        for y1 in range(2):
            v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
            states[(y0, y1)] = v / np.linalg.norm(v)
    povms = []
    for _ in range(2):
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        q, _ = np.linalg.qr(g)
        povms.append(Povm.projective(q))
    return PrepareMeasureStrategy(d, states, tuple(povms))


def _seesaw(spec: GameSpec, strat: PrepareMeasureStrategy, trace: SeesawTrace,
            max_iters: int, conv_tol: float) -> PrepareMeasureStrategy:
    value = collapsed_objective(spec, strat)
    trace.objectives.append(value)
    measurements = strat.measurements
    states = strat.states
    for _ in range(max_iters):
        states = update_states(spec, measurements)
        measurements = update_measurements(spec, states)
        new_value = collapsed_objective(
            spec, PrepareMeasureStrategy(spec.d, states, measurements))
        trace.objectives.append(new_value)
        if abs(new_value - value) < conv_tol:
            trace.converged = True
            value = new_value
            break
        value = new_value
    return PrepareMeasureStrategy(spec.d, states, measurements)


def run_pm(spec: GameSpec, restarts: int = 20, seed: int = 0,
           max_iters: int = 200, conv_tol: float = 1e-8):
    """Best-of-restarts see-saw; returns (value, strategy, traces).

    Restart 0 is the classical embedding, restart 1 the canonical
    frozen-basis warm start; the rest are random.  The result is a
    lower bound on the prepare-and-measure optimum.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    d = spec.d
    best_value = -np.inf
    best_strat = None
    traces = []
    for r in range(restarts):
        if r == 0:
            strat = classical_embedding(spec)
        elif r == 1:
            meas = frozen_measurements(d)
            strat = PrepareMeasureStrategy(d, update_states(spec, meas), meas)
        else:
            strat = _random_strategy(spec, np.random.default_rng(seed + r))
        trace = SeesawTrace(seed=seed, restart=r)
        strat = _seesaw(spec, strat, trace, max_iters, conv_tol)
        traces.append(trace)
        value = trace.objectives[-1]
        if value > best_value:
            best_value = value
            best_strat = strat
    return best_value, best_strat, traces


def run_pm_frozen(spec: GameSpec, seed: int = 0):
    """One-shot optimum with measurements frozen to the canonical bases:
    states are closed-form top eigenvectors, no iteration needed."""
    meas = frozen_measurements(spec.d)
    states = update_states(spec, meas)
    strat = PrepareMeasureStrategy(spec.d, states, meas)
    return collapsed_objective(spec, strat), strat
