"""Lower bounds on the game value when the parties share entanglement,
by alternating optimization over state and local measurements.

The protocol value equals the Bell-functional value of the measured
behavior, so the see-saw maximizes the functional directly: the state
update is closed-form (top eigenvector of the Bell operator) and each
party's measurement update is one POVM SDP per setting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .game import Behavior, CglmpTensor, GameSpec, build_cglmp_tensor
from .linalg import hermitize, top_eigenpair
from .pm import Povm, SeesawTrace, _solve_povm

__all__ = [
    "EntangledStrategy",
    "behavior_of",
    "bell_operator",
    "evaluate_entangled",
    "canonical_entangled_strategy",
    "update_state",
    "update_party",
    "run_bell",
]


@dataclass(frozen=True)
class EntangledStrategy:
    """Shared pure state on C^d x C^d plus two d-outcome POVMs per party."""

    d: int
    state: np.ndarray  # unit vector of length d*d
    alice: tuple  # (Povm for x=0, Povm for x=1)
    bob: tuple  # (Povm for y=0, Povm for y=1)

    def validate(self) -> None:
        if abs(np.linalg.norm(self.state) - 1.0) > 1e-12:
            raise ValueError("shared state not normalized")
        for povm in (*self.alice, *self.bob):
            povm.validate()


def behavior_of(strategy: EntangledStrategy) -> Behavior:
    """Measured behavior P(a,b|x,y) = <psi| A^x_a x B^y_b |psi>."""
    d = strategy.d
    psi = strategy.state.reshape(d, d)
    probs = np.zeros((d, d, 2, 2))
    for x in range(2):
        for y in range(2):
            for a, ma in enumerate(strategy.alice[x].elements):
                phi = ma @ psi
                for b, mb in enumerate(strategy.bob[y].elements):
                    probs[a, b, x, y] = max(
                        0.0, float(np.real(np.sum(phi.conj() * (psi @ mb.T)))))
    probs /= probs.sum(axis=(0, 1), keepdims=True)
    return Behavior(d, probs)


def bell_operator(tensor: CglmpTensor, alice: tuple, bob: tuple) -> np.ndarray:
    """W = sum_{a,b,x,y} c_{abxy} A^x_a x B^y_b on C^d x C^d."""
    d = tensor.d
    w = np.zeros((d * d, d * d), dtype=complex)
    for x in range(2):
        for y in range(2):
            for a in range(d):
                ma = alice[x].elements[a]
                for b in range(d):
                    c = tensor.coefficients[a, b, x, y]
                    if c != 0.0:
                        w += c * np.kron(ma, bob[y].elements[b])
    return hermitize(w)


def evaluate_entangled(spec: GameSpec,
                       strategy: EntangledStrategy) -> float:
    """Game value of the strategy (equals the Bell-functional value)."""
    tensor = build_cglmp_tensor(spec.d)
    return tensor.evaluate(behavior_of(strategy))


def update_state(tensor: CglmpTensor, alice: tuple, bob: tuple) -> np.ndarray:
    """Best shared state for fixed measurements."""
    _, v = top_eigenpair(bell_operator(tensor, alice, bob))
    return v


def _party_targets(tensor: CglmpTensor, state: np.ndarray, other: tuple,
                   party: str) -> list:
    """Per-setting score matrices F^s_o with objective sum_o <M_o, F^s_o>.

    For Alice, F^x_a = Tr_B[(I x sum_{y,b} c_{abxy} B^y_b) rho]; for Bob
    the roles are swapped.
    """
    d = tensor.d
    psi = state.reshape(d, d)
    out = []
    for s in range(2):
        targets = [np.zeros((d, d), dtype=complex) for _ in range(d)]
        for t in range(2):
            for o_other, m_other in enumerate(other[t].elements):
                if party == "alice":
                    # Tr_B[(I x B) rho] = psi B^T psi^dag
                    red = psi @ m_other.T @ psi.conj().T
                    coeffs = tensor.coefficients[:, o_other, s, t]
                else:
                    # Tr_A[(A x I) rho] = psi^T A^T psi^conj... as B-side op
                    red = psi.T @ m_other.T @ psi.conj()
                    coeffs = tensor.coefficients[o_other, :, t, s]
                for o in range(d):
                    if coeffs[o] != 0.0:
                        targets[o] += coeffs[o] * red
        out.append([hermitize(f) for f in targets])
    return out


def update_party(tensor: CglmpTensor, state: np.ndarray, other: tuple,
                 party: str) -> tuple:
    """Best POVM pair for one party with the rest fixed: one SDP per
    setting."""
    out = []
    for targets in _party_targets(tensor, state, other, party):
        povm, _ = _solve_povm(tensor.d, targets)
        out.append(povm)
    return tuple(out)


def _canonical_basis(d: int, alpha: float, conjugate: bool) -> np.ndarray:
    """Fourier basis with phase offset alpha; column o is the outcome-o
    vector (1/sqrt d) sum_l w^{+-l(o+alpha)} |l>."""
    omega = np.exp(2j * np.pi / d)
    sign = -1.0 if conjugate else 1.0
    l = np.arange(d)[:, None]
    o = np.arange(d)[None, :]
    return omega ** (sign * l * (o + alpha)) / np.sqrt(d)


def canonical_entangled_strategy(d: int) -> EntangledStrategy:
    """Maximally entangled state with the standard phase conventions
    (Alice offsets 0 and 1/2, Bob offsets -1/4 and 1/4); a good warm
    start whose state update then tilts the Schmidt coefficients."""
    state = np.eye(d, dtype=complex).reshape(-1) / np.sqrt(d)
    alice = tuple(Povm.projective(_canonical_basis(d, alpha, True))
                  for alpha in (0.0, 0.5))
    bob = tuple(Povm.projective(_canonical_basis(d, beta, False))
                for beta in (-0.25, 0.25))
    return EntangledStrategy(d, state, alice, bob)


def _random_entangled(d: int, rng: np.random.Generator) -> EntangledStrategy:
    v = rng.standard_normal(d * d) + 1j * rng.standard_normal(d * d)
    v /= np.linalg.norm(v)
    povms = []
    for _ in range(4):
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        q, _ = np.linalg.qr(g)
        povms.append(Povm.projective(q))
    return EntangledStrategy(d, v, tuple(povms[:2]), tuple(povms[2:]))


def _seesaw(tensor: CglmpTensor, strat: EntangledStrategy,
            trace: SeesawTrace, max_iters: int,
            conv_tol: float) -> EntangledStrategy:
    d = tensor.d
    state, alice, bob = strat.state, strat.alice, strat.bob
    value = tensor.evaluate(behavior_of(strat))
    trace.objectives.append(value)
    for _ in range(max_iters):
        state = update_state(tensor, alice, bob)
        alice = update_party(tensor, state, bob, "alice")
        bob = update_party(tensor, state, alice, "bob")
        new_value = tensor.evaluate(
            behavior_of(EntangledStrategy(d, state, alice, bob)))
        trace.objectives.append(new_value)
        if abs(new_value - value) < conv_tol:
            trace.converged = True
            value = new_value
            break
        value = new_value
    return EntangledStrategy(d, state, alice, bob)


def run_bell(spec: GameSpec, restarts: int = 20, seed: int = 0,
             max_iters: int = 200, conv_tol: float = 1e-8):
    """Best-of-restarts see-saw; returns (value, strategy, traces).

    Restart 0 is the canonical warm start; the rest are random.  The
    result is a lower bound on the entanglement-assisted optimum.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    d = spec.d
    tensor = build_cglmp_tensor(d)
    best_value = -np.inf
    best_strat = None
    traces = []
    for r in range(restarts):
        if r == 0:
            strat = canonical_entangled_strategy(d)
        else:
            strat = _random_entangled(d, np.random.default_rng(seed + r))
        trace = SeesawTrace(seed=seed, restart=r)
        strat = _seesaw(tensor, strat, trace, max_iters, conv_tol)
        traces.append(trace)
        value = trace.objectives[-1]
        if value > best_value:
            best_value = value
            best_strat = strat
    return best_value, best_strat, traces
