"""Moment-matrix relaxations for the 2-setting, d-outcome bipartite
scenario with the CGLMP-type objective.

Level 1 of the hierarchy is the macroscopic-locality bound; the
intermediate level "1+AB" (all products of one Alice and one Bob
projector added to the generating set) gives certified upper bounds on
the entangled value.  Projector words are canonicalized symbolically
(idempotence, orthogonality, party commutation, reversal symmetry) and
the relaxation is solved as a linear-matrix-inequality SDP.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .game import CglmpTensor, build_cglmp_tensor
from .sdp import SdpProblem, SdpSolution, solve_sdp

__all__ = [
    "Monomial",
    "MomentProblem",
    "BoundReport",
    "monomial_basis",
    "canonicalize",
    "ZERO",
    "build_moment_problem",
    "upper_bound",
]

LEVELS = ("1", "1+AB")

ZERO = "ZERO"
_IDENTITY_KEY = ((), ())


@dataclass(frozen=True)
class Monomial:
    """Product of projectors: Alice word then Bob word, each a tuple of
    (setting, outcome) pairs with outcome <= d-2 (last outcome
    eliminated)."""

    a_word: tuple = ()
    b_word: tuple = ()

    @property
    def is_identity(self) -> bool:
        return not self.a_word and not self.b_word

    def dagger(self) -> "Monomial":
        return Monomial(self.a_word[::-1], self.b_word[::-1])


def _reduce_word(word):
    """Collapse adjacent same-setting projectors; None means the word
    annihilates."""
    out = []
    for sym in word:
        if out and out[-1][0] == sym[0]:
            if out[-1][1] != sym[1]:
                return None
            continue  # idempotent
        out.append(sym)
    return tuple(out)


def canonicalize(m1: Monomial, m2: Monomial):
    """Canonical form of m1^dagger * m2, or ZERO.

    Alice and Bob projectors commute, so the product is an Alice word
    followed by a Bob word; the word is identified with its reversal
    (the moment matrix is realified by averaging with the transpose).
    """
    aw = _reduce_word(m1.a_word[::-1] + m2.a_word)
    if aw is None:
        return ZERO
    bw = _reduce_word(m1.b_word[::-1] + m2.b_word)
    if bw is None:
        return ZERO
    return min((aw, bw), (aw[::-1], bw[::-1]))


def monomial_basis(d: int, level: str) -> list:
    """Generating monomials for the moment matrix.

    All d outcomes per setting are kept in the generating set: dropping
    the last outcome row makes the level-1 relaxation collapse to the
    algebraic maximum for d >= 3.  Redundancy in the *moments* is still
    removed by substituting the last projector of every setting as
    identity minus the rest when matrix entries are compiled.
    """
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    if level not in LEVELS:
        raise ValueError(f"unsupported level {level!r}; choose from {LEVELS}")
    basis = [Monomial()]
    a_syms = [((x, a),) for x in range(2) for a in range(d)]
    b_syms = [((y, b),) for y in range(2) for b in range(d)]
    basis += [Monomial(a_word=w) for w in a_syms]
    basis += [Monomial(b_word=w) for w in b_syms]
    if level == "1+AB":
        basis += [Monomial(a_word=wa, b_word=wb)
                  for wa in a_syms for wb in b_syms]
    return basis


def _expand_word(word, d):
    """Expand last-outcome projectors (outcome d-1) out of a single-party
    word: returns {reduced eliminated word: coefficient} plus the word
    ZERO never appearing (annihilated terms are dropped)."""
    word = _reduce_word(word)
    if word is None:
        return {}
    for pos, (x, a) in enumerate(word):
        if a == d - 1:
            out: dict = {}
            rest = word[:pos] + word[pos + 1:]
            for w, c in _expand_word(rest, d).items():
                out[w] = out.get(w, 0.0) + c
            for ap in range(d - 1):
                sub = word[:pos] + ((x, ap),) + word[pos + 1:]
                for w, c in _expand_word(sub, d).items():
                    out[w] = out.get(w, 0.0) - c
            return {w: c for w, c in out.items() if c != 0.0}
    return {word: 1.0}


def expand_product(m1: Monomial, m2: Monomial, d: int) -> dict:
    """Affine expansion of m1^dagger * m2 over canonical eliminated
    words: {word_key: coeff}; the identity key is ((), ())."""
    a_terms = _expand_word(m1.a_word[::-1] + m2.a_word, d)
    b_terms = _expand_word(m1.b_word[::-1] + m2.b_word, d)
    out: dict = {}
    for aw, ca in a_terms.items():
        for bw, cb in b_terms.items():
            key = min((aw, bw), (aw[::-1], bw[::-1]))
            out[key] = out.get(key, 0.0) + ca * cb
    return out


@dataclass
class MomentProblem:
    d: int
    level: str
    basis: list
    index: dict  # canonical eliminated word -> variable id
    objective_const: float
    objective: np.ndarray  # coefficient per variable id
    psd_size: int
    entries: dict  # (i, j), i <= j -> affine expansion {word_key: coeff}


def _prob_expansions(d: int):
    """Affine expansion of every P(a,b|x,y) over eliminated words:
    list of (const, {word_key: coeff}) in (x, y, a, b) order."""
    out = []
    for x in range(2):
        for y in range(2):
            for a in range(d):
                for b in range(d):
                    exp = expand_product(
                        Monomial(a_word=((x, a),)),
                        Monomial(b_word=((y, b),)), d)
                    const = exp.pop(_IDENTITY_KEY, 0.0)
                    out.append((const, exp))
    return out


def _objective_terms(tensor: CglmpTensor):
    """Expand the Bell functional over the reduced operator basis.

    Returns (constant, coeffs) with coeffs keyed by canonical words of
    the forms A, B and AB; the last outcome of every measurement is
    eliminated via completeness.
    """
    d = tensor.d
    const = 0.0
    coeffs: dict = {}

    def add(key, val):
        coeffs[key] = coeffs.get(key, 0.0) + val

    def akey(x, a):
        return (((x, a),), ())

    def bkey(y, b):
        return ((), ((y, b),))

    def abkey(x, a, y, b):
        return (((x, a),), ((y, b),))

    t = tensor.coefficients
    for x in range(2):
        for y in range(2):
            for a in range(d):
                for b in range(d):
                    v = float(t[a, b, x, y])
                    if v == 0.0:
                        continue
                    if a < d - 1 and b < d - 1:
                        add(abkey(x, a, y, b), v)
                    elif a == d - 1 and b < d - 1:
                        add(bkey(y, b), v)
                        for ap in range(d - 1):
                            add(abkey(x, ap, y, b), -v)
                    elif a < d - 1 and b == d - 1:
                        add(akey(x, a), v)
                        for bp in range(d - 1):
                            add(abkey(x, a, y, bp), -v)
                    else:
                        const += v
                        for ap in range(d - 1):
                            add(akey(x, ap), -v)
                        for bp in range(d - 1):
                            add(bkey(y, bp), -v)
                        for ap in range(d - 1):
                            for bp in range(d - 1):
                                add(abkey(x, ap, y, bp), v)
    return const, coeffs


def build_moment_problem(d: int, level: str):
    """Compile the relaxation into a MomentProblem plus the LMI-form
    SdpProblem (minimize <F0, X> s.t. <F_w, X> = -obj_w, X >= 0), whose
    dual variables are the moments."""
    tensor = build_cglmp_tensor(d)
    basis = monomial_basis(d, level)
    n = len(basis)
    index: dict = {}
    entries: dict = {}
    positions: dict = {}  # variable id -> list of ((i, j), coeff)
    f0 = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            exp = expand_product(basis[i], basis[j], d)
            entries[(i, j)] = exp
            for key, coeff in exp.items():
                if key == _IDENTITY_KEY:
                    f0[i, j] += coeff
                    if i != j:
                        f0[j, i] += coeff
                    continue
                vid = index.setdefault(key, len(index))
                positions.setdefault(vid, []).append(((i, j), coeff))

    const, obj_map = _objective_terms(tensor)
    nvars = len(index)
    obj = np.zeros(nvars)
    for key, val in obj_map.items():
        canon = min(key, (key[0][::-1], key[1][::-1]))
        if canon not in index:
            raise AssertionError(f"objective word {canon} missing from basis")
        obj[index[canon]] += val

    # behaviors must be nonnegative: the moment matrix alone does not
    # force P(a,b|x,y) >= 0 at low levels, and without these the level-1
    # value degenerates to the algebraic maximum for d >= 3
    probs = _prob_expansions(d)
    npr = len(probs)
    pdiag = np.zeros((npr, npr))
    for r, (pconst, _) in enumerate(probs):
        pdiag[r, r] = pconst

    constraints = []
    for vid in range(nvars):
        f = np.zeros((n, n))
        for (i, j), coeff in positions[vid]:
            f[i, j] += coeff
            if i != j:
                f[j, i] += coeff
        constraints.append(({0: f}, -obj[vid]))
    for vid, key in enumerate(sorted(index, key=index.get)):
        g = np.zeros((npr, npr))
        hit = False
        for r, (_, exp) in enumerate(probs):
            c = exp.get(key, 0.0)
            if c:
                g[r, r] = c  # slack diagonal: pconst + sum_w c*y_w >= 0
                hit = True
        if hit:
            constraints[vid][0][1] = g
    sdp = SdpProblem(block_sizes=[n, npr], C=[f0, pdiag],
                     constraints=constraints, sense="min")
    mp = MomentProblem(d=d, level=level, basis=basis, index=index,
                       objective_const=const, objective=obj, psd_size=n,
                       entries=entries)
    return mp, sdp


@dataclass
class BoundReport:
    d: int
    level: str
    value: float          # certified upper bound (primal certificate)
    relaxation_value: float  # the relaxation optimum estimate
    moments: np.ndarray
    solution: SdpSolution

    @property
    def gap(self) -> float:
        return abs(self.value - self.relaxation_value)


def upper_bound(d: int, level: str, tol: float = 1e-9,
                moment_problem=None) -> BoundReport:
    """Certified upper bound on the game value at the given hierarchy
    level; level "1" is the macroscopic-locality value."""
    if moment_problem is None:
        mp, sdp = build_moment_problem(d, level)
    else:
        mp, sdp = moment_problem
    sol = solve_sdp(sdp, tol=tol)
    if sol.status == "infeasible-detected":
        raise RuntimeError(f"moment relaxation reported infeasible (d={d})")
    return BoundReport(
        d=d, level=level,
        value=mp.objective_const + sol.primal_obj,
        relaxation_value=mp.objective_const + sol.dual_obj,
        moments=-sol.y,
        solution=sol,
    )


def moment_vector_of(mp: MomentProblem, moment_fn) -> np.ndarray:
    """Moments of an explicit strategy in this problem's variable order;
    moment_fn maps a canonical word to <psi| word |psi> (real part)."""
    out = np.zeros(len(mp.index))
    for word, vid in mp.index.items():
        out[vid] = moment_fn(word)
    return out


def moment_matrix(mp: MomentProblem, moments: np.ndarray) -> np.ndarray:
    """Assemble the moment matrix for a given moment vector."""
    n = mp.psd_size
    m = np.zeros((n, n))
    for (i, j), exp in mp.entries.items():
        val = 0.0
        for key, coeff in exp.items():
            if key == _IDENTITY_KEY:
                val += coeff
            else:
                val += coeff * moments[mp.index[key]]
        m[i, j] = m[j, i] = val
    return m
