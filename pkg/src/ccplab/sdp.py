"""Self-contained primal-dual interior-point solver for small dense
block-diagonal semidefinite programs.

Standard form:

    minimize / maximize  <C, X>
    subject to           <A_i, X> = b_i,  X >= 0 (PSD, block-diagonal)

solved with an HKM-direction Mehrotra predictor-corrector.  For
maximization the reported ``dual_obj`` is a certified upper bound on the
true optimum up to the reported dual residual.  Constraint matrices are
kept as sparse triplets per block; all our problems (POVM updates,
moment-matrix relaxations) are sparse in the constraints and dense in
the iterates.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.linalg import cholesky, eigvalsh, norm
from scipy.linalg import cho_solve, solve_triangular

__all__ = [
    "SdpProblem",
    "SdpSolution",
    "SdpError",
    "solve_sdp",
    "residuals",
    "dump_problem",
]

_STATUS_OPTIMAL = "optimal"
_STATUS_MAXITER = "max-iterations"
_STATUS_INFEASIBLE = "infeasible-detected"

# Divergence heuristic for infeasibility: dual iterates blowing up while
# the complementarity gap keeps shrinking.
_INFEAS_BLOWUP = 1e12


class SdpError(RuntimeError):
    pass


@dataclass
class SdpProblem:
    """Block-diagonal SDP in standard equality form.

    ``constraints`` is a list of (mats, b) pairs where ``mats`` maps a
    block index to a dense symmetric matrix (blocks not mentioned are
    zero in that constraint).
    """

    block_sizes: list
    C: list
    constraints: list
    sense: str = "min"

    def __post_init__(self):
        if self.sense not in ("min", "max"):
            raise ValueError(f"sense must be 'min' or 'max', got {self.sense}")
        for blk, n in enumerate(self.block_sizes):
            if self.C[blk].shape != (n, n):
                raise ValueError(f"objective block {blk} has wrong shape")

    @property
    def total_dim(self) -> int:
        return int(sum(self.block_sizes))


@dataclass
class SdpSolution:
    X: list
    y: np.ndarray
    S: list
    primal_obj: float
    dual_obj: float
    status: str
    gap: float
    iterations: int
    primal_residual: float
    dual_residual: float

    @property
    def min_eig_X(self) -> float:
        return min(float(eigvalsh(x)[0]) for x in self.X)

    @property
    def min_eig_S(self) -> float:
        return min(float(eigvalsh(s)[0]) for s in self.S)


class _Compiled:
    """Triplet form of the constraints, grouped per block, with
    structure-dependent fast paths for the Schur assembly."""

    # dense-stacked einsum path caps (flops / memory heuristics)
    _DENSE_MEM = 5e7
    _DENSE_FLOPS = 2e8

    def __init__(self, problem: SdpProblem):
        self.m = len(problem.constraints)
        self.nblocks = len(problem.block_sizes)
        self.sizes = [int(n) for n in problem.block_sizes]
        # per block: flat arrays (constraint index, row, col, value)
        self.ci, self.p, self.q, self.v = [], [], [], []
        # per constraint: list over blocks of (rows, cols, vals) or None
        self.per_con = [[None] * self.nblocks for _ in range(self.m)]
        per_block = [([], [], [], []) for _ in range(self.nblocks)]
        for i, (mats, _) in enumerate(problem.constraints):
            for blk, mat in mats.items():
                r, c = np.nonzero(mat)
                vals = np.ascontiguousarray(mat[r, c], dtype=float)
                self.per_con[i][blk] = (r, c, vals)
                acc = per_block[blk]
                acc[0].append(np.full(len(r), i, dtype=np.int64))
                acc[1].append(r)
                acc[2].append(c)
                acc[3].append(vals)
        for blk in range(self.nblocks):
            ci, p, q, v = per_block[blk]
            if ci:
                self.ci.append(np.concatenate(ci))
                self.p.append(np.concatenate(p))
                self.q.append(np.concatenate(q))
                self.v.append(np.concatenate(v))
            else:
                empty = np.zeros(0, dtype=np.int64)
                self.ci.append(empty)
                self.p.append(empty)
                self.q.append(empty)
                self.v.append(np.zeros(0))
        self.b = np.array([float(b) for _, b in problem.constraints])
        # choose a Schur strategy per block
        self.mode = []
        self.diag = []   # (m, n) arrays for diagonal-only blocks
        self.stack = []  # (m, n, n) arrays for the dense einsum path
        for blk, n in enumerate(self.sizes):
            diag_only = len(self.ci[blk]) > 0 and np.all(
                self.p[blk] == self.q[blk])
            if diag_only:
                a = np.zeros((self.m, n))
                a[self.ci[blk], self.p[blk]] = self.v[blk]
                self.mode.append("diag")
                self.diag.append(a)
                self.stack.append(None)
            elif (self.m * n * n <= self._DENSE_MEM
                  and self.m**2 * n * n <= self._DENSE_FLOPS):
                a = np.zeros((self.m, n, n))
                a[self.ci[blk], self.p[blk], self.q[blk]] = self.v[blk]
                self.mode.append("dense")
                self.diag.append(None)
                self.stack.append(a)
            else:
                self.mode.append("sparse")
                self.diag.append(None)
                self.stack.append(None)

    def apply(self, X: list) -> np.ndarray:
        """A(X)_i = <A_i, X>."""
        out = np.zeros(self.m)
        for blk, x in enumerate(X):
            if len(self.ci[blk]):
                out += np.bincount(
                    self.ci[blk],
                    weights=self.v[blk] * x[self.q[blk], self.p[blk]],
                    minlength=self.m)
        return out

    def adjoint(self, y: np.ndarray) -> list:
        """A^T(y) = sum_i y_i A_i as dense blocks."""
        out = [np.zeros((n, n)) for n in self.sizes]
        for blk in range(self.nblocks):
            if len(self.ci[blk]):
                np.add.at(out[blk], (self.p[blk], self.q[blk]),
                          y[self.ci[blk]] * self.v[blk])
        return out

    def traces(self, Z: list) -> np.ndarray:
        """Tr(A_i Z) for every i; Z need not be symmetric."""
        return self.apply(Z)

    def schur(self, Sinv: list, X: list) -> np.ndarray:
        """HKM Schur complement M_ij = Tr(A_i Sinv A_j X)."""
        m = self.m
        M = np.zeros((m, m))
        for blk in range(self.nblocks):
            ci, p, q, v = self.ci[blk], self.p[blk], self.q[blk], self.v[blk]
            if not len(ci):
                continue
            si, x = Sinv[blk], X[blk]
            if self.mode[blk] == "diag":
                # A_i diagonal: Tr(A_i Sinv A_j X) = a_i^T (Sinv * X^T) a_j
                a = self.diag[blk]
                M += (a @ (si * x.T)) @ a.T
            elif self.mode[blk] == "dense":
                a = self.stack[blk]
                T = np.einsum("pq,jqr,rs->jps", si, a, x, optimize=True)
                M += np.einsum("ipq,jqp->ij", a, T, optimize=True)
            else:
                for j in range(m):
                    tri = self.per_con[j][blk]
                    if tri is None:
                        continue
                    r, c, w = tri
                    T = (si[:, r] * w) @ x[c, :]
                    M[:, j] += np.bincount(ci, weights=v * T[q, p],
                                           minlength=m)
        return 0.5 * (M + M.T)


def _presolve(problem: SdpProblem) -> SdpProblem:
    """Drop linearly dependent constraint rows (with a warning)."""
    comp = _Compiled(problem)
    m = comp.m
    if m == 0:
        return problem
    eye = [np.eye(n) for n in comp.sizes]
    # Gram matrix G_ij = <A_i, A_j> via the Schur builder with S=X=I
    G = comp.schur(eye, eye)
    scale = max(np.max(np.diag(G)), 1e-30)
    w = eigvalsh(G / scale)
    if w[0] > 1e-12:
        return problem
    # greedy pivoted Cholesky to pick an independent subset
    R = G.copy()
    kept = []
    for _ in range(m):
        k = int(np.argmax(np.diag(R)))
        if R[k, k] <= 1e-12 * scale:
            break
        kept.append(k)
        col = R[:, k] / R[k, k]
        R -= np.outer(col, R[k, :])
    kept = sorted(kept)
    warnings.warn(
        f"dropping {m - len(kept)} linearly dependent constraint rows")
    cons = [problem.constraints[i] for i in kept]
    return SdpProblem(problem.block_sizes, problem.C, cons, problem.sense)


def _step_length(chol_l: np.ndarray, d: np.ndarray, tau: float) -> float:
    """Largest alpha <= 1 with M + alpha*d PSD scaled by tau, where M has
    Cholesky factor chol_l."""
    w = solve_triangular(chol_l, d, lower=True)
    w = solve_triangular(chol_l, w.T, lower=True)
    lam = eigvalsh(0.5 * (w + w.T))[0]
    if lam >= 0:
        return 1.0
    return min(1.0, -tau / lam)


def solve_sdp(problem: SdpProblem, tol: float = 1e-8,
              max_iters: int = 200, verbose: bool = False,
              presolve: bool = True) -> SdpSolution:
    """Solve the SDP to relative tolerance ``tol``.

    ``presolve=False`` skips the linear-independence check; use it for
    constraint systems that are independent by construction.
    """
    if presolve:
        problem = _presolve(problem)
    flip = -1.0 if problem.sense == "max" else 1.0
    comp = _Compiled(problem)
    sizes = comp.sizes
    nblocks = len(sizes)
    ntot = sum(sizes)
    m = comp.m

    cscale = max(1.0, max(float(np.max(np.abs(c))) for c in problem.C))
    bscale = max(1.0, float(np.max(np.abs(comp.b))) if m else 1.0)
    C = [flip * np.asarray(c, dtype=float) / cscale for c in problem.C]
    C = [0.5 * (c + c.T) for c in C]
    b = comp.b / bscale

    normC = max(norm(c) for c in C)
    eta_p = 10.0 * max(1.0, float(np.max(np.abs(b))) if m else 1.0)
    eta_d = 10.0 * max(1.0, normC)
    X = [eta_p * np.eye(n) for n in sizes]
    S = [eta_d * np.eye(n) for n in sizes]
    y = np.zeros(m)

    normb = 1.0 + norm(b)
    normCf = 1.0 + normC
    status = _STATUS_MAXITER
    it = 0
    mu0 = None
    best_merit = np.inf
    best_state = None
    stall = 0

    def objective_pair():
        pobj = sum(float(np.sum(c * x)) for c, x in zip(C, X))
        dobj = float(b @ y)
        return pobj, dobj

    for it in range(1, max_iters + 1):
        Aty = comp.adjoint(y)
        rp = b - comp.apply(X)
        Rd = [C[k] - Aty[k] - S[k] for k in range(nblocks)]
        mu = sum(float(np.sum(X[k] * S[k])) for k in range(nblocks)) / ntot
        if mu0 is None:
            mu0 = mu
        # push harder once the central path is nearly traversed
        tau = 0.98 if mu > 1e-7 * mu0 else 0.995
        pobj, dobj = objective_pair()
        # convergence is judged in original (unscaled) units
        cb = cscale * bscale
        gap = abs(pobj - dobj) * cb / (1.0 + abs(pobj) * cb)
        pres = norm(rp) * bscale / (1.0 + norm(b) * bscale)
        dres = max(norm(r) for r in Rd) * cscale / (1.0 + normC * cscale)
        if verbose:
            print(f"  it={it:3d} mu={mu:.3e} pres={pres:.2e} "
                  f"dres={dres:.2e} gap={gap:.2e}")
        merit = max(pres, dres, gap)
        if merit < best_merit:
            best_merit = merit
            best_state = ([x.copy() for x in X], [s.copy() for s in S],
                          y.copy())
            stall = 0
        else:
            stall += 1
        if pres <= tol and dres <= tol and gap <= tol:
            status = _STATUS_OPTIMAL
            break
        if stall >= 15:
            break  # endgame roundoff floor reached; best iterate kept
        if norm(y) > _INFEAS_BLOWUP or any(norm(x) > _INFEAS_BLOWUP for x in X):
            status = _STATUS_INFEASIBLE
            break

        def _chol(mats):
            out = []
            for a in mats:
                try:
                    out.append(cholesky(a))
                except np.linalg.LinAlgError:
                    eps = 1e-14 * max(float(np.trace(a)) / len(a), 1e-30)
                    a += eps * np.eye(len(a))
                    out.append(cholesky(a))  # second failure aborts the solve
            return out

        try:
            Ls = _chol(S)
            Lx = _chol(X)
        except np.linalg.LinAlgError:
            break
        Sinv = [cho_solve((l, True), np.eye(len(l))) for l in Ls]

        M = comp.schur(Sinv, X)
        jitter = 1e-13 * max(1.0, float(np.max(np.diag(M))))
        try:
            LM = cholesky(M + jitter * np.eye(m))
        except np.linalg.LinAlgError:
            LM = None

        def solve_schur(rhs):
            if LM is None:
                return np.linalg.lstsq(M, rhs, rcond=None)[0]
            z = solve_triangular(LM, rhs, lower=True)
            dy = solve_triangular(LM.T, z, lower=False)
            for _ in range(2):  # iterative refinement vs the exact M
                r = rhs - M @ dy
                z = solve_triangular(LM, r, lower=True)
                dy = dy + solve_triangular(LM.T, z, lower=False)
            return dy

        trASinv = comp.traces(Sinv)
        SinvRdX = [Sinv[k] @ Rd[k] @ X[k] for k in range(nblocks)]
        trASRX = comp.traces(SinvRdX)

        def direction(sigma_mu, corr):
            rhs = b - sigma_mu * trASinv + trASRX
            if corr is not None:
                rhs = rhs + comp.traces(corr)
            dy = solve_schur(rhs)
            dAty = comp.adjoint(dy)
            dS = [Rd[k] - dAty[k] for k in range(nblocks)]
            dX = []
            for k in range(nblocks):
                t = sigma_mu * Sinv[k] - X[k] - Sinv[k] @ dS[k] @ X[k]
                if corr is not None:
                    t = t - corr[k]
                dX.append(0.5 * (t + t.T))
            return dy, dX, dS

        # predictor
        dy_a, dX_a, dS_a = direction(0.0, None)
        ap = min(_step_length(Lx[k], dX_a[k], tau) for k in range(nblocks))
        ad = min(_step_length(Ls[k], dS_a[k], tau) for k in range(nblocks))
        mu_aff = sum(
            float(np.sum((X[k] + ap * dX_a[k]) * (S[k] + ad * dS_a[k])))
            for k in range(nblocks)) / ntot
        sigma = min(1.0, max(0.0, (max(mu_aff, 0.0) / mu)) ** 3)

        # corrector with the Mehrotra second-order term
        corr = [Sinv[k] @ dS_a[k] @ dX_a[k] for k in range(nblocks)]
        dy, dX, dS = direction(sigma * mu, corr)
        ap = min(_step_length(Lx[k], dX[k], tau) for k in range(nblocks))
        ad = min(_step_length(Ls[k], dS[k], tau) for k in range(nblocks))

        for k in range(nblocks):
            X[k] = X[k] + ap * dX[k]
            S[k] = S[k] + ad * dS[k]
        y = y + ad * dy

    if best_state is not None and status != _STATUS_INFEASIBLE:
        X, S, y = best_state
        cb = cscale * bscale
        pobj, dobj = objective_pair()
        gap = abs(pobj - dobj) * cb / (1.0 + abs(pobj) * cb)
        pres = norm(b - comp.apply(X)) * bscale / (1.0 + norm(b) * bscale)
        Aty = comp.adjoint(y)
        dres = max(norm(C[k] - Aty[k] - S[k])
                   for k in range(nblocks)) * cscale / (1.0 + normC * cscale)
        if pres <= tol and dres <= tol and gap <= tol:
            status = _STATUS_OPTIMAL

    pobj, dobj = objective_pair()
    rp = b - comp.apply(X)
    Aty = comp.adjoint(y)
    dres = max(norm(C[k] - Aty[k] - S[k]) for k in range(nblocks)) / normCf

    # undo scaling and the sense flip
    Xo = [bscale * x for x in X]
    So = [flip * cscale * s for s in S]
    yo = flip * cscale * y
    pobj_o = flip * pobj * cscale * bscale
    dobj_o = flip * dobj * cscale * bscale
    return SdpSolution(
        X=Xo, y=yo, S=So,
        primal_obj=pobj_o, dual_obj=dobj_o,
        status=status,
        gap=abs(pobj_o - dobj_o) / (1.0 + abs(pobj_o)),
        iterations=it,
        primal_residual=float(norm(rp) / normb),
        dual_residual=float(dres),
    )


def residuals(problem: SdpProblem, sol: SdpSolution) -> dict:
    """Recompute all optimality residuals from scratch."""
    comp = _Compiled(problem)
    for blk, n in enumerate(problem.block_sizes):
        if sol.X[blk].shape != (n, n) or sol.S[blk].shape != (n, n):
            raise ValueError(f"solution block {blk} has wrong shape")
    ax = comp.apply(sol.X)
    primal = float(norm(comp.b - ax) / (1.0 + norm(comp.b)))
    Aty = comp.adjoint(sol.y)
    dualmats = [problem.C[k] - Aty[k] - sol.S[k]
                for k in range(len(problem.block_sizes))]
    normC = 1.0 + max(norm(c) for c in problem.C)
    dual = float(max(norm(r) for r in dualmats) / normC)
    pobj = sum(float(np.sum(problem.C[k] * sol.X[k]))
               for k in range(len(problem.block_sizes)))
    dobj = float(comp.b @ sol.y)
    return {
        "primal_residual": primal,
        "dual_residual": dual,
        "min_eig_X": sol.min_eig_X,
        "min_eig_S": sol.min_eig_S,
        "primal_obj": pobj,
        "dual_obj": dobj,
        "gap": abs(pobj - dobj) / (1.0 + abs(pobj)),
    }


def dump_problem(problem: SdpProblem, fh) -> None:
    """Write the problem in a plain sparse text format for external
    cross-checks: block sizes, objective triplets, constraint triplets."""
    close = False
    if isinstance(fh, str):
        fh = open(fh, "w")
        close = True
    try:
        fh.write(f"sense {problem.sense}\n")
        fh.write("blocks " + " ".join(str(n) for n in problem.block_sizes) + "\n")
        for blk, c in enumerate(problem.C):
            r, cc = np.nonzero(c)
            for i, j in zip(r, cc):
                if i <= j:
                    fh.write(f"obj {blk} {i} {j} {c[i, j]:.17g}\n")
        for idx, (mats, b) in enumerate(problem.constraints):
            fh.write(f"con {idx} rhs {float(b):.17g}\n")
            for blk, mat in sorted(mats.items()):
                r, cc = np.nonzero(mat)
                for i, j in zip(r, cc):
                    if i <= j:
                        fh.write(f"con {idx} {blk} {i} {j} {mat[i, j]:.17g}\n")
    finally:
        if close:
            fh.close()
