"""Cross-module invariant suite.

Each check is independent and returns a named pass/fail result with an
observed-vs-expected detail string; the CLI `verify` command runs them
all and exits nonzero if any fails.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bell, classical, npa, pm, simulate
from .game import (Behavior, GameSpec, build_cglmp_tensor,
                   build_payoff_kernel, cglmp_value, game_value_of_behavior)
from .serialize import ClassicalStrategy

__all__ = ["CheckResult", "run_checks", "CHECKS"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def check_kernel_balance(seed: int = 0,
                         kernel_factory=build_payoff_kernel) -> CheckResult:
    """Every payoff row sums to zero and rewards/penalizes 2*floor(d/2)
    distinct outputs; checked for d = 2..11."""
    for d in range(2, 12):
        spec = GameSpec(d)
        kernel = kernel_factory(spec)
        rows = kernel.entries.reshape(-1, d)
        sums = rows.sum(axis=1)
        if np.any(sums != 0):
            return CheckResult(
                "kernel-balance", False,
                f"d={d}: row sums {set(sums.tolist())} != {{0}}")
        nonzero = np.count_nonzero(rows, axis=1)
        if np.any(nonzero != 2 * spec.kmax):
            return CheckResult(
                "kernel-balance", False,
                f"d={d}: rows with {set(nonzero.tolist())} nonzero entries, "
                f"expected {2 * spec.kmax}")
    return CheckResult("kernel-balance", True,
                       "rows balanced with distinct targets for d=2..11")


def check_equivalence(seed: int = 0) -> CheckResult:
    """Protocol value of a behavior equals its Bell-functional value on
    100 random behaviors per d in {2,3,5,7}, at 1e-10."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for d in (2, 3, 5, 7):
        spec = GameSpec(d)
        tensor = build_cglmp_tensor(d)
        for _ in range(100):
            beh = Behavior.random(d, rng)
            dev = abs(game_value_of_behavior(spec, beh)
                      - cglmp_value(tensor, beh))
            worst = max(worst, dev)
            if dev > 1e-10:
                return CheckResult(
                    "protocol-functional-equivalence", False,
                    f"d={d}: |game - functional| = {dev:.3e} > 1e-10")
    return CheckResult("protocol-functional-equivalence", True,
                       f"400 random behaviors, worst deviation {worst:.3e}")


def check_seesaw_monotone(seed: int = 0) -> CheckResult:
    """Recorded see-saw traces are non-decreasing at 1e-9."""
    _, _, pm_traces = pm.run_pm(GameSpec(3), restarts=3, seed=seed)
    _, _, bell_traces = bell.run_bell(GameSpec(3), restarts=3, seed=seed)
    for label, traces in (("transmitted", pm_traces),
                          ("entangled", bell_traces)):
        for t in traces:
            if not t.check_monotone(1e-9):
                drops = min(b - a for a, b in
                            zip(t.objectives, t.objectives[1:]))
                return CheckResult(
                    "seesaw-monotonicity", False,
                    f"{label} restart {t.restart}: objective drop {drops:.3e}")
    return CheckResult("seesaw-monotonicity", True,
                       "all d=3 traces non-decreasing at 1e-9")


def check_sandwich(seed: int = 0) -> CheckResult:
    """Lower bounds below upper bounds: for d in {2,3}, the entangled
    see-saw value <= the product-moment bound <= the level-1 bound."""
    for d in (2, 3):
        lower, _, _ = bell.run_bell(GameSpec(d), restarts=1, seed=seed)
        mid = npa.upper_bound(d, "1+AB").value
        top = npa.upper_bound(d, "1").value
        if not (lower <= mid + 1e-6 and mid <= top + 1e-6):
            return CheckResult(
                "bound-sandwich", False,
                f"d={d}: {lower:.6f} <= {mid:.6f} <= {top:.6f} violated")
    return CheckResult("bound-sandwich", True,
                       "see-saw <= product-moment bound <= level-1 bound "
                       "for d=2,3")


def check_sdp_residuals(seed: int = 0) -> CheckResult:
    """Solver primal/dual residuals at 1e-8 on the level-1 problems and
    POVM feasibility of see-saw outputs at 1e-8."""
    for d in (2, 3, 4):
        rep = npa.upper_bound(d, "1")
        res = max(rep.solution.primal_residual, rep.solution.dual_residual)
        if res > 1e-8:
            return CheckResult("sdp-residuals", False,
                               f"d={d} level-1 residual {res:.3e} > 1e-8")
    _, strat, _ = pm.run_pm(GameSpec(3), restarts=2, seed=seed)
    try:
        for povm in strat.measurements:
            povm.validate(1e-8)
    except ValueError as exc:
        return CheckResult("sdp-residuals", False, f"POVM invariant: {exc}")
    return CheckResult("sdp-residuals", True,
                       "level-1 residuals and POVM feasibility within 1e-8")


def check_monte_carlo(seed: int = 0) -> CheckResult:
    """Simulated estimates within 4 sigma of analytic values for three
    reference strategies plus the uniform-random-output baseline."""
    rng = np.random.default_rng(seed)
    spec = GameSpec(2)
    rounds = 200_000

    sol = classical.classical_optimum(spec)
    cstrat = ClassicalStrategy(2, sol.message, sol.response)
    r = simulate.simulate(spec, cstrat, rounds, rng)
    if not r.within_sigma(float(sol.value)):
        return CheckResult("monte-carlo", False,
                           f"classical: {r.mean:.4f} vs {float(sol.value)}")

    v, pstrat, _ = pm.run_pm(spec, restarts=2, seed=seed)
    r = simulate.simulate(spec, pstrat, rounds, rng)
    if not r.within_sigma(v):
        return CheckResult("monte-carlo", False,
                           f"transmitted: {r.mean:.4f} vs {v:.4f}")

    vb, bstrat, _ = bell.run_bell(spec, restarts=1, seed=seed)
    r = simulate.simulate(spec, bstrat, rounds, rng)
    if not r.within_sigma(vb):
        return CheckResult("monte-carlo", False,
                           f"entangled: {r.mean:.4f} vs {vb:.4f}")

    r = simulate.simulate_policy(GameSpec(3), rounds // 2, rng)
    if not r.within_sigma(0.0):
        return CheckResult("monte-carlo", False,
                           f"random-output: {r.mean:.4f} vs 0")
    return CheckResult("monte-carlo", True,
                       "three reference strategies and the random baseline "
                       "within 4 sigma")


CHECKS = (
    check_kernel_balance,
    check_equivalence,
    check_seesaw_monotone,
    check_sandwich,
    check_sdp_residuals,
    check_monte_carlo,
)


def run_checks(seed: int = 0) -> list:
    return [check(seed) for check in CHECKS]
