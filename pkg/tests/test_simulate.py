"""Monte Carlo round sampling: the empirical mean of each strategy kind
must match its exact value within standard-error bounds."""

from __future__ import annotations

import numpy as np
import pytest

from ccplab.bell import behavior_of, run_bell
from ccplab.classical import classical_optimum
from ccplab.game import GameSpec, build_cglmp_tensor, cglmp_value
from ccplab.pm import evaluate_pm, run_pm
from ccplab.serialize import ClassicalStrategy
from ccplab.simulate import (SimulationResult, _sample_rows, simulate,
                             simulate_policy)

ROUNDS = 200_000


def test_sample_rows_matches_distribution():
    rng = np.random.default_rng(0)
    dist = np.tile(np.array([0.1, 0.2, 0.7]), (50_000, 1))
    draws = _sample_rows(dist, rng)
    freqs = np.bincount(draws, minlength=3) / draws.size
    assert np.allclose(freqs, [0.1, 0.2, 0.7], atol=0.01)


def test_sample_rows_deterministic_rows():
    rng = np.random.default_rng(0)
    dist = np.eye(4)[np.array([2, 0, 3, 1])]
    assert list(_sample_rows(dist, rng)) == [2, 0, 3, 1]


def test_classical_simulation_matches_exact_value():
    spec = GameSpec(3)
    sol = classical_optimum(spec)
    strat = ClassicalStrategy(3, sol.message, sol.response)
    result = simulate(spec, strat, ROUNDS, np.random.default_rng(0))
    assert result.rounds == ROUNDS
    assert result.within_sigma(float(sol.value))
    assert not result.within_sigma(float(sol.value) + 0.05)


def test_prepare_measure_simulation():
    spec = GameSpec(2)
    value, strat, _ = run_pm(spec, restarts=1, seed=0)
    result = simulate(spec, strat, ROUNDS, np.random.default_rng(1))
    assert result.within_sigma(value)
    assert value == pytest.approx(evaluate_pm(spec, strat), abs=1e-9)


def test_entangled_simulation():
    spec = GameSpec(2)
    _, strat, _ = run_bell(spec, restarts=1, seed=0)
    exact = cglmp_value(build_cglmp_tensor(2), behavior_of(strat))
    result = simulate(spec, strat, ROUNDS, np.random.default_rng(2))
    assert result.within_sigma(exact)


def test_random_policy_mean_zero():
    result = simulate_policy(GameSpec(3), ROUNDS, np.random.default_rng(3))
    assert result.within_sigma(0.0)
    assert abs(result.mean) < 0.02


def test_stderr_shrinks_with_rounds():
    spec = GameSpec(2)
    rng = np.random.default_rng(4)
    small = simulate_policy(spec, 10_000, rng)
    large = simulate_policy(spec, 400_000, rng)
    assert large.stderr < small.stderr


def test_simulation_deterministic_per_seed():
    spec = GameSpec(3)
    sol = classical_optimum(spec)
    strat = ClassicalStrategy(3, sol.message, sol.response)
    a = simulate(spec, strat, 5000, np.random.default_rng(7)).mean
    b = simulate(spec, strat, 5000, np.random.default_rng(7)).mean
    assert a == b


def test_unknown_strategy_rejected():
    with pytest.raises(TypeError):
        simulate(GameSpec(2), object(), 10, np.random.default_rng(0))


def test_result_summary_fields():
    res = SimulationResult(rounds=4, mean=0.5, stderr=0.1)
    assert res.within_sigma(0.7, sigmas=4.0)
    assert not res.within_sigma(1.0, sigmas=4.0)
