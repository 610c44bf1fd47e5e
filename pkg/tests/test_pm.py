"""Prepare-and-measure see-saw: measurement bases, closed-form updates,
monotone traces and the known optima for small d."""

from __future__ import annotations

import numpy as np
import pytest

from ccplab.game import GameSpec
from ccplab.pm import (Povm, PrepareMeasureStrategy, _random_strategy,
                       _solve_povm, canonical_measurement_vectors,
                       classical_embedding, collapsed_objective, evaluate_pm,
                       frozen_measurements, run_pm, run_pm_frozen,
                       update_measurements, update_states)


@pytest.mark.parametrize("d", [2, 3, 5])
@pytest.mark.parametrize("alpha", [0.25, -0.25, 0.0])
def test_canonical_vectors_orthonormal(d, alpha):
    v = canonical_measurement_vectors(d, alpha)
    assert np.allclose(v.conj().T @ v, np.eye(d), atol=1e-12)


def test_povm_validation():
    d = 3
    Povm.projective(np.eye(d, dtype=complex)).validate()
    bad = Povm(d, tuple(np.eye(d, dtype=complex) for _ in range(d)))
    with pytest.raises(ValueError):
        bad.validate()
    with pytest.raises(ValueError):
        Povm(2, (np.eye(2),))


def test_classical_embedding_scores_half():
    for d in (2, 3, 5):
        spec = GameSpec(d)
        strat = classical_embedding(spec)
        strat.validate()
        assert collapsed_objective(spec, strat) == pytest.approx(0.5,
                                                                 abs=1e-12)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_full_and_collapsed_objectives_agree(d):
    spec = GameSpec(d)
    rng = np.random.default_rng(d)
    for _ in range(5):
        strat = _random_strategy(spec, rng)
        assert evaluate_pm(spec, strat) == pytest.approx(
            collapsed_objective(spec, strat), abs=1e-12)


def test_state_update_is_closed_form_optimum():
    spec = GameSpec(3)
    rng = np.random.default_rng(0)
    strat = _random_strategy(spec, rng)
    before = collapsed_objective(spec, strat)
    states = update_states(spec, strat.measurements)
    after = collapsed_objective(
        spec, PrepareMeasureStrategy(3, states, strat.measurements))
    assert after >= before - 1e-9
    # no unit state improves on the eigenvector update
    for _ in range(10):
        v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        probe = dict(states)
        probe[(0, 0)] = v / np.linalg.norm(v)
        probed = collapsed_objective(
            spec, PrepareMeasureStrategy(3, probe, strat.measurements))
        assert probed <= after + 1e-9


def test_measurement_update_monotone_and_feasible():
    spec = GameSpec(3)
    rng = np.random.default_rng(1)
    strat = _random_strategy(spec, rng)
    before = collapsed_objective(spec, strat)
    meas = update_measurements(spec, strat.states)
    for povm in meas:
        povm.validate(1e-8)
    after = collapsed_objective(
        spec, PrepareMeasureStrategy(3, strat.states, meas))
    assert after >= before - 1e-9


def test_povm_solver_reports_its_objective():
    d = 3
    rng = np.random.default_rng(2)
    targets = []
    for _ in range(d):
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        targets.append(g + g.conj().T)
    povm, reported = _solve_povm(d, targets)
    achieved = sum(
        float(np.real(np.sum(m.conj() * t)))
        for m, t in zip(povm.elements, targets))
    assert achieved == pytest.approx(reported, abs=1e-6)


@pytest.mark.parametrize("d,expected", [
    (2, 0.70711), (3, 0.72871), (5, 0.75393), (7, 0.76941),
])
def test_frozen_basis_optima(d, expected):
    value, strat = run_pm_frozen(GameSpec(d))
    assert value == pytest.approx(expected, abs=2e-3)
    strat.validate()


def test_frozen_measurement_pair():
    meas = frozen_measurements(3)
    for povm in meas:
        povm.validate(1e-10)


def test_run_pm_small():
    value, strat, traces = run_pm(GameSpec(2), restarts=3, seed=0)
    assert value == pytest.approx(0.70711, abs=1e-4)
    strat.validate()
    assert len(traces) == 3
    assert all(t.check_monotone(1e-9) for t in traces)
    # classical warm start never falls below the embedding floor
    assert traces[0].objectives[0] == pytest.approx(0.5, abs=1e-12)


def test_run_pm_rejects_bad_restarts():
    with pytest.raises(ValueError):
        run_pm(GameSpec(2), restarts=0)


def test_run_pm_deterministic():
    a = run_pm(GameSpec(3), restarts=3, seed=5)
    b = run_pm(GameSpec(3), restarts=3, seed=5)
    assert a[0] == b[0]
    assert [t.objectives for t in a[2]] == [t.objectives for t in b[2]]
