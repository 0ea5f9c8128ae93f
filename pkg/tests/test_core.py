"""Tests for the single-realization state and dynamics."""

import math

import numpy as np
import pytest
from scipy import stats

from firmglass.core import (
    EnsembleState,
    ModelParams,
    apply_rating_barrier,
    compute_local_fields,
    conditional_spin_distribution,
    f_table_from_weights,
    initial_state,
    micro_update,
    run_realization,
    sample_coupling_matrix,
    time_step,
    zero_f_table,
)
from firmglass.meanfield import default_fraction_markov

# drift tables with one move forced (exp(-600) underflows to exactly 0)
ALWAYS_UP = {-1: -600.0, 0: -600.0, 1: 0.0}
ALWAYS_DOWN = {-1: 0.0, 0: -600.0, 1: -600.0}


def make_state(couplings, ratings, spins):
    ratings = np.asarray(ratings, dtype=np.int64)
    spins = np.asarray(spins, dtype=np.int64)
    return EnsembleState(
        ratings=ratings,
        spins=spins,
        local_fields=compute_local_fields(couplings, spins),
    )


# ---------------------------------------------------------------------------
# parameters and drift tables
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "kwargs",
    [
        {"n_firms": 0},
        {"n_firms": 10, "r_max": 0},
        {"n_firms": 10, "steps": 0},
        {"n_firms": 10, "sigma_j": -0.1},
        {"n_firms": 10, "f_table": {-1: 0.0, 0: 0.0}},
        {"n_firms": 10, "f_table": {-1: 0.0, 0: 0.0, 1: 0.0, 2: 0.0}},
        {"n_firms": 10, "selection": "roundrobin"},
    ],
)
def test_params_validation(kwargs):
    with pytest.raises(ValueError):
        ModelParams(**kwargs)


def test_f_table_from_weights():
    table = f_table_from_weights(0.15, 0.75, 0.10)
    assert table[-1] == math.log(0.15)
    assert table[0] == math.log(0.75)
    assert table[1] == math.log(0.10)
    with pytest.raises(ValueError):
        f_table_from_weights(0.0, 0.5, 0.5)


# ---------------------------------------------------------------------------
# coupling matrix
# ---------------------------------------------------------------------------


def test_couplings_degenerate_sigma():
    params = ModelParams(n_firms=3, j0=0.5, sigma_j=0.0)
    couplings = sample_coupling_matrix(params, np.random.default_rng(0))
    off_diagonal = couplings[~np.eye(3, dtype=bool)]
    assert np.all(off_diagonal == 0.5)
    assert np.all(np.diag(couplings) == 0.0)


def test_couplings_symmetry_invariants():
    rng = np.random.default_rng(1)
    for _ in range(50):
        params = ModelParams(
            n_firms=int(rng.integers(1, 20)),
            j0=float(rng.normal()),
            sigma_j=float(rng.uniform(0, 2)),
        )
        couplings = sample_coupling_matrix(params, rng)
        assert np.array_equal(couplings, couplings.T)
        assert np.all(np.diag(couplings) == 0.0)


def test_couplings_sample_moments():
    # standard-error bound: the upper triangle holds M = N(N-1)/2 i.i.d.
    # N(0, 1) draws, so |sample mean| <= 4 / sqrt(M) with ~6e-5 failure prob
    n = 1000
    params = ModelParams(n_firms=n, j0=0.0, sigma_j=1.0)
    couplings = sample_coupling_matrix(params, np.random.default_rng(2))
    draws = couplings[np.triu_indices(n, k=1)]
    n_draws = draws.size
    assert n_draws == n * (n - 1) // 2
    assert abs(draws.mean()) <= 4.0 / math.sqrt(n_draws)
    assert abs(draws.std() - 1.0) <= 0.02


# ---------------------------------------------------------------------------
# initial state
# ---------------------------------------------------------------------------


def test_initial_state_rating_occupancy():
    # binomial bound: each of the 7 classes gets Binomial(N, 1/7) firms
    n = 7000
    params = ModelParams(n_firms=n)
    rng = np.random.default_rng(3)
    state = initial_state(params, np.zeros((n, n)), rng)
    assert np.count_nonzero(state.ratings == 0) == 0
    margin = 4.0 * math.sqrt(n * (1 / 7) * (6 / 7))
    for level in range(1, 8):
        count = np.count_nonzero(state.ratings == level)
        assert abs(count - n / 7) <= margin
    assert set(np.unique(state.spins)) <= {-1, 0, 1}


def test_initial_state_field_cache():
    params = ModelParams(n_firms=40, j0=0.1, sigma_j=0.5)
    rng = np.random.default_rng(4)
    couplings = sample_coupling_matrix(params, rng)
    state = initial_state(params, couplings, rng)
    reference = compute_local_fields(couplings, state.spins)
    assert np.max(np.abs(state.local_fields - reference)) < 1e-9


# ---------------------------------------------------------------------------
# conditional move distribution
# ---------------------------------------------------------------------------


def test_conditional_isolated_uniform():
    state = make_state(np.zeros((2, 2)), [3, 3], [0, 0])
    dist = conditional_spin_distribution(state, 0, zero_f_table())
    assert np.array_equal(dist.probs, np.array([1 / 3, 1 / 3, 1 / 3]))
    assert dist.z_norm == 3.0


def test_conditional_isolated_drift_weights():
    # with weights that sum to one, an isolated firm's distribution is the
    # weight triple itself
    state = make_state(np.zeros((1, 1)), [3], [0])
    table = f_table_from_weights(0.15, 0.75, 0.10)
    dist = conditional_spin_distribution(state, 0, table)
    np.testing.assert_allclose(dist.probs, [0.15, 0.75, 0.10], rtol=0, atol=1e-12)


def test_conditional_two_aligned_neighbors():
    couplings = np.zeros((3, 3))
    couplings[0, 1] = couplings[1, 0] = 1.0
    couplings[0, 2] = couplings[2, 0] = 1.0
    state = make_state(couplings, [3, 3, 3], [0, 1, 1])
    dist = conditional_spin_distribution(state, 0, zero_f_table())
    expected = math.e**2 / (math.e**2 + 2.0)  # softmax with one exponent of 2
    assert abs(dist.probs[2] - expected) < 1e-12


def test_conditional_overflow_guard():
    # arbitrary fields up to 1e6 in magnitude must still normalize
    rng = np.random.default_rng(5)
    state = make_state(np.zeros((1, 1)), [3], [0])
    for _ in range(1000):
        state.local_fields[0] = rng.uniform(-1e6, 1e6, size=3)
        dist = conditional_spin_distribution(state, 0, zero_f_table())
        assert abs(float(dist.probs.sum()) - 1.0) <= 1e-12
        assert np.all(dist.probs >= 0.0) and np.all(dist.probs <= 1.0)
        assert math.isfinite(dist.log_z)
        assert 1.0 <= dist.z_norm <= 3.0


# ---------------------------------------------------------------------------
# barrier
# ---------------------------------------------------------------------------


def test_barrier_spec_cases():
    assert apply_rating_barrier(0, 1, 7) == 0   # absorbing at default
    assert apply_rating_barrier(7, 1, 7) == 7   # reflecting at the top
    assert apply_rating_barrier(3, -1, 7) == 2  # interior move


def test_barrier_exhaustive():
    for r_max in (1, 3, 7, 11):
        for rating in range(r_max + 1):
            for spin in (-1, 0, 1):
                result = apply_rating_barrier(rating, spin, r_max)
                assert 0 <= result <= r_max
                if rating == 0:
                    assert result == 0
                elif rating == r_max and spin == 1:
                    assert result == r_max
                else:
                    assert result == rating + spin


# ---------------------------------------------------------------------------
# micro-update and time step
# ---------------------------------------------------------------------------


def test_micro_update_forced_up():
    params = ModelParams(n_firms=1, f_table=ALWAYS_UP)
    couplings = np.zeros((1, 1))
    state = make_state(couplings, [3], [-1])
    rng = np.random.default_rng(6)
    micro_update(state, couplings, 0, params, rng)
    assert state.spins[0] == 1
    assert state.ratings[0] == 4
    # at the top the move still happens but the rating reflects
    state = make_state(couplings, [7], [0])
    micro_update(state, couplings, 0, params, rng)
    assert state.spins[0] == 1 and state.ratings[0] == 7


def test_micro_update_default_is_absorbing():
    params = ModelParams(n_firms=2, j0=0.3, sigma_j=0.4)
    rng = np.random.default_rng(7)
    couplings = sample_coupling_matrix(params, rng)
    state = make_state(couplings, [0, 5], [1, -1])
    for _ in range(200):
        micro_update(state, couplings, 0, params, rng)
        assert state.ratings[0] == 0


def test_field_cache_coherent_after_many_updates():
    params = ModelParams(n_firms=50, j0=0.02, sigma_j=0.3)
    rng = np.random.default_rng(8)
    couplings = sample_coupling_matrix(params, rng)
    state = initial_state(params, couplings, rng)
    for i in range(10_000):
        micro_update(state, couplings, int(rng.integers(0, 50)), params, rng)
        if i % 1000 == 999:
            reference = compute_local_fields(couplings, state.spins)
            assert np.max(np.abs(state.local_fields - reference)) < 1e-9
    reference = compute_local_fields(couplings, state.spins)
    assert np.max(np.abs(state.local_fields - reference)) < 1e-9


def test_time_step_single_firm():
    params = ModelParams(n_firms=1, f_table=ALWAYS_UP, r_max=20)
    couplings = np.zeros((1, 1))
    state = make_state(couplings, [1], [0])
    time_step(state, couplings, params, np.random.default_rng(9))
    assert state.ratings[0] == 2  # exactly one micro-update happened


def test_time_step_with_replacement_occupancy():
    # each firm's selection count is Binomial(N, 1/N); the expected fraction
    # touched at least once is 1 - (1 - 1/N)^N ~ 1 - 1/e
    n = 3000
    params = ModelParams(n_firms=n, f_table=ALWAYS_UP, r_max=25)
    couplings = np.zeros((n, n))
    state = make_state(couplings, np.ones(n), np.zeros(n))
    time_step(state, couplings, params, np.random.default_rng(10))
    moves = state.ratings - 1
    assert moves.sum() == n  # every micro-update moved exactly one firm up
    touched = np.count_nonzero(moves > 0) / n
    expected = 1.0 - (1.0 - 1.0 / n) ** n
    assert abs(touched - expected) <= 5.0 * math.sqrt(expected * (1 - expected) / n)


def test_time_step_permutation_touches_everyone():
    n = 500
    params = ModelParams(n_firms=n, f_table=ALWAYS_UP, r_max=25,
                         selection="permutation")
    couplings = np.zeros((n, n))
    state = make_state(couplings, np.ones(n), np.zeros(n))
    time_step(state, couplings, params, np.random.default_rng(11))
    assert np.all(state.ratings == 2)


def test_zero_coupling_spin_distribution_uniform():
    # with no couplings and no drift the sampled moves must be uniform
    n = 3000
    params = ModelParams(n_firms=n, j0=0.0, sigma_j=0.0, steps=8, r_max=30)
    outcome = run_realization(params, 12)
    counts = [np.count_nonzero(outcome.final_spins == v) for v in (-1, 0, 1)]
    assert stats.chisquare(counts).pvalue > 1e-3


# ---------------------------------------------------------------------------
# whole realizations
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("engine", ["numba", "python"])
def test_run_realization_deterministic(engine):
    params = ModelParams(n_firms=80, j0=0.01, sigma_j=0.05)
    first = run_realization(params, 13, engine=engine, record_trajectory=True)
    second = run_realization(params, 13, engine=engine, record_trajectory=True)
    assert first.nd == second.nd
    assert first.nd_trajectory == second.nd_trajectory
    assert np.array_equal(first.final_ratings, second.final_ratings)
    assert np.array_equal(first.final_spins, second.final_spins)


@pytest.mark.parametrize("selection", ["with_replacement", "permutation"])
def test_engines_bit_identical(selection):
    params = ModelParams(
        n_firms=60,
        j0=0.03,
        sigma_j=0.15,
        f_table=f_table_from_weights(0.15, 0.75, 0.10),
        selection=selection,
    )
    for seed in range(5):
        fast = run_realization(params, seed, engine="numba", record_trajectory=True)
        slow = run_realization(params, seed, engine="python", record_trajectory=True)
        assert fast.nd == slow.nd
        assert fast.nd_trajectory == slow.nd_trajectory
        assert np.array_equal(fast.final_ratings, slow.final_ratings)
        assert np.array_equal(fast.final_spins, slow.final_spins)


def test_always_up_never_defaults():
    params = ModelParams(n_firms=100, f_table=ALWAYS_UP)
    assert run_realization(params, 14).nd == 0


def test_defaults_accumulate_and_ratings_stay_in_range():
    params = ModelParams(n_firms=150, j0=0.0, sigma_j=0.4, steps=12)
    outcome = run_realization(params, 15, record_trajectory=True)
    trajectory = outcome.nd_trajectory
    assert all(a <= b for a, b in zip(trajectory, trajectory[1:]))
    assert outcome.nd == trajectory[-1]
    assert outcome.final_ratings.min() >= 0
    assert outcome.final_ratings.max() <= params.r_max


def test_single_firm_frequency_matches_chain():
    # one isolated firm updated once per step is exactly the 8-move rating
    # chain at (1/3, 1/3); check the default frequency over many seeds
    params = ModelParams(n_firms=1, j0=0.0, sigma_j=0.0)
    n_seeds = 100_000
    hits = sum(run_realization(params, seed).nd for seed in range(n_seeds))
    expected = default_fraction_markov(1 / 3, 1 / 3, steps=8, r_max=7)
    stderr = math.sqrt(expected * (1 - expected) / n_seeds)
    assert abs(hits / n_seeds - expected) <= 3.0 * stderr
