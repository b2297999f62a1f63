"""Tests for the SINR Markov chain."""
import numpy as np
import pytest

from mvapsim import default_config
from mvapsim.errors import NonStochasticRowError, ShapeMismatchError
from mvapsim.sinr import SinrChain

STATES = (-5.0, -3.0, 0.0, 3.0, 5.0)


def default_chain(seed_index=0):
    cfg = default_config()
    return SinrChain(cfg.sinr.states_db, cfg.sinr.transition, seed_index)


def power_iterate_stationary(matrix, tol=1e-10):
    """Independent oracle: iterate v <- vP until it stops moving."""
    matrix = np.asarray(matrix, dtype=float)
    v = np.full(len(matrix), 1.0 / len(matrix))
    for _ in range(1_000_000):
        nv = v @ matrix
        if np.max(np.abs(nv - v)) < tol:
            return nv
        v = nv
    raise AssertionError("power iteration did not converge")


class TestConstruction:
    def test_default_matrix_is_valid(self):
        chain = default_chain()
        assert chain.states_db == STATES
        assert chain.current_index == 0
        np.testing.assert_allclose(chain.transition.sum(axis=1), 1.0,
                                   atol=1e-12)

    def test_identity_matrix_never_moves(self):
        chain = SinrChain(STATES, np.eye(5), seed_index=3)
        rng = np.random.default_rng(0)
        assert all(chain.step(rng) == STATES[3] for _ in range(200))

    def test_non_stochastic_row_rejected(self):
        bad = np.full((5, 5), 0.18)  # rows sum to 0.9
        with pytest.raises(NonStochasticRowError):
            SinrChain(STATES, bad)

    def test_entry_out_of_range_rejected(self):
        bad = np.eye(5)
        bad[0, 0] = 1.5
        bad[0, 1] = -0.5
        with pytest.raises(NonStochasticRowError):
            SinrChain(STATES, bad)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ShapeMismatchError):
            SinrChain(STATES, np.eye(4))
        with pytest.raises(ShapeMismatchError):
            SinrChain(STATES, np.ones((5, 4)) / 4)

    def test_bad_seed_index_rejected(self):
        with pytest.raises(ValueError):
            SinrChain(STATES, np.eye(5), seed_index=5)


class TestStepStatistics:
    def test_one_step_frequencies_from_zero_db(self):
        chain = default_chain()
        row = np.array(chain.transition[2])
        rng = np.random.default_rng(123)
        counts = np.zeros(5)
        n = 200_000
        for _ in range(n):
            chain.reset(index=2)
            chain.step(rng)
            counts[chain.current_index] += 1
        freqs = counts / n
        np.testing.assert_allclose(freqs, row, atol=0.005)

    def test_row3_frequencies_match_published_values(self):
        # the canonical mid-row values the transition matrix is built from
        published = np.array([0.100, 0.250, 0.320, 0.250, 0.100])
        chain = default_chain()
        rng = np.random.default_rng(2718)
        counts = np.zeros(5)
        n = 1_000_000
        for _ in range(n):
            chain.reset(index=2)
            chain.step(rng)
            counts[chain.current_index] += 1
        np.testing.assert_allclose(counts / n, published, atol=0.005)

    def test_long_run_occupancy_matches_stationary_oracle(self):
        chain = default_chain()
        expected = power_iterate_stationary(chain.transition)
        rng = np.random.default_rng(42)
        counts = np.zeros(5)
        n = 400_000
        for _ in range(n):
            chain.step(rng)
            counts[chain.current_index] += 1
        np.testing.assert_allclose(counts / n, expected, atol=0.005)

    def test_determinism_same_seed_same_trajectory(self):
        a, b = default_chain(2), default_chain(2)
        ra, rb = np.random.default_rng(9), np.random.default_rng(9)
        for _ in range(500):
            assert a.step(ra) == b.step(rb)

    def test_reset_uniform_over_states(self):
        chain = default_chain()
        rng = np.random.default_rng(5)
        counts = np.zeros(5)
        for _ in range(50_000):
            chain.reset(rng=rng)
            counts[chain.current_index] += 1
        np.testing.assert_allclose(counts / 50_000, 0.2, atol=0.01)
