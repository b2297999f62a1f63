"""Finite-state Markov chain for the access-point-to-edge-server SINR."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import NonStochasticRowError, ShapeMismatchError

ROW_SUM_TOL = 1e-9


class SinrChain:
    """Markov chain over a discrete set of SINR states in dB.

    A chain instance is single-owner mutable: move it between threads if
    you like, but do not share one across concurrent steppers.
    """

    def __init__(self, states_db: Sequence[float],
                 transition: Sequence[Sequence[float]], seed_index: int = 0):
        states = tuple(float(s) for s in states_db)
        matrix = np.array(transition, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ShapeMismatchError(
                f"transition matrix must be square, got shape {matrix.shape}")
        if matrix.shape[0] != len(states):
            raise ShapeMismatchError(
                f"matrix side {matrix.shape[0]} != number of states {len(states)}")
        if np.any(matrix < 0) or np.any(matrix > 1):
            raise NonStochasticRowError("transition entries must lie in [0, 1]")
        row_sums = matrix.sum(axis=1)
        for i, s in enumerate(row_sums):
            if abs(s - 1.0) > ROW_SUM_TOL:
                raise NonStochasticRowError(f"row {i} sums to {s!r}, expected 1")
        if not 0 <= seed_index < len(states):
            raise ValueError(f"seed_index {seed_index} outside [0, {len(states)})")

        self.states_db = states
        self.transition = matrix
        self.current_index = int(seed_index)
        # Cumulative rows for inverse-CDF sampling; pin the last edge to 1
        # so rounding in the partial sums can never strand a draw.
        self._cum = np.cumsum(matrix, axis=1)
        self._cum[:, -1] = 1.0

    @property
    def current_db(self) -> float:
        return self.states_db[self.current_index]

    def reset(self, rng: np.random.Generator | None = None,
              index: int | None = None) -> float:
        """Reposition the chain, uniformly at random unless an index is given."""
        if index is None:
            if rng is None:
                raise ValueError("reset needs either an rng or an explicit index")
            index = int(rng.integers(len(self.states_db)))
        if not 0 <= index < len(self.states_db):
            raise ValueError(f"index {index} outside [0, {len(self.states_db)})")
        self.current_index = index
        return self.current_db

    def step(self, rng: np.random.Generator) -> float:
        """Resample the state from the current row and return the new dB value."""
        u = rng.random()
        self.current_index = int(
            np.searchsorted(self._cum[self.current_index], u, side="right"))
        return self.current_db
