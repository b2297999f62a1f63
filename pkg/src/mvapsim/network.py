"""Dense ReLU Q-network with hand-rolled backpropagation (float64, numpy).

Small enough to be audited against finite differences; no ML framework.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (EmptyBatchError, NonFiniteInputError, ShapeMismatchError)

_MAGIC = b"mvapsim-qnet-v1"


@dataclass
class GradientSet:
    """Per-parameter partials of a minibatch loss; shapes mirror the network."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]


class QNetwork:
    """MLP mapping a state-feature vector to one Q-value per action.

    Hidden layers use ReLU, the output layer is linear. Weights start
    uniform in +-sqrt(6 / (fan_in + fan_out)), biases at zero. A network
    is single-owner mutable while training; share only copies for
    read-only evaluation.
    """

    def __init__(self, layer_sizes: Sequence[int], rng: np.random.Generator):
        sizes = tuple(int(s) for s in layer_sizes)
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise ValueError(f"need >= 2 positive layer sizes, got {sizes}")
        self.layer_sizes = sizes
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            self.weights.append(rng.uniform(-limit, limit, (fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))

    @classmethod
    def from_parameters(cls, weights: Sequence[np.ndarray],
                        biases: Sequence[np.ndarray]) -> "QNetwork":
        """Wrap explicit parameter arrays (copied) into a network."""
        if len(weights) != len(biases) or not weights:
            raise ShapeMismatchError("need one bias vector per weight matrix")
        sizes = [weights[0].shape[0]]
        for w, b in zip(weights, biases):
            if w.ndim != 2 or b.shape != (w.shape[1],) or w.shape[0] != sizes[-1]:
                raise ShapeMismatchError("inconsistent layer shapes")
            sizes.append(w.shape[1])
        net = cls.__new__(cls)
        net.layer_sizes = tuple(sizes)
        net.weights = [np.array(w, dtype=float) for w in weights]
        net.biases = [np.array(b, dtype=float) for b in biases]
        return net

    # ------------------------------------------------------------------
    @property
    def action_count(self) -> int:
        return self.layer_sizes[-1]

    def _check_input(self, x: np.ndarray, expected_rank: int) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim != expected_rank or x.shape[-1] != self.layer_sizes[0]:
            raise NonFiniteInputError(
                f"expected shape (..., {self.layer_sizes[0]}), got {x.shape}")
        if not np.all(np.isfinite(x)):
            raise NonFiniteInputError("input contains NaN or infinity")
        return x

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Q-values for a single feature vector."""
        h = self._check_input(x, 1)
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i < last:
                np.maximum(h, 0.0, out=h)
        return h

    def forward_batch(self, x: np.ndarray) -> np.ndarray:
        """Q-values for a batch of feature vectors, one row per sample."""
        h = self._check_input(x, 2)
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i < last:
                np.maximum(h, 0.0, out=h)
        return h

    def backward(self, states: np.ndarray, actions: Sequence[int],
                 targets: Sequence[float]) -> GradientSet:
        """Gradients of the mean-squared error over the selected outputs.

        Loss = (1/B) * sum_i (Q(s_i, a_i) - y_i)^2; only each sample's
        chosen action contributes to the output-layer error.
        """
        states = np.asarray(states, dtype=float)
        if states.ndim != 2 or states.shape[0] == 0:
            raise EmptyBatchError("batch must be a non-empty 2-D array")
        states = self._check_input(states, 2)
        actions = np.asarray(actions, dtype=int)
        targets = np.asarray(targets, dtype=float)
        if actions.shape != (states.shape[0],) or targets.shape != actions.shape:
            raise ShapeMismatchError("states, actions and targets disagree in length")
        if not np.all(np.isfinite(targets)):
            raise NonFiniteInputError("targets contain NaN or infinity")
        acts, delta, d_h = self._backward_core(states, actions, targets)
        batch = states.shape[0]
        last = len(self.weights) - 1

        g_weights: list[np.ndarray] = [None] * len(self.weights)  # type: ignore
        g_biases: list[np.ndarray] = [None] * len(self.biases)  # type: ignore
        # Output layer touches only the selected action units, so scatter
        # per sample instead of materializing a dense (batch, actions) error.
        g_weights[last] = np.zeros_like(self.weights[last])
        g_biases[last] = np.zeros_like(self.biases[last])
        h_last = acts[last]
        for i in range(batch):
            a = actions[i]
            g_weights[last][:, a] += delta[i] * h_last[i]
            g_biases[last][a] += delta[i]

        for layer in range(last - 1, -1, -1):
            d_h = d_h * (acts[layer + 1] > 0.0)
            g_weights[layer] = acts[layer].T @ d_h
            g_biases[layer] = d_h.sum(axis=0)
            if layer > 0:
                d_h = d_h @ self.weights[layer].T
        return GradientSet(weights=g_weights, biases=g_biases)

    def _backward_core(self, states, actions, targets):
        """Shared forward pass and output-layer error of the two train paths."""
        last = len(self.weights) - 1
        acts = [states]
        h = states
        for i in range(last):
            h = h @ self.weights[i] + self.biases[i]
            np.maximum(h, 0.0, out=h)
            acts.append(h)
        w_out = self.weights[last]
        q_sel = np.einsum("bi,ib->b", acts[last], w_out[:, actions]) \
            + self.biases[last][actions]
        delta = 2.0 * (q_sel - targets) / states.shape[0]
        d_h = delta[:, None] * w_out[:, actions].T
        return acts, delta, d_h

    def train_step(self, states: np.ndarray, actions: Sequence[int],
                   targets: Sequence[float], learning_rate: float) -> None:
        """Fused backward + descent step.

        Arithmetically identical to ``sgd_update(backward(...), lr)`` but
        never materializes the mostly-zero output-layer gradient: only the
        weight columns of actions present in the batch are updated.
        """
        states = np.asarray(states, dtype=float)
        if states.ndim != 2 or states.shape[0] == 0:
            raise EmptyBatchError("batch must be a non-empty 2-D array")
        states = self._check_input(states, 2)
        actions = np.asarray(actions, dtype=int)
        targets = np.asarray(targets, dtype=float)
        if actions.shape != (states.shape[0],) or targets.shape != actions.shape:
            raise ShapeMismatchError("states, actions and targets disagree in length")
        if not np.all(np.isfinite(targets)):
            raise NonFiniteInputError("targets contain NaN or infinity")

        acts, delta, d_h = self._backward_core(states, actions, targets)
        last = len(self.weights) - 1
        h_last = acts[last]
        # Accumulate per-column sums in sample order, exactly as the dense
        # gradient does, so both paths round identically.
        col_w: dict[int, np.ndarray] = {}
        col_b: dict[int, float] = {}
        for i in range(states.shape[0]):
            a = int(actions[i])
            contrib = delta[i] * h_last[i]
            if a in col_w:
                col_w[a] += contrib
                col_b[a] += delta[i]
            else:
                col_w[a] = contrib
                col_b[a] = delta[i]
        w_out, b_out = self.weights[last], self.biases[last]
        for a, g in col_w.items():
            w_out[:, a] -= learning_rate * g
            b_out[a] -= learning_rate * col_b[a]

        for layer in range(last - 1, -1, -1):
            d_h = d_h * (acts[layer + 1] > 0.0)
            g_w = acts[layer].T @ d_h
            g_b = d_h.sum(axis=0)
            if layer > 0:
                d_h = d_h @ self.weights[layer].T  # before this layer's update
            self.weights[layer] -= learning_rate * g_w
            self.biases[layer] -= learning_rate * g_b

    def sgd_update(self, grads: GradientSet, learning_rate: float) -> None:
        """Plain gradient-descent step: theta <- theta - lr * grad (in place)."""
        if len(grads.weights) != len(self.weights) \
                or len(grads.biases) != len(self.biases):
            raise ShapeMismatchError("gradient layer count mismatch")
        for w, gw in zip(self.weights, grads.weights):
            if w.shape != gw.shape:
                raise ShapeMismatchError(
                    f"weight gradient shape {gw.shape} != {w.shape}")
        for b, gb in zip(self.biases, grads.biases):
            if b.shape != gb.shape:
                raise ShapeMismatchError(
                    f"bias gradient shape {gb.shape} != {b.shape}")
        for w, gw in zip(self.weights, grads.weights):
            w -= learning_rate * gw
        for b, gb in zip(self.biases, grads.biases):
            b -= learning_rate * gb

    def q_selected(self, states: np.ndarray, actions: Sequence[int]) -> np.ndarray:
        """Q(s_i, a_i) per sample without materializing the full action row."""
        states = self._check_input(np.asarray(states, dtype=float), 2)
        actions = np.asarray(actions, dtype=int)
        last = len(self.weights) - 1
        h = states
        for i in range(last):
            h = h @ self.weights[i] + self.biases[i]
            np.maximum(h, 0.0, out=h)
        return np.einsum("bi,ib->b", h, self.weights[last][:, actions]) \
            + self.biases[last][actions]

    def loss(self, states: np.ndarray, actions: Sequence[int],
             targets: Sequence[float]) -> float:
        """Mean-squared error over the selected action outputs."""
        q = self.forward_batch(np.asarray(states, dtype=float))
        actions = np.asarray(actions, dtype=int)
        targets = np.asarray(targets, dtype=float)
        err = q[np.arange(len(actions)), actions] - targets
        return float(np.mean(err * err))

    def copy(self) -> "QNetwork":
        return QNetwork.from_parameters(self.weights, self.biases)

    # ------------------------------------------------------------------
    def save(self, path: str | Path) -> None:
        """Checkpoint to a flat binary file.

        Layout: magic line, one ASCII line of space-separated layer sizes,
        then for each layer its weight matrix (row-major, little-endian
        float64) followed by its bias vector. Round-trips bit-exactly.
        """
        path = Path(path)
        with open(path, "wb") as fh:
            fh.write(_MAGIC + b"\n")
            fh.write(" ".join(str(s) for s in self.layer_sizes).encode() + b"\n")
            for w, b in zip(self.weights, self.biases):
                fh.write(np.ascontiguousarray(w, dtype="<f8").tobytes())
                fh.write(np.ascontiguousarray(b, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path: str | Path) -> "QNetwork":
        path = Path(path)
        with open(path, "rb") as fh:
            if fh.readline().rstrip(b"\n") != _MAGIC:
                raise ValueError(f"{path} is not a Q-network checkpoint")
            sizes = [int(tok) for tok in fh.readline().split()]
            weights, biases = [], []
            for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
                w = np.frombuffer(fh.read(8 * fan_in * fan_out), dtype="<f8")
                weights.append(w.reshape(fan_in, fan_out).copy())
                biases.append(np.frombuffer(fh.read(8 * fan_out),
                                            dtype="<f8").copy())
        return cls.from_parameters(weights, biases)


def soft_update(target: QNetwork, primary: QNetwork, tau: float) -> None:
    """Blend the target parameters toward the primary: tau*theta + (1-tau)*theta'."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must lie in [0, 1], got {tau}")
    if target.layer_sizes != primary.layer_sizes:
        raise ShapeMismatchError(
            f"architectures differ: {target.layer_sizes} vs {primary.layer_sizes}")
    for tw, pw in zip(target.weights, primary.weights):
        tw *= (1.0 - tau)
        tw += tau * pw
    for tb, pb in zip(target.biases, primary.biases):
        tb *= (1.0 - tau)
        tb += tau * pb
