"""Named, independent random substreams derived from one master seed."""
from __future__ import annotations

import numpy as np

# Stable order: stream identity is positional, so never reorder.
STREAM_NAMES = ("episode", "fading", "cpu", "sinr", "explore", "minibatch", "init")


def named_streams(master_seed: int) -> dict[str, np.random.Generator]:
    """Expand one master seed into independent generators per randomness source.

    Keeping the sources separate means, e.g., swapping the agent never
    perturbs the channel realizations of a run with the same seed.
    """
    root = np.random.SeedSequence(master_seed)
    children = root.spawn(len(STREAM_NAMES))
    return {name: np.random.default_rng(seq)
            for name, seq in zip(STREAM_NAMES, children)}
