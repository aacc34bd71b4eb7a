"""Philox stream construction for reproducible parallel trial fan-out.

Every trial gets an independent counter-based stream derived from
(master seed, trial index), so results never depend on worker count or
execution order.  Lane 0 is for process dynamics, lane 1 for initial-state
placement.
"""

from __future__ import annotations

import numpy as np

__all__ = ["make_rng", "trial_rng", "placement_rng"]


def make_rng(seed: int) -> np.random.Generator:
    """Philox generator for a bare seed."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """Independent stream for one trial's process dynamics."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(0, trial_index))
    return np.random.Generator(np.random.Philox(ss))


def placement_rng(master_seed: int, trial_index: int = 0) -> np.random.Generator:
    """Independent stream for initial-state placement."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(1, trial_index))
    return np.random.Generator(np.random.Philox(ss))
