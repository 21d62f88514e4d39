"""Per-trial generator derivation.

Every Monte-Carlo trial gets a generator keyed by the master seed plus a tuple
of non-negative integer keys, so a trial can be replayed in isolation and the
outcome never depends on scheduling.
"""

from __future__ import annotations

import os
import struct

import numpy as np

SEED_ENV = "CHARSENSE_SEED"
DEFAULT_SEED = 20100531


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    return int(raw) if raw not in (None, "") else DEFAULT_SEED


def trial_rng(master: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master, spawn_key=tuple(int(k) for k in keys)))


def float_key(x: float) -> int:
    """Stable non-negative integer key for a float (e.g. an SNR in dB)."""
    return int.from_bytes(struct.pack("<d", float(x)), "little")
