"""Named random sub-streams derived from a single run seed.

Every source of randomness (parameter init, epoch shuffling, synthetic data)
draws from its own generator so that adding draws to one stream never
perturbs another. Stream derivation is stable across platforms and runs.
"""

import hashlib

import numpy as np


def stream(seed: int, name: str) -> np.random.Generator:
    """Generator for sub-stream ``name`` of run ``seed``."""
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    salt = int.from_bytes(digest[:8], "little")
    return np.random.default_rng(np.random.SeedSequence([int(seed), salt]))
