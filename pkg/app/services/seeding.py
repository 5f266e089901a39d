import hashlib

import numpy as np


def _entropy(part: int | str) -> int:
    if isinstance(part, str):
        return int.from_bytes(
            hashlib.blake2b(part.encode("utf-8"), digest_size=8).digest(), "little"
        )
    if part < 0:
        raise ValueError(f"seed parts must be non-negative, got {part}")
    return int(part)


def mix_seed(*parts: int | str) -> int:
    """
    Derive a 64-bit seed from a master seed and any number of counters/tags.

    The result only depends on the parts, never on call order, so parallel
    walks and records stay reproducible regardless of scheduling.
    """
    sequence = np.random.SeedSequence([_entropy(p) for p in parts])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def make_rng(*parts: int | str) -> np.random.Generator:
    return np.random.default_rng(mix_seed(*parts))
