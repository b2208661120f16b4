import hashlib
from typing import Union

import numpy as np

SeedLike = Union[int, np.random.SeedSequence]


def derive_seed(*parts, algorithm: str = 'sha256') -> int:
    """
    Derive a 64-bit seed from an ordered tuple of parts. The parts are joined with ':' and hashed, so the seed of one
    (master seed, scenario, trial) combination never depends on which other combinations exist.

    :param parts: The values identifying the stream, e.g. (master_seed, scenario_id, trial_index).
    :param algorithm: The hashlib algorithm to use.
    :return: A non-negative integer below 2**64.
    """
    hasher = hashlib.new(algorithm)
    hasher.update(':'.join(str(part) for part in parts).encode('utf-8'))
    return int.from_bytes(hasher.digest()[:8], 'big')


def spawn_generators(seed: SeedLike, count: int) -> list:
    """
    Split one seed into ``count`` independent numpy generators.

    :param seed: An integer seed or a SeedSequence.
    :param count: The number of generators.
    :return: A list of ``np.random.Generator``.
    """
    sequence = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [np.random.default_rng(child) for child in sequence.spawn(count)]
