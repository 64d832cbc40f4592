"""Counter-based random stream shared by every stochastic engine.

A `Stream` is a (key, counter) pair; each draw applies the splitmix64
finalizer to key + counter*gamma. Streams for different trajectories of one
run are derived as key = derive_key(master_seed, trajectory_index), so an
ensemble is reproducible and order-independent: any trajectory can be replayed
in isolation from (master_seed, index).
"""

from __future__ import annotations

import numpy as np

from . import kernels

_MASK = (1 << 64) - 1


class Stream:
    """Splittable counter-based RNG stream (splitmix64 finalizer)."""

    __slots__ = ("state",)

    def __init__(self, key: int):
        self.state = np.array([key & _MASK, 0], dtype=np.uint64)

    @classmethod
    def for_trajectory(cls, master_seed: int, index: int) -> "Stream":
        key = int(kernels.derive_key(master_seed & _MASK, index & _MASK))
        return cls(key)

    @property
    def key(self) -> int:
        return int(self.state[0])

    @property
    def counter(self) -> int:
        return int(self.state[1])

    def next_u64(self) -> int:
        return int(kernels.rng_next(self.state))

    def randint(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        if n <= 0:
            raise ValueError("n must be positive")
        return int(kernels.rng_below(self.state, n))

    def random(self) -> float:
        """Uniform float in [0, 1)."""
        return float(kernels.rng_unit(self.state))


def trajectory_seed(master_seed: int, index: int) -> int:
    """The per-trajectory stream key, exposed for manifests."""
    return int(kernels.derive_key(master_seed & _MASK, index & _MASK))
