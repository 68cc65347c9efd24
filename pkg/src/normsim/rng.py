"""Seeded random streams with reproducible replicate substreams.

Everything stochastic in the simulator flows through :class:`RandomStream` so
that a run is a pure function of its 64-bit seed.  The underlying bit
generator is numpy's PCG64; scalar draws are served out of fixed-size
prefetched blocks, which makes the mapping from (seed, call sequence) to
values part of the stream format.  The same seed plus the same call sequence
yields the same values on every platform.
"""

from __future__ import annotations

import numpy as np

# Recorded in every output file so readers know which stream format made it.
GENERATOR_ID = "numpy-pcg64"

_BLOCK = 4096


class RandomStream:
    """Deterministic source of uniforms, gaussians and permutations.

    A degenerate request (``uniform(a, a)`` or ``gaussian(m, 0)``) returns its
    fixed answer *without consuming* from the stream.  This is load-bearing:
    it is what makes a zero-noise probabilistic run consume exactly the same
    draws as a deterministic one.
    """

    __slots__ = ("seed", "_gen", "_uni", "_ui", "_nrm", "_ni")

    def __init__(self, seed: int):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self._gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
        self._uni = None  # prefetched uniform block
        self._ui = 0
        self._nrm = None  # prefetched standard-normal block
        self._ni = 0

    # -- scalar draws -------------------------------------------------------

    def random(self) -> float:
        """Next uniform double in [0, 1)."""
        if self._uni is None or self._ui >= _BLOCK:
            self._uni = self._gen.random(_BLOCK)
            self._ui = 0
        v = self._uni[self._ui]
        self._ui += 1
        return float(v)

    def uniform(self, lo: float, hi: float) -> float:
        """Uniform draw in [lo, hi). lo == hi returns lo without consuming."""
        if lo > hi:
            raise ValueError(f"inverted range: lo={lo} > hi={hi}")
        if lo == hi:
            return lo
        return lo + (hi - lo) * self.random()

    def gaussian(self, mean: float, sd: float) -> float:
        """Normal draw. sd == 0 returns mean exactly without consuming."""
        if sd < 0:
            raise ValueError(f"negative standard deviation: {sd}")
        if sd == 0.0:
            return mean
        if self._nrm is None or self._ni >= _BLOCK:
            self._nrm = self._gen.standard_normal(_BLOCK)
            self._ni = 0
        z = self._nrm[self._ni]
        self._ni += 1
        return mean + sd * float(z)

    def chance(self, p: float) -> bool:
        """True with probability p. Always consumes one uniform."""
        return self.random() < p

    # -- permutations -------------------------------------------------------

    def shuffle(self, items: list) -> list:
        """Return a new, uniformly shuffled list; the input is not touched.

        Fisher-Yates via the bit generator. Lists of length < 2 are returned
        as copies without consuming from the stream.
        """
        n = len(items)
        if n < 2:
            return list(items)
        perm = self._gen.permutation(n)
        return [items[i] for i in perm]


def derive_seed(master_seed: int, replicate_index: int) -> int:
    """Mix a master seed and a replicate index into a fresh 64-bit seed.

    Uses numpy's SeedSequence spawn-key mechanism, so substreams for distinct
    indices are statistically independent and each is reproducible from the
    (master_seed, replicate_index) pair alone — no sequential splitting.
    """
    if replicate_index < 0:
        raise ValueError(f"replicate index must be >= 0, got {replicate_index}")
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(replicate_index),))
    lo, hi = (int(w) for w in ss.generate_state(2, np.uint32))
    return lo | (hi << 32)


def substream(master_seed: int, replicate_index: int) -> RandomStream:
    """Stream for one replicate of an experiment."""
    return RandomStream(derive_seed(master_seed, replicate_index))
