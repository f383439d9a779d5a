"""Deterministic named-substream RNG derivation.

A simulation run owns one RngHierarchy seeded with the run seed. Every
component that consumes randomness asks for its own named stream
(``environment``, ``selection``, ``gathering``, per-agent streams, ...)
so that adding or removing draws in one component never perturbs the
sequences seen by another.

Stream seeds are derived by hashing ``<seed>/<name>/<index>`` with
SHA-256 and taking the first 8 bytes. The derivation string is part of
the artifact's reproducibility contract and must never change: run
records written by one version must replay bit-identically under later
versions.
"""
from __future__ import annotations

import hashlib
import random

_DERIVATION_VERSION = 1


def derive_seed(base_seed: int, *path: int | str) -> int:
    """Derive a 64-bit child seed from a base seed and a stream path."""
    text = "/".join([f"v{_DERIVATION_VERSION}", str(base_seed), *map(str, path)])
    digest = hashlib.sha256(text.encode("ascii")).digest()
    return int.from_bytes(digest[:8], "big")


class RngHierarchy:
    """Factory for independent deterministic substreams of one run.

    Streams are plain ``random.Random`` instances; the Mersenne Twister
    core is stable across Python versions, and all consumers restrict
    themselves to ``random()`` plus arithmetic on the result, which
    keeps every draw reproducible.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)

    def stream(self, *path: int | str) -> random.Random:
        """Return a fresh generator for the named substream."""
        return random.Random(derive_seed(self.seed, *path))

    def environment(self) -> random.Random:
        return self.stream("environment")

    def initial_population(self) -> random.Random:
        return self.stream("population")

    def selection(self) -> random.Random:
        return self.stream("selection")

    def gathering(self) -> random.Random:
        return self.stream("gathering")

    def agent(self, agent_id: int) -> random.Random:
        return self.stream("agent", agent_id)
