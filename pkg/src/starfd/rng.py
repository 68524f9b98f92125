"""Deterministic random streams for channels, noise, and experiment cells.

Streams are keyed by a 128-bit value derived from a master seed and a path
of labels, so any component can obtain an independent substream without
coordinating draw counts with the rest of the code.  The bit generator is
counter-based (Philox), and complex normals use an explicit polar
transform of uniforms, so a draw sequence depends only on the stream key
and the call order.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["Stream"]

_MASK128 = (1 << 128) - 1


def _derive_key(parent: int, label: str) -> int:
    """First 128 bits of SHA-256 over "<parent-key-hex>/<label>"."""
    digest = hashlib.sha256(f"{parent:032x}/{label}".encode()).digest()
    return int.from_bytes(digest[:16], "little")


class Stream:
    """Seedable random stream supporting labelled child derivation."""

    def __init__(self, key: int):
        self.key = key & _MASK128
        self._gen = np.random.Generator(np.random.Philox(key=self.key))

    @classmethod
    def from_seed(cls, seed: int, label: str = "root") -> "Stream":
        return cls(_derive_key(seed & _MASK128, label))

    def child(self, label: str) -> "Stream":
        """Independent stream derived from this stream's key and a label."""
        return Stream(_derive_key(self.key, label))

    def uniform(self, size=None):
        """Uniform draws on [0, 1)."""
        return self._gen.random(size)

    def angle(self, size=None):
        """Uniform angles on [0, 2*pi)."""
        return 2.0 * np.pi * self._gen.random(size)

    def cnormal(self, size=None):
        """Circularly symmetric complex normal draws with E|z|^2 = 1.

        Polar transform of two uniforms: |z|^2 is Exp(1), the phase is
        uniform.  The first uniform is reflected into (0, 1] to keep the
        log finite.
        """
        u1 = 1.0 - self._gen.random(size)
        u2 = self._gen.random(size)
        return np.sqrt(-np.log(u1)) * np.exp(2j * np.pi * u2)
