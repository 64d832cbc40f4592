"""Generalized Pauli words over prime-dimensional qudits.

A word is phase * X^x Z^z in exponent form. For odd p the stored object is
omega^phase * D_(x|z) with the symmetric Weyl displacement
D_(x|z) = tau^{x.z} X^x Z^z (tau = omega^((p+1)/2)), so the phase exponent
lives in Z_p. For p = 2 the word is i^phase X^x Z^z with phase in Z_4.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .primes import is_prime


def phase_modulus(p_dim: int) -> int:
    return 4 if p_dim == 2 else p_dim


@dataclass
class PauliWord:
    p_dim: int
    x: np.ndarray  # X exponents, length L, values in [0, p_dim)
    z: np.ndarray  # Z exponents
    phase: int     # mod p_dim (odd p) or mod 4 (p = 2)

    def __post_init__(self):
        if not is_prime(self.p_dim):
            raise ValueError(f"p_dim must be prime, got {self.p_dim}")
        self.x = np.asarray(self.x, dtype=np.int64) % self.p_dim
        self.z = np.asarray(self.z, dtype=np.int64) % self.p_dim
        if self.x.shape != self.z.shape or self.x.ndim != 1:
            raise ValueError("x and z must be equal-length vectors")
        self.phase = int(self.phase) % phase_modulus(self.p_dim)

    @classmethod
    def identity(cls, L: int, p_dim: int) -> "PauliWord":
        return cls(p_dim, np.zeros(L, np.int64), np.zeros(L, np.int64), 0)

    @classmethod
    def z_word(cls, L: int, p_dim: int, site: int, power: int = 1,
               phase: int = 0) -> "PauliWord":
        z = np.zeros(L, np.int64)
        z[site] = power
        return cls(p_dim, np.zeros(L, np.int64), z, phase)

    @classmethod
    def x_word(cls, L: int, p_dim: int, site: int, power: int = 1,
               phase: int = 0) -> "PauliWord":
        x = np.zeros(L, np.int64)
        x[site] = power
        return cls(p_dim, x, np.zeros(L, np.int64), phase)

    @property
    def n_sites(self) -> int:
        return self.x.shape[0]

    def is_identity(self) -> bool:
        return self.phase == 0 and not self.x.any() and not self.z.any()

    def symplectic_product(self, other: "PauliWord") -> int:
        """Commutation exponent s with W W' = omega^s W' W:
        s = z.x' - x.z' mod p."""
        s = int(self.z @ other.x - self.x @ other.z)
        return s % self.p_dim

    def commutes_with(self, other: "PauliWord") -> bool:
        return self.symplectic_product(other) == 0

    def __mul__(self, other: "PauliWord") -> "PauliWord":
        if other.p_dim != self.p_dim or other.n_sites != self.n_sites:
            raise ValueError("mismatched words")
        p = self.p_dim
        if p == 2:
            ph = self.phase + other.phase + 2 * int(self.z @ other.x)
            return PauliWord(p, self.x ^ other.x, self.z ^ other.z, ph % 4)
        inv2 = (p + 1) // 2
        ph = self.phase + other.phase + inv2 * self.symplectic_product(other)
        return PauliWord(p, (self.x + other.x) % p, (self.z + other.z) % p,
                         ph % p)

    def power(self, e: int) -> "PauliWord":
        p = self.p_dim
        if p != 2:
            e = e % p
            return PauliWord(p, (e * self.x) % p, (e * self.z) % p,
                             (e * self.phase) % p)
        out = PauliWord.identity(self.n_sites, p)
        for _ in range(e % 4):
            out = out * self
        return out

    def inverse(self) -> "PauliWord":
        p = self.p_dim
        if p == 2:
            # W^2 = i^{2 phase + 2 x.z} I, and W^-1 = W * (W^2)^-1
            sq = (2 * self.phase + 2 * int(self.x @ self.z)) % 4
            return PauliWord(p, self.x, self.z, (self.phase - sq) % 4)
        return self.power(p - 1)

    def hermitian(self) -> bool:
        """Whether the word is Hermitian (required of p=2 generators)."""
        if self.p_dim != 2:
            # odd-p stabilizer generators are omega-phased unitaries of
            # order p; no Hermiticity constraint applies
            return True
        return (self.phase - int(self.x @ self.z)) % 2 == 0

    def __repr__(self) -> str:
        xs = "".join(str(int(v)) for v in self.x)
        zs = "".join(str(int(v)) for v in self.z)
        return f"PauliWord(p={self.p_dim}, x={xs}, z={zs}, phase={self.phase})"
