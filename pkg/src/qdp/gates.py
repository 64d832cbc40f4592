"""Two-qudit Clifford gates in symplectic-tableau form.

A gate is (M, gamma): M in Sp(4, F_p) acting on local exponent vectors in the
order (x_j, x_k, z_j, z_k), and gamma the phase exponents of the four basis
images. Conjugation of a Pauli word restricted to the gate's sites is
v -> M v with phase shift gamma.v (odd p; exactly linear in the Weyl
convention) plus the usual reordering correction for p = 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .pauli import PauliWord, phase_modulus
from .primes import is_prime
from .rng import Stream


def symplectic_form(arity: int = 2) -> np.ndarray:
    n = arity
    J = np.zeros((2 * n, 2 * n), dtype=np.int64)
    J[:n, n:] = np.eye(n, dtype=np.int64)
    J[n:, :n] = -np.eye(n, dtype=np.int64)
    return J


def _mat_inv_mod(M: np.ndarray, p: int) -> np.ndarray:
    """Inverse of an integer matrix mod p by Gauss-Jordan."""
    n = M.shape[0]
    A = np.concatenate([M.astype(np.int64) % p, np.eye(n, dtype=np.int64)],
                       axis=1)
    row = 0
    for col in range(n):
        sel = None
        for r in range(row, n):
            if A[r, col] % p:
                sel = r
                break
        if sel is None:
            raise ValueError("matrix is singular mod p")
        A[[row, sel]] = A[[sel, row]]
        A[row] = (A[row] * pow(int(A[row, col]), -1, p)) % p
        for r in range(n):
            if r != row and A[r, col] % p:
                A[r] = (A[r] - A[r, col] * A[row]) % p
        row += 1
    return A[:, n:]


@dataclass
class CliffordGate:
    p_dim: int
    symplectic: np.ndarray          # (2*arity, 2*arity) over F_p
    phase_vector: np.ndarray        # (2*arity,), mod p (odd) / mod 4 (p=2)
    arity: int = 2

    def __post_init__(self):
        if not is_prime(self.p_dim):
            raise ValueError(f"p_dim must be prime, got {self.p_dim}")
        self.symplectic = np.asarray(self.symplectic, dtype=np.int64) % self.p_dim
        self.phase_vector = (np.asarray(self.phase_vector, dtype=np.int64)
                             % phase_modulus(self.p_dim))
        n2 = 2 * self.arity
        if self.symplectic.shape != (n2, n2) or self.phase_vector.shape != (n2,):
            raise ValueError("gate tableau has the wrong shape")

    def validate(self) -> None:
        """Raise unless M^T J M = J mod p (and p=2 phases are Hermitian)."""
        p, M = self.p_dim, self.symplectic
        J = symplectic_form(self.arity) % p
        if ((M.T @ J @ M) % p != J).any():
            raise ValueError("symplectic condition M^T J M = J violated")
        if p == 2:
            n = self.arity
            for i in range(2 * n):
                herm = int(M[:n, i] @ M[n:, i]) % 2
                if int(self.phase_vector[i]) % 2 != herm:
                    raise ValueError("p=2 image phases must keep images Hermitian")

    @classmethod
    def identity(cls, p_dim: int) -> "CliffordGate":
        return cls(p_dim, np.eye(4, dtype=np.int64), np.zeros(4, np.int64))

    @classmethod
    def cnot(cls) -> "CliffordGate":
        """Qubit controlled-NOT, control = first site of the pair."""
        M = np.zeros((4, 4), np.int64)
        M[:, 0] = (1, 1, 0, 0)  # X_c -> X_c X_t
        M[:, 1] = (0, 1, 0, 0)  # X_t -> X_t
        M[:, 2] = (0, 0, 1, 0)  # Z_c -> Z_c
        M[:, 3] = (0, 0, 1, 1)  # Z_t -> Z_c Z_t
        return cls(2, M, np.zeros(4, np.int64))

    def conjugate_word(self, word: PauliWord, sites: tuple[int, int]) -> PauliWord:
        """U W U^dagger for a full-length word; gate acts on `sites`."""
        j, k = sites
        if word.p_dim != self.p_dim:
            raise ValueError("dimension mismatch")
        L = word.n_sites
        exps = np.zeros((1, 2 * L), dtype=np.int64)
        exps[0, :L] = word.x
        exps[0, L:] = word.z
        phases = np.array([word.phase], dtype=np.int64)
        kernels.apply_gate2(exps, phases, 1, L, self.p_dim,
                            self.symplectic, self.phase_vector, j, k)
        return PauliWord(self.p_dim, exps[0, :L], exps[0, L:], int(phases[0]))

    def _conjugation_phase(self, v: np.ndarray) -> int:
        """Phase exponent acquired by the local vector v under conjugation."""
        p = self.p_dim
        v = np.asarray(v, dtype=np.int64) % p
        ph = int(self.phase_vector @ v)
        if p == 2:
            M = self.symplectic
            for i in range(4):
                for l in range(i + 1, 4):
                    ph += 2 * int(v[i] * v[l]) * int(M[2:, i] @ M[:2, l])
            return ph % 4
        return ph % p

    def inverse(self) -> "CliffordGate":
        p = self.p_dim
        Minv = _mat_inv_mod(self.symplectic, p)
        gamma = np.empty(4, dtype=np.int64)
        mod = phase_modulus(p)
        for i in range(4):
            u = Minv[:, i]
            gamma[i] = (-self._conjugation_phase(u)) % mod
        return CliffordGate(p, Minv, gamma)


def sample_two_qudit_clifford(p_dim: int, rng: Stream) -> CliffordGate:
    """Uniform two-qudit Clifford modulo global phase: uniform Sp(4, p)
    paired with a uniform Pauli translate."""
    if not is_prime(p_dim):
        raise ValueError(f"p_dim must be prime, got {p_dim}")
    M = np.empty((4, 4), dtype=np.int64)
    gamma = np.empty(4, dtype=np.int64)
    kernels.sample_clifford2(p_dim, rng.state, M, gamma)
    return CliffordGate(p_dim, M, gamma)
