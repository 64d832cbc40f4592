"""Mixed stabilizer states of L prime-dimensional qudits.

The state is the uniform mixture over the joint +1 eigenspace of g commuting,
independent generalized-Pauli generators; g = 0 is the maximally mixed state
and g = L a pure stabilizer state. Total entropy is L - g in qudit units
(log base p_dim). Rows are stored as exponent vectors (x | z) plus a phase
exponent, in the conventions of `pauli`/`kernels`.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .gates import CliffordGate
from .pauli import PauliWord
from .primes import is_prime
from .rng import Stream


def _exp_dtype(p_dim: int):
    # elimination forms t*entry + entry with t, entry < p: keep it in-int8
    # only when (p-1)*p fits
    return np.int8 if p_dim <= 11 else np.int64


class StabilizerTableau:
    """Tableau of up to L generator rows over F_p_dim."""

    __slots__ = ("p_dim", "L", "g", "exps", "phases", "destab")

    def __init__(self, p_dim: int, L: int):
        if not is_prime(p_dim):
            raise ValueError(f"p_dim must be prime, got {p_dim}")
        if L < 1:
            raise ValueError("L must be >= 1")
        self.p_dim = p_dim
        self.L = L
        self.g = 0
        self.exps = np.zeros((L, 2 * L), dtype=_exp_dtype(p_dim))
        self.phases = np.zeros(L, dtype=np.int64)
        # dual frame: <destab_i, generator_j> = delta_ij (phases untracked)
        self.destab = np.zeros((L, 2 * L), dtype=_exp_dtype(p_dim))

    # -- construction -------------------------------------------------------

    @classmethod
    def maximally_mixed(cls, L: int, p_dim: int) -> "StabilizerTableau":
        return cls(p_dim, L)

    @classmethod
    def all_zero(cls, L: int, p_dim: int) -> "StabilizerTableau":
        state = cls(p_dim, L)
        state.g = L
        for j in range(L):
            state.exps[j, L + j] = 1
            state.destab[j, j] = 1
        return state

    @classmethod
    def from_generators(cls, L: int, p_dim: int,
                        words: Sequence[PauliWord]) -> "StabilizerTableau":
        """Build a tableau from explicit generator words (validated)."""
        state = cls(p_dim, L)
        state.g = len(words)
        for i, w in enumerate(words):
            if w.p_dim != p_dim or w.n_sites != L:
                raise ValueError("generator word shape mismatch")
            state.exps[i, :L] = w.x
            state.exps[i, L:] = w.z
            state.phases[i] = w.phase
        state.rebuild_frame()
        state.validate()
        return state

    def rebuild_frame(self) -> None:
        """Recompute destabilizers: any dual frame with <D_i, W_j> = d_ij."""
        p, L, g = self.p_dim, self.L, self.g
        self.destab[:] = 0
        if g == 0:
            return
        # <u, W_m> = u . (J w_m) with J w = (w_z | -w_x); solve B D^T = I
        # by row-reducing [B | I] and placing transform entries at pivots
        B = np.empty((g, 2 * L), dtype=np.int64)
        B[:, :L] = self.exps[:g, L:]
        B[:, L:] = (-self.exps[:g, :L].astype(np.int64)) % p
        E = np.eye(g, dtype=np.int64)
        pivcols = []
        row = 0
        for col in range(2 * L):
            sel = None
            for r in range(row, g):
                if B[r, col] % p:
                    sel = r
                    break
            if sel is None:
                continue
            B[[row, sel]] = B[[sel, row]]
            E[[row, sel]] = E[[sel, row]]
            inv = pow(int(B[row, col]) % p, -1, p)
            B[row] = (B[row] * inv) % p
            E[row] = (E[row] * inv) % p
            for r in range(g):
                if r != row and B[r, col] % p:
                    f = int(B[r, col]) % p
                    B[r] = (B[r] - f * B[row]) % p
                    E[r] = (E[r] - f * E[row]) % p
            pivcols.append(col)
            row += 1
            if row == g:
                break
        if row < g:
            raise ValueError("generators are dependent; no dual frame exists")
        for i in range(g):
            for r, pc in enumerate(pivcols):
                self.destab[i, pc] = E[r, i] % p

    def copy(self) -> "StabilizerTableau":
        out = StabilizerTableau(self.p_dim, self.L)
        out.g = self.g
        out.exps[:] = self.exps
        out.phases[:] = self.phases
        out.destab[:] = self.destab
        return out

    # -- queries -------------------------------------------------------------

    def entropy(self) -> int:
        """Total entropy in qudit units (ln p_dim)."""
        return self.L - self.g

    def generator(self, i: int) -> PauliWord:
        return PauliWord(self.p_dim, self.exps[i, :self.L].astype(np.int64),
                         self.exps[i, self.L:].astype(np.int64),
                         int(self.phases[i]))

    def generators(self) -> list[PauliWord]:
        return [self.generator(i) for i in range(self.g)]

    def inactive_probability(self, j: int) -> Fraction:
        """Tr(rho |0><0|_j), without collapsing the state."""
        self._check_site(j)
        code = kernels.z_code_site(self.exps, self.phases, self.destab,
                                   self.g, self.L, self.p_dim, j)
        if code < 0:
            return Fraction(1, self.p_dim)
        return Fraction(1) if code == 0 else Fraction(0)

    def occupation_expectations(self) -> np.ndarray:
        """<P_j> = 1 - Tr(rho |0><0|_j) for all sites, in one pass."""
        codes = np.empty(self.L, dtype=np.int64)
        kernels.det_codes(self.exps, self.phases, self.destab, self.g, self.L,
                          self.p_dim, codes)
        out = np.empty(self.L, dtype=np.float64)
        for j in range(self.L):
            if codes[j] < 0:
                out[j] = 1.0 - 1.0 / self.p_dim
            else:
                out[j] = 0.0 if codes[j] == 0 else 1.0
        return out

    def subsystem_entropy(self, sites: Iterable[int]) -> int:
        """Entanglement entropy of the site subset, qudit units."""
        mask = np.zeros(self.L, dtype=bool)
        for s in sites:
            self._check_site(s)
            mask[s] = True
        comp = np.nonzero(~mask)[0]
        cols = np.concatenate([comp, comp + self.L]).astype(np.int64)
        r_c = kernels.rank_cols(self.exps, self.g, self.p_dim, cols)
        return int(mask.sum()) - (self.g - int(r_c))

    def interval_entropies_from_origin(self) -> np.ndarray:
        """S_[0, x) for x = 0..L via one suffix-rank sweep."""
        prof = np.empty(self.L + 1, dtype=np.int64)
        kernels.suffix_rank_profile(self.exps, self.g, self.L, self.p_dim,
                                    prof)
        x = np.arange(self.L + 1, dtype=np.int64)
        return x - (self.g - prof)

    # -- mutations -----------------------------------------------------------

    def apply_gate(self, gate: CliffordGate, sites: tuple[int, int]) -> None:
        j, k = sites
        self._check_site(j)
        self._check_site(k)
        if j == k:
            raise ValueError("gate sites must be distinct")
        if gate.p_dim != self.p_dim:
            raise ValueError(f"gate dimension {gate.p_dim} != state {self.p_dim}")
        kernels.apply_gate2(self.exps, self.phases, self.g, self.L, self.p_dim,
                            gate.symplectic, gate.phase_vector, j, k)
        kernels.apply_gate2_vec(self.destab, self.g, self.L, self.p_dim,
                                gate.symplectic, j, k)

    def measure_z(self, j: int, rng: Stream) -> int:
        """Projective computational-basis measurement; outcome in F_p_dim."""
        self._check_site(j)
        outcome, self.g = kernels.measure_site(
            self.exps, self.phases, self.destab, self.g, self.L, self.p_dim,
            j, rng.state)
        return int(outcome)

    def reset_site(self, j: int, rng: Stream) -> int:
        """Measure then shift the observed basis state to |0> (Kraus |0><a|).
        Returns the pre-shift outcome."""
        self._check_site(j)
        outcome, g = kernels.reset_site_k(self.exps, self.phases, self.destab,
                                          self.g, self.L, self.p_dim, j,
                                          rng.state)
        self.g = int(g)
        return int(outcome)

    # -- validation / debug ---------------------------------------------------

    def validate(self) -> None:
        """Check commutation, independence, and p=2 Hermiticity of rows."""
        gens = self.generators()
        for a in range(self.g):
            if self.p_dim == 2 and not gens[a].hermitian():
                raise AssertionError(f"generator {a} is not Hermitian")
            for b in range(a + 1, self.g):
                if not gens[a].commutes_with(gens[b]):
                    raise AssertionError(f"generators {a},{b} do not commute")
        cols = np.arange(2 * self.L, dtype=np.int64)
        if kernels.rank_cols(self.exps, self.g, self.p_dim, cols) != self.g:
            raise AssertionError("generator rows are dependent")
        p = self.p_dim
        gx = self.exps[:self.g, :self.L].astype(np.int64)
        gz = self.exps[:self.g, self.L:].astype(np.int64)
        dx = self.destab[:self.g, :self.L].astype(np.int64)
        dz = self.destab[:self.g, self.L:].astype(np.int64)
        frame = (dx @ gz.T - dz @ gx.T) % p
        if (frame != np.eye(self.g, dtype=np.int64)).any():
            raise AssertionError("destabilizer dual-frame property violated")

    def to_text(self) -> str:
        """Debug dump: one (x|z|phase) row per generator."""
        rows = []
        for i in range(self.g):
            xs = " ".join(str(int(v)) for v in self.exps[i, :self.L])
            zs = " ".join(str(int(v)) for v in self.exps[i, self.L:])
            rows.append(f"{xs} | {zs} | {int(self.phases[i])}")
        return "\n".join(rows)

    def _check_site(self, j: int) -> None:
        if not (0 <= j < self.L):
            raise ValueError(f"site {j} out of range [0, {self.L})")


def init_state(L: int, p_dim: int, kind: str) -> StabilizerTableau:
    """`maximally_mixed` (g = 0) or `all_zero` (product of |0>s)."""
    if kind == "maximally_mixed":
        return StabilizerTableau.maximally_mixed(L, p_dim)
    if kind == "all_zero":
        return StabilizerTableau.all_zero(L, p_dim)
    raise ValueError(f"unknown state kind {kind!r}")


def apply_gate(state: StabilizerTableau, gate: CliffordGate,
               sites: tuple[int, int]) -> StabilizerTableau:
    state.apply_gate(gate, sites)
    return state


def measure_z(state: StabilizerTableau, j: int, rng: Stream) -> int:
    return state.measure_z(j, rng)


def reset_site(state: StabilizerTableau, j: int, rng: Stream) -> StabilizerTableau:
    state.reset_site(j, rng)
    return state


def inactive_probability(state: StabilizerTableau, j: int) -> Fraction:
    return state.inactive_probability(j)


def subsystem_entropy(state: StabilizerTableau, A: Sequence[int]) -> int:
    return state.subsystem_entropy(A)
