"""Flagged brickwork Clifford circuit with reset feedback.

Update rules per layer: for each pair of the layer's parity, if at least one
flag is set, apply a fresh random two-qudit Clifford and set both flags; then
each site is independently reset (and its flag cleared) with probability p.
Flags start all-set. A cleared flag certifies the site is exactly |0>, so the
quantum reset on a flag-0 site is skipped as a no-op (flag soundness).

Even layers pair (0,1),(2,3),...; odd layers pair (1,2),(3,4),... with
wraparound when periodic (unpaired edge sites are skipped when open).
Observables are recorded after the reset sub-step, from expectation values,
never from destructive measurements.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .rng import Stream
from .tableau import StabilizerTableau


@dataclass
class FlagField:
    """Per-site classical flags f_j (1 = possibly active, 0 = known |0>)."""
    flags: np.ndarray
    time: int = 0

    @classmethod
    def all_active(cls, L: int) -> "FlagField":
        return cls(np.ones(L, dtype=np.uint8), 0)

    @property
    def L(self) -> int:
        return self.flags.shape[0]

    def density(self) -> float:
        return float(self.flags.mean())


@dataclass
class SpacetimeRecord:
    """Flag history: occupancy[t] is the flag row after layer t+1's resets.

    The t=0 bond row (initial flags, all active) is implicit; once a row is
    all-zero every later row is all-zero.
    """
    L: int
    T: int
    occupancy: np.ndarray    # (T, L) uint8
    reset_marks: np.ndarray  # (T, L) uint8
    boundary: str = "periodic"

    def bond_rows(self) -> np.ndarray:
        """(T+1, L) array of bond occupations including the initial row."""
        top = np.ones((1, self.L), dtype=np.uint8)
        return np.concatenate([top, self.occupancy], axis=0)


@dataclass
class TrajectoryRecord:
    config_hash: str
    seed: int
    t: np.ndarray
    n_quantum: np.ndarray | None
    n_classical: np.ndarray
    s_q: np.ndarray
    interval_entropies: dict[tuple[int, int], int] = field(default_factory=dict)
    record: SpacetimeRecord | None = None
    final_g: int = 0


def brickwork_step(state: StabilizerTableau, flags: FlagField, p: float,
                   parity: str, rng: Stream, periodic: bool = True
                   ) -> tuple[StabilizerTableau, FlagField]:
    """One gate layer of the given parity ('even'/'odd') plus the reset
    sub-step, mutating state and flags in place."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("reset rate must be in [0, 1]")
    L = state.L
    if periodic and L % 2:
        raise ValueError("periodic boundaries need even L")
    par = {"even": 0, "odd": 1}[parity]
    M = np.empty((4, 4), dtype=np.int64)
    gamma = np.empty(4, dtype=np.int64)
    marks = np.empty(L, dtype=np.uint8)
    state.g = int(kernels.brick_layer(
        state.exps, state.phases, state.destab, state.g, L, state.p_dim,
        flags.flags, float(p), par, periodic, rng.state, M, gamma, marks))
    flags.time += 1
    return state, flags


def run_trajectory(config, seed: int) -> TrajectoryRecord:
    """Run one trajectory of the flagged Clifford circuit.

    `config` is an ExperimentConfig (model clifford_flagged); `seed` is the
    per-trajectory stream key. Alternates parities starting even; series
    include the t = 0 entry for the initial state.
    """
    L, T = config.L, config.T
    p_dim = config.q_plus_1
    periodic = config.boundary == "periodic"
    want_nq = "n_quantum" in config.observables
    want_record = bool({"spacetime_record", "min_cut", "red_bonds"}
                       & set(config.observables))
    if config.protocol == "purification":
        state = StabilizerTableau.maximally_mixed(L, p_dim)
    else:
        state = StabilizerTableau.all_zero(L, p_dim)

    n_cl = np.empty(T + 1, dtype=np.float64)
    n_q = np.empty(T + 1 if want_nq else 1, dtype=np.float64)
    s_q = np.empty(T + 1, dtype=np.float64)
    occ = np.empty((T, L) if want_record else (1, 1), dtype=np.uint8)
    marks = np.empty_like(occ)

    g = int(kernels.run_flagged(
        state.exps, state.phases, state.destab, state.g, L, p_dim, T,
        float(config.p), periodic, np.uint64(seed), want_nq, want_record,
        n_cl, n_q, s_q, occ, marks))
    state.g = g

    intervals = {}
    if "entropy_intervals" in config.observables:
        pairs = [(int(a), int(b)) for a, b in config.intervals]
        if all(a == 0 for a, _ in pairs):
            prof = state.interval_entropies_from_origin()
            for a, b in pairs:
                intervals[(a, b)] = int(prof[b])
        else:
            for a, b in pairs:
                intervals[(a, b)] = state.subsystem_entropy(range(a, b))

    record = None
    if want_record:
        record = SpacetimeRecord(L, T, occ, marks, config.boundary)
    return TrajectoryRecord(
        config_hash=config.hash(),
        seed=seed,
        t=np.arange(T + 1),
        n_quantum=n_q if want_nq else None,
        n_classical=n_cl,
        s_q=s_q,
        interval_entropies=intervals,
        record=record,
        final_g=g,
    )
