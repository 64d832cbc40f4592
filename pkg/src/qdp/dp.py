"""Classical Markov engines on the brickwork bond lattice.

Three kernels share the rotated-square-lattice geometry of the circuit
(bonds = qudit worldline segments, nodes = gates, parities alternating):

* standard bond DP: active-node outputs independently inactive w.p. ptilde;
* the Haar-channel pair process: joint output distribution with O(1/q^2)
  correlations, reducing to standard DP as q -> infinity;
* the partial-measurement process: binary flags on measured (even) sites,
  conditional densities g in [0,1] on unmeasured (odd) sites.

Inactive input pairs map to inactive outputs with probability one, making
the empty row absorbing for every kernel. Ensembles are vectorized over
samples, each sample owning a counter-based Philox stream keyed
(master_seed, sample index), so results are independent of chunking.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

# standard bond DP critical point (series-expansion literature value)
PTILDE_C = 0.355299814


# ---------------------------------------------------------------------------
# pair output distributions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PairOutputDistribution:
    """Joint law of the two output bonds of an active node:
    (p00, p01, p10, p11) for outputs (0,0), (0,1), (1,0), (1,1)."""
    p00: float
    p01: float
    p10: float
    p11: float

    def __post_init__(self):
        vals = (self.p00, self.p01, self.p10, self.p11)
        if any(v < -1e-12 or v > 1 + 1e-12 for v in vals):
            raise ValueError("probabilities must lie in [0, 1]")
        if abs(sum(vals) - 1.0) > 1e-9:
            raise ValueError("pair distribution must be normalized")

    def cumulative(self) -> np.ndarray:
        return np.cumsum([self.p00, self.p01, self.p10, self.p11])


def haar_pair_distribution_exact(p: Fraction, q: int
                                 ) -> tuple[Fraction, Fraction, Fraction, Fraction]:
    """Exact rational form of the Haar-channel pair law."""
    p = Fraction(p)
    q = Fraction(q)
    d = 2 + q
    return (p * (2 + p * q) / d,
            (1 - p) * (1 + p * q) / d,
            (1 - p) * (1 + p * q) / d,
            q * (1 - p) ** 2 / d)


def haar_pair_distribution(p: float, q: int) -> PairOutputDistribution:
    """Output law of an active node in the Haar block-unitary channel."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    if q < 1:
        raise ValueError("q must be >= 1")
    d = 2.0 + q
    return PairOutputDistribution(
        p * (2 + p * q) / d,
        (1 - p) * (1 + p * q) / d,
        (1 - p) * (1 + p * q) / d,
        q * (1 - p) ** 2 / d)


def standard_pair_distribution(ptilde: float) -> PairOutputDistribution:
    """Standard bond DP: outputs independently inactive w.p. ptilde."""
    if not 0.0 <= ptilde <= 1.0:
        raise ValueError("ptilde must be in [0, 1]")
    return PairOutputDistribution(ptilde ** 2, ptilde * (1 - ptilde),
                                  ptilde * (1 - ptilde), (1 - ptilde) ** 2)


def haar_pc_estimate(q: int) -> float:
    """Critical rate of the Haar-channel process to O(1/q): the solution of
    p + (1-p)/q = ptilde_c, i.e. (q ptilde_c - 1)/(q - 1)."""
    if q < 2:
        raise ValueError("q must be >= 2 (the defining equation is singular at q = 1)")
    return (q * PTILDE_C - 1.0) / (q - 1.0)


# ---------------------------------------------------------------------------
# bond rows and single-row steps (ensemble engines below vectorize these)
# ---------------------------------------------------------------------------

@dataclass
class BondRow:
    occupations: np.ndarray  # uint8, 1 = active

    def __post_init__(self):
        self.occupations = np.asarray(self.occupations, dtype=np.uint8)

    @classmethod
    def all_active(cls, L: int) -> "BondRow":
        return cls(np.ones(L, dtype=np.uint8))

    @property
    def width(self) -> int:
        return self.occupations.shape[0]

    def density(self) -> float:
        return float(self.occupations.mean())


def _pair_indices(L: int, parity: int, periodic: bool) -> tuple[np.ndarray, np.ndarray]:
    if parity == 0:
        j = np.arange(0, L - 1, 2)
    else:
        j = np.arange(1, L if periodic else L - 1, 2)
    k = (j + 1) % L
    return j, k


def dp_step(row: BondRow, dist: PairOutputDistribution, parity: int,
            rng: np.random.Generator, periodic: bool = True) -> BondRow:
    """One layer of the bond Markov process on a single row."""
    occ = row.occupations[None, :].copy()
    cum = dist.cumulative()
    jj, kk = _pair_indices(row.width, parity, periodic)
    u = rng.random((1, jj.size))
    _dp_apply_pairs(occ, jj, kk, cum, u)
    return BondRow(occ[0])


def _dp_apply_pairs(occ: np.ndarray, jj: np.ndarray, kk: np.ndarray,
                    cum: np.ndarray, u: np.ndarray) -> None:
    a = occ[:, jj]
    b = occ[:, kk]
    active = (a | b).astype(bool)
    cat = ((u >= cum[0]).astype(np.uint8) + (u >= cum[1]) + (u >= cum[2]))
    new_a = ((cat >> 1) & 1).astype(np.uint8)
    new_b = (cat & 1).astype(np.uint8)
    occ[:, jj] = np.where(active, new_a, 0)
    occ[:, kk] = np.where(active, new_b, 0)


def sample_streams(master_seed: int, indices) -> list[np.random.Generator]:
    """Counter-based Philox streams keyed (master_seed, sample index)."""
    return [np.random.Generator(np.random.Philox(
        key=np.array([master_seed, int(i)], dtype=np.uint64)))
        for i in indices]


def dp_evolve_ensemble(L: int, T: int, dist: PairOutputDistribution,
                       master_seed: int, indices, periodic: bool = True,
                       record: bool = False, chunk: int = 64,
                       initial: np.ndarray | None = None
                       ) -> tuple[np.ndarray, np.ndarray | None]:
    """Evolve S samples for T layers; returns (densities (S, T+1),
    records (S, T, L) uint8 or None). Layer t parities alternate from even."""
    rngs = sample_streams(master_seed, indices)
    S = len(rngs)
    occ = (np.ones((S, L), dtype=np.uint8) if initial is None
           else np.array(initial, dtype=np.uint8, copy=True))
    dens = np.empty((S, T + 1))
    dens[:, 0] = occ.mean(axis=1)
    recs = np.empty((S, T, L), dtype=np.uint8) if record else None
    cum = dist.cumulative()
    npairs_max = L // 2
    t = 0
    while t < T:
        span = min(chunk, T - t)
        u_all = np.stack([r.random((span, npairs_max)) for r in rngs])
        for dt in range(span):
            parity = (t + dt) % 2
            jj, kk = _pair_indices(L, parity, periodic)
            _dp_apply_pairs(occ, jj, kk, cum, u_all[:, dt, :jj.size])
            dens[:, t + dt + 1] = occ.mean(axis=1)
            if record:
                recs[:, t + dt, :] = occ
        t += span
    return dens, recs


# ---------------------------------------------------------------------------
# Appendix-style partial-measurement process (binary f / continuous g)
# ---------------------------------------------------------------------------

@dataclass
class MixedFlagRow:
    """Even sites carry binary flags f, odd sites densities g in [0, 1]."""
    f: np.ndarray  # uint8, length L/2 (site 2i)
    g: np.ndarray  # float64, length L/2 (site 2i+1)

    @classmethod
    def initial(cls, L: int) -> "MixedFlagRow":
        if L % 2:
            raise ValueError("mixed rows need even L")
        return cls(np.ones(L // 2, dtype=np.uint8), np.ones(L // 2))

    @property
    def width(self) -> int:
        return 2 * self.f.shape[0]

    def site_values(self) -> np.ndarray:
        out = np.empty(self.width)
        out[0::2] = self.f
        out[1::2] = self.g
        return out


def _appendix_apply(F: np.ndarray, G: np.ndarray, fi, gi, p: float, q: int,
                    u: np.ndarray) -> None:
    """Update measured flags F[:, fi] and partner densities G[:, gi]."""
    f = F[:, fi].astype(bool)
    g = G[:, gi]
    pM0 = np.where(f, 1.0 / (q + 2), (1.0 - g) + g / (q + 2))
    pM1 = 1.0 - pM0
    gM0 = np.where(f, 1.0, g / (1.0 + (1.0 - g) * (1 + q)))
    gM1 = q / (q + 1.0)
    P0 = pM0 + p * pM1
    stay = u < P0
    g_comb = (pM0 * gM0 + p * pM1 * gM1) / P0
    newg = np.where(stay, g_comb, gM1)
    newg[newg < 1e-300] = 0.0
    F[:, fi] = (~stay).astype(np.uint8)
    G[:, gi] = newg


def appendix_a_step(row: MixedFlagRow, p: float, q: int, parity: int,
                    rng: np.random.Generator) -> MixedFlagRow:
    """One layer: measured/unmeasured pairs of the given parity.

    Parity 0 pairs (2i, 2i+1) (measured site on the left); parity 1 pairs
    (2i+1, 2i+2 mod L), the same rule with the measured site on the right.
    """
    F = row.f[None, :].copy()
    G = row.g[None, :].copy()
    n = F.shape[1]
    u = rng.random((1, n))
    if parity == 0:
        _appendix_apply(F, G, np.arange(n), np.arange(n), p, q, u)
    else:
        _appendix_apply(F, G, (np.arange(n) + 1) % n, np.arange(n), p, q, u)
    return MixedFlagRow(F[0], G[0])


def appendix_evolve_ensemble(L: int, T: int, p: float, q: int,
                             master_seed: int, indices,
                             record: bool = False, chunk: int = 64
                             ) -> tuple[np.ndarray, np.ndarray, np.ndarray,
                                        np.ndarray | None]:
    """Returns (density_f (S,T+1), density_g (S,T+1), density_mean (S,T+1),
    gray records (S, T, L) float32 or None)."""
    rngs = sample_streams(master_seed, indices)
    S = len(rngs)
    n = L // 2
    F = np.ones((S, n), dtype=np.uint8)
    G = np.ones((S, n))
    df = np.empty((S, T + 1))
    dg = np.empty((S, T + 1))
    dm = np.empty((S, T + 1))
    df[:, 0] = 1.0
    dg[:, 0] = 1.0
    dm[:, 0] = 1.0
    recs = np.empty((S, T, L), dtype=np.float32) if record else None
    idx = np.arange(n)
    t = 0
    while t < T:
        span = min(chunk, T - t)
        u_all = np.stack([r.random((span, n)) for r in rngs])
        for dt in range(span):
            parity = (t + dt) % 2
            if parity == 0:
                _appendix_apply(F, G, idx, idx, p, q, u_all[:, dt])
            else:
                _appendix_apply(F, G, (idx + 1) % n, idx, p, q, u_all[:, dt])
            row = t + dt + 1
            df[:, row] = F.mean(axis=1)
            dg[:, row] = G.mean(axis=1)
            dm[:, row] = 0.5 * (df[:, row] + dg[:, row])
            if record:
                recs[:, t + dt, 0::2] = F
                recs[:, t + dt, 1::2] = G
        t += span
    return df, dg, dm, recs


# ---------------------------------------------------------------------------
# single-trajectory runs (config-level entry points)
# ---------------------------------------------------------------------------

def run_dp(config, sample_index: int = 0):
    """One bond-DP trajectory of a dp_standard/dp_haar config; returns
    (SpacetimeRecord, n_cl(t) series including t = 0)."""
    from .circuit import SpacetimeRecord

    if config.model == "dp_haar":
        dist = haar_pair_distribution(config.p, config.q)
    elif config.model == "dp_standard":
        dist = standard_pair_distribution(config.p)
    else:
        raise ValueError(f"run_dp cannot drive model {config.model!r}")
    dens, recs = dp_evolve_ensemble(
        config.L, config.T, dist, config.master_seed, [sample_index],
        periodic=config.boundary == "periodic", record=True)
    record = SpacetimeRecord(config.L, config.T, recs[0],
                             np.zeros_like(recs[0]), config.boundary)
    return record, dens[0]


def run_appendix_a(config, sample_index: int = 0):
    """One partial-measurement trajectory; returns (gray-level record array
    of shape (T, L) in [0, 1], density series dict)."""
    if config.model != "appendix_a":
        raise ValueError(f"run_appendix_a cannot drive model {config.model!r}")
    df, dg, dm, recs = appendix_evolve_ensemble(
        config.L, config.T, config.p, config.q, config.master_seed,
        [sample_index], record=True)
    series = {"density_f": df[0], "density_g": dg[0], "n_classical": dm[0]}
    return recs[0], series


# ---------------------------------------------------------------------------
# critical-point location by the power-law-decay criterion
# ---------------------------------------------------------------------------

def loglog_curvature(t: np.ndarray, n: np.ndarray, t_min: int = 32) -> float:
    """Quadratic coefficient of log n vs log t; positive means the curve
    bends up (active side), negative means exponential-like decay."""
    sel = (t >= t_min) & (n > 0)
    lt = np.log(t[sel].astype(float))
    ln = np.log(n[sel])
    # subsample evenly in log t so late times are not over-weighted
    grid = np.unique(np.searchsorted(lt, np.linspace(lt[0], lt[-1], 60)))
    grid = grid[grid < lt.size]
    coeffs = np.polyfit(lt[grid], ln[grid], 2)
    return float(coeffs[0])


def locate_critical_rate(make_dist, lo: float, hi: float, L: int, T: int,
                         samples: int, master_seed: int, tol: float = 5e-4,
                         t_min: int = 32) -> float:
    """Bisection on the reset rate: at each candidate the ensemble-mean
    density decay is classified by its log-log curvature (bend up =>
    active => raise the lower edge). `make_dist(p)` builds the pair law."""
    it = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        dens, _ = dp_evolve_ensemble(L, T, make_dist(mid),
                                     master_seed + it, range(samples))
        nbar = dens.mean(axis=0)
        curv = loglog_curvature(np.arange(T + 1), nbar, t_min)
        if curv > 0:
            lo = mid
        else:
            hi = mid
        it += 1
    return 0.5 * (lo + hi)
