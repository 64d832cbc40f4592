"""Finite-size scaling: rescaling transforms, collapse quality, and the
conformal fits for the entanglement transition.

Conventions: the DP order-parameter form is
    n(t, L, p) = L^{-z a} F((p - p_c) L^{1/nu_perp}, t L^{-z}),
entropy curves collapse as S_Q / ln(q+1) in the same coordinates, and the
conformal fits (aspect ratio tau = v t / L, steady-state chord log) operate
on natural-log entropies, i.e. qudit-unit values times ln(q+1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass
class Curve:
    L: int
    p: float
    t: np.ndarray
    value: np.ndarray
    stderr: np.ndarray
    n: np.ndarray | None = None

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=np.float64)
        self.value = np.asarray(self.value, dtype=np.float64)
        self.stderr = np.asarray(self.stderr, dtype=np.float64)
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("curve times must be strictly increasing")
        if np.any(self.stderr < 0):
            raise ValueError("standard errors must be >= 0")


@dataclass
class ScalingDataset:
    curves: list[Curve]
    observable: str
    q_plus_1: int | None = None
    protocol: str = "purification"


def merge_datasets(*datasets: ScalingDataset) -> ScalingDataset:
    obs = {d.observable for d in datasets}
    if len(obs) != 1:
        raise ValueError(f"mismatched observables: {sorted(obs)}")
    qs = {d.q_plus_1 for d in datasets}
    curves = [c for d in datasets for c in d.curves]
    return ScalingDataset(curves, obs.pop(),
                          qs.pop() if len(qs) == 1 else None,
                          datasets[0].protocol)


@dataclass
class ExponentSet:
    """Critical exponents; z defaults to nu_parallel/nu_perp (consistency
    enforced within 0.01 when all three are supplied)."""
    alpha: float
    nu_perp: float
    nu_parallel: float
    z: float | None = None
    p_c: float | None = None
    errors: dict = field(default_factory=dict)

    def __post_init__(self):
        ratio = self.nu_parallel / self.nu_perp
        if self.z is None:
            self.z = ratio
        elif abs(self.z - ratio) > 0.01:
            raise ValueError(
                f"z = {self.z} inconsistent with nu_par/nu_perp = {ratio:.4f}")


# directed percolation (1+1D) literature exponents
DP_EXPONENTS = ExponentSet(alpha=0.159, nu_perp=1.097, nu_parallel=1.733,
                           z=1.581, p_c=0.355299814)


@dataclass
class RescaledCurve:
    x: float            # (p - p_c) * L^(1/nu_perp)
    eta: np.ndarray     # t * L^(-z)
    y: np.ndarray
    yerr: np.ndarray
    L: int
    p: float


def rescale_dp(dataset: ScalingDataset, exps: ExponentSet) -> list[RescaledCurve]:
    """Order-parameter transform: y = L^{z a} n vs eta = t L^{-z} at
    x = (p - p_c) L^{1/nu_perp}; a pure coordinate change."""
    if exps.p_c is None:
        raise ValueError("ExponentSet needs p_c for rescaling")
    if not dataset.curves:
        raise ValueError("empty dataset")
    out = []
    for c in dataset.curves:
        scale = c.L ** (exps.z * exps.alpha)
        out.append(RescaledCurve(
            x=(c.p - exps.p_c) * c.L ** (1.0 / exps.nu_perp),
            eta=c.t * c.L ** (-exps.z),
            y=c.value * scale,
            yerr=c.stderr * scale,
            L=c.L, p=c.p))
    return out


def rescale_entropy_dp(dataset: ScalingDataset,
                       exps: ExponentSet = DP_EXPONENTS) -> list[RescaledCurve]:
    """Entropy analog of rescale_dp: y = S_Q / ln(q+1) (qudit units) vs the
    same scaling coordinates."""
    if dataset.q_plus_1 is None:
        raise ValueError("dataset needs q_plus_1 for the entropy normalization")
    if exps.p_c is None:
        raise ValueError("ExponentSet needs p_c for rescaling")
    out = []
    for c in dataset.curves:
        out.append(RescaledCurve(
            x=(c.p - exps.p_c) * c.L ** (1.0 / exps.nu_perp),
            eta=c.t * c.L ** (-exps.z),
            y=np.asarray(c.value, dtype=np.float64),
            yerr=np.asarray(c.stderr, dtype=np.float64),
            L=c.L, p=c.p))
    return out


def crossover_rescale(dataset: ScalingDataset, xi_star: tuple[float, float]
                      ) -> list[RescaledCurve]:
    """Crossover coordinates eta_t = t/xi_par*, eta_x = L/xi_perp*."""
    xi_perp, xi_par = xi_star
    if xi_perp <= 0 or xi_par <= 0:
        raise ValueError("crossover scales must be positive")
    out = []
    for c in dataset.curves:
        out.append(RescaledCurve(
            x=c.L / xi_perp,
            eta=c.t / xi_par,
            y=np.asarray(c.value, dtype=np.float64),
            yerr=np.asarray(c.stderr, dtype=np.float64),
            L=c.L, p=c.p))
    return out


def crossover_diagnostic(dataset: ScalingDataset, xi_star: tuple[float, float],
                         z: float, small_Ls=None, large_Ls=None,
                         eta_window: tuple[float, float] = (0.0, np.inf),
                         tau_window: tuple[float, float] = (0.0, np.inf)) -> dict:
    """Compare collapse quality in the DP variable t L^{-z} vs the conformal
    variable t/L inside each regime. Curves are grouped by eta_x = L/xi_perp*
    (below/above 1) unless explicit L lists are given."""
    xi_perp, _ = xi_star
    if small_Ls is None:
        small_Ls = [c.L for c in dataset.curves if c.L / xi_perp <= 1.0]
    if large_Ls is None:
        large_Ls = [c.L for c in dataset.curves if c.L / xi_perp > 1.0]

    def group_quality(Ls, transform, window):
        curves = []
        for c in dataset.curves:
            if c.L not in Ls:
                continue
            xx = transform(c)
            sel = (xx >= window[0]) & (xx <= window[1]) & (c.t > 0)
            if sel.sum() >= 2:
                curves.append((xx[sel], c.value[sel], c.stderr[sel]))
        if len(curves) < 2:
            return math.nan
        return collapse_quality(curves)

    report = {}
    for name, Ls, window in (("small", small_Ls, eta_window),
                             ("large", large_Ls, tau_window)):
        q_dp = group_quality(Ls, lambda c: c.t * c.L ** (-z), window)
        q_cf = group_quality(Ls, lambda c: c.t / c.L, window)
        report[name] = {
            "Ls": sorted(set(Ls)),
            "quality_dp_variable": q_dp,
            "quality_conformal_variable": q_cf,
            "collapses_in_dp_variable": bool(q_dp < q_cf) if q_dp == q_dp and q_cf == q_cf else None,
        }
    return report


@dataclass
class PowerLawFit:
    exponent: float
    amplitude: float
    chi2: float
    exponent_err: float


def fit_power_law(x, y, sigma=None) -> PowerLawFit:
    """Weighted least squares of ln y on ln x."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("power-law fit needs positive x and y")
    if x.size < 2:
        raise ValueError("power-law fit is underdetermined with < 2 points")
    lx, ly = np.log(x), np.log(y)
    if sigma is None:
        w = np.ones_like(ly)
    else:
        sigma = np.asarray(sigma, dtype=np.float64)
        w = (y / np.where(sigma > 0, sigma, np.inf)) ** 2
        if not np.any(w > 0):
            w = np.ones_like(ly)
    W = w.sum()
    mx = (w * lx).sum() / W
    my = (w * ly).sum() / W
    sxx = (w * (lx - mx) ** 2).sum()
    if sxx == 0:
        raise ValueError("degenerate x values")
    slope = (w * (lx - mx) * (ly - my)).sum() / sxx
    intercept = my - slope * mx
    resid = ly - (intercept + slope * lx)
    chi2 = float((w * resid ** 2).sum())
    dof = max(x.size - 2, 1)
    slope_err = math.sqrt(max(chi2 / dof, 1e-300) / sxx) if sigma is None \
        else math.sqrt(1.0 / sxx)
    return PowerLawFit(float(slope), float(math.exp(intercept)), chi2,
                       float(slope_err))


def collapse_quality(curves) -> float:
    """Mean squared deviation of each curve's points from the piecewise-
    linear master curve through the other curves' pooled points, normalized
    by combined variances. 0 for identical curves; permutation invariant.

    `curves`: sequence of (x, y, err) array triples.
    """
    curves = [(np.asarray(x, float), np.asarray(y, float), np.asarray(e, float))
              for x, y, e in curves]
    if len(curves) < 2:
        raise ValueError("collapse quality needs at least two curves")
    total = 0.0
    count = 0
    for i, (x, y, e) in enumerate(curves):
        ox = np.concatenate([curves[j][0] for j in range(len(curves)) if j != i])
        oy = np.concatenate([curves[j][1] for j in range(len(curves)) if j != i])
        oe = np.concatenate([curves[j][2] for j in range(len(curves)) if j != i])
        order = np.argsort(ox, kind="stable")
        ox, oy, oe = ox[order], oy[order], oe[order]
        sel = (x >= ox[0]) & (x <= ox[-1])
        if not sel.any():
            continue
        ym = np.interp(x[sel], ox, oy)
        em2 = np.interp(x[sel], ox, oe ** 2)
        denom = e[sel] ** 2 + em2
        denom = np.where(denom > 0, denom, 1.0)
        total += float(((y[sel] - ym) ** 2 / denom).sum())
        count += int(sel.sum())
    if count == 0:
        raise ValueError("curves have no overlapping x-range")
    return total / count


def collapse_baseline(curves, n_boot: int = 50, seed: int = 0) -> float:
    """Self-noise baseline: expected quality when curves are resampled
    replicas of a single underlying curve (parametric bootstrap per curve)."""
    rng = np.random.default_rng(seed)
    vals = []
    for x, y, e in curves:
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        e = np.asarray(e, float)
        for _ in range(n_boot):
            reps = [(x, y + e * rng.standard_normal(y.size), e)
                    for _ in range(2)]
            vals.append(collapse_quality(reps))
    return float(np.mean(vals))


@dataclass
class SteadyStateFit:
    h_ab: float
    h_err: float
    intercept: float
    chi2: float
    n_points: int


def chord_coordinate(x12, L: int) -> np.ndarray:
    """ln((L/pi) sin(pi x12 / L)): the conformal chord-length coordinate."""
    x12 = np.asarray(x12, dtype=np.float64)
    return np.log((L / math.pi) * np.sin(math.pi * x12 / L))


def fit_steady_state(x12, s_a, sigma, L: int) -> SteadyStateFit:
    """Least-squares slope of S_A (natural units) against the chord
    coordinate; h_ab = slope / 2. Intercept reported, non-contractual."""
    u = chord_coordinate(x12, L)
    s_a = np.asarray(s_a, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    w = 1.0 / np.where(sigma > 0, sigma, np.nanmin(sigma[sigma > 0])
                       if np.any(sigma > 0) else 1.0) ** 2
    W = w.sum()
    mu = (w * u).sum() / W
    ms = (w * s_a).sum() / W
    suu = (w * (u - mu) ** 2).sum()
    slope = (w * (u - mu) * (s_a - ms)).sum() / suu
    intercept = ms - slope * mu
    resid = s_a - (intercept + slope * u)
    chi2 = float((w * resid ** 2).sum())
    return SteadyStateFit(float(slope / 2), float(math.sqrt(1.0 / suu) / 2),
                          float(intercept), chi2, int(u.size))


@dataclass
class ConformalFit:
    h_ab: float          # slope of S_Q vs pi/tau in the small-tau window
    v: float             # velocity making tau = v t / L collapse to h pi/tau
    amplitude: float     # fitted C = h_ab / v of S_Q = C * (pi L / t)
    quality: float       # collapse quality of S_Q vs tau across L
    n_points: int


def fit_conformal(dataset: ScalingDataset, h_ab_ref: float,
                  window: tuple[float, float] = (0.05, 0.3)) -> ConformalFit:
    """Aspect-ratio fit of purification entropy curves at criticality.

    Eq.-31-type data determine only the combination C = h_ab/v (any common
    rescaling of tau leaves a collapse unchanged), so the steady-state
    exponent h_ab_ref anchors the scale: the small-tau window tau in
    [w0, w1] maps to S_Q in [h pi/w1, h pi/w0] without knowing v, C is fit
    there from S_Q = C * pi L / t pooled over L, and v = h_ab_ref / C.
    Curves must be natural-unit entropies at a single p with >= 3 sizes.
    """
    Ls = {c.L for c in dataset.curves}
    if len(Ls) < 3:
        raise ValueError("conformal fit needs at least 3 system sizes")
    if len({round(c.p, 12) for c in dataset.curves}) != 1:
        raise ValueError("conformal fit needs curves at a single rate p")
    s_lo = h_ab_ref * math.pi / window[1]
    s_hi = h_ab_ref * math.pi / window[0]
    xs, ys, ws = [], [], []
    for c in dataset.curves:
        sel = (c.t > 0) & (c.value >= s_lo) & (c.value <= s_hi)
        if not sel.any():
            continue
        xs.append(math.pi * c.L / c.t[sel])
        ys.append(c.value[sel])
        err = np.where(c.stderr[sel] > 0, c.stderr[sel], np.inf)
        ws.append(1.0 / err ** 2)
    if not xs:
        raise ValueError("no data points inside the small-tau window")
    x = np.concatenate(xs)
    y = np.concatenate(ys)
    w = np.concatenate(ws)
    if not np.any(np.isfinite(w)):
        w = np.ones_like(x)
    w = np.where(np.isfinite(w), w, 0.0)
    if w.sum() == 0:
        w = np.ones_like(x)
    C = float((w * x * y).sum() / (w * x * x).sum())  # through-origin slope
    v = h_ab_ref / C
    # Eq.-33 slope in tau coordinates, and cross-L collapse quality of the
    # curves vs tau (log-log space, where the small-tau branch is linear)
    h33 = C * v
    curves = []
    for c in dataset.curves:
        sel = (c.t > 0) & (c.value > 0)
        tau = v * c.t[sel] / c.L
        curves.append((np.log(tau), np.log(c.value[sel]),
                       c.stderr[sel] / c.value[sel]))
    quality = collapse_quality(curves)
    return ConformalFit(float(h33), float(v), C, float(quality), int(x.size))


def jackknife(values, stat, n_blocks: int = 20):
    """Leave-one-block-out jackknife mean and error of stat(values)."""
    values = np.asarray(values)
    n = values.shape[0]
    n_blocks = min(n_blocks, n)
    edges = np.linspace(0, n, n_blocks + 1, dtype=int)
    full = stat(values)
    parts = []
    for b in range(n_blocks):
        mask = np.ones(n, dtype=bool)
        mask[edges[b]:edges[b + 1]] = False
        parts.append(stat(values[mask]))
    parts = np.asarray(parts)
    err = math.sqrt((n_blocks - 1) / n_blocks
                    * float(((parts - parts.mean()) ** 2).sum()))
    return float(full), err
