"""Renderers for the five figure kinds.

Deterministic output: fixed canvas sizes and dpi, the Agg backend, no
timestamps. Configuration panels go through Pillow pixel-for-pixel (so they
byte-match golden images); the plot figures go through matplotlib.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from PIL import Image  # noqa: E402

from .spec import (FigureSpec, SpecError, read_intervals_csv, read_pgm,  # noqa: E402
                   read_series_csv)

_FIGSIZE = (6.4, 4.2)
_DPI = 130


def render(spec: FigureSpec) -> str:
    """Render the spec to its output path; returns the path."""
    Path(spec.out).parent.mkdir(parents=True, exist_ok=True)
    fn = {
        "config_panel": _render_config_panel,
        "dp_collapse": _render_dp_collapse,
        "entropy_collapse": _render_entropy_collapse,
        "conformal": _render_conformal,
        "crossover": _render_crossover,
    }[spec.figure]
    fn(spec)
    return spec.out


def _finish(fig, out: str) -> None:
    # metadata pinned so re-renders are byte-identical across runs
    fig.savefig(out, dpi=_DPI, metadata={"Software": "qdp-figures"})
    plt.close(fig)


# ---------------------------------------------------------------------------
# configuration panels (Pillow; exact pixels)
# ---------------------------------------------------------------------------

def _render_config_panel(spec: FigureSpec) -> None:
    """Spacetime bitmaps: active white, inactive black, gray levels allowed;
    one PGM per input, stacked vertically with a 2-pixel separator."""
    scale = int(spec.options.get("scale", 1))
    if scale < 1:
        raise SpecError("options.scale must be a positive integer")
    panels = [read_pgm(item["path"]) for item in spec.inputs]
    width = max(p.shape[1] for p in panels)
    rows = []
    sep = np.full((2, width), 128, dtype=np.uint8)
    for i, p in enumerate(panels):
        if p.shape[1] < width:
            pad = np.zeros((p.shape[0], width - p.shape[1]), dtype=np.uint8)
            p = np.concatenate([p, pad], axis=1)
        if i:
            rows.append(sep)
        rows.append(p)
    img = np.concatenate(rows, axis=0)
    if scale > 1:
        img = np.kron(img, np.ones((scale, scale), dtype=np.uint8))
    Image.fromarray(img, mode="L").save(spec.out, format="PNG")


# ---------------------------------------------------------------------------
# scaling collapses (matplotlib)
# ---------------------------------------------------------------------------

def _need_axes(spec: FigureSpec, keys) -> dict:
    missing = [k for k in keys if k not in spec.axes]
    if missing:
        raise SpecError(f"axes: missing {missing} for figure {spec.figure!r}")
    return spec.axes


def _input_meta(item: dict, keys) -> list:
    missing = [k for k in keys if k not in item]
    if missing:
        raise SpecError(f"inputs[{item.get('path')}]: missing keys {missing}")
    return [item[k] for k in keys]


def _collapse_curves(spec: FigureSpec, order_parameter: bool):
    """Rescaled curves (L, p, x, eta, y, yerr); order_parameter applies the
    L^{z alpha} vertical scale of the density form, entropies pass through."""
    axes = _need_axes(spec, ("alpha", "z", "nu_perp", "p_c"))
    curves = []
    for item in spec.inputs:
        L, p = _input_meta(item, ("L", "p"))
        t, m, e = read_series_csv(item["path"], spec.observable)
        sel = t > 0
        eta = t[sel] * L ** (-axes["z"])
        ysc = L ** (axes["z"] * axes["alpha"]) if order_parameter else 1.0
        x = (p - axes["p_c"]) * L ** (1.0 / axes["nu_perp"])
        curves.append((L, p, x, eta, m[sel] * ysc, e[sel] * ysc))
    return curves


def _master_residual(ax_inset, curves) -> None:
    """Inset: per-point deviation from the pooled piecewise-linear master."""
    if len(curves) < 2:
        ax_inset.set_axis_off()
        return
    for i, (L, p, x, eta, y, e) in enumerate(curves):
        ox = np.concatenate([c[3] for j, c in enumerate(curves) if j != i])
        oy = np.concatenate([c[4] for j, c in enumerate(curves) if j != i])
        order = np.argsort(ox)
        ox, oy = ox[order], oy[order]
        sel = (eta >= ox[0]) & (eta <= ox[-1])
        if not sel.any():
            continue
        resid = y[sel] - np.interp(eta[sel], ox, oy)
        ax_inset.plot(eta[sel], resid, lw=0.7)
    ax_inset.axhline(0.0, color="k", lw=0.5)
    ax_inset.set_title("residual", fontsize=7)
    ax_inset.tick_params(labelsize=6)


def _render_dp_collapse(spec: FigureSpec) -> None:
    curves = _collapse_curves(spec, order_parameter=True)
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for L, p, x, eta, y, e in curves:
        ax.errorbar(eta, y, yerr=e, lw=1.0, elinewidth=0.4,
                    label=f"L={L}, x={x:+.2f}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(r"$t\,L^{-z}$")
    ax.set_ylabel(r"$L^{z\alpha}\, n$")
    ax.legend(fontsize=7)
    inset = fig.add_axes([0.62, 0.62, 0.26, 0.22])
    _master_residual(inset, curves)
    _finish(fig, spec.out)


def _render_entropy_collapse(spec: FigureSpec) -> None:
    axes = _need_axes(spec, ("alpha", "z", "nu_perp", "p_c", "q_plus_1"))
    # aggregate entropies are stored in qudit units = S / ln(q+1) already;
    # the spec's q_plus_1 is recorded on the axis label
    curves = _collapse_curves(spec, order_parameter=False)
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for L, p, x, eta, y, e in curves:
        ax.errorbar(eta, y, yerr=e, lw=1.0, elinewidth=0.4,
                    label=f"L={L}, x={x:+.2f}")
    ax.set_xscale("log")
    ax.set_xlabel(r"$t\,L^{-z}$")
    ax.set_ylabel(rf"$S_Q/\ln({int(axes['q_plus_1'])})$")
    ax.legend(fontsize=7)
    inset = fig.add_axes([0.62, 0.62, 0.26, 0.22])
    _master_residual(inset, curves)
    _finish(fig, spec.out)


def _render_conformal(spec: FigureSpec) -> None:
    """Left: purification entropy vs the aspect ratio v t / L with the
    h pi/tau small-tau line. Right: steady-state S_A against the chord
    coordinate with the slope-2h line."""
    axes = _need_axes(spec, ("v", "h_ab", "q_plus_1"))
    v, h = float(axes["v"]), float(axes["h_ab"])
    lnq = math.log(float(axes["q_plus_1"]))
    pur = [i for i in spec.inputs if i.get("kind", "purification") == "purification"]
    ss = [i for i in spec.inputs if i.get("kind") == "steady_state"]
    ncols = (1 if pur else 0) + (1 if ss else 0)
    if ncols == 0:
        raise SpecError("conformal figure needs purification and/or "
                        "steady_state inputs")
    fig, axs = plt.subplots(1, ncols, figsize=(4.0 * ncols, 3.4))
    axs = np.atleast_1d(axs)
    col = 0
    if pur:
        ax = axs[col]
        col += 1
        for item in pur:
            (L,) = _input_meta(item, ("L",))
            t, m, e = read_series_csv(item["path"], spec.observable)
            sel = (t > 0) & (m > 0)
            tau = v * t[sel] / L
            ax.errorbar(tau, m[sel] * lnq, yerr=e[sel] * lnq, lw=1.0,
                        elinewidth=0.4, label=f"L={L}")
        tt = np.geomspace(0.04, 0.5, 64)
        ax.plot(tt, h * math.pi / tt, "k--", lw=0.8,
                label=rf"$h\,\pi/\tau$, $h$={h:.2f}")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel(r"$\tau = v t / L$")
        ax.set_ylabel(r"$S_Q$")
        ax.legend(fontsize=7)
    if ss:
        ax = axs[col]
        for item in ss:
            (L,) = _input_meta(item, ("L",))
            vals = read_intervals_csv(item["path"])
            x12 = np.array([x for x, _m, _e in vals], float)
            sa = np.array([m for _x, m, _e in vals]) * lnq
            se = np.array([e for _x, _m, e in vals]) * lnq
            u = np.log((L / math.pi) * np.sin(math.pi * x12 / L))
            ax.errorbar(u, sa, yerr=se, fmt="o", ms=3, label=f"L={L}")
        uu = np.linspace(*ax.get_xlim(), 32)
        mid = sa.mean() - 2 * h * u.mean()
        ax.plot(uu, 2 * h * uu + mid, "k--", lw=0.8,
                label=f"slope $2h_{{a|b}}$ = {2 * h:.2f}")
        ax.set_xlabel(r"$\ln[(L/\pi)\sin(\pi x_{12}/L)]$")
        ax.set_ylabel(r"$S_A$")
        ax.legend(fontsize=7)
    fig.tight_layout()
    _finish(fig, spec.out)


def _render_crossover(spec: FigureSpec) -> None:
    """Two panels: small sizes against t L^{-z}, large sizes against t/L."""
    axes = _need_axes(spec, ("z",))
    z = float(axes["z"])
    small = [i for i in spec.inputs if i.get("regime", "small") == "small"]
    large = [i for i in spec.inputs if i.get("regime") == "large"]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.0, 3.4))
    for item in small:
        (L,) = _input_meta(item, ("L",))
        t, m, e = read_series_csv(item["path"], spec.observable)
        sel = t > 0
        ax1.errorbar(t[sel] * L ** (-z), m[sel], yerr=e[sel], lw=1.0,
                     elinewidth=0.4, label=f"L={L}")
    ax1.set_xscale("log")
    ax1.set_xlabel(rf"$t\,L^{{-z}}$ ($z$={z})")
    ax1.set_ylabel(r"$S_Q$ (qudit units)")
    ax1.set_title("small sizes", fontsize=9)
    ax1.legend(fontsize=7)
    for item in large:
        (L,) = _input_meta(item, ("L",))
        t, m, e = read_series_csv(item["path"], spec.observable)
        sel = t > 0
        ax2.errorbar(t[sel] / L, m[sel], yerr=e[sel], lw=1.0,
                     elinewidth=0.4, label=f"L={L}")
    ax2.set_xscale("log")
    ax2.set_xlabel(r"$t/L$")
    ax2.set_title("large sizes", fontsize=9)
    ax2.legend(fontsize=7)
    fig.tight_layout()
    _finish(fig, spec.out)
