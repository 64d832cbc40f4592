"""Command-line interface.

Subcommands: clifford-run, dp-run, appendixa-run, etn-analyze, collapse,
fit, render-config, run. Exit codes: 0 success, 2 config error, 3 runtime
failure. Worker count: QDP_WORKERS environment variable (default: all cores).
"""

from __future__ import annotations

import argparse
import glob
import json
import sys
from pathlib import Path

import numpy as np

from . import etn, io, runner, scaling
from .circuit import SpacetimeRecord
from .config import ConfigError, parse_config, validate_config


def _parse_observables(text: str) -> list[str]:
    return [o.strip() for o in text.split(",") if o.strip()]


def _parse_intervals(text: str) -> list[list[int]]:
    out = []
    for part in text.split(","):
        a, b = part.split(":")
        out.append([int(a), int(b)])
    return out


def _add_run_flags(sp, model: str):
    sp.add_argument("--length", "-L", type=int, required=True)
    sp.add_argument("--depth", "-T", type=int, required=True)
    sp.add_argument("--rate", "-p", type=float, required=True)
    sp.add_argument("--samples", "-n", type=int, default=100)
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--boundary", choices=("periodic", "open"),
                    default="periodic")
    sp.add_argument("--observables", default="n_classical")
    sp.add_argument("--out", default=".")
    sp.add_argument("--label", default="")
    sp.add_argument("--per-trajectory", action="store_true")
    sp.add_argument("--reuse", action="store_true",
                    help="skip the run when an identical one is on disk")
    if model == "clifford":
        sp.add_argument("--q-plus-1", type=int, required=True)
        sp.add_argument("--protocol", choices=("purification", "steady_state"),
                        default="purification")
        sp.add_argument("--intervals", default="",
                        help="comma list x1:x2 for entropy_intervals")
    else:
        sp.add_argument("--q", type=int, default=None)


def _config_from_args(args, model: str) -> dict:
    raw = dict(model=model, L=args.length, T=args.depth, p=args.rate,
               n_samples=args.samples, master_seed=args.seed,
               boundary=args.boundary,
               observables=_parse_observables(args.observables),
               output_path=args.out, per_trajectory_output=args.per_trajectory,
               label=args.label)
    if model == "clifford_flagged":
        raw["q_plus_1"] = getattr(args, "q_plus_1")
        raw["protocol"] = args.protocol
        if args.intervals:
            raw["intervals"] = _parse_intervals(args.intervals)
    elif model == "appendix_a":
        raw["q"] = args.q
    else:
        if args.q is not None:
            raw["model"] = "dp_haar"
            raw["q"] = args.q
    return raw


def _do_run(raw: dict, reuse: bool) -> int:
    config = validate_config(raw)
    manifest = runner.run_experiment(config, reuse=reuse)
    print(json.dumps({"config_hash": manifest.config_hash,
                      "outputs": manifest.outputs,
                      "wall_clock_s": round(manifest.wall_clock_s, 3),
                      "reused": manifest.reused}))
    return 0


def _load_record(path: str, boundary: str | None) -> SpacetimeRecord:
    path = str(path)
    if path.endswith(".npz"):
        occ, marks, bnd, _model = io.load_record_npz(path)
        occ = (occ > 0.5).astype(np.uint8) if occ.dtype != np.uint8 else occ
        return SpacetimeRecord(occ.shape[1], occ.shape[0], occ, marks,
                               boundary or bnd)
    img = io.read_pgm(path)
    occ = (img > 127).astype(np.uint8)
    return SpacetimeRecord(occ.shape[1], occ.shape[0], occ,
                           np.zeros_like(occ), boundary or "periodic")


def cmd_etn_analyze(args) -> int:
    paths = []
    for pattern in args.records:
        hits = sorted(glob.glob(pattern))
        if not hits and Path(pattern).exists():
            hits = [pattern]
        if not hits:
            print(f"error: no record files match {pattern}", file=sys.stderr)
            return 3
        paths.extend(hits)
    rows = []
    for path in paths:
        rec = _load_record(path, args.boundary)
        if args.what in ("min_cut", "both"):
            cut = etn.min_cut(etn.build_etn(rec))
            rows.append((rec.T, f"min_cut[{Path(path).stem}]", cut.value, 0.0, 1))
            print(f"{path}: min_cut = {cut.value}")
        if args.what in ("red_bonds", "both"):
            n_red, _ = etn.red_bonds(rec)
            rows.append((rec.T, f"n_red[{Path(path).stem}]", n_red, 0.0, 1))
            print(f"{path}: n_red = {n_red}")
    if args.out:
        io.write_rows_csv(args.out, rows)
    return 0


def cmd_fit(args) -> int:
    t, mean, stderr, _ = runner.load_series(args.input, args.y)
    sel = (t >= args.t_min) & (mean > 0)
    if args.t_max is not None:
        sel &= t <= args.t_max
    fit = scaling.fit_power_law(t[sel], mean[sel], stderr[sel])
    out = {"law": "power", "x": args.x, "y": args.y,
           "exponent": fit.exponent, "exponent_err": fit.exponent_err,
           "amplitude": fit.amplitude, "chi2": fit.chi2,
           "n_points": int(sel.sum())}
    print(json.dumps(out))
    if args.out:
        Path(args.out).write_text(json.dumps(out, indent=2))
    return 0


def _exponents_from_args(args) -> scaling.ExponentSet:
    if args.exponents == "dp":
        exps = scaling.DP_EXPONENTS
        if args.pc is not None:
            exps = scaling.ExponentSet(exps.alpha, exps.nu_perp,
                                       exps.nu_parallel, exps.z, args.pc)
        return exps
    return scaling.ExponentSet(args.alpha, args.nu_perp, args.nu_parallel,
                               args.z, args.pc)


def cmd_collapse(args) -> int:
    curves = []
    for spec in args.input:
        path, L, p = spec.split(":")
        t, mean, stderr, _ = runner.load_series(path, args.y)
        sel = t > 0
        curves.append(scaling.Curve(int(L), float(p), t[sel], mean[sel],
                                    stderr[sel]))
    ds = scaling.ScalingDataset(curves, args.y, args.q_plus_1)
    exps = _exponents_from_args(args)
    if args.entropy:
        if args.q_plus_1 is None:
            print("error: --entropy collapse needs --q-plus-1", file=sys.stderr)
            return 2
        rescaled = scaling.rescale_entropy_dp(ds, exps)
    else:
        rescaled = scaling.rescale_dp(ds, exps)
    packs = [(r.eta, r.y, r.yerr) for r in rescaled]
    quality = scaling.collapse_quality(packs)
    out = {"quality": quality, "n_curves": len(packs),
           "exponents": {"alpha": exps.alpha, "nu_perp": exps.nu_perp,
                         "nu_parallel": exps.nu_parallel, "z": exps.z,
                         "p_c": exps.p_c}}
    print(json.dumps(out))
    if args.out:
        rows = []
        for r in rescaled:
            for i in range(r.eta.size):
                rows.append((i, f"rescaled[L={r.L},p={r.p:g}]",
                             r.y[i], r.yerr[i], 1))
        io.write_rows_csv(args.out, rows)
    return 0


def cmd_render_config(args) -> int:
    text = Path(args.config).read_text()
    config = parse_config(text)
    need = dict(json.loads(config.to_json()))
    obs = set(need["observables"]) | {"spacetime_record"}
    need["observables"] = sorted(obs)
    need["n_samples"] = 1
    need["master_seed"] = config.master_seed + args.index
    config = validate_config(need)
    if config.model == "clifford_flagged":
        from .circuit import run_trajectory
        from .rng import trajectory_seed
        rec = run_trajectory(config, trajectory_seed(config.master_seed, 0))
        img = io.occupancy_to_pgm(rec.record.bond_rows())
    elif config.model in ("dp_standard", "dp_haar"):
        from . import dp as dpmod
        dist = (dpmod.haar_pair_distribution(config.p, config.q)
                if config.model == "dp_haar"
                else dpmod.standard_pair_distribution(config.p))
        _dens, recs = dpmod.dp_evolve_ensemble(config.L, config.T, dist,
                                               config.master_seed, [0],
                                               record=True)
        rows = np.concatenate([np.ones((1, config.L), np.uint8), recs[0]])
        img = io.occupancy_to_pgm(rows)
    else:
        from . import dp as dpmod
        _f, _g, _m, recs = dpmod.appendix_evolve_ensemble(
            config.L, config.T, config.p, config.q, config.master_seed, [0],
            record=True)
        img = io.gray_to_pgm(recs[0])
    io.write_pgm(args.out, img)
    print(f"wrote {args.out} ({img.shape[1]}x{img.shape[0]})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="qdp",
        description="Adaptive monitored qudit circuits with an absorbing "
                    "state: simulation and analysis toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("clifford-run", help="flagged Clifford circuit ensemble")
    _add_run_flags(sp, "clifford")

    sp = sub.add_parser("dp-run", help="classical bond DP (standard, or "
                                       "Haar-channel with --q)")
    _add_run_flags(sp, "dp")

    sp = sub.add_parser("appendixa-run", help="partial-measurement process")
    _add_run_flags(sp, "appendix")

    sp = sub.add_parser("run", help="run from a JSON config file")
    sp.add_argument("--config", required=True)
    sp.add_argument("--reuse", action="store_true")

    sp = sub.add_parser("etn-analyze", help="min-cut / red bonds of records")
    sp.add_argument("--what", choices=("min_cut", "red_bonds", "both"),
                    default="both")
    sp.add_argument("--records", nargs="+", required=True,
                    help="record files or globs (.npz or .pgm)")
    sp.add_argument("--boundary", choices=("periodic", "open"), default=None)
    sp.add_argument("--out", default="")

    sp = sub.add_parser("fit", help="power-law fit of an aggregate series")
    sp.add_argument("--law", choices=("power",), default="power")
    sp.add_argument("--x", default="t")
    sp.add_argument("--y", default="n_classical")
    sp.add_argument("--input", required=True)
    sp.add_argument("--t-min", type=int, default=1)
    sp.add_argument("--t-max", type=int, default=None)
    sp.add_argument("--out", default="")

    sp = sub.add_parser("collapse", help="finite-size scaling collapse")
    sp.add_argument("--input", nargs="+", required=True,
                    help="entries path:L:p")
    sp.add_argument("--y", default="n_classical")
    sp.add_argument("--exponents", choices=("dp", "custom"), default="dp")
    sp.add_argument("--alpha", type=float, default=None)
    sp.add_argument("--nu-perp", type=float, default=None)
    sp.add_argument("--nu-parallel", type=float, default=None)
    sp.add_argument("--z", type=float, default=None)
    sp.add_argument("--pc", type=float, default=None)
    sp.add_argument("--q-plus-1", type=int, default=None)
    sp.add_argument("--entropy", action="store_true",
                    help="entropy collapse (divides by ln(q+1) units)")
    sp.add_argument("--out", default="")

    sp = sub.add_parser("render-config", help="run one trajectory of a "
                                              "config and emit its PGM")
    sp.add_argument("--config", required=True)
    sp.add_argument("--index", type=int, default=0)
    sp.add_argument("--out", required=True)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        if args.command == "clifford-run":
            return _do_run(_config_from_args(args, "clifford_flagged"),
                           args.reuse)
        if args.command == "dp-run":
            return _do_run(_config_from_args(args, "dp_standard"), args.reuse)
        if args.command == "appendixa-run":
            return _do_run(_config_from_args(args, "appendix_a"), args.reuse)
        if args.command == "run":
            config = parse_config(Path(args.config).read_text())
            manifest = runner.run_experiment(config, reuse=args.reuse)
            print(json.dumps({"config_hash": manifest.config_hash,
                              "outputs": manifest.outputs,
                              "reused": manifest.reused}))
            return 0
        if args.command == "etn-analyze":
            return cmd_etn_analyze(args)
        if args.command == "fit":
            return cmd_fit(args)
        if args.command == "collapse":
            return cmd_collapse(args)
        if args.command == "render-config":
            return cmd_render_config(args)
        raise AssertionError(f"unhandled command {args.command}")
    except ConfigError as e:
        for item in e.violations:
            print(f"config error: {item}", file=sys.stderr)
        return 2
    except (ValueError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
