"""Ensemble execution: deterministic seeded trajectories, parallel workers,
CSV/PGM/JSONL persistence.

Determinism contract: outputs are a pure function of the ExperimentConfig.
Every trajectory owns a counter-based stream keyed (master_seed, index), and
aggregation always reduces in index order, so worker count and scheduling
cannot change a byte of the output.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import circuit, dp, etn, io
from .config import ExperimentConfig
from .rng import trajectory_seed

VERSION = "0.1.0"


@dataclass
class RunManifest:
    config_hash: str
    version: str
    seeds: list[int]
    wall_clock_s: float
    outputs: dict[str, str]
    reused: bool = False
    failed_seed: int | None = None


def worker_count() -> int:
    env = os.environ.get("QDP_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _chunks(n: int, k: int) -> list[range]:
    k = max(1, min(k, n))
    step = (n + k - 1) // k
    return [range(a, min(a + step, n)) for a in range(0, n, step)]


# ---------------------------------------------------------------------------
# per-model chunk workers (top-level for pickling)
# ---------------------------------------------------------------------------

def _clifford_chunk(config: ExperimentConfig, indices: list[int]) -> list[dict]:
    out = []
    for idx in indices:
        seed = trajectory_seed(config.master_seed, idx)
        rec = circuit.run_trajectory(config, seed)
        item = {
            "index": idx,
            "seed": seed,
            "n_classical": rec.n_classical,
            "s_q": rec.s_q,
            "n_quantum": rec.n_quantum,
            "intervals": rec.interval_entropies,
            "final_g": rec.final_g,
        }
        if rec.record is not None:
            if "min_cut" in config.observables:
                item["min_cut"] = _min_cut_series(rec.record)
            if "red_bonds" in config.observables:
                item["n_red"] = float(etn.red_bonds(rec.record)[0])
            if "spacetime_record" in config.observables:
                item["occupancy"] = rec.record.occupancy
                item["reset_marks"] = rec.record.reset_marks
        out.append(item)
    return out


def _min_cut_series(record: circuit.SpacetimeRecord) -> np.ndarray:
    """min_cut of the record truncated to horizon t, for every t = 0..T."""
    out = np.empty(record.T + 1, dtype=np.float64)
    for t in range(record.T + 1):
        sub = circuit.SpacetimeRecord(record.L, t, record.occupancy[:t],
                                      record.reset_marks[:t], record.boundary)
        out[t] = etn.min_cut(etn.build_etn(sub)).value
    return out


def _dp_chunk(config: ExperimentConfig, indices: list[int]) -> list[dict]:
    if config.model == "dp_haar":
        dist = dp.haar_pair_distribution(config.p, config.q)
    else:
        dist = dp.standard_pair_distribution(config.p)
    want_rec = bool({"spacetime_record", "min_cut", "red_bonds"}
                    & set(config.observables))
    dens, recs = dp.dp_evolve_ensemble(
        config.L, config.T, dist, config.master_seed, indices,
        periodic=config.boundary == "periodic", record=want_rec)
    out = []
    for i, idx in enumerate(indices):
        item = {"index": idx, "seed": idx, "n_classical": dens[i]}
        if want_rec:
            record = circuit.SpacetimeRecord(
                config.L, config.T, recs[i],
                np.zeros_like(recs[i]), config.boundary)
            if "min_cut" in config.observables:
                item["min_cut"] = _min_cut_series(record)
            if "red_bonds" in config.observables:
                item["n_red"] = float(etn.red_bonds(record)[0])
            if "spacetime_record" in config.observables:
                item["occupancy"] = recs[i]
                item["reset_marks"] = np.zeros_like(recs[i])
        out.append(item)
    return out


def _appendix_chunk(config: ExperimentConfig, indices: list[int]) -> list[dict]:
    want_rec = "spacetime_record" in config.observables
    df, dg, dm, recs = dp.appendix_evolve_ensemble(
        config.L, config.T, config.p, config.q, config.master_seed, indices,
        record=want_rec)
    out = []
    for i, idx in enumerate(indices):
        item = {"index": idx, "seed": idx, "n_classical": dm[i],
                "density_f": df[i], "density_g": dg[i]}
        if want_rec:
            item["gray"] = recs[i]
        out.append(item)
    return out


_CHUNK_FN = {"clifford_flagged": _clifford_chunk, "dp_standard": _dp_chunk,
             "dp_haar": _dp_chunk, "appendix_a": _appendix_chunk}


# ---------------------------------------------------------------------------
# aggregation + persistence
# ---------------------------------------------------------------------------

def _series_observables(config: ExperimentConfig) -> list[str]:
    # the flag density is free to record and every model produces it
    obs = ["n_classical"]
    if "n_quantum" in config.observables:
        obs.append("n_quantum")
    if "entropy_Q" in config.observables:
        obs.append("entropy_Q")
    if "min_cut" in config.observables:
        obs.append("min_cut")
    if config.model == "appendix_a":
        for name in ("density_f", "density_g"):
            if name in config.observables:
                obs.append(name)
    return obs


_SERIES_KEY = {"n_classical": "n_classical", "n_quantum": "n_quantum",
               "entropy_Q": "s_q", "min_cut": "min_cut",
               "density_f": "density_f", "density_g": "density_g"}


def run_experiment(config: ExperimentConfig, reuse: bool = False) -> RunManifest:
    """Execute the configured ensemble; returns the manifest. With `reuse`,
    an existing aggregate whose manifest matches the config hash is kept."""
    out_dir = Path(config.output_path)
    base = config.label or config.model
    stem = f"{base}_{config.hash()}"
    agg_path = out_dir / f"{stem}.csv"
    manifest_path = out_dir / "manifest.jsonl"

    if reuse and agg_path.exists() and manifest_path.exists():
        for line in manifest_path.read_text().splitlines():
            rec = json.loads(line)
            if rec.get("config_hash") == config.hash() and rec.get("complete"):
                return RunManifest(config.hash(), rec["version"], rec["seeds"],
                                   rec["wall_clock_s"],
                                   rec["outputs"], reused=True)

    t0 = time.time()
    n = config.n_samples
    fn = _CHUNK_FN[config.model]
    ranges = _chunks(n, worker_count())
    items: list[dict] = []
    if len(ranges) == 1 or worker_count() == 1:
        for r in ranges:
            items.extend(fn(config, list(r)))
    else:
        with ProcessPoolExecutor(max_workers=worker_count()) as pool:
            futures = [pool.submit(fn, config, list(r)) for r in ranges]
            for fut in futures:
                items.extend(fut.result())
    items.sort(key=lambda d: d["index"])
    seeds = [int(d["seed"]) for d in items]

    rows = []
    T = config.T
    for obs in _series_observables(config):
        key = _SERIES_KEY[obs]
        series = [d.get(key) for d in items]
        if any(s is None for s in series):
            continue
        mat = np.stack(series)
        mean = mat.mean(axis=0)
        if mat.shape[0] > 1:
            stderr = mat.std(axis=0, ddof=1) / np.sqrt(mat.shape[0])
        else:
            stderr = np.zeros(mat.shape[1])
        for t in range(T + 1):
            rows.append((t, obs, mean[t], stderr[t], mat.shape[0]))
    if items and items[0].get("intervals"):
        keys = sorted(items[0]["intervals"])
        for (a, b) in keys:
            vals = np.array([d["intervals"][(a, b)] for d in items], float)
            stderr = vals.std(ddof=1) / np.sqrt(vals.size) if vals.size > 1 else 0.0
            rows.append((T, f"S_A[{a},{b}]", vals.mean(), stderr, vals.size))
    if items and "n_red" in items[0]:
        vals = np.array([d["n_red"] for d in items], float)
        stderr = vals.std(ddof=1) / np.sqrt(vals.size) if vals.size > 1 else 0.0
        rows.append((T, "n_red", vals.mean(), stderr, vals.size))

    outputs: dict[str, str] = {}
    io.write_rows_csv(agg_path, rows)
    outputs["aggregate"] = str(agg_path)

    if config.per_trajectory_output:
        traj_dir = out_dir / "trajectories"
        for d in items:
            trows = []
            for obs in _series_observables(config):
                key = _SERIES_KEY[obs]
                if d.get(key) is None:
                    continue
                for t in range(T + 1):
                    trows.append((t, obs, d[key][t], 0.0, 1))
            for (a, b), val in (d.get("intervals") or {}).items():
                trows.append((T, f"S_A[{a},{b}]", val, 0.0, 1))
            if "n_red" in d:
                trows.append((T, "n_red", d["n_red"], 0.0, 1))
            io.write_rows_csv(traj_dir / f"{stem}_{d['index']:05d}.csv", trows)
        outputs["trajectories"] = str(traj_dir)

    if "spacetime_record" in config.observables:
        rec_dir = out_dir / "records"
        for d in items:
            idx = d["index"]
            if "gray" in d:
                img = io.gray_to_pgm(d["gray"])
                io.write_pgm(rec_dir / f"{stem}_{idx:05d}.pgm", img)
                io.save_record_npz(rec_dir / f"{stem}_{idx:05d}.npz",
                                   d["gray"], np.zeros_like(d["gray"]),
                                   config.boundary, config.model)
            elif "occupancy" in d:
                img = io.occupancy_to_pgm(d["occupancy"])
                io.write_pgm(rec_dir / f"{stem}_{idx:05d}.pgm", img)
                io.save_record_npz(rec_dir / f"{stem}_{idx:05d}.npz",
                                   d["occupancy"], d["reset_marks"],
                                   config.boundary, config.model)
        outputs["records"] = str(rec_dir)

    wall = time.time() - t0
    manifest = RunManifest(config.hash(), VERSION, seeds, wall, outputs)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(manifest_path, "a") as fh:
        fh.write(json.dumps({
            "config_hash": config.hash(), "version": VERSION,
            "label": config.label, "config": json.loads(config.to_json()),
            "seeds": seeds, "wall_clock_s": wall, "outputs": outputs,
            "complete": True}) + "\n")
    return manifest


def load_series(csv_path, observable: str) -> tuple[np.ndarray, np.ndarray,
                                                    np.ndarray, np.ndarray]:
    """(t, mean, stderr, n) arrays for one observable from an aggregate CSV."""
    t, m, s, n = [], [], [], []
    for row in io.read_rows_csv(csv_path):
        if row["observable"] == observable:
            t.append(row["t"])
            m.append(row["mean"])
            s.append(row["stderr"])
            n.append(row["n"])
    order = np.argsort(t)
    return (np.asarray(t, float)[order], np.asarray(m, float)[order],
            np.asarray(s, float)[order], np.asarray(n, int)[order])


def load_intervals(csv_path) -> list[tuple[int, int, float, float, int]]:
    """[(x1, x2, mean, stderr, n), ...] from S_A[a,b] rows."""
    out = []
    for row in io.read_rows_csv(csv_path):
        obs = row["observable"]
        if obs.startswith("S_A["):
            a, b = obs[4:-1].split(",")
            out.append((int(a), int(b), row["mean"], row["stderr"], row["n"]))
    return sorted(out)
