"""Experiment configuration: parsing, validation, canonical hashing."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, asdict

from .primes import is_prime

MODELS = ("clifford_flagged", "dp_standard", "dp_haar", "appendix_a")
PROTOCOLS = ("purification", "steady_state")
BOUNDARIES = ("periodic", "open")
OBSERVABLES = ("n_quantum", "n_classical", "entropy_Q", "entropy_intervals",
               "spacetime_record", "min_cut", "red_bonds",
               # appendix_a sub-lattice densities (no slot in the main enum)
               "density_f", "density_g")

_CLIFFORD_ONLY = {"n_quantum", "entropy_Q", "entropy_intervals"}
_APPENDIX_ONLY = {"density_f", "density_g"}


class ConfigError(ValueError):
    """Carries every violation found, each tagged with its key path."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class ExperimentConfig:
    model: str
    L: int
    T: int
    p: float
    n_samples: int
    master_seed: int
    q_plus_1: int | None = None      # clifford_flagged: prime on-site dimension
    q: int | None = None             # dp_haar / appendix_a: q >= 1
    protocol: str = "purification"
    boundary: str = "periodic"
    observables: tuple[str, ...] = ("n_classical",)
    intervals: tuple[tuple[int, int], ...] = ()
    output_path: str = "."
    per_trajectory_output: bool = False
    label: str = ""

    def hash(self) -> str:
        payload = asdict(self)
        blob = json.dumps(payload, sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)


def validate_config(raw: dict) -> ExperimentConfig:
    """Validate a raw mapping; raise ConfigError listing all violations."""
    v: list[str] = []
    known = {f.name for f in ExperimentConfig.__dataclass_fields__.values()}
    for key in raw:
        if key not in known:
            v.append(f"{key}: unknown key")
    data = {k: raw[k] for k in raw if k in known}

    def need(key, typ, pred=None, msg=""):
        if key not in data:
            v.append(f"{key}: missing")
            return None
        val = data[key]
        if typ is float and isinstance(val, int) and not isinstance(val, bool):
            val = float(val)
        if not isinstance(val, typ) or isinstance(val, bool):
            v.append(f"{key}: expected {typ.__name__}, got {type(val).__name__}")
            return None
        if pred is not None and not pred(val):
            v.append(f"{key}: {msg}")
            return None
        return val

    model = need("model", str, lambda m: m in MODELS,
                 f"must be one of {MODELS}")
    L = need("L", int, lambda x: x >= 2, "must be >= 2")
    T = need("T", int, lambda x: x >= 1, "must be >= 1")
    p = need("p", float, lambda x: 0.0 <= x <= 1.0, "must be in [0, 1]")
    n_samples = need("n_samples", int, lambda x: x >= 1, "must be >= 1")
    master_seed = need("master_seed", int, lambda x: x >= 0, "must be >= 0")

    protocol = data.get("protocol", "purification")
    if protocol not in PROTOCOLS:
        v.append(f"protocol: must be one of {PROTOCOLS}")
    boundary = data.get("boundary", "periodic")
    if boundary not in BOUNDARIES:
        v.append(f"boundary: must be one of {BOUNDARIES}")

    obs = data.get("observables", ["n_classical"])
    if not isinstance(obs, (list, tuple)) or not all(isinstance(o, str) for o in obs):
        v.append("observables: expected a list of strings")
        obs = []
    for o in obs:
        if o not in OBSERVABLES:
            v.append(f"observables: unknown observable {o!r}")

    q_plus_1 = data.get("q_plus_1")
    q = data.get("q")
    if model == "clifford_flagged":
        if q_plus_1 is None:
            v.append("q_plus_1: required for clifford_flagged")
        elif not isinstance(q_plus_1, int) or not is_prime(q_plus_1):
            v.append("q_plus_1: q_plus_1 must be prime")
        if q is not None:
            v.append("q: only valid for dp_haar / appendix_a")
    elif model in ("dp_haar", "appendix_a"):
        if q is None:
            v.append(f"q: required for {model}")
        elif not isinstance(q, int) or q < 1:
            v.append("q: must be an integer >= 1")
        if q_plus_1 is not None:
            v.append("q_plus_1: only valid for clifford_flagged")
    else:  # dp_standard
        if q is not None or q_plus_1 is not None:
            v.append("q/q_plus_1: dp_standard takes neither")

    if model != "clifford_flagged":
        bad = set(obs) & _CLIFFORD_ONLY
        if bad:
            v.append(f"observables: {sorted(bad)} require model clifford_flagged")
        if protocol == "steady_state":
            v.append("protocol: steady_state requires model clifford_flagged")
    if model != "appendix_a":
        bad = set(obs) & _APPENDIX_ONLY
        if bad:
            v.append(f"observables: {sorted(bad)} require model appendix_a")
    if model == "appendix_a" and isinstance(L, int) and L % 2:
        v.append("L: appendix_a needs even L (alternating site types)")

    if boundary == "periodic" and isinstance(L, int) and L % 2:
        v.append("L: periodic boundaries need even L")

    intervals = data.get("intervals", [])
    norm_intervals = []
    if not isinstance(intervals, (list, tuple)):
        v.append("intervals: expected a list of [x1, x2] pairs")
    else:
        for i, pair in enumerate(intervals):
            ok = (isinstance(pair, (list, tuple)) and len(pair) == 2
                  and all(isinstance(x, int) for x in pair))
            if not ok:
                v.append(f"intervals[{i}]: expected [x1, x2] integers")
                continue
            x1, x2 = pair
            if not (isinstance(L, int) and 0 <= x1 < x2 <= L):
                v.append(f"intervals[{i}]: need 0 <= x1 < x2 <= L")
            else:
                norm_intervals.append((x1, x2))
    if "entropy_intervals" in obs and not norm_intervals:
        v.append("intervals: required when entropy_intervals is observed")

    output_path = data.get("output_path", ".")
    if not isinstance(output_path, str):
        v.append("output_path: expected string")
        output_path = "."
    per_traj = data.get("per_trajectory_output", False)
    if not isinstance(per_traj, bool):
        v.append("per_trajectory_output: expected bool")
        per_traj = False
    label = data.get("label", "")
    if not isinstance(label, str):
        v.append("label: expected string")
        label = ""

    if v:
        raise ConfigError(v)
    return ExperimentConfig(
        model=model, L=L, T=T, p=float(p), n_samples=n_samples,
        master_seed=master_seed, q_plus_1=q_plus_1, q=q, protocol=protocol,
        boundary=boundary, observables=tuple(obs),
        intervals=tuple(norm_intervals), output_path=output_path,
        per_trajectory_output=per_traj, label=label)


def parse_config(text: str) -> ExperimentConfig:
    """Parse and fully validate a JSON config document."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError([f"<document>: invalid JSON ({e})"]) from e
    if not isinstance(raw, dict):
        raise ConfigError(["<document>: expected a JSON object"])
    return validate_config(raw)
