"""FigureSpec: a JSON document naming a figure kind, its input files, and
the axis transforms to apply. Rendering never recomputes physics: every
exponent, velocity, or fitted slope shown is read from the spec (taken from
the toolkit's fit outputs), and every data point comes from the input files.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

FIGURE_KINDS = ("config_panel", "dp_collapse", "entropy_collapse",
                "conformal", "crossover")

CSV_HEADER = ["t", "observable", "mean", "stderr", "n"]


class SpecError(ValueError):
    pass


@dataclass
class FigureSpec:
    figure: str
    inputs: list[dict]
    out: str
    observable: str = "n_classical"
    axes: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)

    @classmethod
    def from_json(cls, text: str, base_dir: Path | None = None) -> "FigureSpec":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as e:
            raise SpecError(f"invalid JSON: {e}") from e
        if not isinstance(raw, dict):
            raise SpecError("spec must be a JSON object")
        fig = raw.get("figure")
        if fig not in FIGURE_KINDS:
            raise SpecError(f"figure must be one of {FIGURE_KINDS}, got {fig!r}")
        inputs = raw.get("inputs")
        if not isinstance(inputs, list) or not inputs:
            raise SpecError("inputs: expected a non-empty list")
        norm = []
        for i, item in enumerate(inputs):
            if isinstance(item, str):
                item = {"path": item}
            if not isinstance(item, dict) or "path" not in item:
                raise SpecError(f"inputs[{i}]: expected a path or an object "
                                "with a 'path' key")
            item = dict(item)
            if base_dir is not None and not Path(item["path"]).is_absolute():
                item["path"] = str(base_dir / item["path"])
            if not Path(item["path"]).exists():
                raise SpecError(f"inputs[{i}]: no such file {item['path']}")
            norm.append(item)
        out = raw.get("out")
        if not isinstance(out, str) or not out:
            raise SpecError("out: expected an output image path")
        if base_dir is not None and not Path(out).is_absolute():
            out = str(base_dir / out)
        return cls(figure=fig, inputs=norm, out=out,
                   observable=raw.get("observable", "n_classical"),
                   axes=raw.get("axes", {}), options=raw.get("options", {}))


def read_series_csv(path: str, observable: str):
    """(t, mean, stderr) for one observable from a toolkit aggregate CSV."""
    seen = set()
    t, m, s = [], [], []
    with open(path, newline="") as fh:
        r = csv.DictReader(fh)
        if r.fieldnames != CSV_HEADER:
            raise SpecError(f"{path}: unexpected CSV columns {r.fieldnames}, "
                            f"expected {CSV_HEADER}")
        for row in r:
            seen.add(row["observable"])
            if row["observable"] == observable:
                t.append(float(row["t"]))
                m.append(float(row["mean"]))
                s.append(float(row["stderr"]))
    if not t:
        raise SpecError(f"{path}: no rows for observable column value "
                        f"{observable!r} (has: {sorted(seen)})")
    order = np.argsort(t)
    return (np.asarray(t)[order], np.asarray(m)[order], np.asarray(s)[order])


def read_intervals_csv(path: str):
    """[(x2, mean, stderr)] from S_A[x1,x2] rows of an aggregate CSV."""
    out = []
    with open(path, newline="") as fh:
        r = csv.DictReader(fh)
        if r.fieldnames != CSV_HEADER:
            raise SpecError(f"{path}: unexpected CSV columns {r.fieldnames}")
        for row in r:
            name = row["observable"]
            if name.startswith("S_A["):
                x1, x2 = name[4:-1].split(",")
                out.append((int(x2) - int(x1), float(row["mean"]),
                            float(row["stderr"])))
    if not out:
        raise SpecError(f"{path}: no S_A[x1,x2] interval rows found")
    return sorted(out)


def read_pgm(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P5"):
        raise SpecError(f"{path}: not a binary PGM (P5) file")
    fields = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while data[pos:pos + 1] not in (b"\n", b""):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        fields.append(int(data[start:pos]))
    pos += 1
    w, h, maxval = fields
    if maxval != 255:
        raise SpecError(f"{path}: only maxval-255 PGM supported")
    return np.frombuffer(data[pos:pos + w * h], dtype=np.uint8).reshape(h, w).copy()
