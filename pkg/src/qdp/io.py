"""File formats: aggregate/trajectory CSV, binary PGM (P5), record archives.

CSV schema (one file per run): header `t,observable,mean,stderr,n`; floats
serialized with 17 significant digits so a read-back round-trips exactly.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

CSV_HEADER = ["t", "observable", "mean", "stderr", "n"]


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_rows_csv(path, rows) -> None:
    """rows: iterable of (t, observable, mean, stderr, n)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for t, obs, mean, stderr, n in rows:
            w.writerow([int(t), obs, fmt(mean), fmt(stderr), int(n)])


def read_rows_csv(path):
    """Yields dicts with keys t (int), observable, mean, stderr, n (int)."""
    with open(path, newline="") as fh:
        r = csv.DictReader(fh)
        if r.fieldnames != CSV_HEADER:
            raise ValueError(f"{path}: unexpected CSV schema {r.fieldnames}")
        for row in r:
            yield {"t": int(row["t"]), "observable": row["observable"],
                   "mean": float(row["mean"]), "stderr": float(row["stderr"]),
                   "n": int(row["n"])}


def write_pgm(path, image: np.ndarray) -> None:
    """Binary P5 bitmap; image is (H, W) uint8, row 0 at the top."""
    image = np.ascontiguousarray(image, dtype=np.uint8)
    if image.ndim != 2:
        raise ValueError("PGM image must be 2-D")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    h, w = image.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode())
        fh.write(image.tobytes())


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P5"):
        raise ValueError(f"{path}: not a binary PGM (P5) file")
    # header: magic, width, height, maxval; # comments allowed
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
    pos += 1  # single whitespace after maxval
    w, h, maxval = fields
    if maxval != 255:
        raise ValueError("only maxval 255 PGM supported")
    img = np.frombuffer(data[pos:pos + w * h], dtype=np.uint8).reshape(h, w)
    return img.copy()


def occupancy_to_pgm(occupancy: np.ndarray) -> np.ndarray:
    """Flag configuration bitmap: active white (255), inactive black."""
    return (np.asarray(occupancy) > 0).astype(np.uint8) * 255


def gray_to_pgm(values: np.ndarray) -> np.ndarray:
    """Continuous occupation in [0,1] mapped linearly onto 0..255."""
    v = np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0)
    return np.round(v * 255.0).astype(np.uint8)


def save_record_npz(path, occupancy, reset_marks, boundary: str,
                    model: str, extra: dict | None = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = dict(occupancy=occupancy, reset_marks=reset_marks,
                   boundary=np.array(boundary), model=np.array(model))
    if extra:
        payload.update(extra)
    np.savez_compressed(path, **payload)


def load_record_npz(path):
    with np.load(path, allow_pickle=False) as z:
        occupancy = z["occupancy"]
        reset_marks = z["reset_marks"]
        boundary = str(z["boundary"])
        model = str(z["model"])
    return occupancy, reset_marks, boundary, model
