"""Plain-file formats: trajectory CSV/binary, field records, JSON helpers."""
from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .spectral import GridSpec, Trajectory

MAGIC = b"BBMTRAJ1"
# header: 8-byte magic, uint32 mode bound M, uint32 number of records;
# then float64 times[K], then complex128 coeffs[K, 2M+1] (little endian).
_HEADER = struct.Struct("<8sII")


def write_trajectory_csv(traj: Trajectory, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "n", "re", "im"])
        for t, row in zip(traj.times, traj.coeffs):
            for n, c in zip(traj.grid.modes, row):
                w.writerow([repr(float(t)), int(n), repr(float(c.real)), repr(float(c.imag))])


def read_trajectory_csv(path) -> Trajectory:
    data: dict[float, dict[int, complex]] = {}
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            data.setdefault(float(rec["t"]), {})[int(rec["n"])] = complex(float(rec["re"]), float(rec["im"]))
    times = sorted(data)
    M = max(abs(n) for d in data.values() for n in d)
    coeffs = np.zeros((len(times), 2 * M + 1), dtype=complex)
    for k, t in enumerate(times):
        for n, c in data[t].items():
            coeffs[k, M + n] = c
    return Trajectory(GridSpec(M), np.array(times), coeffs)


def write_trajectory_binary(traj: Trajectory, path) -> None:
    M = traj.grid.mode_bound
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, M, len(traj)))
        fh.write(np.ascontiguousarray(traj.times, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(traj.coeffs, dtype="<c16").tobytes())


def read_trajectory_binary(path) -> Trajectory:
    raw = Path(path).read_bytes()
    magic, M, K = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError("not a trajectory file")
    off = _HEADER.size
    times = np.frombuffer(raw, dtype="<f8", count=K, offset=off)
    coeffs = np.frombuffer(raw, dtype="<c16", count=K * (2 * M + 1), offset=off + 8 * K)
    return Trajectory(GridSpec(M), times.copy(), coeffs.reshape(K, 2 * M + 1).copy())


def _default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def dump_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_default)
        fh.write("\n")


def write_rows_csv(rows: list[dict], path, columns=None) -> None:
    columns = columns or (list(rows[0]) if rows else [])
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns)
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
