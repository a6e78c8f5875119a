"""Deterministic CSV / JSON-lines writers and run metadata sidecars.

Floats are written with ``repr`` so reruns with the same inputs produce
byte-identical files regardless of locale.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from .grid import KAPPA

__all__ = ["CONVENTIONS", "to_jsonable", "write_rows_csv", "write_jsonl", "read_jsonl",
           "write_complex_matrix_csv", "read_complex_matrix_csv", "write_sidecar"]

CONVENTIONS = {
    "kappa": KAPPA,
    "kappa_note": "mu_eq = kappa * Lap(phi_eq) on the coincidence set, kappa = 1/(4 pi)",
    "pointwise_norm": "|s|^2_{h^N} = |f|^2 exp(-N phi)",
    "density_of_states": "Pi_N(z) = B_N(z) exp(-N phi(z)); spherical targets divide by d_N = N + 1",
    "complex_gaussian": "real and imaginary parts of variance 1/2",
}


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if hasattr(obj, "as_dict"):
        return to_jsonable(obj.as_dict())
    return obj


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (dict, list, tuple)):
        return json.dumps(to_jsonable(v), sort_keys=True)
    return str(v)


def write_rows_csv(path, rows, columns=None):
    """Write a list of dicts; nested values are JSON-encoded in their cell."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if columns is None:
        columns = []
        for r in rows:
            columns += [k for k in r if k not in columns]
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(r.get(c, "")) for c in columns])
    return path


def write_jsonl(path, records):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(to_jsonable(rec), sort_keys=True, ensure_ascii=False) + "\n")
    return path


def read_jsonl(path):
    with Path(path).open(encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def write_complex_matrix_csv(path, M):
    """Rows of the matrix with real and imaginary parts interleaved."""
    M = np.atleast_2d(np.asarray(M, dtype=np.complex128))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = [f"{p}{k}" for k in range(M.shape[1]) for p in ("re", "im")]
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in M:
            w.writerow([repr(float(x)) for z in row for x in (z.real, z.imag)])
    return path


def read_complex_matrix_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0::2] + 1j * data[:, 1::2]


def write_sidecar(path, *, config, seeds=None, wall_time=None, extra=None):
    """Metadata next to an output: resolved config, seeds, timing, version, conventions."""
    meta = {
        "artifact_version": __version__,
        "config": config,
        "seed_provenance": seeds or [],
        "wall_time_s": wall_time,
        "conventions": CONVENTIONS,
    }
    if extra:
        meta.update(extra)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(to_jsonable(meta), sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path
