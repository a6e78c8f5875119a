import csv
import json

import numpy as np
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qergodic.io import (
    read_complex_matrix_csv,
    read_jsonl,
    to_jsonable,
    write_complex_matrix_csv,
    write_jsonl,
    write_rows_csv,
    write_sidecar,
)

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(re=arrays(np.float64, (3, 4), elements=finite), im=arrays(np.float64, (3, 4), elements=finite))
def test_complex_matrix_round_trip(tmp_path_factory, re, im):
    p = tmp_path_factory.mktemp("m") / "m.csv"
    M = re + 1j * im
    write_complex_matrix_csv(p, M)
    assert np.array_equal(read_complex_matrix_csv(p), M)


def test_rows_csv_encodes_floats_exactly(tmp_path):
    x = 0.1 + 0.2
    write_rows_csv(tmp_path / "r.csv", [{"a": x, "b": [1, 2]}, {"a": 1.0, "c": "z"}])
    with open(tmp_path / "r.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert float(rows[0]["a"]) == x
    assert json.loads(rows[0]["b"]) == [1, 2] and rows[1]["c"] == "z" and rows[0]["c"] == ""


def test_jsonl_round_trip(tmp_path):
    recs = [{"x": np.arange(3), "z": 1 + 2j, "f": np.float32(0.5), "flag": np.bool_(True)}]
    write_jsonl(tmp_path / "a.jsonl", recs)
    assert read_jsonl(tmp_path / "a.jsonl") == [{"x": [0, 1, 2], "z": [1.0, 2.0], "f": 0.5,
                                                 "flag": True}]


def test_non_finite_become_strings():
    assert to_jsonable([np.inf, np.nan, 1.5]) == ["inf", "nan", 1.5]


def test_sidecar(tmp_path):
    p = write_sidecar(tmp_path / "x.meta.json", config={"a": 1}, seeds=[(0, 1)], wall_time=0.5)
    meta = json.loads(p.read_text())
    assert meta["config"] == {"a": 1} and meta["seed_provenance"] == [[0, 1]]
    assert "artifact_version" in meta and "kappa" in meta["conventions"]
