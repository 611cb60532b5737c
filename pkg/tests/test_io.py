import json

import numpy as np
import pytest

from specfact import io as sio
from specfact.errors import DocumentError
from specfact.ident import TimeSeries, simulate_lowrank_process
from specfact.rational import RationalMatrix

from helpers import continuous_realization, continuous_Wo, generating_Wo


def test_dumps_is_deterministic_and_round_trips():
    W = continuous_Wo()
    a = sio.dumps({"W": W, "x": np.array([1.5, 2.0]), "c": 1 + 2j, "flag": np.bool_(True)})
    b = sio.dumps({"flag": True, "c": 1 + 2j, "x": [1.5, 2.0], "W": W})
    assert a == b
    doc = json.loads(a)
    assert doc["c"] == [1.0, 2.0]
    W2 = sio.read_matrix(doc["W"])
    for e, f in zip(W, W2):
        np.testing.assert_array_equal(e.num.coeffs, f.num.coeffs)


def test_realization_serializes():
    R = continuous_realization()
    doc = json.loads(sio.dumps(R))
    assert doc["n_u"] == 3 and len(doc["A"]) == 5


def test_unserializable_object():
    with pytest.raises(TypeError):
        sio.dumps({"f": object()})


def test_read_json_errors(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(DocumentError, match="invalid JSON"):
        sio.read_json(p)
    with pytest.raises(DocumentError, match="cannot read"):
        sio.read_json(tmp_path / "missing.json")


def test_csv_round_trip_is_exact(tmp_path):
    ts = simulate_lowrank_process(generating_Wo(), 30, seed=2)
    p = tmp_path / "y.csv"
    sio.write_csv(ts, p)
    back = sio.read_csv(p)
    assert back.m == 1 and back.p == 2
    np.testing.assert_array_equal(back.data, ts.data)
    assert p.read_text().splitlines()[0] == "y1_1,y2_1,y2_2"


def test_csv_errors(tmp_path):
    p = tmp_path / "y.csv"
    p.write_text("y1_1,y2_1\n1.0\n")
    with pytest.raises(DocumentError, match="header"):
        sio.read_csv(p)
    p.write_text("y1_1,y2_1\n1.0,abc\n")
    with pytest.raises(DocumentError, match="non-numeric"):
        sio.read_csv(p)
    p.write_text("y1_1\n")
    with pytest.raises(DocumentError):
        sio.read_csv(p)


def test_csv_text_without_path():
    ts = TimeSeries(np.array([[0.1, 0.2]]), 1)
    assert sio.write_csv(ts) == "y1_1,y2_1\n0.1,0.2\n"


def test_matrix_document_path_in_error():
    doc = RationalMatrix.identity(2).to_dict()
    doc["entries"][0][1]["num"] = "x"
    with pytest.raises(DocumentError, match=r"entries\[0\]\[1\]"):
        sio.read_matrix(doc)
