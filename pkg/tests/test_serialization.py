import json
import math

import numpy as np
import pytest

from qbetting import quantum_core as qc
from qbetting import serialization as ser
from qbetting.errors import InputError


class TestEncoding:
    def test_infinities(self):
        assert ser.to_jsonable([math.inf, -math.inf, 1.5]) == ["inf", "-inf", 1.5]
        assert ser.load_order("-inf") == -math.inf and ser.load_order(2) == 2.0

    def test_complex_pairs(self):
        out = ser.to_jsonable(np.array([[1, 1j], [-1j, 1]]))
        assert out == [[[1.0, 0.0], [0.0, 1.0]], [[0.0, -1.0], [1.0, 0.0]]]

    def test_real_complex_collapses(self):
        assert ser.to_jsonable(np.eye(2, dtype=complex)) == [[1.0, 0.0], [0.0, 1.0]]

    def test_deterministic(self):
        obj = {"b": 1, "a": [np.float64(0.5), np.inf]}
        assert ser.dumps(obj) == '{"a":[0.5,"inf"],"b":1}'


class TestRoundTrip:
    def test_instance(self):
        e, m, n = qc.random_instance(5)
        e2 = ser.load_ensemble(json.loads(ser.dumps(e)))
        assert np.allclose(e2.states, e.states) and np.allclose(e2.probs, e.probs)
        assert np.allclose(ser.load_povm(json.loads(ser.dumps(m))), m)
        assert np.allclose(ser.load_channel(json.loads(ser.dumps(n))).kraus, n.kraus)

    def test_classical(self):
        j = np.array([[0.4, 0.1], [0.1, 0.4]])
        assert np.array_equal(ser.load_joint(json.loads(ser.dumps(j))), j)

    def test_file_source(self, tmp_path):
        path = tmp_path / "p.json"
        path.write_text("[0.5, 0.5]")
        assert np.allclose(ser.load_pmf(ser.read_json(str(path))), [0.5, 0.5])


class TestErrors:
    def test_bad_json(self):
        with pytest.raises(InputError):
            ser.read_json("[0.5,")

    def test_bad_rank(self):
        with pytest.raises(InputError):
            ser.load_povm([[1, 0], [0, 1]])

    def test_bad_ensemble(self):
        with pytest.raises(InputError):
            ser.load_ensemble([[1, 0], [0, 0]])
