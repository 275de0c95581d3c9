import json

import numpy as np
import pytest

from affine2f import io
from affine2f.errors import ParameterError
from affine2f.model import State
from affine2f.sampler import PathGrid, simulate_joint


@pytest.fixture
def ensemble(cir_params):
    return simulate_joint(3, State(1.0, 0.0), PathGrid(1.0, 5), 3, "exact", cir_params)


def test_csv_round_trip_is_lossless(ensemble, tmp_path):
    path = tmp_path / "e.csv"
    io.write_ensemble_csv(ensemble, path)
    assert path.read_text().splitlines()[0] == "t,path_0_y,path_0_x,path_1_y,path_1_x,path_2_y,path_2_x"
    t, y, x = io.read_ensemble_csv(path)
    assert np.array_equal(t, ensemble.grid.times)
    assert np.array_equal(y, ensemble.y) and np.array_equal(x, ensemble.x)


def test_csv_rejects_foreign_file(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ParameterError):
        io.read_ensemble_csv(path)


def test_npz_round_trip(ensemble, tmp_path):
    path = tmp_path / "e.npz"
    io.write_ensemble_npz(ensemble, path, "abc")
    back = io.read_ensemble_npz(path)
    assert np.array_equal(back.y, ensemble.y) and np.array_equal(back.x, ensemble.x)
    assert back.params == ensemble.params and back.scheme == "exact" and back.master_seed == 3


def test_json_handles_arrays_and_complex():
    text = io.dump_json({"v": np.arange(3.0), "z": 1 + 2j, "k": np.int64(4)})
    back = json.loads(text)
    assert back == {"schema_version": io.SCHEMA_VERSION, "v": [0.0, 1.0, 2.0], "z": {"re": 1.0, "im": 2.0}, "k": 4}
    x = 0.1 + 0.2
    assert json.loads(io.dump_json({"x": x}))["x"] == x


def test_config_hash_is_order_independent():
    assert io.config_hash({"a": 1, "b": [1, 2]}) == io.config_hash({"b": [1, 2], "a": 1})
    assert io.config_hash({"a": 1}) != io.config_hash({"a": 2})
    assert len(io.config_hash({})) == 16


def test_parse_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# comment\na = 1.5\n\nn-paths = 10  # trailing\n")
    assert io.parse_config_file(path) == {"a": "1.5", "n_paths": "10"}
    path.write_text("oops\n")
    with pytest.raises(ParameterError):
        io.parse_config_file(path)
