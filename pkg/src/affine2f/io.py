"""Serialization of path ensembles, reports and experiment configs."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import IO, Union

import numpy as np

from .errors import ParameterError
from .sampler import PathEnsemble, PathGrid
from .model import ModelParams

SCHEMA_VERSION = 1
FLOAT_FMT = "%.17g"


def config_hash(config: dict) -> str:
    """Stable short hash of a resolved configuration."""
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def ensemble_header(n_paths: int) -> list:
    cols = ["t"]
    for k in range(n_paths):
        cols += [f"path_{k}_y", f"path_{k}_x"]
    return cols


def write_ensemble_csv(ens: PathEnsemble, dest: Union[str, Path, IO]) -> None:
    """One row per grid time; columns t, path_<k>_y, path_<k>_x."""
    n = ens.n_paths
    data = np.empty((ens.grid.n_steps + 1, 1 + 2 * n))
    data[:, 0] = ens.grid.times
    data[:, 1::2] = ens.y.T
    data[:, 2::2] = ens.x.T
    np.savetxt(dest, data, delimiter=",", header=",".join(ensemble_header(n)), comments="", fmt=FLOAT_FMT)


def read_ensemble_csv(src) -> tuple:
    """Returns (times, y, x) with y and x shaped (n_paths, n_times)."""
    with open(src) as fh:
        header = fh.readline().strip().split(",")
    if header[0] != "t" or (len(header) - 1) % 2:
        raise ParameterError("not an ensemble CSV")
    data = np.loadtxt(src, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1::2].T, data[:, 2::2].T


def write_ensemble_npz(ens: PathEnsemble, dest, config_digest: str = "") -> None:
    """Compressed binary dump: arrays t, y, x plus scalar metadata."""
    np.savez_compressed(
        dest,
        schema_version=SCHEMA_VERSION,
        t=ens.grid.times,
        y=ens.y,
        x=ens.x,
        params=np.array([ens.params.a, ens.params.b, ens.params.m, ens.params.theta, ens.params.alpha]),
        scheme=ens.scheme,
        master_seed=ens.master_seed,
        config_hash=config_digest,
    )


def read_ensemble_npz(src) -> PathEnsemble:
    with np.load(src) as z:
        t = z["t"]
        params = ModelParams(*z["params"].tolist())
        grid = PathGrid(float(t[-1]), len(t) - 1) if len(t) > 1 else None
        return PathEnsemble(grid, z["y"], z["x"], params, str(z["scheme"]), int(z["master_seed"]))


def dump_json(payload: dict, dest=None) -> str:
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    text = json.dumps(payload, indent=2, default=_default)
    if dest is not None:
        Path(dest).write_text(text + "\n")
    return text


def _default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def parse_config_file(path) -> dict:
    """Plain ``key = value`` lines; ``#`` starts a comment. Values stay strings."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if not key:
            raise ParameterError(f"{path}:{lineno}: empty key")
        out[key] = value
    return out
