"""File formats: model/partition/codebook/schedule JSON, data CSV.

Floats are written with 17 significant digits so every double survives
a round trip exactly.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .adaptive import RateSchedule
from .core import (CalibrationSet, DistributedQuantizer, FeaturePartition,
                   LinearModel, SensorCodebook)
from .experiments import SyntheticSpec

FLOAT_FMT = ".17g"


def _enc(o) -> str:
    if o is None:
        return "null"
    if isinstance(o, bool) or isinstance(o, np.bool_):
        return "true" if o else "false"
    if isinstance(o, (int, np.integer)):
        return str(int(o))
    if isinstance(o, (float, np.floating)):
        f = float(o)
        if not math.isfinite(f):
            raise ValueError("cannot serialize non-finite float")
        return format(f, FLOAT_FMT)
    if isinstance(o, str):
        return json.dumps(o)
    if isinstance(o, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_enc(x) for x in o) + "]"
    if isinstance(o, dict):
        return "{" + ", ".join(json.dumps(str(k)) + ": " + _enc(v) for k, v in o.items()) + "}"
    raise TypeError(f"cannot serialize {type(o).__name__}")


def dumps(obj) -> str:
    return _enc(obj)


def _check_keys(obj: dict, required, what: str):
    missing = set(required) - set(obj)
    extra = set(obj) - set(required)
    if missing:
        raise ValueError(f"{what}: missing keys {sorted(missing)}")
    if extra:
        raise ValueError(f"{what}: unknown keys {sorted(extra)}")


# --- model / partition ---

def model_to_dict(model: LinearModel) -> dict:
    return {"dim": model.dim, "beta": model.beta}


def model_from_dict(obj: dict) -> LinearModel:
    _check_keys(obj, {"dim", "beta"}, "model")
    return LinearModel(dim=obj["dim"], beta=np.asarray(obj["beta"], dtype=float))


def partition_to_dict(p: FeaturePartition) -> dict:
    return {"total_dim": p.total_dim, "sensors": [list(s) for s in p.sensor_sets]}


def partition_from_dict(obj: dict) -> FeaturePartition:
    _check_keys(obj, {"total_dim", "sensors"}, "partition")
    return FeaturePartition(total_dim=obj["total_dim"],
                            sensor_sets=tuple(tuple(s) for s in obj["sensors"]))


# --- codebooks ---

def codebook_to_dict(cb: SensorCodebook) -> dict:
    return {
        "sensor_id": cb.sensor_id,
        "bits": cb.bits,
        "codewords": cb.codewords,
        "projected": cb.projected,
        "weights": cb.weights,
    }


def codebook_from_dict(obj: dict) -> SensorCodebook:
    _check_keys(obj, {"sensor_id", "bits", "codewords", "projected", "weights"}, "codebook")
    return SensorCodebook(
        sensor_id=obj["sensor_id"],
        bits=obj["bits"],
        codewords=np.asarray(obj["codewords"], dtype=float),
        projected=np.asarray(obj["projected"], dtype=float),
        weights=np.asarray(obj["weights"], dtype=np.int64),
    )


def quantizer_to_dict(q: DistributedQuantizer) -> dict:
    return {
        "model": model_to_dict(q.model),
        "partition": partition_to_dict(q.partition),
        "codebooks": [codebook_to_dict(cb) for cb in q.codebooks],
    }


def quantizer_from_dict(obj: dict) -> DistributedQuantizer:
    _check_keys(obj, {"model", "partition", "codebooks"}, "quantizer")
    return DistributedQuantizer(
        model=model_from_dict(obj["model"]),
        partition=partition_from_dict(obj["partition"]),
        codebooks=tuple(codebook_from_dict(c) for c in obj["codebooks"]),
    )


def quantizer_dumps(q: DistributedQuantizer) -> str:
    return dumps(quantizer_to_dict(q))


# --- rate schedules ---

def schedule_to_dict(s: RateSchedule) -> dict:
    return {"events": [{"t": t, "bits": list(b)} for t, b in s.events]}


def schedule_from_dict(obj: dict) -> RateSchedule:
    _check_keys(obj, {"events"}, "schedule")
    events = []
    for e in obj["events"]:
        _check_keys(e, {"t", "bits"}, "schedule event")
        events.append((int(e["t"]), tuple(int(b) for b in e["bits"])))
    return RateSchedule(events=tuple(events))


# --- synthetic experiment specs ---

_SPEC_KEYS = ("seed", "n_cal", "n_test", "d", "m", "features_per_sensor", "bit_range")


def synthetic_spec_to_dict(spec: SyntheticSpec) -> dict:
    return {k: (list(getattr(spec, k)) if k == "bit_range" else getattr(spec, k))
            for k in _SPEC_KEYS}


def synthetic_spec_from_dict(obj: dict) -> SyntheticSpec:
    _check_keys(obj, _SPEC_KEYS, "synthetic spec")
    return SyntheticSpec(**{k: (tuple(obj[k]) if k == "bit_range" else obj[k])
                            for k in _SPEC_KEYS})


# --- file helpers ---

def save_json(path, obj):
    with open(path, "w") as f:
        f.write(dumps(obj))
        f.write("\n")


def load_json(path) -> dict:
    with open(path) as f:
        return json.load(f)


def save_quantizer(path, q: DistributedQuantizer):
    save_json(path, quantizer_to_dict(q))


def load_quantizer(path) -> DistributedQuantizer:
    return quantizer_from_dict(load_json(path))


def save_matrix_csv(path, X):
    np.savetxt(path, np.asarray(X, dtype=float), fmt=f"%{FLOAT_FMT}", delimiter=",")


def load_matrix_csv(path) -> np.ndarray:
    X = np.loadtxt(path, delimiter=",", dtype=float, ndmin=2)
    return X


def load_calibration_csv(path) -> CalibrationSet:
    return CalibrationSet(X=load_matrix_csv(path))
