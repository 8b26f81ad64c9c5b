"""Trainers for the distributed quantizer.

train_distributed designs each sensor's codebook from the exact 1-D
K-Means clustering of the projected calibration data; codewords are the
per-cluster means of the raw calibration slices, so their projections
coincide with the 1-D cluster centers by linearity.

train_agnostic is the model-agnostic baseline: Lloyd K-Means on the raw
sensor slices, ignoring the model; projections and weights are derived
afterwards so the codebook plugs into the same quantize/predict path.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .clustering import kmeans1d_weighted, weighted_lloyd
from .core import (CalibrationSet, DistributedQuantizer, FeaturePartition,
                   LinearModel, SensorCodebook)

MAX_BITS = 30
MERGE_TOL = 1e-12  # absolute gap below which projected centroids merge


@dataclass(frozen=True)
class TrainConfig:
    bits_per_sensor: tuple
    baseline_seed: int = 0
    baseline_restarts: int = 8

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits_per_sensor)
        if not bits:
            raise ValueError("bits_per_sensor must be non-empty")
        for b in bits:
            if b < 1:
                raise ValueError(f"bits must be >= 1, got {b}")
            if b > MAX_BITS:
                raise ValueError(f"bits {b} exceeds the supported maximum {MAX_BITS}")
        if int(self.baseline_restarts) < 1:
            raise ValueError("baseline_restarts must be >= 1")
        object.__setattr__(self, "bits_per_sensor", bits)
        object.__setattr__(self, "baseline_seed", int(self.baseline_seed))
        object.__setattr__(self, "baseline_restarts", int(self.baseline_restarts))


def _check_consistent(cal: CalibrationSet, model: LinearModel,
                      partition: FeaturePartition, cfg: TrainConfig):
    if cal.d != model.dim or model.dim != partition.total_dim:
        raise ValueError(
            f"inconsistent dimensions: data d={cal.d}, model d={model.dim}, "
            f"partition d={partition.total_dim}")
    if len(cfg.bits_per_sensor) != partition.m:
        raise ValueError(
            f"bits_per_sensor has {len(cfg.bits_per_sensor)} entries for "
            f"{partition.m} sensors")


def _merge_duplicate_projections(codewords, projected, weights):
    """Merge codewords whose projected values coincide within MERGE_TOL.

    Inputs must be sorted by projected value. Merged codeword/projection
    are weight-weighted means; repeats until strictly increasing.
    """
    cw = np.asarray(codewords, dtype=float)
    h = np.asarray(projected, dtype=float)
    w = np.asarray(weights, dtype=np.int64)
    while h.size > 1 and np.any(np.diff(h) <= MERGE_TOL):
        j = int(np.flatnonzero(np.diff(h) <= MERGE_TOL)[0])
        wj = w[j] + w[j + 1]
        merged_cw = (w[j] * cw[j] + w[j + 1] * cw[j + 1]) / wj
        merged_h = (w[j] * h[j] + w[j + 1] * h[j + 1]) / wj
        cw = np.concatenate([cw[:j], merged_cw[None, :], cw[j + 2:]])
        h = np.concatenate([h[:j], [merged_h], h[j + 2:]])
        w = np.concatenate([w[:j], [wj], w[j + 2:]])
    return cw, h, w


def _train_sensor_distributed(slices, beta_slice, sensor_id, bits):
    proj = slices @ beta_slice
    res = kmeans1d_weighted(proj, np.ones(proj.size), 2 ** bits)
    k = res.k
    counts = np.bincount(res.assignment, minlength=k)
    codewords = np.zeros((k, slices.shape[1]))
    np.add.at(codewords, res.assignment, slices)
    codewords /= counts[:, None]
    h = codewords @ beta_slice
    # projection of the cluster-mean codeword equals the 1-D center
    tol = 1e-9 * np.maximum(1.0, np.abs(res.centers))
    if np.any(np.abs(h - res.centers) > tol):
        raise AssertionError("projected codewords diverge from 1-D cluster centers")
    codewords, h, counts = _merge_duplicate_projections(codewords, h, counts)
    return SensorCodebook(sensor_id=sensor_id, bits=bits, codewords=codewords,
                          projected=h, weights=counts)


def _sensor_seed(base_seed: int, sensor_id: int) -> int:
    ss = np.random.SeedSequence([base_seed % (2 ** 63), sensor_id])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _train_sensor_agnostic(slices, beta_slice, sensor_id, bits, seed, restarts):
    res = weighted_lloyd(slices, np.ones(slices.shape[0]), 2 ** bits,
                         seed=seed, restarts=restarts)
    counts = np.bincount(res.assignment, minlength=res.centers.shape[0])
    keep = counts > 0
    codewords = res.centers[keep]
    counts = counts[keep]
    h = codewords @ beta_slice
    order = np.argsort(h, kind="stable")
    codewords, h, counts = _merge_duplicate_projections(
        codewords[order], h[order], counts[order])
    return SensorCodebook(sensor_id=sensor_id, bits=bits, codewords=codewords,
                          projected=h, weights=counts)


def _run_per_sensor(tasks, threads: int):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda f: f(), tasks))
    return [f() for f in tasks]


def train_distributed(cal: CalibrationSet, model: LinearModel,
                      partition: FeaturePartition, cfg: TrainConfig,
                      threads: int = 1) -> DistributedQuantizer:
    """Model-aware trainer: exact 1-D K-Means on projected calibration data.

    Fully deterministic; sensors are trained independently.
    """
    _check_consistent(cal, model, partition, cfg)
    tasks = []
    for i in range(partition.m):
        sl = cal.X[:, partition.indices(i)]
        bs = model.beta_slice(partition, i)
        b = cfg.bits_per_sensor[i]
        tasks.append(lambda sl=sl, bs=bs, i=i, b=b: _train_sensor_distributed(sl, bs, i, b))
    cbs = _run_per_sensor(tasks, threads)
    return DistributedQuantizer(model=model, partition=partition, codebooks=tuple(cbs))


def train_agnostic(cal: CalibrationSet, partition: FeaturePartition,
                   model: LinearModel, cfg: TrainConfig,
                   threads: int = 1) -> DistributedQuantizer:
    """Baseline trainer: Lloyd K-Means on raw sensor slices, no model use.

    Projections are attached afterwards so the result is usable by the
    shared quantize/predict path.
    """
    _check_consistent(cal, model, partition, cfg)
    tasks = []
    for i in range(partition.m):
        sl = cal.X[:, partition.indices(i)]
        bs = model.beta_slice(partition, i)
        b = cfg.bits_per_sensor[i]
        seed = _sensor_seed(cfg.baseline_seed, i)
        tasks.append(lambda sl=sl, bs=bs, i=i, b=b, seed=seed: _train_sensor_agnostic(
            sl, bs, i, b, seed, cfg.baseline_restarts))
    cbs = _run_per_sensor(tasks, threads)
    return DistributedQuantizer(model=model, partition=partition, codebooks=tuple(cbs))


def projected_distortion(q: DistributedQuantizer, X) -> np.ndarray:
    """Per-sensor sum of squared gaps between projected data and the
    assigned projected codeword (the surrogate training objective)."""
    from .core import quantize_values

    X = np.asarray(X, dtype=float)
    out = np.empty(q.m)
    for i, cb in enumerate(q.codebooks):
        proj = X[:, q.partition.indices(i)] @ q.model.beta_slice(q.partition, i)
        ki = quantize_values(cb, proj)
        out[i] = float(np.sum((cb.projected[ki] - proj) ** 2))
    return out
