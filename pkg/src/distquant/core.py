"""Domain types for distributed linear-regression quantization, plus
projection, quantization, prediction, and MSE evaluation.

A sensor's codebook stores its reconstruction vectors (codewords), the
projections of those vectors onto the sensor's coefficient slice
(`projected`, strictly increasing), and the calibration cluster sizes
(`weights`). Decision regions are implicit: an observation is mapped to
the codeword whose projected value is nearest to the observation's own
projection, i.e. the interval between midpoints of consecutive
projected values, with boundary ties going to the lower index.

All types are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class DimensionError(ValueError):
    """Vector/matrix dimensions inconsistent with the model or partition."""


class InvalidCodebookError(ValueError):
    """Codebook violates a structural invariant."""


def _frozen_array(a, dtype=float, ndim=None, name="array"):
    arr = np.array(a, dtype=dtype)
    if ndim is not None and arr.ndim != ndim:
        raise DimensionError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FeaturePartition:
    """Which feature indices each sensor observes (disjoint index sets)."""

    total_dim: int
    sensor_sets: tuple

    def __post_init__(self):
        d = int(self.total_dim)
        if d < 1:
            raise ValueError(f"total_dim must be positive, got {d}")
        sets = tuple(tuple(sorted(int(r) for r in s)) for s in self.sensor_sets)
        if not sets:
            raise ValueError("at least one sensor set is required")
        seen = set()
        for i, s in enumerate(sets):
            if not s:
                raise ValueError(f"sensor {i} observes no features")
            if len(set(s)) != len(s):
                raise ValueError(f"sensor {i} has duplicate feature indices")
            if s[0] < 0 or s[-1] >= d:
                raise ValueError(f"sensor {i} has feature indices outside [0, {d})")
            if seen & set(s):
                raise ValueError(f"sensor {i} overlaps another sensor's features")
            seen |= set(s)
        object.__setattr__(self, "total_dim", d)
        object.__setattr__(self, "sensor_sets", sets)

    @property
    def m(self) -> int:
        return len(self.sensor_sets)

    @property
    def dims(self) -> tuple:
        return tuple(len(s) for s in self.sensor_sets)

    def indices(self, i: int) -> np.ndarray:
        return np.asarray(self.sensor_sets[i], dtype=np.int64)


@dataclass(frozen=True)
class LinearModel:
    """Pretrained linear regressor: prediction is the inner product with beta."""

    dim: int
    beta: np.ndarray

    def __post_init__(self):
        d = int(self.dim)
        if d < 1:
            raise ValueError(f"dim must be positive, got {d}")
        beta = _frozen_array(self.beta, ndim=1, name="beta")
        if beta.size != d:
            raise DimensionError(f"beta has {beta.size} entries, expected {d}")
        if not np.all(np.isfinite(beta)):
            raise ValueError("beta entries must be finite")
        object.__setattr__(self, "dim", d)
        object.__setattr__(self, "beta", beta)

    def beta_slice(self, partition: FeaturePartition, i: int) -> np.ndarray:
        return self.beta[partition.indices(i)]


@dataclass(frozen=True)
class CalibrationSet:
    """Unlabeled sample of regressor rows used to design the quantizers."""

    X: np.ndarray

    def __post_init__(self):
        X = _frozen_array(self.X, ndim=2, name="X")
        if X.shape[0] < 1:
            raise ValueError("calibration set must contain at least one row")
        if not np.all(np.isfinite(X)):
            raise ValueError("calibration data must be finite")
        object.__setattr__(self, "X", X)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class SensorCodebook:
    """One sensor's quantizer: codewords, their projections, cluster sizes."""

    sensor_id: int
    bits: int
    codewords: np.ndarray
    projected: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        sid = int(self.sensor_id)
        bits = int(self.bits)
        if sid < 0:
            raise ValueError(f"sensor_id must be non-negative, got {sid}")
        if bits < 1:
            raise ValueError(f"bits must be >= 1, got {bits}")
        cw = _frozen_array(self.codewords, ndim=2, name="codewords")
        h = _frozen_array(self.projected, ndim=1, name="projected")
        w = _frozen_array(self.weights, dtype=np.int64, ndim=1, name="weights")
        k = cw.shape[0]
        if k < 1:
            raise InvalidCodebookError("codebook must contain at least one codeword")
        if bits <= 60 and k > 2 ** bits:
            raise InvalidCodebookError(f"{k} codewords exceed the 2^{bits} budget")
        if h.size != k or w.size != k:
            raise InvalidCodebookError("codewords, projected and weights must have equal length")
        if not (np.all(np.isfinite(cw)) and np.all(np.isfinite(h))):
            raise InvalidCodebookError("codebook entries must be finite")
        if np.any(w < 1):
            raise InvalidCodebookError("weights must be positive integers")
        if k > 1 and not np.all(np.diff(h) > 0):
            raise InvalidCodebookError("projected values must be strictly increasing")
        object.__setattr__(self, "sensor_id", sid)
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "codewords", cw)
        object.__setattr__(self, "projected", h)
        object.__setattr__(self, "weights", w)

    @property
    def k_eff(self) -> int:
        return self.codewords.shape[0]

    @property
    def dim(self) -> int:
        return self.codewords.shape[1]

    @property
    def midpoints(self) -> np.ndarray:
        return (self.projected[:-1] + self.projected[1:]) / 2.0


@dataclass(frozen=True)
class DistributedQuantizer:
    """All sensor codebooks bound to one model and feature partition."""

    model: LinearModel
    partition: FeaturePartition
    codebooks: tuple

    def __post_init__(self):
        cbs = tuple(self.codebooks)
        if len(cbs) != self.partition.m:
            raise ValueError(f"expected {self.partition.m} codebooks, got {len(cbs)}")
        if self.model.dim != self.partition.total_dim:
            raise DimensionError("model dimension does not match partition total_dim")
        for i, cb in enumerate(cbs):
            d_i = len(self.partition.sensor_sets[i])
            if cb.dim != d_i:
                raise DimensionError(
                    f"codebook {i} has codeword dimension {cb.dim}, sensor observes {d_i}")
            bs = self.model.beta_slice(self.partition, i)
            recomputed = cb.codewords @ bs
            tol = 1e-9 * np.maximum(1.0, np.abs(cb.projected))
            if np.any(np.abs(recomputed - cb.projected) > tol):
                raise InvalidCodebookError(
                    f"codebook {i}: projected values inconsistent with codewords")
        object.__setattr__(self, "codebooks", cbs)

    @property
    def m(self) -> int:
        return self.partition.m


def project(x_slice, beta_slice) -> float:
    """Sensor's contribution to the prediction: <x_slice, beta_slice>."""
    x = np.asarray(x_slice, dtype=float).ravel()
    b = np.asarray(beta_slice, dtype=float).ravel()
    if x.size != b.size:
        raise DimensionError(f"length mismatch: x has {x.size}, beta has {b.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(b))):
        raise ValueError("inputs must be finite")
    return float(x @ b)


def quantize_values(codebook: SensorCodebook, proj) -> np.ndarray:
    """Codeword indices for already-projected values (vectorized).

    Nearest projected value, implemented via midpoint thresholds;
    a value exactly on a midpoint goes to the lower index.
    """
    if codebook.k_eff == 0:
        raise InvalidCodebookError("empty codebook")
    return np.searchsorted(codebook.midpoints, np.asarray(proj, dtype=float), side="left")


def quantize(codebook: SensorCodebook, beta_slice, x_slice):
    """Quantize one observation; returns (index, codeword)."""
    x = np.asarray(x_slice, dtype=float).ravel()
    if x.size != codebook.dim:
        raise DimensionError(
            f"observation has dimension {x.size}, codewords have {codebook.dim}")
    p = project(x, beta_slice)
    k = int(quantize_values(codebook, p))
    return k, codebook.codewords[k]


def predict(q: DistributedQuantizer, x):
    """Fusion-center prediction from quantized sensor observations.

    Returns (y_tilde, per-sensor codeword indices); y_tilde is the sum
    of the selected projected values.
    """
    x = np.asarray(x, dtype=float).ravel()
    if x.size != q.model.dim:
        raise DimensionError(f"input has length {x.size}, expected {q.model.dim}")
    if not np.all(np.isfinite(x)):
        raise ValueError("input must be finite")
    indices = []
    y = 0.0
    for i, cb in enumerate(q.codebooks):
        k, _ = quantize(cb, q.model.beta_slice(q.partition, i), x[q.partition.indices(i)])
        indices.append(k)
        y += float(cb.projected[k])
    return y, indices


def _predict_batch(q: DistributedQuantizer, X: np.ndarray):
    """(y_tilde, indices matrix) for every row of X."""
    n = X.shape[0]
    idx = np.empty((n, q.m), dtype=np.int64)
    y = np.zeros(n)
    for i, cb in enumerate(q.codebooks):
        proj = X[:, q.partition.indices(i)] @ q.model.beta_slice(q.partition, i)
        ki = quantize_values(cb, proj)
        idx[:, i] = ki
        y += cb.projected[ki]
    return y, idx


def evaluate_mse(q: DistributedQuantizer, test_X):
    """Mean squared error of quantized vs. exact predictions.

    Returns (mse, stderr); stderr is the sample standard deviation of
    the squared errors divided by sqrt(N).
    """
    X = np.asarray(test_X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("test set must be a non-empty 2-D array")
    if X.shape[1] != q.model.dim:
        raise DimensionError(f"test rows have {X.shape[1]} columns, expected {q.model.dim}")
    y_hat = X @ q.model.beta
    y_tilde, _ = _predict_batch(q, X)
    sq = (y_tilde - y_hat) ** 2
    mse = float(np.mean(sq))
    n = sq.size
    stderr = float(np.std(sq, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return mse, stderr


def assumption1_diagnostic(q: DistributedQuantizer, X) -> np.ndarray:
    """Per-sensor norm of the mean quantization-error vector on X.

    Small values support the zero-mean quantization-error approximation
    on this data; there is no canonical acceptance threshold.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("X must be a non-empty 2-D array")
    if X.shape[1] != q.model.dim:
        raise DimensionError(f"rows have {X.shape[1]} columns, expected {q.model.dim}")
    out = np.empty(q.m)
    for i, cb in enumerate(q.codebooks):
        sl = X[:, q.partition.indices(i)]
        proj = sl @ q.model.beta_slice(q.partition, i)
        ki = quantize_values(cb, proj)
        mean_err = np.mean(cb.codewords[ki] - sl, axis=0)
        out[i] = float(np.linalg.norm(mean_err))
    return out
