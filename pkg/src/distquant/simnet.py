"""Simulated sensor-to-fusion-center session with bit-exact framing.

The channel is lossless and zero-delay; only the rate constraint is
modeled. Rate events take effect at the exact step boundary at both
endpoints, each of which independently re-derives its codebooks from
the stored full-rate quantizer (no codebook bits cross the channel).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from . import io as dio
from .adaptive import RateSchedule, adapt
from .core import DistributedQuantizer, quantize_values

MAX_CODEC_BITS = 30


class MalformedFrameError(ValueError):
    """Frame bytes violate the wire format."""


def encode_index(index: int, bits: int) -> bytes:
    """Pack an index into ceil(bits/8) bytes, MSB first, zero-padded."""
    index = int(index)
    bits = int(bits)
    if not 1 <= bits <= MAX_CODEC_BITS:
        raise ValueError(f"bits must be in [1, {MAX_CODEC_BITS}], got {bits}")
    if not 0 <= index < (1 << bits):
        raise ValueError(f"index {index} out of range for {bits} bits")
    nbytes = (bits + 7) // 8
    return (index << (nbytes * 8 - bits)).to_bytes(nbytes, "big")


def decode_index(payload: bytes, bits: int) -> int:
    """Inverse of encode_index; rejects frames with nonzero pad bits."""
    bits = int(bits)
    if not 1 <= bits <= MAX_CODEC_BITS:
        raise ValueError(f"bits must be in [1, {MAX_CODEC_BITS}], got {bits}")
    nbytes = (bits + 7) // 8
    if len(payload) != nbytes:
        raise MalformedFrameError(f"payload has {len(payload)} bytes, expected {nbytes}")
    raw = int.from_bytes(payload, "big")
    pad = nbytes * 8 - bits
    if raw & ((1 << pad) - 1):
        raise MalformedFrameError("nonzero pad bits")
    return raw >> pad


_HEADER = struct.Struct(">HIB")  # sensor_id, time_step, bits


@dataclass(frozen=True)
class MessageFrame:
    sensor_id: int
    time_step: int
    payload_bits: int
    payload: bytes

    def __post_init__(self):
        if not 0 <= self.sensor_id < 2 ** 16:
            raise ValueError("sensor_id must fit in 16 bits")
        if not 0 <= self.time_step < 2 ** 32:
            raise ValueError("time_step must fit in 32 bits")
        if len(self.payload) != (self.payload_bits + 7) // 8:
            raise MalformedFrameError("payload length inconsistent with bit width")

    def to_bytes(self) -> bytes:
        return _HEADER.pack(self.sensor_id, self.time_step, self.payload_bits) + self.payload

    @classmethod
    def from_bytes(cls, data: bytes) -> "MessageFrame":
        if len(data) < _HEADER.size:
            raise MalformedFrameError("frame shorter than header")
        sid, t, bits = _HEADER.unpack_from(data)
        payload = data[_HEADER.size:]
        if len(payload) != (bits + 7) // 8:
            raise MalformedFrameError("payload length inconsistent with header bits field")
        return cls(sensor_id=sid, time_step=t, payload_bits=bits, payload=payload)


@dataclass(frozen=True)
class StepRecord:
    step: int
    y_hat: float
    indices: tuple
    y_tilde: float
    sq_err: float
    bits_per_sensor: tuple
    cumulative_bits: int


@dataclass(frozen=True)
class SessionTranscript:
    records: tuple
    events_applied: tuple  # (step, clamped bits tuple)
    warnings: tuple

    @property
    def mse(self) -> float:
        return float(np.mean([r.sq_err for r in self.records]))

    def to_csv(self) -> str:
        lines = ["step,sensor_bits_total,y_hat,y_tilde,sq_err"]
        for r in self.records:
            lines.append(f"{r.step},{sum(r.bits_per_sensor)},"
                         f"{r.y_hat:.17g},{r.y_tilde:.17g},{r.sq_err:.17g}")
        return "\n".join(lines) + "\n"


def run_session(q_full: DistributedQuantizer, schedule: RateSchedule,
                stream) -> SessionTranscript:
    """Drive the quantized link over an input stream under a rate schedule.

    Each step: apply any pending rate event (sensor and fusion center
    both re-derive their codebooks and must agree bit-for-bit), quantize
    every sensor slice, frame and transmit the indices, decode at the
    fusion center, and log the reconstruction error and bit spend.
    """
    X = np.asarray(stream, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("stream must be a non-empty 2-D array")
    if X.shape[1] != q_full.model.dim:
        raise ValueError(f"stream rows have {X.shape[1]} columns, expected {q_full.model.dim}")
    if schedule.m != q_full.m:
        raise ValueError(f"schedule has {schedule.m} sensors, quantizer has {q_full.m}")

    events = dict(schedule.events)
    max_bits = [cb.bits for cb in q_full.codebooks]
    beta = q_full.model.beta

    sensor_q = fusion_q = None
    active_bits = None
    records = []
    events_applied = []
    warnings = []
    cumulative = 0

    for t in range(X.shape[0]):
        if t in events:
            requested = events[t]
            clamped = tuple(min(b, mb) for b, mb in zip(requested, max_bits))
            for i, (r, c) in enumerate(zip(requested, clamped)):
                if r != c:
                    warnings.append(f"step {t}: sensor {i} requested {r} bits above "
                                    f"trained maximum, clamped to {c}")
            # sensor and fusion endpoints derive the codebooks independently
            sensor_q = adapt(q_full, q_full, clamped)
            fusion_q = adapt(q_full, q_full, clamped)
            if dio.quantizer_dumps(sensor_q) != dio.quantizer_dumps(fusion_q):
                raise AssertionError(f"step {t}: sensor/fusion codebooks diverged")
            active_bits = clamped
            events_applied.append((t, clamped))

        x = X[t]
        y_hat = float(x @ beta)
        indices = []
        y_tilde = 0.0
        for i, cb in enumerate(sensor_q.codebooks):
            proj = float(x[q_full.partition.indices(i)]
                         @ q_full.model.beta_slice(q_full.partition, i))
            k = int(quantize_values(cb, proj))
            frame = MessageFrame(sensor_id=i, time_step=t, payload_bits=active_bits[i],
                                 payload=encode_index(k, active_bits[i]))
            rx = MessageFrame.from_bytes(frame.to_bytes())
            k_rx = decode_index(rx.payload, rx.payload_bits)
            indices.append(k_rx)
            y_tilde += float(fusion_q.codebooks[rx.sensor_id].projected[k_rx])
        cumulative += sum(active_bits)
        records.append(StepRecord(step=t, y_hat=y_hat, indices=tuple(indices),
                                  y_tilde=y_tilde, sq_err=(y_tilde - y_hat) ** 2,
                                  bits_per_sensor=active_bits, cumulative_bits=cumulative))

    return SessionTranscript(records=tuple(records), events_applied=tuple(events_applied),
                             warnings=tuple(warnings))
