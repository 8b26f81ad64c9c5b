import numpy as np
import pytest

from distquant.adaptive import RateSchedule, adapt
from distquant.core import CalibrationSet, FeaturePartition, LinearModel, evaluate_mse
from distquant.io import quantizer_dumps
from distquant.scheme import TrainConfig, train_distributed
from distquant.simnet import (MalformedFrameError, MessageFrame, decode_index,
                              encode_index, run_session)


class TestCodec:
    def test_two_bit_example(self):
        assert encode_index(3, 2) == b"\xc0"

    def test_zero_index(self):
        for bits in (1, 7, 8, 9, 16, 30):
            assert encode_index(0, bits) == b"\x00" * ((bits + 7) // 8)

    def test_ten_bit_example(self):
        assert encode_index(513, 10) == b"\x80\x40"

    def test_roundtrip_examples(self):
        for idx, bits in ((3, 2), (0, 5), (513, 10)):
            assert decode_index(encode_index(idx, bits), bits) == idx

    def test_roundtrip_exhaustive_small(self):
        for bits in range(1, 11):
            for idx in range(2 ** bits):
                assert decode_index(encode_index(idx, bits), bits) == idx

    def test_roundtrip_sampled_wide(self):
        rng = np.random.default_rng(0)
        for bits in range(11, 17):
            for idx in rng.integers(0, 2 ** bits, 200):
                idx = int(idx)
                assert decode_index(encode_index(idx, bits), bits) == idx

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            encode_index(4, 2)
        with pytest.raises(ValueError):
            encode_index(-1, 2)
        with pytest.raises(ValueError):
            encode_index(0, 0)
        with pytest.raises(ValueError):
            encode_index(0, 31)

    def test_nonzero_pad_rejected(self):
        with pytest.raises(MalformedFrameError):
            decode_index(b"\xc1", 2)

    def test_wrong_length_rejected(self):
        with pytest.raises(MalformedFrameError):
            decode_index(b"\x00\x00", 2)


class TestMessageFrame:
    def test_wire_layout(self):
        f = MessageFrame(sensor_id=0x0102, time_step=0x03040506, payload_bits=2,
                         payload=b"\xc0")
        assert f.to_bytes() == b"\x01\x02\x03\x04\x05\x06\x02\xc0"

    def test_roundtrip(self):
        f = MessageFrame(sensor_id=7, time_step=99, payload_bits=10, payload=b"\x80\x40")
        g = MessageFrame.from_bytes(f.to_bytes())
        assert g == f

    def test_inconsistent_payload_rejected(self):
        with pytest.raises(MalformedFrameError):
            MessageFrame(sensor_id=0, time_step=0, payload_bits=10, payload=b"\x00")
        with pytest.raises(MalformedFrameError):
            MessageFrame.from_bytes(b"\x00\x01")


@pytest.fixture(scope="module")
def trained():
    rng = np.random.default_rng(6)
    X = rng.standard_normal((500, 6))
    model = LinearModel(6, rng.standard_normal(6))
    part = FeaturePartition(6, ((0, 1), (2, 3), (4, 5)))
    q = train_distributed(CalibrationSet(X), model, part,
                          TrainConfig(bits_per_sensor=(6, 6, 6)))
    stream = rng.standard_normal((120, 6))
    return q, stream


class TestRunSession:
    def test_constant_full_rate_matches_offline_mse(self, trained):
        q, stream = trained
        tr = run_session(q, RateSchedule(events=((0, (6, 6, 6)),)), stream)
        mse, _ = evaluate_mse(q, stream)
        assert tr.mse == pytest.approx(mse, rel=1e-12)
        assert len(tr.records) == stream.shape[0]
        assert tr.records[0].bits_per_sensor == (6, 6, 6)

    def test_bit_accounting_drop(self, trained):
        q, stream = trained
        tr = run_session(q, RateSchedule(events=((0, (6, 6, 6)), (50, (1, 1, 1)))), stream)
        assert sum(tr.records[49].bits_per_sensor) == 18
        assert sum(tr.records[50].bits_per_sensor) == 3
        expected_cum = 50 * 18 + (120 - 50) * 3
        assert tr.records[-1].cumulative_bits == expected_cum

    def test_round_trip_restores_codebooks(self, trained):
        q, stream = trained
        tr = run_session(q, RateSchedule(events=((0, (6, 6, 6)), (30, (3, 3, 3)),
                                                 (60, (6, 6, 6)))), stream)
        # post-restoration steps must match the pre-drop quantizer exactly
        pre = [r for r in tr.records if r.step < 30]
        post = [r for r in tr.records if r.step >= 60]
        from distquant.core import predict
        for r in pre + post:
            y, idx = predict(q, stream[r.step])
            assert r.y_tilde == pytest.approx(y, abs=1e-12)
            assert list(r.indices) == idx

    def test_clamp_warning(self, trained):
        q, stream = trained
        tr = run_session(q, RateSchedule(events=((0, (9, 6, 6)),)), stream[:10])
        assert tr.warnings and "clamped" in tr.warnings[0]
        assert tr.records[0].bits_per_sensor == (6, 6, 6)

    def test_transcript_errors_recomputable(self, trained):
        q, stream = trained
        sched = RateSchedule(events=((0, (6, 6, 6)), (40, (2, 2, 2))))
        tr = run_session(q, sched, stream)
        q2 = adapt(q, q, (2, 2, 2))
        beta = q.model.beta
        for r in tr.records:
            active = q if r.step < 40 else q2
            y = sum(float(active.codebooks[i].projected[k])
                    for i, k in enumerate(r.indices))
            assert r.y_tilde == pytest.approx(y, abs=1e-12)
            assert r.sq_err == pytest.approx((y - float(stream[r.step] @ beta)) ** 2,
                                             rel=1e-9, abs=1e-15)

    def test_per_step_mse_consistency(self, trained):
        # transcript MSE equals the mix of the per-segment offline MSEs
        q, stream = trained
        sched = RateSchedule(events=((0, (6, 6, 6)), (60, (2, 2, 2))))
        tr = run_session(q, sched, stream)
        mse_a, _ = evaluate_mse(q, stream[:60])
        mse_b, _ = evaluate_mse(adapt(q, q, (2, 2, 2)), stream[60:])
        assert tr.mse == pytest.approx((60 * mse_a + 60 * mse_b) / 120, rel=1e-12)

    def test_csv_format(self, trained):
        q, stream = trained
        tr = run_session(q, RateSchedule(events=((0, (6, 6, 6)),)), stream[:3])
        lines = tr.to_csv().strip().split("\n")
        assert lines[0] == "step,sensor_bits_total,y_hat,y_tilde,sq_err"
        assert len(lines) == 4
        first = lines[1].split(",")
        assert first[0] == "0" and first[1] == "18"

    def test_schedule_sensor_mismatch(self, trained):
        q, stream = trained
        with pytest.raises(ValueError):
            run_session(q, RateSchedule(events=((0, (6, 6)),)), stream)
