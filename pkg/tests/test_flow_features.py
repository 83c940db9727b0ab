import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biflow.flow import (
    CSV_COLUMNS,
    FEATURE_COLUMNS,
    KEY_COLUMNS,
    TRAILER_COLUMNS,
)
from biflow.engine import MeterConfig

from conftest import close_enough, decode_all, meter_frames
from oracle import batch_features, partition
from packetcraft import tcp_frame, udp_frame
from traffic import random_trace

NO_EXPIRY = MeterConfig(tcp_expiry_enabled=False)


def test_column_layout_fixed():
    assert len(FEATURE_COLUMNS) == 41
    assert len(CSV_COLUMNS) == 50
    assert CSV_COLUMNS == KEY_COLUMNS + FEATURE_COLUMNS + TRAILER_COLUMNS


def test_single_packet_flow():
    frames = [udp_frame(1_000, "10.0.0.1", "10.0.0.2", 5000, 53, b"abcd")]
    (flow,) = meter_frames(frames)
    size = 20 + 8 + 4
    assert flow.bidirectional_min_ps == size
    assert flow.bidirectional_max_ps == size
    assert flow.bidirectional_mean_ps == size
    assert flow.bidirectional_stddev_ps == 0.0
    assert flow.bidirectional_mean_piat_ms == 0.0  # no IAT sample
    assert flow.bidirectional_duration_ms == 0
    assert flow.src2dst_packets == 1 and flow.dst2src_packets == 0


def test_mean_and_sample_stddev_over_sizes():
    # payload lengths chosen so IP total lengths are 100, 200, 300
    frames = [
        tcp_frame(0, "10.0.0.1", "10.0.0.2", 1000, 80, "A", b"x" * 60),
        tcp_frame(10, "10.0.0.1", "10.0.0.2", 1000, 80, "A", b"x" * 160),
        tcp_frame(30, "10.0.0.1", "10.0.0.2", 1000, 80, "A", b"x" * 260),
    ]
    (flow,) = meter_frames(frames, NO_EXPIRY)
    assert flow.bidirectional_mean_ps == 200.0
    assert flow.bidirectional_stddev_ps == 100.0
    assert flow.src2dst_mean_ps == 200.0
    assert flow.src2dst_stddev_ps == 100.0


def test_interarrival_times():
    frames = [
        tcp_frame(t, "10.0.0.1", "10.0.0.2", 1000, 80, "A") for t in (0, 10, 30)
    ]
    (flow,) = meter_frames(frames, NO_EXPIRY)
    assert flow.bidirectional_mean_piat_ms == 15.0
    assert flow.bidirectional_min_piat_ms == 10.0
    assert flow.bidirectional_max_piat_ms == 20.0
    # directional IAT sample count = direction packets - 1
    assert flow.src2dst_mean_piat_ms == 15.0


def test_one_way_flow_has_zero_reverse_stats():
    frames = [
        tcp_frame(0, "10.0.0.1", "10.0.0.2", 1000, 80, "A", b"z"),
        tcp_frame(5, "10.0.0.1", "10.0.0.2", 1000, 80, "A", b"z"),
    ]
    (flow,) = meter_frames(frames, NO_EXPIRY)
    assert flow.dst2src_packets == 0
    for name in FEATURE_COLUMNS:
        if name.startswith("dst2src"):
            assert getattr(flow, name) == 0


def test_directional_iat_uses_same_direction_gaps():
    frames = [
        tcp_frame(0, "10.0.0.1", "10.0.0.2", 1000, 80, "A"),
        tcp_frame(7, "10.0.0.2", "10.0.0.1", 80, 1000, "A"),
        tcp_frame(20, "10.0.0.1", "10.0.0.2", 1000, 80, "A"),
        tcp_frame(26, "10.0.0.2", "10.0.0.1", 80, 1000, "A"),
    ]
    (flow,) = meter_frames(frames, NO_EXPIRY)
    assert flow.src2dst_mean_piat_ms == 20.0  # 0 -> 20
    assert flow.dst2src_mean_piat_ms == 19.0  # 7 -> 26
    assert flow.bidirectional_mean_piat_ms == pytest.approx((7 + 13 + 6) / 3)


def test_flag_counting_multiflag_packets():
    frames = [
        tcp_frame(0, "10.0.0.1", "10.0.0.2", 1000, 80, "SPU"),
        tcp_frame(2, "10.0.0.2", "10.0.0.1", 80, 1000, "SAPEC"),
        tcp_frame(4, "10.0.0.1", "10.0.0.2", 1000, 80, "APU"),
    ]
    (flow,) = meter_frames(frames, NO_EXPIRY)
    assert flow.bidirectional_syn_packets == 2
    assert flow.bidirectional_ack_packets == 2
    assert flow.bidirectional_psh_packets == 3
    assert flow.bidirectional_urg_packets == 2
    assert flow.bidirectional_ece_packets == 1
    assert flow.bidirectional_cwr_packets == 1
    assert flow.src2dst_psh_packets == 2
    assert flow.dst2src_psh_packets == 1
    assert flow.src2dst_urg_packets == 2
    assert flow.dst2src_urg_packets == 0


def test_payload_totals_tracked_separately_from_sizes():
    frames = [
        tcp_frame(0, "10.0.0.1", "10.0.0.2", 1000, 80, "A", b"abc"),
        tcp_frame(1, "10.0.0.2", "10.0.0.1", 80, 1000, "A"),
    ]
    (flow,) = meter_frames(frames, NO_EXPIRY)
    assert flow.payload_bytes_src2dst == 3
    assert flow.payload_bytes_dst2src == 0
    assert flow.src2dst_bytes == 20 + 20 + 3
    assert flow.dst2src_bytes == 20 + 20


def test_no_nan_anywhere():
    flows = meter_frames(random_trace(99, 80))
    for flow in flows:
        for name in CSV_COLUMNS:
            value = getattr(flow, name)
            if isinstance(value, float):
                assert math.isfinite(value)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000), te=st.booleans())
def test_streaming_equals_batch_recompute(seed, te):
    frames = random_trace(seed, 70)
    config = MeterConfig(tcp_expiry_enabled=te)
    flows = meter_frames(frames, config)
    expected = [batch_features(f) for f in partition(decode_all(frames), tcp_expiry=te)]
    assert len(flows) == len(expected)
    for flow, exp in zip(flows, expected):
        for name in CSV_COLUMNS:
            if name == "label":
                continue
            got = getattr(flow, name)
            want = exp[name]
            if isinstance(want, float) or isinstance(got, float):
                assert close_enough(float(got), float(want)), (name, got, want)
            else:
                assert got == want, (name, got, want)
        # streaming sample-count bookkeeping
        n_bidir = exp["src2dst_packets"] + exp["dst2src_packets"]
        assert flow.bidirectional_packets == n_bidir
