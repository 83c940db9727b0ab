from hypothesis import given, settings
from hypothesis import strategies as st

from biflow.engine import FlowCache, MeterConfig
from biflow.flow import FlowRecord
from biflow.pcapio import PacketView
from biflow.policy import TcpExpiryPolicy

from conftest import meter_frames
from packetcraft import tcp_frame, udp_frame
from traffic import random_trace


def tcp_view(**flags) -> PacketView:
    return PacketView(
        ts_ms=0, src_ip="10.0.0.1", dst_ip="10.0.0.2", src_port=1, dst_port=2,
        protocol=6, ip_size=40, payload_size=0, **flags,
    )


def open_flow(view: PacketView) -> FlowRecord:
    return FlowRecord.open(view)


def test_on_init_rst_marks_expired():
    policy = TcpExpiryPolicy()
    view = tcp_view(rst=True)
    flow = open_flow(view)
    policy.on_init(view, flow)
    assert flow.expiration_id == -1


def test_on_init_syn_only_unchanged():
    policy = TcpExpiryPolicy()
    view = tcp_view(syn=True)
    flow = open_flow(view)
    policy.on_init(view, flow)
    assert flow.expiration_id is None


def test_on_init_fin_ack_marks_expired():
    policy = TcpExpiryPolicy()
    view = tcp_view(fin=True, ack=True)
    flow = open_flow(view)
    policy.on_init(view, flow)
    assert flow.expiration_id == -1


def test_on_update_same_rule():
    policy = TcpExpiryPolicy()
    flow = open_flow(tcp_view(syn=True))
    policy.on_update(tcp_view(ack=True), flow)
    assert flow.expiration_id is None
    policy.on_update(tcp_view(fin=True), flow)
    assert flow.expiration_id == -1


def test_udp_never_marked():
    policy = TcpExpiryPolicy()
    view = PacketView(
        ts_ms=0, src_ip="10.0.0.1", dst_ip="10.0.0.2", src_port=1, dst_port=2,
        protocol=17, ip_size=28, payload_size=0,
    )
    flow = open_flow(view)
    policy.on_init(view, flow)
    policy.on_update(view, flow)
    assert flow.expiration_id is None


def test_hooks_touch_only_expiration_id():
    policy = TcpExpiryPolicy()
    view = tcp_view(rst=True)
    flow = open_flow(view)
    before = (
        flow.bidirectional_packets, flow.src2dst_bytes, flow.fin_packets,
        flow.rst_packets, flow.ps_bidir.count, flow.iat_bidir.count,
    )
    policy.on_init(view, flow)
    after = (
        flow.bidirectional_packets, flow.src2dst_bytes, flow.fin_packets,
        flow.rst_packets, flow.ps_bidir.count, flow.iat_bidir.count,
    )
    assert before == after
    assert flow.expiration_id == -1


def test_data_data_fin_expires_at_third_packet():
    frames = [
        tcp_frame(0, "10.0.0.1", "10.0.0.2", 1000, 80, "A", b"d"),
        tcp_frame(1, "10.0.0.2", "10.0.0.1", 80, 1000, "A", b"d"),
        tcp_frame(2, "10.0.0.1", "10.0.0.2", 1000, 80, "F"),
    ]
    (flow,) = meter_frames(frames)
    assert flow.expiration_id == -1
    assert flow.bidirectional_packets == 3
    assert flow.bidirectional_fin_packets == 1


def test_data_rst_expires_at_second_packet():
    frames = [
        tcp_frame(0, "10.0.0.1", "10.0.0.2", 1000, 80, "A", b"d"),
        tcp_frame(1, "10.0.0.2", "10.0.0.1", 80, 1000, "R"),
    ]
    (flow,) = meter_frames(frames)
    assert flow.expiration_id == -1
    assert flow.bidirectional_packets == 2
    assert flow.bidirectional_rst_packets == 1


def test_fin_and_rst_on_one_packet_increment_both_single_expiry():
    frames = [tcp_frame(0, "10.0.0.1", "10.0.0.2", 1000, 80, "FR")]
    (flow,) = meter_frames(frames)
    assert flow.bidirectional_fin_packets == 1
    assert flow.bidirectional_rst_packets == 1
    assert flow.expiration_id == -1


def test_post_expiry_packets_seed_fresh_possibly_reversed_flow():
    frames = [
        tcp_frame(0, "10.0.0.1", "10.0.0.2", 1000, 80, "FA"),
        tcp_frame(1, "10.0.0.2", "10.0.0.1", 80, 1000, "A"),
    ]
    flows = meter_frames(frames)
    assert len(flows) == 2
    assert flows[1].src_ip == "10.0.0.2"  # reversed orientation subflow
    assert flows[1].src_port == 80


def test_disabled_policy_never_yields_user_expiry():
    flows = meter_frames(random_trace(5, 150), MeterConfig(tcp_expiry_enabled=False))
    assert all(f.expiration_id in (0, 1) for f in flows)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(min_value=0, max_value=100_000))
def test_te_flag_bound_and_terminal_flag(seed):
    flows = meter_frames(random_trace(seed, 60, p_fin=0.2, p_rst=0.1))
    for flow in flows:
        if flow.protocol != 6:
            continue
        assert flow.bidirectional_fin_packets <= 1
        assert flow.bidirectional_rst_packets <= 1
        if flow.bidirectional_fin_packets or flow.bidirectional_rst_packets:
            assert flow.expiration_id == -1


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(min_value=0, max_value=100_000))
def test_te_splits_at_least_as_many_flows_as_nte(seed):
    frames = random_trace(seed, 60, p_fin=0.2, p_rst=0.1)
    te = meter_frames(frames, MeterConfig(tcp_expiry_enabled=True))
    nte = meter_frames(frames, MeterConfig(tcp_expiry_enabled=False))
    assert len(te) >= len(nte)
