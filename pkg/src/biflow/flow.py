"""Flow state, streaming feature accumulators and finalized feature vectors.

A flow is keyed by its first packet's five-tuple; reply packets match the
reversed tuple. Packet size is the IP total length in octets; transport
payload octets are tracked separately for zero-payload labeling. All flow
timestamps and inter-arrival gaps are epoch/delta milliseconds.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Iterator

from .pcapio import PacketView
from .stats import RunningStats

SRC2DST = "src2dst"
DST2SRC = "dst2src"

KEY_COLUMNS = ["src_ip", "src_port", "dst_ip", "dst_port", "protocol"]

# The 41 exported statistical features, in frozen output order.
FEATURE_COLUMNS = [
    "src2dst_packets",
    "dst2src_packets",
    "src2dst_bytes",
    "dst2src_bytes",
    "bidirectional_duration_ms",
    "bidirectional_min_ps",
    "bidirectional_max_ps",
    "bidirectional_mean_ps",
    "bidirectional_stddev_ps",
    "src2dst_max_ps",
    "src2dst_min_ps",
    "src2dst_mean_ps",
    "src2dst_stddev_ps",
    "dst2src_max_ps",
    "dst2src_min_ps",
    "dst2src_mean_ps",
    "dst2src_stddev_ps",
    "bidirectional_mean_piat_ms",
    "bidirectional_stddev_piat_ms",
    "bidirectional_max_piat_ms",
    "bidirectional_min_piat_ms",
    "src2dst_mean_piat_ms",
    "src2dst_stddev_piat_ms",
    "src2dst_max_piat_ms",
    "src2dst_min_piat_ms",
    "dst2src_mean_piat_ms",
    "dst2src_stddev_piat_ms",
    "dst2src_max_piat_ms",
    "dst2src_min_piat_ms",
    "bidirectional_fin_packets",
    "bidirectional_syn_packets",
    "bidirectional_rst_packets",
    "bidirectional_psh_packets",
    "bidirectional_ack_packets",
    "bidirectional_urg_packets",
    "bidirectional_cwr_packets",
    "bidirectional_ece_packets",
    "src2dst_psh_packets",
    "dst2src_psh_packets",
    "src2dst_urg_packets",
    "dst2src_urg_packets",
]

TRAILER_COLUMNS = ["first_seen_ms", "last_seen_ms", "expiration_id", "label"]

CSV_COLUMNS = KEY_COLUMNS + FEATURE_COLUMNS + TRAILER_COLUMNS


@dataclass(frozen=True, slots=True)
class FlowKey:
    src_ip: str
    dst_ip: str
    src_port: int
    dst_port: int
    protocol: int

    def reversed(self) -> "FlowKey":
        return FlowKey(self.dst_ip, self.src_ip, self.dst_port, self.src_port, self.protocol)

    def canonical(self) -> tuple:
        """Direction-independent cache key: ordered endpoint pair + protocol."""
        a = (self.src_ip, self.src_port)
        b = (self.dst_ip, self.dst_port)
        return (a, b, self.protocol) if a <= b else (b, a, self.protocol)


@dataclass(slots=True)
class FlowRecord:
    """Live flow state updated packet by packet until expiry.

    ``expiration_id`` stays None while the flow is live; the engine or a
    policy hook sets it to -1 (policy), 0 (idle/flush) or 1 (active).
    """

    key: FlowKey
    first_seen_ms: int
    last_seen_ms: int
    expiration_id: int | None = None

    src2dst_packets: int = 0
    dst2src_packets: int = 0
    src2dst_bytes: int = 0
    dst2src_bytes: int = 0
    payload_bytes_src2dst: int = 0
    payload_bytes_dst2src: int = 0

    fin_packets: int = 0
    syn_packets: int = 0
    rst_packets: int = 0
    psh_packets: int = 0
    ack_packets: int = 0
    urg_packets: int = 0
    cwr_packets: int = 0
    ece_packets: int = 0
    src2dst_psh_packets: int = 0
    dst2src_psh_packets: int = 0
    src2dst_urg_packets: int = 0
    dst2src_urg_packets: int = 0

    ps_bidir: RunningStats = field(default_factory=RunningStats)
    ps_src2dst: RunningStats = field(default_factory=RunningStats)
    ps_dst2src: RunningStats = field(default_factory=RunningStats)
    iat_bidir: RunningStats = field(default_factory=RunningStats)
    iat_src2dst: RunningStats = field(default_factory=RunningStats)
    iat_dst2src: RunningStats = field(default_factory=RunningStats)
    _last_ts_src2dst: int | None = None
    _last_ts_dst2src: int | None = None

    label: str = ""

    @classmethod
    def open(cls, pkt: PacketView) -> "FlowRecord":
        key = FlowKey(pkt.src_ip, pkt.dst_ip, pkt.src_port, pkt.dst_port, pkt.protocol)
        return cls(key=key, first_seen_ms=pkt.ts_ms, last_seen_ms=pkt.ts_ms)

    @property
    def bidirectional_packets(self) -> int:
        return self.src2dst_packets + self.dst2src_packets

    def direction_of(self, pkt: PacketView) -> str:
        if (pkt.src_ip, pkt.src_port) == (self.key.src_ip, self.key.src_port):
            return SRC2DST
        return DST2SRC


def update_stats(flow: FlowRecord, pkt: PacketView, direction: str) -> None:
    """Fold one attributed packet into the flow's counters and accumulators.

    The first packet of any scope contributes no inter-arrival sample.
    A timestamp behind ``last_seen_ms`` is clamped (gap treated as 0) so the
    accumulators never see a negative gap; the engine counts the event.
    """
    ts = max(pkt.ts_ms, flow.last_seen_ms)
    size = pkt.ip_size

    if flow.bidirectional_packets > 0:
        flow.iat_bidir.push(ts - flow.last_seen_ms)
    flow.ps_bidir.push(size)
    flow.last_seen_ms = ts

    if direction == SRC2DST:
        flow.src2dst_packets += 1
        flow.src2dst_bytes += size
        flow.payload_bytes_src2dst += pkt.payload_size
        flow.ps_src2dst.push(size)
        if flow._last_ts_src2dst is not None:
            flow.iat_src2dst.push(ts - flow._last_ts_src2dst)
        flow._last_ts_src2dst = ts
        if pkt.psh:
            flow.src2dst_psh_packets += 1
        if pkt.urg:
            flow.src2dst_urg_packets += 1
    else:
        flow.dst2src_packets += 1
        flow.dst2src_bytes += size
        flow.payload_bytes_dst2src += pkt.payload_size
        flow.ps_dst2src.push(size)
        if flow._last_ts_dst2src is not None:
            flow.iat_dst2src.push(ts - flow._last_ts_dst2src)
        flow._last_ts_dst2src = ts
        if pkt.psh:
            flow.dst2src_psh_packets += 1
        if pkt.urg:
            flow.dst2src_urg_packets += 1

    if pkt.fin:
        flow.fin_packets += 1
    if pkt.syn:
        flow.syn_packets += 1
    if pkt.rst:
        flow.rst_packets += 1
    if pkt.psh:
        flow.psh_packets += 1
    if pkt.ack:
        flow.ack_packets += 1
    if pkt.urg:
        flow.urg_packets += 1
    if pkt.cwr:
        flow.cwr_packets += 1
    if pkt.ece:
        flow.ece_packets += 1


@dataclass(slots=True)
class FeatureVector:
    """Finalized, immutable-by-convention flow record ready for export.

    Carries the five-tuple, the 41 statistical features in export order,
    the timestamps/expiration trailer and the label. Transport payload
    totals ride along for zero-payload labeling but are not exported.
    """

    src_ip: str
    src_port: int
    dst_ip: str
    dst_port: int
    protocol: int

    src2dst_packets: int
    dst2src_packets: int
    src2dst_bytes: int
    dst2src_bytes: int
    bidirectional_duration_ms: int
    bidirectional_min_ps: float
    bidirectional_max_ps: float
    bidirectional_mean_ps: float
    bidirectional_stddev_ps: float
    src2dst_max_ps: float
    src2dst_min_ps: float
    src2dst_mean_ps: float
    src2dst_stddev_ps: float
    dst2src_max_ps: float
    dst2src_min_ps: float
    dst2src_mean_ps: float
    dst2src_stddev_ps: float
    bidirectional_mean_piat_ms: float
    bidirectional_stddev_piat_ms: float
    bidirectional_max_piat_ms: float
    bidirectional_min_piat_ms: float
    src2dst_mean_piat_ms: float
    src2dst_stddev_piat_ms: float
    src2dst_max_piat_ms: float
    src2dst_min_piat_ms: float
    dst2src_mean_piat_ms: float
    dst2src_stddev_piat_ms: float
    dst2src_max_piat_ms: float
    dst2src_min_piat_ms: float
    bidirectional_fin_packets: int
    bidirectional_syn_packets: int
    bidirectional_rst_packets: int
    bidirectional_psh_packets: int
    bidirectional_ack_packets: int
    bidirectional_urg_packets: int
    bidirectional_cwr_packets: int
    bidirectional_ece_packets: int
    src2dst_psh_packets: int
    dst2src_psh_packets: int
    src2dst_urg_packets: int
    dst2src_urg_packets: int

    first_seen_ms: int
    last_seen_ms: int
    expiration_id: int
    label: str = ""

    payload_bytes_src2dst: int = 0
    payload_bytes_dst2src: int = 0

    @property
    def bidirectional_packets(self) -> int:
        return self.src2dst_packets + self.dst2src_packets

    @property
    def total_payload_bytes(self) -> int:
        return self.payload_bytes_src2dst + self.payload_bytes_dst2src

    def row(self) -> Iterator:
        """Values in CSV_COLUMNS order."""
        for name in CSV_COLUMNS:
            yield getattr(self, name)


_VECTOR_FIELDS = {f.name for f in fields(FeatureVector)}
assert set(CSV_COLUMNS) <= _VECTOR_FIELDS


def finalize(flow: FlowRecord) -> FeatureVector:
    """Freeze an expired flow into its exported feature vector."""
    if flow.expiration_id is None:
        raise ValueError("cannot finalize a live flow (expiration_id unset)")
    k = flow.key
    return FeatureVector(
        src_ip=k.src_ip,
        src_port=k.src_port,
        dst_ip=k.dst_ip,
        dst_port=k.dst_port,
        protocol=k.protocol,
        src2dst_packets=flow.src2dst_packets,
        dst2src_packets=flow.dst2src_packets,
        src2dst_bytes=flow.src2dst_bytes,
        dst2src_bytes=flow.dst2src_bytes,
        bidirectional_duration_ms=flow.last_seen_ms - flow.first_seen_ms,
        bidirectional_min_ps=flow.ps_bidir.min,
        bidirectional_max_ps=flow.ps_bidir.max,
        bidirectional_mean_ps=flow.ps_bidir.mean,
        bidirectional_stddev_ps=flow.ps_bidir.stddev,
        src2dst_max_ps=flow.ps_src2dst.max,
        src2dst_min_ps=flow.ps_src2dst.min,
        src2dst_mean_ps=flow.ps_src2dst.mean,
        src2dst_stddev_ps=flow.ps_src2dst.stddev,
        dst2src_max_ps=flow.ps_dst2src.max,
        dst2src_min_ps=flow.ps_dst2src.min,
        dst2src_mean_ps=flow.ps_dst2src.mean,
        dst2src_stddev_ps=flow.ps_dst2src.stddev,
        bidirectional_mean_piat_ms=flow.iat_bidir.mean,
        bidirectional_stddev_piat_ms=flow.iat_bidir.stddev,
        bidirectional_max_piat_ms=flow.iat_bidir.max,
        bidirectional_min_piat_ms=flow.iat_bidir.min,
        src2dst_mean_piat_ms=flow.iat_src2dst.mean,
        src2dst_stddev_piat_ms=flow.iat_src2dst.stddev,
        src2dst_max_piat_ms=flow.iat_src2dst.max,
        src2dst_min_piat_ms=flow.iat_src2dst.min,
        dst2src_mean_piat_ms=flow.iat_dst2src.mean,
        dst2src_stddev_piat_ms=flow.iat_dst2src.stddev,
        dst2src_max_piat_ms=flow.iat_dst2src.max,
        dst2src_min_piat_ms=flow.iat_dst2src.min,
        bidirectional_fin_packets=flow.fin_packets,
        bidirectional_syn_packets=flow.syn_packets,
        bidirectional_rst_packets=flow.rst_packets,
        bidirectional_psh_packets=flow.psh_packets,
        bidirectional_ack_packets=flow.ack_packets,
        bidirectional_urg_packets=flow.urg_packets,
        bidirectional_cwr_packets=flow.cwr_packets,
        bidirectional_ece_packets=flow.ece_packets,
        src2dst_psh_packets=flow.src2dst_psh_packets,
        dst2src_psh_packets=flow.dst2src_psh_packets,
        src2dst_urg_packets=flow.src2dst_urg_packets,
        dst2src_urg_packets=flow.dst2src_urg_packets,
        first_seen_ms=flow.first_seen_ms,
        last_seen_ms=flow.last_seen_ms,
        expiration_id=flow.expiration_id,
        label=flow.label,
        payload_bytes_src2dst=flow.payload_bytes_src2dst,
        payload_bytes_dst2src=flow.payload_bytes_dst2src,
    )
