"""Bidirectional flow cache with idle/active timeouts and policy hooks.

Timeouts are evaluated event-driven at packet arrival, against packet time
only, and use strict '>' comparisons: a gap or duration exactly equal to
the timeout keeps the packet in the flow. A packet that trips a timeout
expires the old flow and seeds a new one; it is never appended to the flow
it expired. Remaining flows expire only at flush (idle id 0).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Protocol, Sequence

from .flow import FlowKey, FlowRecord, update_stats
from .pcapio import PROTO_TCP, PROTO_UDP, PacketView, RawPacket, decode_frame
from .policy import TcpExpiryPolicy

IDLE_EXPIRATION_ID = 0
ACTIVE_EXPIRATION_ID = 1


class PolicyHooks(Protocol):
    def on_init(self, packet: PacketView, flow: FlowRecord) -> None: ...

    def on_update(self, packet: PacketView, flow: FlowRecord) -> None: ...


@dataclass(frozen=True)
class MeterConfig:
    """Metering knobs; defaults reproduce the reference configuration.

    Dissection stays disabled and statistics stay enabled: both are part of
    the output contract, the fields exist so a config file can state them
    explicitly (changing them is rejected).
    """

    idle_timeout_ms: int = 60_000
    active_timeout_ms: int = 120_000
    protocol_filter: frozenset[int] = frozenset({PROTO_TCP, PROTO_UDP})
    dissection_enabled: bool = False
    statistics_enabled: bool = True
    tcp_expiry_enabled: bool = True

    def __post_init__(self) -> None:
        if self.idle_timeout_ms <= 0:
            raise ValueError("idle_timeout_ms must be > 0")
        if self.active_timeout_ms <= 0:
            raise ValueError("active_timeout_ms must be > 0")
        if self.dissection_enabled:
            raise ValueError("dissection is not supported")
        if not self.statistics_enabled:
            raise ValueError("statistics cannot be disabled")


class FlowCache:
    """Single-writer flow table for one capture pass.

    Emitted FlowRecords leave the cache for good; callers finalize them
    into feature vectors. ``admitted``/``dropped``/``non_monotonic`` are
    running diagnostics.
    """

    def __init__(
        self,
        config: MeterConfig | None = None,
        linktype: int = 1,
        extra_policies: Sequence[PolicyHooks] = (),
    ):
        self.config = config or MeterConfig()
        self.linktype = linktype
        self.policies: list[PolicyHooks] = []
        if self.config.tcp_expiry_enabled:
            self.policies.append(TcpExpiryPolicy())
        self.policies.extend(extra_policies)
        self._flows: dict[tuple, FlowRecord] = {}
        self.admitted = 0
        self.dropped = 0
        self.non_monotonic = 0

    def __len__(self) -> int:
        return len(self._flows)

    def admit(self, raw: RawPacket) -> PacketView | None:
        """Decode and filter one frame; drops are counted, not raised."""
        view = decode_frame(raw, self.linktype)
        if view is None or view.protocol not in self.config.protocol_filter:
            self.dropped += 1
            return None
        self.admitted += 1
        return view

    def process_packet(self, raw: RawPacket) -> list[FlowRecord]:
        """Route one frame through filter, timeout check, update and hooks.

        Returns the flows this packet expired (0, 1 or 2 records: a timed-out
        predecessor and/or the policy-expired current flow).
        """
        view = self.admit(raw)
        if view is None:
            return []
        return self._apply(view)

    def _apply(self, view: PacketView) -> list[FlowRecord]:
        emitted: list[FlowRecord] = []
        ckey = FlowKey(
            view.src_ip, view.dst_ip, view.src_port, view.dst_port, view.protocol
        ).canonical()
        flow = self._flows.get(ckey)

        if flow is not None:
            if view.ts_ms < flow.last_seen_ms:
                self.non_monotonic += 1
                gap = 0
            else:
                gap = view.ts_ms - flow.last_seen_ms
            if gap > self.config.idle_timeout_ms:
                flow.expiration_id = IDLE_EXPIRATION_ID
                emitted.append(flow)
                del self._flows[ckey]
                flow = None
            elif view.ts_ms - flow.first_seen_ms > self.config.active_timeout_ms:
                flow.expiration_id = ACTIVE_EXPIRATION_ID
                emitted.append(flow)
                del self._flows[ckey]
                flow = None

        if flow is None:
            flow = FlowRecord.open(view)
            self._flows[ckey] = flow
            update_stats(flow, view, flow.direction_of(view))
            for policy in self.policies:
                policy.on_init(view, flow)
        else:
            update_stats(flow, view, flow.direction_of(view))
            for policy in self.policies:
                policy.on_update(view, flow)

        if flow.expiration_id is not None:
            emitted.append(flow)
            del self._flows[ckey]
        return emitted

    def flush(self) -> list[FlowRecord]:
        """Expire every remaining flow (idle id 0), in creation order."""
        emitted = []
        for flow in self._flows.values():
            flow.expiration_id = IDLE_EXPIRATION_ID
            emitted.append(flow)
        self._flows.clear()
        return emitted


def meter_packets(
    packets: Iterable[RawPacket],
    config: MeterConfig | None = None,
    linktype: int = 1,
    cache: FlowCache | None = None,
) -> Iterator[FlowRecord]:
    """Meter an ordered packet stream, yielding flows as they expire."""
    cache = cache or FlowCache(config, linktype=linktype)
    for raw in packets:
        yield from cache.process_packet(raw)
    yield from cache.flush()
