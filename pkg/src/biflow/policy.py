"""Flag-triggered TCP flow expiration policy.

Marks a TCP flow for immediate expiry (expiration id -1) when the packet
that created or updated it carries a FIN or RST flag. The triggering packet
has already been counted into the flow when the hook runs, so emitted flows
carry FIN/RST counts of at most one each and the flag packet is terminal.
UDP flows are never touched. Hooks mutate ``expiration_id`` only.
"""

from __future__ import annotations

from .flow import FlowRecord
from .pcapio import PROTO_TCP, PacketView

USER_EXPIRATION_ID = -1


class TcpExpiryPolicy:
    """Expire TCP flows on FIN or RST at initiation or update."""

    def on_init(self, packet: PacketView, flow: FlowRecord) -> None:
        if packet.protocol != PROTO_TCP:
            return
        if packet.rst or packet.fin:
            flow.expiration_id = USER_EXPIRATION_ID

    def on_update(self, packet: PacketView, flow: FlowRecord) -> None:
        if packet.protocol != PROTO_TCP:
            return
        if packet.rst or packet.fin:
            flow.expiration_id = USER_EXPIRATION_ID
