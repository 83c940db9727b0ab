"""Hand-assembled Ethernet/IPv4/TCP/UDP frames for tests.

Built with struct from the wire layouts, independent of the production
decoder, so tests exercise real byte parsing. Checksums are left zero
(the decoder does not verify them).
"""

from __future__ import annotations

import struct

from biflow.pcapio import RawPacket

FLAG_BITS = {
    "F": 0x01,  # FIN
    "S": 0x02,  # SYN
    "R": 0x04,  # RST
    "P": 0x08,  # PSH
    "A": 0x10,  # ACK
    "U": 0x20,  # URG
    "E": 0x40,  # ECE
    "C": 0x80,  # CWR
}


def _ip_bytes(ip: str) -> bytes:
    return bytes(int(part) for part in ip.split("."))


def ethernet(payload: bytes, ethertype: int = 0x0800) -> bytes:
    return b"\x02" * 6 + b"\x04" * 6 + struct.pack(">H", ethertype) + payload


def ipv4(
    src: str,
    dst: str,
    proto: int,
    payload: bytes,
    ttl: int = 64,
    ident: int = 0,
    frag: int = 0,
) -> bytes:
    total_len = 20 + len(payload)
    header = struct.pack(
        ">BBHHHBBH4s4s",
        0x45,
        0,
        total_len,
        ident,
        frag,
        ttl,
        proto,
        0,
        _ip_bytes(src),
        _ip_bytes(dst),
    )
    return header + payload


def tcp(sport: int, dport: int, flags: str = "", payload: bytes = b"") -> bytes:
    bits = 0
    for ch in flags:
        bits |= FLAG_BITS[ch]
    header = struct.pack(">HHIIBBHHH", sport, dport, 0, 0, 5 << 4, bits, 8192, 0, 0)
    return header + payload


def udp(sport: int, dport: int, payload: bytes = b"") -> bytes:
    return struct.pack(">HHHH", sport, dport, 8 + len(payload), 0) + payload


def tcp_frame(
    ts_ms: int,
    src: str,
    dst: str,
    sport: int,
    dport: int,
    flags: str = "",
    payload: bytes = b"",
) -> RawPacket:
    frame = ethernet(ipv4(src, dst, 6, tcp(sport, dport, flags, payload)))
    return RawPacket.make(ts_ms * 1000, frame)


def udp_frame(
    ts_ms: int,
    src: str,
    dst: str,
    sport: int,
    dport: int,
    payload: bytes = b"",
) -> RawPacket:
    frame = ethernet(ipv4(src, dst, 17, udp(sport, dport, payload)))
    return RawPacket.make(ts_ms * 1000, frame)
