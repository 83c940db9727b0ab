"""Classic PCAP reading/writing and IPv4/TCP/UDP frame decoding.

Both the microsecond and nanosecond PCAP variants are supported, in either
byte order; nanosecond timestamps are truncated to microseconds on read.
PCAPNG, live capture and IP defragmentation are out of scope.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Iterable, Iterator

LINKTYPE_ETHERNET = 1
LINKTYPE_RAW_IP = 101

ETHERTYPE_IPV4 = 0x0800

PROTO_TCP = 6
PROTO_UDP = 17

_REC_HDR_LEN = 16

# magic -> (endianness, nanosecond resolution)
_MAGICS = {
    b"\xd4\xc3\xb2\xa1": ("<", False),
    b"\xa1\xb2\xc3\xd4": (">", False),
    b"\x4d\x3c\xb2\xa1": ("<", True),
    b"\xa1\xb2\x3c\x4d": (">", True),
}


class PcapFormatError(ValueError):
    """Raised when a capture file cannot be parsed."""


@dataclass(slots=True)
class RawPacket:
    """One captured frame: microsecond timestamp plus raw link-layer bytes.

    ``frame_len`` always equals ``len(frame_bytes)``; for snapped captures
    the truncated length is what dedup and decoding operate on.
    """

    ts_us: int
    frame_bytes: bytes
    frame_len: int

    @classmethod
    def make(cls, ts_us: int, frame_bytes: bytes) -> "RawPacket":
        return cls(ts_us=ts_us, frame_bytes=frame_bytes, frame_len=len(frame_bytes))


@dataclass(slots=True)
class PacketView:
    """Transport-level view of an admitted IPv4 TCP/UDP packet.

    ``ip_size`` is the IP total length (header + payload) in octets;
    ``payload_size`` is the transport payload octet count. Timestamps are
    epoch milliseconds (capture microseconds truncated). Flag fields are
    False for UDP.
    """

    ts_ms: int
    src_ip: str
    dst_ip: str
    src_port: int
    dst_port: int
    protocol: int
    ip_size: int
    payload_size: int
    fin: bool = False
    syn: bool = False
    rst: bool = False
    psh: bool = False
    ack: bool = False
    urg: bool = False
    ece: bool = False
    cwr: bool = False


class PcapReader:
    """Iterates RawPackets out of a classic PCAP file."""

    def __init__(self, path: str | Path):
        self._path = Path(path)
        self._fh: BinaryIO = open(self._path, "rb")
        try:
            magic = self._fh.read(4)
            if magic not in _MAGICS:
                raise PcapFormatError(f"{self._path}: not a classic pcap file")
            self._endian, self._nanos = _MAGICS[magic]
            rest = self._fh.read(20)
            if len(rest) != 20:
                raise PcapFormatError(f"{self._path}: truncated global header")
            fields = struct.unpack(self._endian + "HHiIII", rest)
            self.snaplen = fields[4]
            self.linktype = fields[5]
        except Exception:
            self._fh.close()
            raise
        self._rec = struct.Struct(self._endian + "IIII")

    def __enter__(self) -> "PcapReader":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def close(self) -> None:
        self._fh.close()

    def __iter__(self) -> Iterator[RawPacket]:
        div = 1000 if self._nanos else 1
        while True:
            hdr = self._fh.read(_REC_HDR_LEN)
            if not hdr:
                return
            if len(hdr) < _REC_HDR_LEN:
                raise PcapFormatError(f"{self._path}: truncated record header")
            ts_sec, ts_frac, incl_len, _orig_len = self._rec.unpack(hdr)
            data = self._fh.read(incl_len)
            if len(data) < incl_len:
                raise PcapFormatError(f"{self._path}: truncated packet record")
            ts_us = ts_sec * 1_000_000 + ts_frac // div
            yield RawPacket(ts_us=ts_us, frame_bytes=data, frame_len=incl_len)


def read_pcap(path: str | Path) -> tuple[list[RawPacket], int]:
    """Read a whole capture; returns (packets, linktype)."""
    with PcapReader(path) as reader:
        return list(reader), reader.linktype


def write_pcap(
    path: str | Path,
    packets: Iterable[RawPacket],
    linktype: int = LINKTYPE_ETHERNET,
    snaplen: int = 262144,
) -> int:
    """Write packets as a little-endian microsecond classic pcap.

    Returns the number of records written. ``orig_len`` is set to
    ``frame_len`` (original lengths of snapped captures are not preserved).
    """
    n = 0
    with open(path, "wb") as fh:
        fh.write(struct.pack("<IHHiIII", 0xA1B2C3D4, 2, 4, 0, 0, snaplen, linktype))
        for pkt in packets:
            fh.write(
                struct.pack(
                    "<IIII",
                    pkt.ts_us // 1_000_000,
                    pkt.ts_us % 1_000_000,
                    pkt.frame_len,
                    pkt.frame_len,
                )
            )
            fh.write(pkt.frame_bytes)
            n += 1
    return n


def _ipv4_str(b: bytes) -> str:
    return f"{b[0]}.{b[1]}.{b[2]}.{b[3]}"


def decode_frame(raw: RawPacket, linktype: int) -> PacketView | None:
    """Decode a frame down to an IPv4 TCP/UDP view.

    Returns None for anything else: non-IPv4 ethertypes (including VLAN
    tagged frames; decapsulation is disabled), non-TCP/UDP protocols,
    non-initial fragments, and truncated or malformed headers.
    """
    data = raw.frame_bytes
    if linktype == LINKTYPE_ETHERNET:
        if len(data) < 14:
            return None
        ethertype = (data[12] << 8) | data[13]
        if ethertype != ETHERTYPE_IPV4:
            return None
        ip = data[14:]
    elif linktype == LINKTYPE_RAW_IP:
        ip = data
    else:
        return None

    if len(ip) < 20 or ip[0] >> 4 != 4:
        return None
    ihl = (ip[0] & 0x0F) * 4
    if ihl < 20 or len(ip) < ihl:
        return None
    total_len = (ip[2] << 8) | ip[3]
    if total_len < ihl:
        return None
    frag = ((ip[6] << 8) | ip[7]) & 0x1FFF
    if frag != 0:
        return None
    proto = ip[9]
    transport = ip[ihl:]
    view = PacketView(
        ts_ms=raw.ts_us // 1000,
        src_ip=_ipv4_str(ip[12:16]),
        dst_ip=_ipv4_str(ip[16:20]),
        src_port=0,
        dst_port=0,
        protocol=proto,
        ip_size=total_len,
        payload_size=0,
    )
    if proto == PROTO_TCP:
        if len(transport) < 20:
            return None
        doff = (transport[12] >> 4) * 4
        if doff < 20:
            return None
        payload = total_len - ihl - doff
        if payload < 0:
            return None
        flags = transport[13]
        view.src_port = (transport[0] << 8) | transport[1]
        view.dst_port = (transport[2] << 8) | transport[3]
        view.payload_size = payload
        view.fin = bool(flags & 0x01)
        view.syn = bool(flags & 0x02)
        view.rst = bool(flags & 0x04)
        view.psh = bool(flags & 0x08)
        view.ack = bool(flags & 0x10)
        view.urg = bool(flags & 0x20)
        view.ece = bool(flags & 0x40)
        view.cwr = bool(flags & 0x80)
        return view
    if proto == PROTO_UDP:
        if len(transport) < 8:
            return None
        udp_len = (transport[4] << 8) | transport[5]
        if udp_len < 8:
            return None
        view.src_port = (transport[0] << 8) | transport[1]
        view.dst_port = (transport[2] << 8) | transport[3]
        view.payload_size = udp_len - 8
        return view
    return None
