"""Capture cleanup before metering: windowed dedup, chronological reorder.

Mirrors the editcap/reordercap preprocessing convention: a packet is a
duplicate when its full link-layer frame is byte-identical to one of the
previous `window` retained packets; reordering is a stable sort on the
capture timestamp.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .pcapio import RawPacket, read_pcap, write_pcap


@dataclass(slots=True)
class CaptureSummary:
    """Per-capture cleanup statistics (percentages are 0..1 ratios)."""

    name: str
    packets_in: int
    duplicates_removed: int
    duplicate_pct: float
    frames_out: int
    out_of_order: int
    out_of_order_pct: float


def deduplicate(packets: Iterable[RawPacket], window: int) -> tuple[list[RawPacket], int]:
    """Drop packets whose frame bytes repeat within the retained window.

    Removed duplicates do not extend the window. The dict-backed membership
    test is hash-then-full-compare, so lookup stays O(1) per packet even at
    a 10,000 frame window.
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    retained: list[RawPacket] = []
    recent: deque[bytes] = deque()
    counts: Counter[bytes] = Counter()
    removed = 0
    for pkt in packets:
        fb = pkt.frame_bytes
        if counts.get(fb, 0) > 0:
            removed += 1
            continue
        retained.append(pkt)
        recent.append(fb)
        counts[fb] += 1
        if len(recent) > window:
            old = recent.popleft()
            counts[old] -= 1
            if counts[old] == 0:
                del counts[old]
    return retained, removed


def reorder(packets: Sequence[RawPacket]) -> tuple[list[RawPacket], int]:
    """Stable-sort packets by timestamp; counts input-order inversions.

    ``out_of_order`` is the number of positions i with ts[i] < ts[i-1] in
    the input. Equal timestamps keep their input order.
    """
    out_of_order = sum(
        1 for i in range(1, len(packets)) if packets[i].ts_us < packets[i - 1].ts_us
    )
    return sorted(packets, key=lambda p: p.ts_us), out_of_order


def summarize(
    name: str, packets_in: int, duplicates_removed: int, out_of_order: int
) -> CaptureSummary:
    """Build the six-column cleanup summary for one capture."""
    frames_out = packets_in - duplicates_removed
    return CaptureSummary(
        name=name,
        packets_in=packets_in,
        duplicates_removed=duplicates_removed,
        duplicate_pct=duplicates_removed / packets_in if packets_in else 0.0,
        frames_out=frames_out,
        out_of_order=out_of_order,
        out_of_order_pct=out_of_order / frames_out if frames_out else 0.0,
    )


def prep_capture(
    in_path: str | Path, out_path: str | Path, window: int = 10_000
) -> CaptureSummary:
    """File-to-file cleanup: dedup then reorder, preserving the linktype."""
    packets, linktype = read_pcap(in_path)
    kept, removed = deduplicate(packets, window)
    ordered, out_of_order = reorder(kept)
    write_pcap(out_path, ordered, linktype=linktype)
    return summarize(Path(in_path).name, len(packets), removed, out_of_order)


def prep_packets(
    packets: Sequence[RawPacket], name: str, window: int = 10_000
) -> tuple[list[RawPacket], CaptureSummary]:
    """In-memory cleanup used by the pipeline."""
    kept, removed = deduplicate(packets, window)
    ordered, out_of_order = reorder(kept)
    return ordered, summarize(name, len(packets), removed, out_of_order)


SUMMARY_HEADER = [
    "pcap",
    "packets_in",
    "duplicates_removed",
    "duplicate_pct",
    "frames_out",
    "out_of_order",
    "out_of_order_pct",
]


def summary_csv(summaries: Iterable[CaptureSummary]) -> str:
    """Render summaries as CSV text with the six capture-analysis columns."""
    lines = [",".join(SUMMARY_HEADER)]
    for s in summaries:
        lines.append(
            f"{s.name},{s.packets_in},{s.duplicates_removed},"
            f"{100.0 * s.duplicate_pct:.4f}%,{s.frames_out},"
            f"{s.out_of_order},{100.0 * s.out_of_order_pct:.4f}%"
        )
    return "\n".join(lines) + "\n"
