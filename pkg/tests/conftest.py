"""Shared helpers for the test suite."""

from __future__ import annotations

import math

from biflow.engine import FlowCache, MeterConfig
from biflow.flow import FeatureVector, finalize
from biflow.pcapio import LINKTYPE_ETHERNET, RawPacket, decode_frame


def meter_frames(
    frames: list[RawPacket], config: MeterConfig | None = None
) -> list[FeatureVector]:
    """Run frames through a fresh cache and finalize everything emitted."""
    cache = FlowCache(config or MeterConfig(), linktype=LINKTYPE_ETHERNET)
    flows = []
    for raw in frames:
        flows.extend(finalize(r) for r in cache.process_packet(raw))
    flows.extend(finalize(r) for r in cache.flush())
    return flows


def decode_all(frames: list[RawPacket]):
    views = [decode_frame(raw, LINKTYPE_ETHERNET) for raw in frames]
    return [v for v in views if v is not None]


def close_enough(a: float, b: float, rel: float = 1e-9) -> bool:
    return math.isclose(a, b, rel_tol=rel, abs_tol=1e-12)
