"""Post-processing filter for degenerate flag-terminated flows.

Two selectable predicates:

* ``prose`` (default) drops exactly the flows terminated by a FIN or RST in
  their first (and only) packet: bidirectional_packets == 1 and a FIN or RST
  count >= 1.
* ``literal`` keeps a flow iff bidirectional_packets != 1 and
  (rst_count != 1 or fin_count != 1). This variant also drops flag-free
  single-packet flows and multi-packet flows with fin == rst == 1.

Both are preserved because they disagree on those edge cases; pick per run.
"""

from __future__ import annotations

from typing import Iterable

from .flow import FeatureVector

MODE_PROSE = "prose"
MODE_LITERAL = "literal"


def _keep_prose(flow: FeatureVector) -> bool:
    if flow.bidirectional_packets != 1:
        return True
    return flow.bidirectional_fin_packets < 1 and flow.bidirectional_rst_packets < 1


def _keep_literal(flow: FeatureVector) -> bool:
    return flow.bidirectional_packets != 1 and (
        flow.bidirectional_rst_packets != 1 or flow.bidirectional_fin_packets != 1
    )


def filter_flows(
    flows: Iterable[FeatureVector], mode: str = MODE_PROSE
) -> tuple[list[FeatureVector], int]:
    """Subsequence selection; returns (kept flows in order, drop count)."""
    if mode == MODE_PROSE:
        keep = _keep_prose
    elif mode == MODE_LITERAL:
        keep = _keep_literal
    else:
        raise ValueError(f"unknown filter mode {mode!r}")
    kept = []
    dropped = 0
    for flow in flows:
        if keep(flow):
            kept.append(flow)
        else:
            dropped += 1
    return kept, dropped
