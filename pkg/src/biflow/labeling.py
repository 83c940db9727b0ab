"""Declarative flow labeling: attribute matching, temporal validation,
zero-payload relabeling and reversed-orientation matching.

Rules live in a YAML file, one record per rule:

    rules:
      - label: SSH-Patator
        window: ["2017-07-04T14:00:00-03:00", "2017-07-04T15:00:00-03:00"]
        src_ips: [172.16.0.1]
        dst_ips: [192.168.10.50]
        dst_ports: [22]
        protocol: 6
        priority: 10        # optional; defaults to attribute specificity

Window timestamps are ISO-8601 with an explicit timezone (or plain integer
epoch milliseconds). Omitted attribute sets match anything. A flow matches
a rule in its own orientation or with source/destination swapped, so
subflows re-seeded in the reply direction still label correctly.
"""

from __future__ import annotations

import ipaddress
import logging
from dataclasses import dataclass, replace
from datetime import datetime
from pathlib import Path
from typing import Iterable, Sequence

import yaml

from .flow import FeatureVector

logger = logging.getLogger(__name__)

BENIGN = "BENIGN"

# Labels exempt from the zero-payload -> BENIGN override.
ZPL_EXEMPT_LABELS = frozenset({"PortScan"})

TEMPORAL_OVERLAP = "overlap"
TEMPORAL_START = "start"


class RuleFileError(ValueError):
    """Raised for unparseable or invalid rule files, with rule position."""


@dataclass(frozen=True, slots=True)
class LabelRule:
    label: str
    window_start_ms: int
    window_end_ms: int
    src_ips: frozenset[str] | None = None
    dst_ips: frozenset[str] | None = None
    src_ports: frozenset[int] | None = None
    dst_ports: frozenset[int] | None = None
    protocol: int | None = None
    priority: int = 0

    def __post_init__(self) -> None:
        if self.window_start_ms > self.window_end_ms:
            raise ValueError(
                f"rule {self.label!r}: window_start_ms > window_end_ms"
            )

    def specificity(self) -> int:
        return sum(
            attr is not None
            for attr in (self.src_ips, self.dst_ips, self.src_ports, self.dst_ports, self.protocol)
        )


def _attrs_match(rule: LabelRule, src_ip: str, src_port: int, dst_ip: str, dst_port: int) -> bool:
    if rule.src_ips is not None and src_ip not in rule.src_ips:
        return False
    if rule.dst_ips is not None and dst_ip not in rule.dst_ips:
        return False
    if rule.src_ports is not None and src_port not in rule.src_ports:
        return False
    if rule.dst_ports is not None and dst_port not in rule.dst_ports:
        return False
    return True


def match_rule(
    flow: FeatureVector, rule: LabelRule, temporal_mode: str = TEMPORAL_OVERLAP
) -> bool:
    """True iff attributes match (directly or swapped) and the flow falls
    inside the rule's time window.

    ``overlap`` accepts any intersection of [first_seen, last_seen] with the
    window; ``start`` requires first_seen inside the window.
    """
    if rule.protocol is not None and flow.protocol != rule.protocol:
        return False
    direct = _attrs_match(rule, flow.src_ip, flow.src_port, flow.dst_ip, flow.dst_port)
    swapped = _attrs_match(rule, flow.dst_ip, flow.dst_port, flow.src_ip, flow.src_port)
    if not (direct or swapped):
        return False
    if temporal_mode == TEMPORAL_OVERLAP:
        return (
            flow.first_seen_ms <= rule.window_end_ms
            and flow.last_seen_ms >= rule.window_start_ms
        )
    if temporal_mode == TEMPORAL_START:
        return rule.window_start_ms <= flow.first_seen_ms <= rule.window_end_ms
    raise ValueError(f"unknown temporal mode {temporal_mode!r}")


def label_flow(
    flow: FeatureVector,
    rules: Sequence[LabelRule],
    temporal_mode: str = TEMPORAL_OVERLAP,
) -> FeatureVector:
    """Apply the first matching rule (rules pre-sorted by priority), then the
    zero-payload override. Returns a labeled copy; the input is unchanged.
    """
    label = BENIGN
    hit_index = None
    for i, rule in enumerate(rules):
        if match_rule(flow, rule, temporal_mode):
            label = rule.label
            hit_index = i
            break
    if hit_index is not None:
        hit = rules[hit_index]
        for other in rules[hit_index + 1 :]:
            if other.priority != hit.priority:
                break
            if other.label != hit.label and match_rule(flow, other, temporal_mode):
                logger.warning(
                    "flow %s:%d->%s:%d matches equal-priority rules %r and %r; keeping %r",
                    flow.src_ip, flow.src_port, flow.dst_ip, flow.dst_port,
                    hit.label, other.label, hit.label,
                )
                break
    if flow.total_payload_bytes == 0 and label not in ZPL_EXEMPT_LABELS:
        label = BENIGN
    return replace(flow, label=label)


def label_flows(
    flows: Iterable[FeatureVector],
    rules: Sequence[LabelRule],
    temporal_mode: str = TEMPORAL_OVERLAP,
) -> list[FeatureVector]:
    return [label_flow(f, rules, temporal_mode) for f in flows]


def sort_rules(rules: Iterable[LabelRule]) -> list[LabelRule]:
    """Priority descending; file order breaks ties (stable sort)."""
    return sorted(rules, key=lambda r: -r.priority)


def _parse_window_edge(value, where: str) -> int:
    if isinstance(value, bool):
        raise RuleFileError(f"{where}: invalid timestamp {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        text = value.replace("Z", "+00:00")
        try:
            dt = datetime.fromisoformat(text)
        except ValueError as exc:
            raise RuleFileError(f"{where}: invalid timestamp {value!r}: {exc}") from None
        if dt.tzinfo is None:
            raise RuleFileError(
                f"{where}: timestamp {value!r} lacks a timezone offset"
            )
        return int(dt.timestamp() * 1000)
    raise RuleFileError(f"{where}: invalid timestamp {value!r}")


def _parse_ip_set(value, where: str) -> frozenset[str] | None:
    if value is None:
        return None
    if not isinstance(value, (list, tuple)):
        raise RuleFileError(f"{where}: expected a list of IPv4 addresses")
    ips = []
    for item in value:
        try:
            ips.append(str(ipaddress.IPv4Address(str(item))))
        except ipaddress.AddressValueError as exc:
            raise RuleFileError(f"{where}: invalid IPv4 address {item!r}: {exc}") from None
    return frozenset(ips)


def _parse_port_set(value, where: str) -> frozenset[int] | None:
    if value is None:
        return None
    if not isinstance(value, (list, tuple)):
        raise RuleFileError(f"{where}: expected a list of ports")
    ports = set()
    for item in value:
        try:
            port = int(item)
        except (TypeError, ValueError):
            raise RuleFileError(f"{where}: invalid port {item!r}") from None
        if not 0 <= port <= 65535:
            raise RuleFileError(f"{where}: port {port} out of range")
        ports.add(port)
    return frozenset(ports)


_RULE_KEYS = {
    "label", "window", "src_ips", "dst_ips", "src_ports", "dst_ports", "protocol", "priority",
}


def _parse_rule(record, where: str) -> LabelRule:
    if not isinstance(record, dict):
        raise RuleFileError(f"{where}: expected a mapping")
    unknown = set(record) - _RULE_KEYS
    if unknown:
        raise RuleFileError(f"{where}: unknown keys {sorted(unknown)}")
    label = record.get("label")
    if not label or not isinstance(label, str):
        raise RuleFileError(f"{where}: missing or empty label")
    window = record.get("window")
    if not isinstance(window, (list, tuple)) or len(window) != 2:
        raise RuleFileError(f"{where}: window must be [start, end]")
    start_ms = _parse_window_edge(window[0], where)
    end_ms = _parse_window_edge(window[1], where)
    if start_ms > end_ms:
        raise RuleFileError(f"{where}: window starts after it ends")
    protocol = record.get("protocol")
    if protocol is not None:
        if protocol not in (6, 17):
            raise RuleFileError(f"{where}: protocol must be 6 (TCP) or 17 (UDP)")
    rule = LabelRule(
        label=label,
        window_start_ms=start_ms,
        window_end_ms=end_ms,
        src_ips=_parse_ip_set(record.get("src_ips"), where),
        dst_ips=_parse_ip_set(record.get("dst_ips"), where),
        src_ports=_parse_port_set(record.get("src_ports"), where),
        dst_ports=_parse_port_set(record.get("dst_ports"), where),
        protocol=protocol,
    )
    priority = record.get("priority")
    if priority is None:
        priority = rule.specificity()
    elif not isinstance(priority, int) or isinstance(priority, bool):
        raise RuleFileError(f"{where}: priority must be an integer")
    return replace(rule, priority=priority)


def load_rules(path: str | Path) -> list[LabelRule]:
    """Parse and validate a rule file; returns rules sorted for matching.

    An empty file yields an empty rule set (every flow labels BENIGN).
    Parse errors carry the YAML line number, validation errors the rule's
    position in the file.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = f" (line {mark.line + 1})" if mark is not None else ""
        raise RuleFileError(f"{path}: parse error{line}: {exc}") from None
    if doc is None:
        return []
    records = doc.get("rules") if isinstance(doc, dict) else doc
    if records is None:
        return []
    if not isinstance(records, list):
        raise RuleFileError(f"{path}: expected a list of rules or a 'rules:' key")
    rules = [
        _parse_rule(record, f"{path}: rule {i + 1}") for i, record in enumerate(records)
    ]
    return sort_rules(rules)
