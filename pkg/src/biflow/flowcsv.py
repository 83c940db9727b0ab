"""Flow CSV export with a frozen 50-column schema, plus read-back.

Header order: five-tuple, the 41 statistical features, first_seen_ms,
last_seen_ms, expiration_id, label. UTF-8, comma separated, newline
terminated; no field ever contains a comma. Integers render without a
decimal point, reals with at most 6 decimal places (trailing zeros
trimmed); NaN/inf tokens are never emitted.

Transport payload totals are not part of the schema; ``write_payloads`` /
``read_payloads`` provide a row-aligned sidecar so a CSV round-trip can
still feed zero-payload labeling.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Iterable

from .flow import CSV_COLUMNS, FeatureVector

_INT_COLUMNS = frozenset(
    c
    for c in CSV_COLUMNS
    if c.endswith(("_packets", "_bytes"))
    or c in ("src_port", "dst_port", "protocol", "bidirectional_duration_ms",
             "first_seen_ms", "last_seen_ms", "expiration_id")
)
_STR_COLUMNS = frozenset({"src_ip", "dst_ip", "label"})

PAYLOAD_COLUMNS = ["payload_bytes_src2dst", "payload_bytes_dst2src"]


def format_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        raise TypeError("boolean cell")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError("NaN/inf must never reach the CSV")
        if value == int(value):
            return str(int(value))
        text = f"{value:.6f}".rstrip("0").rstrip(".")
        return text if text not in ("", "-0") else "0"
    raise TypeError(f"unsupported cell type {type(value).__name__}")


def export_csv(flows: Iterable[FeatureVector], path: str | Path) -> int:
    """Write flows; returns the data-row count. Empty input yields a
    header-only file."""
    n = 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for flow in flows:
            fh.write(",".join(format_cell(v) for v in flow.row()) + "\n")
            n += 1
    return n


def read_flows_csv(
    path: str | Path, payloads: list[tuple[int, int]] | None = None
) -> list[FeatureVector]:
    """Read back an exported CSV into FeatureVectors.

    Payload totals are zero unless a row-aligned sidecar list is supplied.
    """
    flows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != CSV_COLUMNS:
            raise ValueError(f"{path}: not a flow CSV (unexpected header)")
        for i, row in enumerate(reader):
            if len(row) != len(CSV_COLUMNS):
                raise ValueError(f"{path}: row {i + 2} has {len(row)} fields")
            kwargs = {}
            for name, cell in zip(CSV_COLUMNS, row):
                if name in _STR_COLUMNS:
                    kwargs[name] = cell
                elif name in _INT_COLUMNS:
                    kwargs[name] = int(cell)
                else:
                    kwargs[name] = float(cell)
            if payloads is not None:
                kwargs["payload_bytes_src2dst"], kwargs["payload_bytes_dst2src"] = payloads[i]
            flows.append(FeatureVector(**kwargs))
    return flows


def write_payloads(flows: Iterable[FeatureVector], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(PAYLOAD_COLUMNS) + "\n")
        for flow in flows:
            fh.write(f"{flow.payload_bytes_src2dst},{flow.payload_bytes_dst2src}\n")


def read_payloads(path: str | Path) -> list[tuple[int, int]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != PAYLOAD_COLUMNS:
            raise ValueError(f"{path}: not a payload sidecar")
        return [(int(a), int(b)) for a, b in reader]


def sidecar_path(csv_path: str | Path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.stem + ".payloads.csv")
