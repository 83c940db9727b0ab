"""Integrity census over flow CSVs: label distribution, NaN cells, negative
cells, and flows with FIN/RST counts above two.

Works on this tool's own output and on third-party datasets via named
column profiles or a YAML mapping file. The negative-cell census skips
columns the profile declares sign-carrying (an expiration-id column may
legitimately hold -1). Cells parsing to NaN or +/-inf count as NaN cells.
"""

from __future__ import annotations

import csv
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import yaml

BENIGN = "BENIGN"


class AuditError(ValueError):
    """Raised when a mandatory column cannot be resolved."""


@dataclass(frozen=True)
class ColumnProfile:
    """Column-name resolution for one CSV dialect.

    Candidate tuples are tried in order against the (whitespace-stripped)
    header. ``non_numeric`` columns are exempt from the NaN/negative census,
    ``allow_negative`` columns only from the negative census.
    """

    name: str
    label: tuple[str, ...]
    fin: tuple[str, ...]
    rst: tuple[str, ...]
    non_numeric: frozenset[str]
    allow_negative: frozenset[str]


PROFILES: dict[str, ColumnProfile] = {
    "nfstream": ColumnProfile(
        name="nfstream",
        label=("label",),
        fin=("bidirectional_fin_packets",),
        rst=("bidirectional_rst_packets",),
        non_numeric=frozenset({"src_ip", "dst_ip", "label"}),
        allow_negative=frozenset({"expiration_id"}),
    ),
    "cicflowmeter": ColumnProfile(
        name="cicflowmeter",
        label=("Label",),
        fin=("FIN Flag Count", "FIN Flag Cnt"),
        rst=("RST Flag Count", "RST Flag Cnt"),
        non_numeric=frozenset(
            {
                "Flow ID",
                "Source IP",
                "Src IP",
                "Destination IP",
                "Dst IP",
                "Timestamp",
                "Label",
            }
        ),
        allow_negative=frozenset(),
    ),
}


def load_profile(source: str | Path) -> ColumnProfile:
    """A built-in profile name, or a YAML mapping file overriding one.

    Mapping file keys: base (profile name), label, fin, rst (strings or
    lists), non_numeric, allow_negative (lists).
    """
    key = str(source)
    if key in PROFILES:
        return PROFILES[key]
    path = Path(source)
    if not path.exists():
        raise AuditError(
            f"unknown profile {key!r}: not a built-in ({', '.join(PROFILES)}) "
            "and no such mapping file"
        )
    doc = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    if not isinstance(doc, dict):
        raise AuditError(f"{path}: mapping file must be a YAML mapping")
    base = PROFILES[doc.get("base", "nfstream")]

    def _tuple(key: str, default: tuple[str, ...]) -> tuple[str, ...]:
        value = doc.get(key)
        if value is None:
            return default
        if isinstance(value, str):
            return (value,)
        return tuple(str(v) for v in value)

    return ColumnProfile(
        name=doc.get("name", path.stem),
        label=_tuple("label", base.label),
        fin=_tuple("fin", base.fin),
        rst=_tuple("rst", base.rst),
        non_numeric=frozenset(_tuple("non_numeric", tuple(base.non_numeric))),
        allow_negative=frozenset(_tuple("allow_negative", tuple(base.allow_negative))),
    )


@dataclass
class AuditReport:
    source: str
    total_flows: int = 0
    benign_flows: int = 0
    anomaly_flows: int = 0
    unlabeled_rows: int = 0
    label_counts: dict[str, int] = field(default_factory=dict)
    nan_cells_total: int = 0
    nan_cells: dict[str, int] = field(default_factory=dict)
    negative_cells_total: int = 0
    negative_cells: dict[str, int] = field(default_factory=dict)
    fin_gt2: dict[str, int] = field(default_factory=lambda: {"total": 0, "benign": 0, "anomaly": 0})
    rst_gt2: dict[str, int] = field(default_factory=lambda: {"total": 0, "benign": 0, "anomaly": 0})

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "total_flows": self.total_flows,
            "benign_flows": self.benign_flows,
            "anomaly_flows": self.anomaly_flows,
            "unlabeled_rows": self.unlabeled_rows,
            "label_counts": dict(sorted(self.label_counts.items())),
            "nan_cells_total": self.nan_cells_total,
            "nan_cells": dict(sorted(self.nan_cells.items())),
            "negative_cells_total": self.negative_cells_total,
            "negative_cells": dict(sorted(self.negative_cells.items())),
            "fin_gt2": self.fin_gt2,
            "rst_gt2": self.rst_gt2,
        }

    def to_text(self) -> str:
        lines = [
            f"audit: {self.source}",
            f"  flows total={self.total_flows} benign={self.benign_flows} "
            f"anomaly={self.anomaly_flows} unlabeled={self.unlabeled_rows}",
            f"  nan cells: {self.nan_cells_total}",
            f"  negative cells: {self.negative_cells_total}",
            f"  FIN>2 flows: total={self.fin_gt2['total']} benign={self.fin_gt2['benign']} "
            f"anomaly={self.fin_gt2['anomaly']}",
            f"  RST>2 flows: total={self.rst_gt2['total']} benign={self.rst_gt2['benign']} "
            f"anomaly={self.rst_gt2['anomaly']}",
        ]
        for label, count in sorted(self.label_counts.items()):
            lines.append(f"  label {label}: {count}")
        for col, count in sorted(self.nan_cells.items()):
            lines.append(f"  nan[{col}]: {count}")
        for col, count in sorted(self.negative_cells.items()):
            lines.append(f"  negative[{col}]: {count}")
        return "\n".join(lines) + "\n"


def _resolve(header: list[str], candidates: tuple[str, ...], role: str, source: str) -> int:
    for candidate in candidates:
        if candidate in header:
            return header.index(candidate)
    raise AuditError(
        f"{source}: cannot resolve mandatory {role} column (tried {list(candidates)})"
    )


def audit(csv_path: str | Path, profile: ColumnProfile | str = "nfstream") -> AuditReport:
    """One-pass census over a flow CSV."""
    if isinstance(profile, str):
        profile = load_profile(profile)
    path = Path(csv_path)
    report = AuditReport(source=path.name)
    label_counter: Counter[str] = Counter()
    nan_counter: Counter[str] = Counter()
    neg_counter: Counter[str] = Counter()

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            raw_header = next(reader)
        except StopIteration:
            raise AuditError(f"{path}: empty file, no header") from None
        header = [h.strip() for h in raw_header]
        label_i = _resolve(header, profile.label, "label", str(path))
        fin_i = _resolve(header, profile.fin, "FIN-count", str(path))
        rst_i = _resolve(header, profile.rst, "RST-count", str(path))
        numeric_cols = [
            (i, name) for i, name in enumerate(header) if name not in profile.non_numeric
        ]

        for row in reader:
            if not row:
                continue
            report.total_flows += 1
            label = row[label_i].strip() if label_i < len(row) else ""
            if not label:
                report.unlabeled_rows += 1
                benign = None
            else:
                benign = label == BENIGN
                label_counter[label] += 1
                if benign:
                    report.benign_flows += 1
                else:
                    report.anomaly_flows += 1

            fin_count = rst_count = None
            for i, name in numeric_cols:
                cell = row[i].strip() if i < len(row) else ""
                value = None
                if not cell:
                    nan_counter[name] += 1
                else:
                    try:
                        value = float(cell)
                    except ValueError:
                        nan_counter[name] += 1
                    else:
                        if math.isnan(value) or math.isinf(value):
                            nan_counter[name] += 1
                            value = None
                        elif value < 0 and name not in profile.allow_negative:
                            neg_counter[name] += 1
                if i == fin_i:
                    fin_count = value
                elif i == rst_i:
                    rst_count = value

            for count, census in ((fin_count, report.fin_gt2), (rst_count, report.rst_gt2)):
                if count is not None and count > 2:
                    census["total"] += 1
                    if benign is True:
                        census["benign"] += 1
                    elif benign is False:
                        census["anomaly"] += 1

    report.label_counts = dict(label_counter)
    report.nan_cells = dict(nan_counter)
    report.nan_cells_total = sum(nan_counter.values())
    report.negative_cells = dict(neg_counter)
    report.negative_cells_total = sum(neg_counter.values())
    return report


def compare(reports: Mapping[str, AuditReport]) -> str:
    """Aligned cross-dataset comparison table; absent labels show as '--'."""
    if len(reports) < 2:
        raise ValueError("compare needs at least 2 reports")
    names = list(reports)
    labels = sorted({label for r in reports.values() for label in r.label_counts})

    rows: list[tuple[str, list[str]]] = [
        ("total_flows", [str(reports[n].total_flows) for n in names]),
        ("benign_flows", [str(reports[n].benign_flows) for n in names]),
        ("anomaly_flows", [str(reports[n].anomaly_flows) for n in names]),
        ("nan_cells", [str(reports[n].nan_cells_total) for n in names]),
        ("negative_cells", [str(reports[n].negative_cells_total) for n in names]),
    ]
    for label in labels:
        rows.append(
            (
                f"label {label}",
                [
                    str(reports[n].label_counts[label])
                    if label in reports[n].label_counts
                    else "--"
                    for n in names
                ],
            )
        )
    for metric, key in (("fin_gt2", "fin_gt2"), ("rst_gt2", "rst_gt2")):
        for part in ("total", "benign", "anomaly"):
            rows.append(
                (f"{metric} {part}", [str(getattr(reports[n], key)[part]) for n in names])
            )

    width0 = max(len(r[0]) for r in rows)
    widths = [max(len(name), max(len(r[1][j]) for r in rows)) for j, name in enumerate(names)]
    out = [" " * width0 + "  " + "  ".join(n.rjust(w) for n, w in zip(names, widths))]
    for title, cells in rows:
        out.append(
            title.ljust(width0) + "  " + "  ".join(c.rjust(w) for c, w in zip(cells, widths))
        )
    return "\n".join(out) + "\n"


def write_report(report: AuditReport | Iterable[AuditReport], path: str | Path) -> None:
    """Machine-readable JSON report (single object or list)."""
    if isinstance(report, AuditReport):
        payload = report.to_dict()
    else:
        payload = [r.to_dict() for r in report]
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
