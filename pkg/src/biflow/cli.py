"""Command line front end.

Subcommands mirror the pipeline stages:

    biflow prep    -i raw.pcap -o clean.pcap [--window N]
    biflow meter   -i clean.pcap -o flows.csv [--idle MS --active MS --no-tcp-expiry]
    biflow label   -i flows.csv -r rules.yaml -o labeled.csv
    biflow filter  -i labeled.csv -o kept.csv [--filter-mode prose|literal]
    biflow audit   -i flows.csv [-i more.csv ...] [--profile NAME] [-o report.json]
    biflow run     -c config.yaml | flags

Settings resolve defaults < config file < explicit flags. ``run`` executes
prep -> meter -> label -> filter -> export -> audit per input capture with
an isolated flow cache per file, and writes a deterministic run manifest
(no wall-clock content) for reproducibility.

Exit codes: 0 success, 1 usage/config error, then one per failed stage:
prep 2, meter 3, label 4, filter 5, export 6, audit 7.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import sys
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import yaml

from . import __version__
from .audit import AuditReport, audit as audit_csv, compare, load_profile, write_report
from .capture_prep import prep_capture, prep_packets, summary_csv
from .engine import FlowCache, MeterConfig
from .flow import FeatureVector, finalize
from .flowcsv import (
    export_csv,
    read_flows_csv,
    read_payloads,
    sidecar_path,
    write_payloads,
)
from .labeling import label_flows, load_rules
from .pcapio import PcapReader, read_pcap
from .postfilter import MODE_PROSE, filter_flows

logger = logging.getLogger(__name__)

STAGE_EXIT_CODES = {
    "prep": 2,
    "meter": 3,
    "label": 4,
    "filter": 5,
    "export": 6,
    "audit": 7,
}


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class PipelineConfig:
    """Full-run settings; defaults reproduce the reference processing."""

    inputs: list[str]
    output_dir: str
    dedup_window: int = 10_000
    idle_timeout_ms: int = 60_000
    active_timeout_ms: int = 120_000
    tcp_expiry: bool = True
    filter_mode: str = MODE_PROSE
    rules: str | None = None
    temporal_mode: str = "overlap"
    profile: str = "nfstream"

    def meter_config(self) -> MeterConfig:
        return MeterConfig(
            idle_timeout_ms=self.idle_timeout_ms,
            active_timeout_ms=self.active_timeout_ms,
            tcp_expiry_enabled=self.tcp_expiry,
        )


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _meter_file(
    pcap_path: Path, config: MeterConfig
) -> tuple[list[FeatureVector], dict]:
    """Meter one (already prepped) capture file into feature vectors."""
    with PcapReader(pcap_path) as reader:
        cache = FlowCache(config, linktype=reader.linktype)
        flows = []
        for raw in reader:
            for record in cache.process_packet(raw):
                flows.append(finalize(record))
        for record in cache.flush():
            flows.append(finalize(record))
    counts = {
        "admitted_packets": cache.admitted,
        "dropped_packets": cache.dropped,
        "non_monotonic_packets": cache.non_monotonic,
        "flows": len(flows),
    }
    if cache.admitted == 0 and cache.dropped > 0:
        logger.warning(
            "%s: every packet was filtered out (unsupported linktype or no IPv4 TCP/UDP?)",
            pcap_path,
        )
    return flows, counts


def _meter_packets_list(packets, linktype: int, config: MeterConfig):
    cache = FlowCache(config, linktype=linktype)
    flows = []
    for raw in packets:
        for record in cache.process_packet(raw):
            flows.append(finalize(record))
    for record in cache.flush():
        flows.append(finalize(record))
    counts = {
        "admitted_packets": cache.admitted,
        "dropped_packets": cache.dropped,
        "non_monotonic_packets": cache.non_monotonic,
        "flows": len(flows),
    }
    return flows, counts


def run_pipeline(config: PipelineConfig) -> dict:
    """Execute the full pipeline per input; returns the run manifest.

    Any stage failure removes that input's partial outputs and re-raises as
    a stage-tagged error.
    """
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        rules = load_rules(config.rules) if config.rules else []
    except Exception as exc:
        raise StageError("label", exc) from exc
    try:
        profile = load_profile(config.profile)
    except Exception as exc:
        raise StageError("audit", exc) from exc

    manifest: dict = {
        "tool": {"name": "biflow", "version": __version__},
        "config": dataclasses.asdict(config),
        "inputs": [],
    }
    summaries = []

    for input_path in config.inputs:
        in_path = Path(input_path)
        stem = in_path.stem
        flows_path = out_dir / f"{stem}.flows.csv"
        payloads_path = sidecar_path(flows_path)
        audit_path = out_dir / f"{stem}.audit.json"
        created: list[Path] = []
        stage = "prep"
        try:
            packets, linktype = read_pcap(in_path)
            ordered, summary = prep_packets(packets, in_path.name, config.dedup_window)
            summaries.append(summary)

            stage = "meter"
            flows, meter_counts = _meter_packets_list(
                ordered, linktype, config.meter_config()
            )

            stage = "label"
            labeled = label_flows(flows, rules, config.temporal_mode)
            label_counts = Counter(f.label for f in labeled)

            stage = "filter"
            kept, dropped = filter_flows(labeled, config.filter_mode)

            stage = "export"
            created.append(flows_path)
            rows = export_csv(kept, flows_path)
            created.append(payloads_path)
            write_payloads(kept, payloads_path)

            stage = "audit"
            report = audit_csv(flows_path, profile)
            created.append(audit_path)
            write_report(report, audit_path)
        except Exception as exc:
            for path in created:
                path.unlink(missing_ok=True)
            raise StageError(stage, exc) from exc

        manifest["inputs"].append(
            {
                "path": str(in_path),
                "sha256": _sha256(in_path),
                "prep": dataclasses.asdict(summary),
                "meter": meter_counts,
                "labels": dict(sorted(label_counts.items())),
                "post_filter_dropped": dropped,
                "rows_exported": rows,
                "flows_csv": flows_path.name,
                "audit": {
                    "nan_cells_total": report.nan_cells_total,
                    "negative_cells_total": report.negative_cells_total,
                    "fin_gt2_total": report.fin_gt2["total"],
                    "rst_gt2_total": report.rst_gt2["total"],
                },
            }
        )

    (out_dir / "summary.csv").write_text(summary_csv(summaries), encoding="utf-8")
    manifest_text = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    (out_dir / "manifest.json").write_text(manifest_text, encoding="utf-8")
    return manifest


def _load_config_file(path: str) -> dict:
    doc = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: config must be a YAML mapping")
    known = {f.name for f in dataclasses.fields(PipelineConfig)}
    unknown = set(doc) - known
    if unknown:
        raise ValueError(f"{path}: unknown config keys {sorted(unknown)}")
    return doc


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="biflow",
        description="Bidirectional flow metering and labeled dataset generation",
    )
    parser.add_argument("--version", action="version", version=f"biflow {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prep", help="deduplicate and reorder a capture")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--window", type=int, default=10_000)
    p.add_argument("--summary", help="append the summary as CSV to this path")

    p = sub.add_parser("meter", help="meter a prepped capture into a flow CSV")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--idle", type=int, default=60_000, help="idle timeout ms")
    p.add_argument("--active", type=int, default=120_000, help="active timeout ms")
    p.add_argument(
        "--no-tcp-expiry",
        dest="tcp_expiry",
        action="store_false",
        help="disable FIN/RST flow expiration (nTE mode)",
    )

    p = sub.add_parser("label", help="label a flow CSV with a rule file")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("-r", "--rules", required=True)
    p.add_argument("--temporal-mode", choices=["overlap", "start"], default="overlap")
    p.add_argument(
        "--payloads",
        help="payload sidecar (defaults to <input stem>.payloads.csv if present)",
    )

    p = sub.add_parser("filter", help="drop degenerate flag-terminated flows")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--filter-mode", choices=["prose", "literal"], default="prose")

    p = sub.add_parser("audit", help="integrity census over flow CSVs")
    p.add_argument("-i", "--input", action="append", required=True)
    p.add_argument("--profile", default="nfstream", help="built-in name or mapping file")
    p.add_argument("-o", "--output", help="write JSON report(s) here")

    p = sub.add_parser("run", help="full pipeline: prep, meter, label, filter, audit")
    p.add_argument("-c", "--config", help="YAML pipeline config")
    p.add_argument("-i", "--input", action="append", default=None)
    p.add_argument("--output-dir")
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--idle", type=int, default=None)
    p.add_argument("--active", type=int, default=None)
    expiry = p.add_mutually_exclusive_group()
    expiry.add_argument("--tcp-expiry", dest="tcp_expiry", action="store_true", default=None)
    expiry.add_argument("--no-tcp-expiry", dest="tcp_expiry", action="store_false")
    p.add_argument("--filter-mode", choices=["prose", "literal"], default=None)
    p.add_argument("-r", "--rules", default=None)
    p.add_argument("--temporal-mode", choices=["overlap", "start"], default=None)
    p.add_argument("--profile", default=None)
    return parser


def _cmd_prep(args) -> int:
    summary = prep_capture(args.input, args.output, args.window)
    text = summary_csv([summary])
    print(text, end="")
    if args.summary:
        Path(args.summary).write_text(text, encoding="utf-8")
    return 0


def _cmd_meter(args) -> int:
    config = MeterConfig(
        idle_timeout_ms=args.idle,
        active_timeout_ms=args.active,
        tcp_expiry_enabled=args.tcp_expiry,
    )
    flows, counts = _meter_file(Path(args.input), config)
    export_csv(flows, args.output)
    write_payloads(flows, sidecar_path(args.output))
    print(
        f"meter: {counts['flows']} flows from {counts['admitted_packets']} admitted "
        f"packets ({counts['dropped_packets']} dropped)"
    )
    return 0


def _cmd_label(args) -> int:
    rules = load_rules(args.rules)
    payloads = None
    payloads_path = Path(args.payloads) if args.payloads else sidecar_path(args.input)
    if payloads_path.exists():
        payloads = read_payloads(payloads_path)
    else:
        logger.warning(
            "%s: no payload sidecar; zero-payload relabeling skipped", payloads_path
        )
    flows = read_flows_csv(args.input, payloads)
    labeled = label_flows(flows, rules, args.temporal_mode)
    export_csv(labeled, args.output)
    if payloads is not None:
        write_payloads(labeled, sidecar_path(args.output))
    counts = Counter(f.label for f in labeled)
    for label, count in sorted(counts.items()):
        print(f"label {label}: {count}")
    return 0


def _cmd_filter(args) -> int:
    flows = read_flows_csv(args.input)
    kept, dropped = filter_flows(flows, args.filter_mode)
    export_csv(kept, args.output)
    print(f"filter: kept {len(kept)}, dropped {dropped} ({args.filter_mode} mode)")
    return 0


def _cmd_audit(args) -> int:
    profile = load_profile(args.profile)
    reports: dict[str, AuditReport] = {}
    for path in args.input:
        report = audit_csv(path, profile)
        reports[report.source] = report
        print(report.to_text(), end="")
    if len(reports) >= 2:
        print(compare(reports), end="")
    if args.output:
        payload = next(iter(reports.values())) if len(reports) == 1 else reports.values()
        write_report(payload, args.output)
    return 0


def _cmd_run(args) -> int:
    settings: dict = {}
    if args.config:
        settings.update(_load_config_file(args.config))
    overrides = {
        "inputs": args.input,
        "output_dir": args.output_dir,
        "dedup_window": args.window,
        "idle_timeout_ms": args.idle,
        "active_timeout_ms": args.active,
        "tcp_expiry": args.tcp_expiry,
        "filter_mode": args.filter_mode,
        "rules": args.rules,
        "temporal_mode": args.temporal_mode,
        "profile": args.profile,
    }
    settings.update({k: v for k, v in overrides.items() if v is not None})
    if not settings.get("inputs"):
        print("run: no input captures (use -i or the config file)", file=sys.stderr)
        return 1
    if not settings.get("output_dir"):
        print("run: no output directory (use --output-dir or the config file)", file=sys.stderr)
        return 1
    config = PipelineConfig(**settings)
    try:
        manifest = run_pipeline(config)
    except StageError as exc:
        print(f"run failed in {exc}", file=sys.stderr)
        return STAGE_EXIT_CODES.get(exc.stage, 1)
    for entry in manifest["inputs"]:
        print(
            f"{entry['path']}: {entry['rows_exported']} flows -> {entry['flows_csv']} "
            f"(dropped {entry['post_filter_dropped']} in post-filter)"
        )
    return 0


_COMMANDS = {
    "prep": _cmd_prep,
    "meter": _cmd_meter,
    "label": _cmd_label,
    "filter": _cmd_filter,
    "audit": _cmd_audit,
    "run": _cmd_run,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"biflow {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
