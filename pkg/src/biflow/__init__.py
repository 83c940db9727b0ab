"""biflow: bidirectional flow metering and labeled dataset generation."""

__version__ = "0.1.0"

from .audit import AuditReport, audit, compare
from .capture_prep import CaptureSummary, deduplicate, reorder, summarize
from .engine import FlowCache, MeterConfig, meter_packets
from .flow import CSV_COLUMNS, FEATURE_COLUMNS, FeatureVector, FlowKey, FlowRecord, finalize
from .flowcsv import export_csv, read_flows_csv
from .labeling import LabelRule, label_flow, label_flows, load_rules, match_rule
from .pcapio import PacketView, PcapReader, RawPacket, read_pcap, write_pcap
from .policy import TcpExpiryPolicy
from .postfilter import filter_flows

__all__ = [
    "AuditReport",
    "CSV_COLUMNS",
    "CaptureSummary",
    "FEATURE_COLUMNS",
    "FeatureVector",
    "FlowCache",
    "FlowKey",
    "FlowRecord",
    "LabelRule",
    "MeterConfig",
    "PacketView",
    "PcapReader",
    "RawPacket",
    "TcpExpiryPolicy",
    "audit",
    "compare",
    "deduplicate",
    "export_csv",
    "filter_flows",
    "finalize",
    "label_flow",
    "label_flows",
    "load_rules",
    "match_rule",
    "meter_packets",
    "read_flows_csv",
    "read_pcap",
    "reorder",
    "summarize",
    "write_pcap",
]
