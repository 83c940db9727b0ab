"""Column resolution across flow CSV dialects.

The model consumes exactly 42 feature columns: the protocol identifier plus
41 flow statistics. Source/destination addresses and ports are always
excluded so the classifier cannot key on endpoint identities, and
timestamp/expiration bookkeeping never reaches the model either.
"""

from __future__ import annotations

FEATURE_NAMES = [
    "protocol",
    "src2dst_packets",
    "dst2src_packets",
    "src2dst_bytes",
    "dst2src_bytes",
    "bidirectional_duration_ms",
    "bidirectional_min_ps",
    "bidirectional_max_ps",
    "bidirectional_mean_ps",
    "bidirectional_stddev_ps",
    "src2dst_max_ps",
    "src2dst_min_ps",
    "src2dst_mean_ps",
    "src2dst_stddev_ps",
    "dst2src_max_ps",
    "dst2src_min_ps",
    "dst2src_mean_ps",
    "dst2src_stddev_ps",
    "bidirectional_mean_piat_ms",
    "bidirectional_stddev_piat_ms",
    "bidirectional_max_piat_ms",
    "bidirectional_min_piat_ms",
    "src2dst_mean_piat_ms",
    "src2dst_stddev_piat_ms",
    "src2dst_max_piat_ms",
    "src2dst_min_piat_ms",
    "dst2src_mean_piat_ms",
    "dst2src_stddev_piat_ms",
    "dst2src_max_piat_ms",
    "dst2src_min_piat_ms",
    "bidirectional_fin_packets",
    "bidirectional_syn_packets",
    "bidirectional_rst_packets",
    "bidirectional_psh_packets",
    "bidirectional_ack_packets",
    "bidirectional_urg_packets",
    "bidirectional_cwr_packets",
    "bidirectional_ece_packets",
    "src2dst_psh_packets",
    "dst2src_psh_packets",
    "src2dst_urg_packets",
    "dst2src_urg_packets",
]

EXCLUDED_KEY_COLUMNS = ["src_ip", "src_port", "dst_ip", "dst_port"]

# canonical name -> accepted aliases in CICFlowMeter-family CSVs (the three
# dataset generations disagree on singular/plural and abbreviations).
CIC_ALIASES: dict[str, tuple[str, ...]] = {
    "protocol": ("Protocol",),
    "src2dst_packets": ("Total Fwd Packet", "Total Fwd Packets"),
    "dst2src_packets": ("Total Bwd packets", "Total Backward Packets"),
    "src2dst_bytes": ("Total Length of Fwd Packet", "Total Length of Fwd Packets"),
    "dst2src_bytes": ("Total Length of Bwd Packet", "Total Length of Bwd Packets"),
    "bidirectional_duration_ms": ("Flow Duration",),
    "bidirectional_min_ps": ("Packet Length Min", "Min Packet Length"),
    "bidirectional_max_ps": ("Packet Length Max", "Max Packet Length"),
    "bidirectional_mean_ps": ("Packet Length Mean",),
    "bidirectional_stddev_ps": ("Packet Length Std",),
    "src2dst_max_ps": ("Fwd Packet Length Max",),
    "src2dst_min_ps": ("Fwd Packet Length Min",),
    "src2dst_mean_ps": ("Fwd Packet Length Mean",),
    "src2dst_stddev_ps": ("Fwd Packet Length Std",),
    "dst2src_max_ps": ("Bwd Packet Length Max",),
    "dst2src_min_ps": ("Bwd Packet Length Min",),
    "dst2src_mean_ps": ("Bwd Packet Length Mean",),
    "dst2src_stddev_ps": ("Bwd Packet Length Std",),
    "bidirectional_mean_piat_ms": ("Flow IAT Mean",),
    "bidirectional_stddev_piat_ms": ("Flow IAT Std",),
    "bidirectional_max_piat_ms": ("Flow IAT Max",),
    "bidirectional_min_piat_ms": ("Flow IAT Min",),
    "src2dst_mean_piat_ms": ("Fwd IAT Mean",),
    "src2dst_stddev_piat_ms": ("Fwd IAT Std",),
    "src2dst_max_piat_ms": ("Fwd IAT Max",),
    "src2dst_min_piat_ms": ("Fwd IAT Min",),
    "dst2src_mean_piat_ms": ("Bwd IAT Mean",),
    "dst2src_stddev_piat_ms": ("Bwd IAT Std",),
    "dst2src_max_piat_ms": ("Bwd IAT Max",),
    "dst2src_min_piat_ms": ("Bwd IAT Min",),
    "bidirectional_fin_packets": ("FIN Flag Count", "FIN Flag Cnt"),
    "bidirectional_syn_packets": ("SYN Flag Count", "SYN Flag Cnt"),
    "bidirectional_rst_packets": ("RST Flag Count", "RST Flag Cnt"),
    "bidirectional_psh_packets": ("PSH Flag Count", "PSH Flag Cnt"),
    "bidirectional_ack_packets": ("ACK Flag Count", "ACK Flag Cnt"),
    "bidirectional_urg_packets": ("URG Flag Count", "URG Flag Cnt"),
    "bidirectional_cwr_packets": ("CWR Flag Count", "CWE Flag Count"),
    "bidirectional_ece_packets": ("ECE Flag Count", "ECE Flag Cnt"),
    "src2dst_psh_packets": ("Fwd PSH Flags",),
    "dst2src_psh_packets": ("Bwd PSH Flags",),
    "src2dst_urg_packets": ("Fwd URG Flags",),
    "dst2src_urg_packets": ("Bwd URG Flags",),
}

LABEL_ALIASES = ("label", "Label")


class ColumnResolutionError(ValueError):
    """A required model column is missing from the CSV header."""


def resolve_columns(header: list[str]) -> tuple[dict[str, str], str]:
    """Map canonical feature names onto the (stripped) CSV header.

    Returns (canonical -> actual column name, label column name). Native
    column names win; CICFlowMeter-family aliases are tried as fallback.
    """
    stripped = {h.strip(): h for h in header}
    mapping: dict[str, str] = {}
    missing: list[str] = []
    for canonical in FEATURE_NAMES:
        if canonical in stripped:
            mapping[canonical] = stripped[canonical]
            continue
        for alias in CIC_ALIASES.get(canonical, ()):
            if alias in stripped:
                mapping[canonical] = stripped[alias]
                break
        else:
            missing.append(canonical)
    if missing:
        raise ColumnResolutionError(f"unresolvable feature columns: {missing}")
    for alias in LABEL_ALIASES:
        if alias in stripped:
            return mapping, stripped[alias]
    raise ColumnResolutionError("unresolvable label column (tried 'label', 'Label')")
