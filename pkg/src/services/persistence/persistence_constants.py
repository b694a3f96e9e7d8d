"""
Model Archive Constants
=======================

Byte layout of the model archive; see docs/MODEL_ARCHIVE_FORMAT.md.
"""

ARCHIVE_MAGIC = b"BAE1"
ARCHIVE_FORMAT_VERSION = 1

# magic (4s), version (u16), reserved (u16), header length (u32), little-endian
PREAMBLE_FORMAT = "<4sHHI"
PREAMBLE_BYTES = 12

CHECKSUM_BYTES = 32
TENSOR_DTYPE = "<f8"

# Report file names inside an output directory
REPORT_JSON = "report.json"
TRACE_CSV = "trace.csv"
METRICS_CSV = "metrics.csv"
AUC_CSV = "auc.csv"
NMI_CSV = "nmi.csv"
MODEL_FILE = "model.bae"
