"""Trace alignment and sequence-model anomaly detection for fault-injection
experiments on distributed systems.

The heavy lifting lives in the compiled extension; this package re-exports it
and adds a couple of conveniences.
"""

import json as _json

from tracelens._core import (  # noqa: F401
    AlignmentResult,
    BackgroundDictionary,
    ClassificationReport,
    Classifier,
    ClassifyOptions,
    ConfigError,
    DataError,
    Event,
    EventSequence,
    FaultSpec,
    FaultType,
    GeneratedTrace,
    GroundTruth,
    Layer,
    Mode,
    OrderEstimate,
    ParseError,
    PpmModel,
    ReferenceSelection,
    ReportSummary,
    SymbolTable,
    Thresholds,
    TraceLabel,
    WorkloadTemplate,
    build_background_dictionary,
    classify,
    encode,
    estimate_order,
    filter_background,
    generate_fault_free,
    generate_idle,
    ingest_spans,
    inject_fault,
    lcs,
    make_fault_free_corpus,
    make_idle_corpus,
    nlcs,
    preset,
    preset_names,
    select_reference,
    write_spans,
)

__version__ = "0.1.0"


def report_dict(report):
    """ClassificationReport as a plain dict (parsed from its JSON form)."""
    return _json.loads(report.to_json())
