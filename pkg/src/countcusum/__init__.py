"""At-most-one-changepoint analysis for daily keyword count series.

The pipeline is: parse timestamped text records, deduplicate them, count
keyword-group matches per UTC day, locate a single mean shift with the
CUSUM argmax estimator, test it, and summarise serial dependence with the
sample autocorrelation function.
"""

from .changepoint import (
    ChangepointResult,
    CusumCurve,
    SignificanceConfig,
    cusum_curve,
    detect_amoc,
    penalty_test,
    permutation_pvalue,
    pooled_variance,
)
from .diagnostics import AcfResult, acf
from .errors import (
    ConfigError,
    CountcusumError,
    ParseError,
    SeriesTooShortError,
    ZeroVarianceError,
)
from .ingest import (
    DailySeries,
    DateRange,
    KeywordGroup,
    RawRecord,
    aggregate_daily,
    dedup_records,
    match_record,
    parse_records,
)
from .report import Report, format_day, render_report
from .synth import EvalSummary, SyntheticSpec, evaluate, generate

__version__ = "0.1.0"

__all__ = [
    "AcfResult",
    "ChangepointResult",
    "ConfigError",
    "CountcusumError",
    "CusumCurve",
    "DailySeries",
    "DateRange",
    "EvalSummary",
    "KeywordGroup",
    "ParseError",
    "RawRecord",
    "Report",
    "SeriesTooShortError",
    "SignificanceConfig",
    "SyntheticSpec",
    "ZeroVarianceError",
    "acf",
    "aggregate_daily",
    "cusum_curve",
    "dedup_records",
    "detect_amoc",
    "evaluate",
    "format_day",
    "generate",
    "match_record",
    "parse_records",
    "penalty_test",
    "permutation_pvalue",
    "pooled_variance",
    "render_report",
]
