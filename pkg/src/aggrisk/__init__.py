"""Parallel aggregate risk analysis for reinsurance portfolios.

Simulates trial-years of event occurrences (a year event table) against
event loss tables under layered occurrence/aggregate terms, producing year
loss tables and the tail metrics PML and TVAR, at interactive speed.
"""

from .engine import (
    DEFAULT_CHUNK_SIZE,
    HAVE_COMPILED,
    UNCHUNKED,
    EngineConfig,
    RunStats,
    analyse_trial,
    apply_aggregate_terms,
    apply_financial_terms,
    apply_occurrence_terms,
    price_layer,
    run_aggregate_analysis,
    run_aggregate_analysis_with_stats,
    run_chunked,
)
from .errors import (
    AggriskError,
    DataFormatError,
    EventOutOfRangeError,
    FormatMismatchError,
    PortfolioInvalidError,
    TruncatedPayloadError,
    VersionMismatchError,
)
from .generate import (
    GeneratorSpec,
    generate_elt,
    generate_layer,
    generate_portfolio,
    generate_yet,
)
from .metrics import EPCurve, ep_curve, pml, portfolio_rollup, tvar
from .model import (
    MAX_TRIAL_LENGTH,
    UNLIMITED,
    EventLossTable,
    EventOccurrence,
    FinancialTerms,
    Layer,
    LayerTerms,
    Trial,
    Violation,
    YearEventTable,
    YearLossTable,
    validate_elt,
    validate_portfolio,
)
from .tables import (
    BYTES_PER_SLOT,
    DirectAccessTable,
    MemoryFootprint,
    TableSet,
    build_direct_table,
    lookup,
    memory_footprint,
)

__version__ = "0.1.0"

__all__ = [
    "AggriskError",
    "BYTES_PER_SLOT",
    "DEFAULT_CHUNK_SIZE",
    "DataFormatError",
    "DirectAccessTable",
    "EPCurve",
    "EngineConfig",
    "EventLossTable",
    "EventOccurrence",
    "EventOutOfRangeError",
    "FinancialTerms",
    "FormatMismatchError",
    "GeneratorSpec",
    "HAVE_COMPILED",
    "Layer",
    "LayerTerms",
    "MAX_TRIAL_LENGTH",
    "MemoryFootprint",
    "PortfolioInvalidError",
    "RunStats",
    "TableSet",
    "Trial",
    "TruncatedPayloadError",
    "UNCHUNKED",
    "UNLIMITED",
    "VersionMismatchError",
    "Violation",
    "YearEventTable",
    "YearLossTable",
    "analyse_trial",
    "apply_aggregate_terms",
    "apply_financial_terms",
    "apply_occurrence_terms",
    "build_direct_table",
    "ep_curve",
    "generate_elt",
    "generate_layer",
    "generate_portfolio",
    "generate_yet",
    "lookup",
    "memory_footprint",
    "pml",
    "portfolio_rollup",
    "price_layer",
    "run_aggregate_analysis",
    "run_aggregate_analysis_with_stats",
    "run_chunked",
    "tvar",
    "validate_elt",
    "validate_portfolio",
    "__version__",
]
