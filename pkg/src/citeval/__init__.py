"""citeval: citation quality evaluation and refinement for RAG responses."""

__version__ = "0.1.0"

from .config import RunConfig
from .corpus import Corpus, Sample, load_predictions, load_samples, write_report
from .entail import (
    EntailmentCache,
    EntailmentOracle,
    LexicalBackend,
    LlmJudgeBackend,
    NliHttpBackend,
    TableBackend,
    concat_passages,
    entails,
)
from .metrics import (
    CitationReport,
    citation_relevance_alce,
    citation_relevance_ours,
    corpus_citation_metrics,
    statement_recall_alce,
    statement_recall_ours,
)
from .refine import (
    RefinerRecord,
    build_refiner_dataset,
    gold_citations,
    oracle_refine,
    posthoc_cite,
    service_refine,
)
from .segment import (
    ParsedResponse,
    Statement,
    extract_citations,
    rewrite_citations,
    segment_response,
    strip_all_citations,
)
from .textmetrics import bleu4, f1, rouge_l

__all__ = [
    "RunConfig",
    "Corpus",
    "Sample",
    "load_samples",
    "load_predictions",
    "write_report",
    "EntailmentCache",
    "EntailmentOracle",
    "TableBackend",
    "LexicalBackend",
    "NliHttpBackend",
    "LlmJudgeBackend",
    "concat_passages",
    "entails",
    "CitationReport",
    "corpus_citation_metrics",
    "statement_recall_alce",
    "statement_recall_ours",
    "citation_relevance_alce",
    "citation_relevance_ours",
    "RefinerRecord",
    "gold_citations",
    "oracle_refine",
    "service_refine",
    "posthoc_cite",
    "build_refiner_dataset",
    "ParsedResponse",
    "Statement",
    "segment_response",
    "extract_citations",
    "strip_all_citations",
    "rewrite_citations",
    "bleu4",
    "rouge_l",
    "f1",
]
