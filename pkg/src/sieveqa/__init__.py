"""Retrieval-gated multiple-choice question answering over long documents.

The pipeline scores every sentence of a document against the question,
keeps the top-k in document order, trims the result to a hard token
budget, and answers from that reduced context with one or more readers
combined by an ensemble rule.
"""

from .corpus import (
    Dataset,
    Document,
    QAItem,
    Sentence,
    StatsReport,
    Token,
    dataset_stats,
    load_dataset,
    save_dataset,
    segment_sentences,
    tokenize,
    word_count,
)
from .ensemble import EnsembleConfig, aggregate_probabilities, majority_vote
from .errors import (
    DimensionMismatchError,
    ParseError,
    ProviderUnavailableError,
    ReaderUnavailableError,
    SchemaError,
    SieveqaError,
    UnknownQidError,
    ZeroVectorError,
)
from .evaluation import (
    EvalReport,
    TraceReport,
    emit_report,
    evaluate,
    selection_recall,
    trace,
    write_predictions,
)
from .pipeline import ItemResult, Pipeline
from .reader import ChoiceDistribution, HttpReader, LexicalReader, Reader, predict, softmax
from .selector import (
    BudgetConfig,
    QueryText,
    ScoredSentence,
    SelectedContext,
    TruncationAction,
    Vocabulary,
    build_query,
    enforce_token_budget,
    select_top_k,
)
from .similarity import (
    EmbeddingProvider,
    EmbeddingVector,
    HashedTfidfProvider,
    RemoteEmbeddingProvider,
    SimilarityMember,
    SimilarityModelConfig,
    cosine_similarity,
    levenshtein_similarity,
    normalize_scores,
    qgram_similarity,
    score_sentences,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetConfig",
    "ChoiceDistribution",
    "Dataset",
    "DimensionMismatchError",
    "Document",
    "EmbeddingProvider",
    "EmbeddingVector",
    "EnsembleConfig",
    "EvalReport",
    "HashedTfidfProvider",
    "HttpReader",
    "ItemResult",
    "LexicalReader",
    "ParseError",
    "Pipeline",
    "ProviderUnavailableError",
    "QAItem",
    "QueryText",
    "Reader",
    "ReaderUnavailableError",
    "RemoteEmbeddingProvider",
    "SchemaError",
    "ScoredSentence",
    "SelectedContext",
    "Sentence",
    "SieveqaError",
    "SimilarityMember",
    "SimilarityModelConfig",
    "StatsReport",
    "Token",
    "TraceReport",
    "TruncationAction",
    "UnknownQidError",
    "Vocabulary",
    "ZeroVectorError",
    "aggregate_probabilities",
    "build_query",
    "cosine_similarity",
    "dataset_stats",
    "emit_report",
    "enforce_token_budget",
    "evaluate",
    "levenshtein_similarity",
    "load_dataset",
    "majority_vote",
    "normalize_scores",
    "predict",
    "qgram_similarity",
    "save_dataset",
    "score_sentences",
    "segment_sentences",
    "select_top_k",
    "selection_recall",
    "softmax",
    "tokenize",
    "trace",
    "word_count",
    "write_predictions",
]
