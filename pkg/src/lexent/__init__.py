"""Homophony and phonotactic entropy toolkit.

Measures how much a lexicon collides (sample Rényi entropy over wordform
multiplicities), how much an autoregressive phonotactic model would collide
(collision entropy over a truncated support, with a certified error bound),
and whether the two are statistically compatible (Monte Carlo null test).
"""

from .core import (
    BOW_SYMBOL,
    EOW_SYMBOL,
    Alphabet,
    DataError,
    Lexicon,
    LexiconEntry,
    MorphStatus,
    Wordform,
    logsumexp2,
    multiplicity_table,
    read_lexicon,
    write_lexicon,
)
from .data import (
    IngestReport,
    SplitSpec,
    build_alphabet,
    ingest,
    read_split_manifest,
    split,
    write_split_manifest,
)
from .entropy import (
    NO_COLLISION,
    BudgetExceededError,
    EntropyEstimate,
    EnumerationResult,
    McShannonEstimate,
    NoCollision,
    SupportAccumulators,
    SupportThresholdError,
    enumerate_support,
    family_distribution,
    finite_renyi,
    square_mass_bound_check,
    mc_shannon,
    renyi_from_multiplicities,
    sample_renyi,
    certificate_width,
    truncated_h2,
)
from .lm import (
    OVERFLOW,
    FiniteDistribution,
    LstmModel,
    NGramModel,
    Overflow,
    PhonotacticModel,
    TabularModel,
    WeightDimensionError,
    WeightFileError,
    WeightSchemaError,
    NonFiniteWeightError,
    load_model,
    train_ngram,
)
from .nulltest import NullTestResult, null_test, sample_lexicon

__version__ = "0.1.0"

__all__ = [
    "Alphabet",
    "BOW_SYMBOL",
    "BudgetExceededError",
    "DataError",
    "EOW_SYMBOL",
    "EntropyEstimate",
    "EnumerationResult",
    "FiniteDistribution",
    "IngestReport",
    "Lexicon",
    "LexiconEntry",
    "LstmModel",
    "McShannonEstimate",
    "MorphStatus",
    "NGramModel",
    "NO_COLLISION",
    "NoCollision",
    "NonFiniteWeightError",
    "NullTestResult",
    "OVERFLOW",
    "Overflow",
    "PhonotacticModel",
    "SplitSpec",
    "SupportAccumulators",
    "SupportThresholdError",
    "TabularModel",
    "WeightDimensionError",
    "WeightFileError",
    "WeightSchemaError",
    "Wordform",
    "build_alphabet",
    "enumerate_support",
    "family_distribution",
    "finite_renyi",
    "ingest",
    "read_split_manifest",
    "square_mass_bound_check",
    "load_model",
    "logsumexp2",
    "mc_shannon",
    "multiplicity_table",
    "null_test",
    "read_lexicon",
    "renyi_from_multiplicities",
    "sample_lexicon",
    "sample_renyi",
    "split",
    "write_split_manifest",
    "certificate_width",
    "train_ngram",
    "truncated_h2",
    "write_lexicon",
    "__version__",
]
