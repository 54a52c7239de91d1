"""kgdedup: duplication detection and fusion for knowledge graphs."""

from .model import (
    ConstraintViolation,
    Entity,
    EntityId,
    EquivalenceSet,
    PropertyValue,
    Provenance,
    SameAsAssertion,
    Verdict,
    canonical_pair,
    detect_violations,
    equivalence_classes,
)
from .cleaners import CleanerChain, clean
from .metrics import Combinator, Comparator, Leaf, comparator, evaluate_tree
from .blocking import BlockingSpec, naive_pairs, sorted_neighborhood, standard_blocking
from .ingest import Dataset, SchemaMapping, apply_mapping, parse_csv, parse_rdf
from .pipeline import MatchConfig, RunReport, run_dedup, run_linkage
from .evaluate import (
    EvalReport,
    GAParams,
    GoldStandard,
    feature_report,
    learn_config,
    next_candidates_for_labeling,
    score,
    submit_label,
    threshold_sweep,
)
from .fusion import FusedEntity, FusionPolicy, FusionRule, fuse_class, resolve_overrides
from .synthetic import SyntheticSpec, generate_synthetic

__version__ = "0.1.0"

__all__ = [
    "BlockingSpec", "CleanerChain", "Combinator", "Comparator",
    "ConstraintViolation", "Dataset", "Entity", "EntityId", "EquivalenceSet",
    "EvalReport", "FusedEntity", "FusionPolicy", "FusionRule", "GAParams",
    "GoldStandard", "Leaf", "MatchConfig", "PropertyValue", "Provenance",
    "RunReport", "SameAsAssertion", "SchemaMapping", "SyntheticSpec",
    "Verdict", "apply_mapping", "canonical_pair", "clean", "comparator",
    "detect_violations", "equivalence_classes", "evaluate_tree",
    "feature_report", "fuse_class", "generate_synthetic", "learn_config",
    "naive_pairs", "next_candidates_for_labeling", "parse_csv", "parse_rdf",
    "resolve_overrides", "run_dedup", "run_linkage", "score",
    "sorted_neighborhood", "standard_blocking", "submit_label",
    "threshold_sweep",
]
