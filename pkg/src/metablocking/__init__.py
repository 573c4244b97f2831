"""Generalized supervised meta-blocking for entity resolution.

Refines a redundancy-positive block collection: every candidate pair becomes
a vector of co-occurrence features, a probabilistic classifier scores it, and
a weight- or cardinality-based algorithm prunes the low-probability pairs.
"""

from .blocking import (
    block_filtering,
    block_purging,
    extract_candidates,
    token_blocking,
)
from .classifier import (
    LogisticRegressionScorer,
    TrainedModel,
    TrainingSet,
    predict,
    sample_training,
    score_pairs,
    train,
)
from .evaluation import (
    EvaluationReport,
    evaluate,
    feature_subset_search,
    speedup,
    training_sweep,
)
from .model import (
    Block,
    BlockCollection,
    CandidatePair,
    EntityProfile,
    GroundTruth,
    Label,
    Source,
    label,
)
from .pipeline import GeneralizedMetaBlocker, PipelineConfig, run_pipeline
from .pruning import (
    PruningAlgorithm,
    PruningConfig,
    bcl,
    blast,
    cep,
    cnp,
    prune,
    rcnp,
    rwnp,
    wep,
    wnp,
)
from .weighting import (
    BLAST_SET,
    LEGACY_SET,
    RCNP_SET,
    FeatureId,
    FeatureSet,
    cf_ibf,
    ejs,
    featurize,
    js,
    lcp,
    nrs,
    raccb,
    rs,
    wjs,
)

__version__ = "0.1.0"
