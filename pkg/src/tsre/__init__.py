"""Channel-aware typical-set refinement for post-hoc OOD detection.

Operates on precomputed feature matrices and linear classifier heads:
fit per-channel statistics on ID training features, rectify activations
(ReAct / BATS / LAPS / typical-set refinement), score with energy or
softmax-based functions, and evaluate FPR95/AUROC. Includes a seeded
synthetic benchmark and a bit-exact bundle interchange format.
"""

from .core import (
    ChannelProfile,
    ClassifierHead,
    EvalReport,
    FeatureMatrix,
    HyperParams,
    LabelVector,
    Prototypes,
    ScoreSet,
    TsreError,
    TypicalSet,
    ValidationError,
    IoFailure,
    validate_bundle,
)
from .stats import (
    activity,
    channel_moments,
    channel_skewness,
    compute_prototypes,
    discriminability,
    fit_profile,
    inter_class_similarity,
    inter_class_variance,
)
from .rectifiers import (
    LapsBounds,
    ReactThreshold,
    bats_apply,
    laps_apply,
    laps_fit,
    react_apply,
    react_fit,
    tsre_apply,
    tsre_fit,
)
from .scoring import apply_head, energy_score, msp_score, score_pipeline, temp_msp_score
from .metrics import auroc, decide, evaluate, fpr_at_tpr, threshold_at_tpr
from .dataio import (
    BundleManifest,
    FittedState,
    read_bundle,
    read_profile,
    read_scores,
    write_bundle,
    write_profile,
    write_scores,
)
from .synth import ReferenceStats, SynthConfig, generate, reference_stats

__version__ = "0.1.0"
