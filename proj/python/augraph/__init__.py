"""Facial action unit detection from video: graph-based model core.

The heavy lifting lives in the compiled `_core` extension; this package
re-exports its public surface.
"""

from ._core import (
    CLIP_LENGTH,
    ConfigError,
    Detector,
    MaskedAutoencoder,
    RuntimeFault,
    __version__,
    au_names,
    cosine_warmup_lr,
    detection_loss,
    evaluate_dataset,
    f1_report,
    generate_synthetic,
    knn_graph,
    masked_mse,
    sample_mask,
    segment_plan,
    similarity_scores,
)

__all__ = [
    "CLIP_LENGTH",
    "ConfigError",
    "Detector",
    "MaskedAutoencoder",
    "RuntimeFault",
    "__version__",
    "au_names",
    "cosine_warmup_lr",
    "detection_loss",
    "evaluate_dataset",
    "f1_report",
    "generate_synthetic",
    "knn_graph",
    "masked_mse",
    "sample_mask",
    "segment_plan",
    "similarity_scores",
]
