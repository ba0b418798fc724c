"""Restricted Boltzmann machine training and feature extraction.

Thin python layer over the C++ core: binary RBMs, Gaussian-Bernoulli RBMs,
multivariate-Gaussian RBMs, CD/PCD training, an exact enumeration oracle for
desk-scale models, and the context-stack / normalize / extract / PCA feature
pipeline.
"""

from ._core import (
    Algo,
    BNorm,
    EdgePolicy,
    EpochRecord,
    GrbmParams,
    Layout,
    MgrbmParams,
    ModelFile,
    NormStats,
    PcaModel,
    RbmParams,
    Rng,
    StackSpec,
    TrainConfig,
    apply_normalizer,
    energy,
    exact_log_partition,
    exact_loglik,
    extract,
    fit_normalizer,
    free_energy,
    gibbs_sweep,
    hidden_dim,
    hidden_posterior,
    hidden_posterior_batch,
    hidden_preactivation,
    load_model,
    load_pca,
    mgrbm_from_grbm,
    model_kind,
    pca_apply,
    pca_fit,
    read_frames,
    sample_dataset,
    sample_hidden,
    sample_visible,
    sample_visible_batch,
    save_model,
    save_pca,
    stack_context,
    train,
    validate,
    visible_dim,
    write_frames,
)

__all__ = [
    "Algo",
    "BNorm",
    "EdgePolicy",
    "EpochRecord",
    "GrbmParams",
    "Layout",
    "MgrbmParams",
    "ModelFile",
    "NormStats",
    "PcaModel",
    "RbmParams",
    "Rng",
    "StackSpec",
    "TrainConfig",
    "apply_normalizer",
    "energy",
    "exact_log_partition",
    "exact_loglik",
    "extract",
    "fit_normalizer",
    "free_energy",
    "gibbs_sweep",
    "hidden_dim",
    "hidden_posterior",
    "hidden_posterior_batch",
    "hidden_preactivation",
    "load_model",
    "load_pca",
    "mgrbm_from_grbm",
    "model_kind",
    "pca_apply",
    "pca_fit",
    "read_frames",
    "sample_dataset",
    "sample_hidden",
    "sample_visible",
    "sample_visible_batch",
    "save_model",
    "save_pca",
    "stack_context",
    "train",
    "validate",
    "visible_dim",
    "write_frames",
]

__version__ = "0.1.0"
