"""Tunable GMM kernels and their linearization by consistent weighted sampling."""

__version__ = "0.1.0"

from .encoding import GCWSEncoder, dot_estimate, encode, encode_dataset
from .gcws import Mode, Sampler, estimate_ggmm, estimate_pgmm, gamma_sketch, gcws_hash, sketch
from .kernels import Family, KernelSpec, evaluate, gmm, gram, kernel, pairwise_gmm
from .linear import OneVsRestLogisticRegression, evaluate_accuracy, predict, train
from .vectors import LabeledDataset, SignSplitter, SparseVector, TransformedVector, transform

__all__ = [
    "Family",
    "GCWSEncoder",
    "KernelSpec",
    "LabeledDataset",
    "Mode",
    "OneVsRestLogisticRegression",
    "Sampler",
    "SignSplitter",
    "SparseVector",
    "TransformedVector",
    "dot_estimate",
    "encode",
    "encode_dataset",
    "estimate_ggmm",
    "estimate_pgmm",
    "evaluate",
    "evaluate_accuracy",
    "gamma_sketch",
    "gcws_hash",
    "gmm",
    "gram",
    "kernel",
    "pairwise_gmm",
    "predict",
    "sketch",
    "train",
    "transform",
]
