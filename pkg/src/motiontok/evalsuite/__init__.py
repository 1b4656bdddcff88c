"""Evaluation harness: features, metrics, benchmark bundles, reports."""

from .benchmark import (Benchmark, BenchmarkSizes, IDENTITY_EDIT,
                        build_benchmark, build_manifest)
from .features import FEATURE_DIM, feature_matrix, feature_vector
from .metrics import feature_frechet, joint_positions, mpjpe, retrieval
from .report import EvalReport, config_fingerprint

__all__ = [
    "Benchmark", "BenchmarkSizes", "IDENTITY_EDIT",
    "build_benchmark", "build_manifest",
    "FEATURE_DIM", "feature_matrix", "feature_vector",
    "feature_frechet", "joint_positions", "mpjpe", "retrieval",
    "EvalReport", "config_fingerprint",
]
