"""Role-constrained spectral clustering for speaker diarization."""

__version__ = "0.1.0"

from .affinity import auto_tune_p, cosine_affinity, p_threshold, symmetrize
from .constraints import (
    PropagationParams,
    RolePrediction,
    Scenario,
    apply_constraint_update,
    build_role_constraints,
    propagate_e2cp,
)
from .errors import InputError, NumericalError, RoleClusterError
from .evaluation import DerReport, LabeledTimeline, compute_der, optimal_speaker_mapping
from .pipeline import ClusteringConfig, cluster_session, run_pipeline
from .spectral import eigendecompose, estimate_num_speakers, kmeans, normalized_laplacian, spectral_embed
from .synthesis import SynthConfig, generate_session, sample_oracle_constraints, simulate_role_classifier

__all__ = [
    "ClusteringConfig",
    "DerReport",
    "InputError",
    "LabeledTimeline",
    "NumericalError",
    "PropagationParams",
    "RoleClusterError",
    "RolePrediction",
    "Scenario",
    "SynthConfig",
    "apply_constraint_update",
    "auto_tune_p",
    "build_role_constraints",
    "cluster_session",
    "compute_der",
    "cosine_affinity",
    "eigendecompose",
    "estimate_num_speakers",
    "generate_session",
    "kmeans",
    "normalized_laplacian",
    "optimal_speaker_mapping",
    "p_threshold",
    "propagate_e2cp",
    "run_pipeline",
    "sample_oracle_constraints",
    "simulate_role_classifier",
    "spectral_embed",
    "symmetrize",
]
