"""End-to-end constrained spectral clustering of one session."""

from __future__ import annotations

import contextlib
from dataclasses import dataclass, field

import numpy as np

from .affinity import auto_tune_p, cosine_affinity, refine
from .constraints import (
    PropagationParams,
    Scenario,
    apply_constraint_update,
    build_role_constraints,
    merge_constraints,
    propagate_e2cp,
)
from .errors import InputError, NumericalError, RoleClusterError
from .spectral import (
    ClusterAssignment,
    assign_nearest,
    eigendecompose,
    estimate_num_speakers,
    kmeans,
    normalized_laplacian,
    spectral_embed,
)


@dataclass
class ClusteringConfig:
    """Hyperparameters of one clustering run.

    ``p`` / ``k`` fix the threshold percentage / speaker count; when left as
    None they are searched over ``p_range`` (inclusive start, stop, step)
    and ``k_range`` (inclusive bounds).
    """

    alpha: float = 0.5
    tau: float = 0.01
    p: float | None = None
    p_range: tuple[int, int, int] = (40, 95, 5)
    k: int | None = None
    k_range: tuple[int, int] = (2, 50)
    scenario: Scenario = Scenario.NONE
    confidence_threshold: float = 0.98
    min_words: int = 5
    seed: int = 0
    jobs: int = 1

    @property
    def p_candidates(self) -> list[float]:
        start, stop, step = self.p_range
        if step <= 0 or stop < start:
            raise InputError(f"bad p range {self.p_range}")
        values = np.arange(start, stop + step * 1e-9, step).round(9).tolist()
        return [int(v) if float(v).is_integer() else v for v in values]

    @property
    def propagation(self) -> PropagationParams:
        return PropagationParams(self.alpha, self.confidence_threshold, self.min_words)


@dataclass
class PipelineResult:
    assignment: ClusterAssignment
    p: float
    k: int
    n_constraints: int
    affinity: np.ndarray = field(repr=False)

    @property
    def labels(self) -> np.ndarray:
        return self.assignment.labels


@contextlib.contextmanager
def _stage(name: str):
    try:
        yield
    except RoleClusterError as exc:
        if exc.stage is None:
            exc.stage = name
        raise
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        raise NumericalError(str(exc), stage=name) from exc


def count_constraints(z: np.ndarray) -> int:
    """Number of constrained unordered pairs."""
    return int(np.count_nonzero(np.triu(z, 1)))


def constrained_affinity(embeddings, predictions, config: ClusteringConfig, constraints=None):
    """Affinity after constraint propagation, before any refinement.

    Returns (affinity, Z).
    """
    with _stage("cosine_affinity"):
        w_hat = cosine_affinity(embeddings)
    n = len(w_hat)
    with _stage("build_role_constraints"):
        z = build_role_constraints(predictions or [], n, config.scenario, config.propagation)
        if constraints is not None:
            z = merge_constraints(z, np.asarray(constraints, dtype=float))
    with _stage("propagate_e2cp"):
        f_star = propagate_e2cp(z, w_hat, config.alpha)
    with _stage("apply_constraint_update"):
        w = apply_constraint_update(w_hat, f_star)
    return w, z


def cluster_affinity(w, config: ClusteringConfig):
    """Refinement plus spectral steps on an already-constrained affinity.

    Returns (assignment, p, k, refined affinity).
    """
    with _stage("auto_tune_p"):
        if config.p is not None:
            p, refined = config.p, refine(w, config.p, config.tau)
        else:
            p, refined = auto_tune_p(w, config.tau, config.p_candidates, config.k,
                                     config.k_range, jobs=config.jobs)
    with _stage("normalized_laplacian"):
        lap = normalized_laplacian(refined)
    with _stage("eigendecompose"):
        spectrum = eigendecompose(lap)
    with _stage("estimate_num_speakers"):
        k = config.k if config.k is not None else estimate_num_speakers(spectrum, config.k_range)
    with _stage("spectral_embed"):
        emb = spectral_embed(spectrum, k)
    with _stage("kmeans"):
        live = ~emb.zero_rows
        if live.sum() < k:
            raise NumericalError(f"only {int(live.sum())} non-degenerate rows for k={k}")
        fit = kmeans(emb.rows[live], k, seed=config.seed)
        labels = np.empty(len(live), dtype=int)
        labels[live] = fit.labels
        if emb.degenerate:
            labels[~live] = assign_nearest(emb.rows[~live], fit.centers)
        assignment = ClusterAssignment(labels, k, fit.inertia, fit.centers,
                                       fit.degenerate or emb.degenerate)
    return assignment, p, k, refined


def run_pipeline(embeddings, predictions=None, config: ClusteringConfig | None = None,
                 constraints=None) -> PipelineResult:
    """Constrain, refine, embed and cluster one session.

    ``constraints`` is an optional explicit Z (e.g. oracle or file-supplied
    pairs) merged over the role-derived one.
    """
    config = config or ClusteringConfig()
    w, z = constrained_affinity(embeddings, predictions, config, constraints)
    assignment, p, k, refined = cluster_affinity(w, config)
    return PipelineResult(assignment, p, k, count_constraints(z), refined)


def cluster_session(embeddings, predictions=None, config: ClusteringConfig | None = None,
                    constraints=None) -> ClusterAssignment:
    return run_pipeline(embeddings, predictions, config, constraints).assignment
