"""Role-derived must-link / cannot-link constraints and their propagation."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InputError, InternalError, NumericalError


class Scenario(enum.Enum):
    """Which constraint types the role/speaker relationship justifies."""

    NONE = "none"
    CL_ONLY = "cl"  # different roles are always different speakers
    ML_ONLY = "ml"  # different speakers always play different roles
    BOTH = "both"  # one-to-one roles and speakers

    @property
    def uses_cl(self) -> bool:
        return self in (Scenario.CL_ONLY, Scenario.BOTH)

    @property
    def uses_ml(self) -> bool:
        return self in (Scenario.ML_ONLY, Scenario.BOTH)


@dataclass(frozen=True)
class RolePrediction:
    segment_index: int
    role: str
    confidence: float
    word_count: int = 0

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise InputError(f"segment {self.segment_index}: confidence {self.confidence} outside [0, 1]")
        if self.confidence > 0 and not self.role:
            raise InputError(f"segment {self.segment_index}: empty role with non-zero confidence")
        if self.word_count < 0:
            raise InputError(f"segment {self.segment_index}: negative word count")


@dataclass(frozen=True)
class PropagationParams:
    alpha: float = 0.5
    confidence_threshold: float = 0.98
    min_words: int = 5

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise InputError(f"alpha={self.alpha} outside [0, 1]")
        if not 0.0 <= self.confidence_threshold <= 1.0:
            raise InputError(f"confidence threshold {self.confidence_threshold} outside [0, 1]")
        if self.min_words < 0:
            raise InputError("min_words must be >= 0")


def is_eligible(pred: RolePrediction, params: PropagationParams) -> bool:
    return pred.confidence >= params.confidence_threshold and pred.word_count >= params.min_words


def build_role_constraints(predictions, n: int, scenario: Scenario,
                           params: PropagationParams = PropagationParams()) -> np.ndarray:
    """Constraint matrix Z in {-1, 0, +1} from confidently predicted roles."""
    z = np.zeros((n, n))
    seen = set()
    for pred in predictions:
        if not 0 <= pred.segment_index < n:
            raise InputError(f"prediction for segment {pred.segment_index} outside [0, {n})")
        if pred.segment_index in seen:
            raise InputError(f"duplicate prediction for segment {pred.segment_index}")
        seen.add(pred.segment_index)
    if scenario is Scenario.NONE:
        return z
    eligible = [p for p in predictions if is_eligible(p, params)]
    if len(eligible) < 2:
        return z
    idx = np.array([p.segment_index for p in eligible])
    roles = np.array([p.role for p in eligible], dtype=object)
    same = roles[:, None] == roles[None, :]
    block = np.zeros(same.shape)
    if scenario.uses_ml:
        block[same] = 1.0
    if scenario.uses_cl:
        block[~same] = -1.0
    z[np.ix_(idx, idx)] = block
    np.fill_diagonal(z, 0.0)
    return z


def merge_constraints(z_roles: np.ndarray, z_explicit: np.ndarray) -> np.ndarray:
    """Overlay explicit constraints on role-derived ones; opposite signs are an error."""
    if z_roles.shape != z_explicit.shape:
        raise InputError(f"constraint shapes differ: {z_roles.shape} vs {z_explicit.shape}")
    clash = (z_roles * z_explicit) < 0
    if clash.any():
        i, j = np.argwhere(clash)[0]
        raise InputError(f"explicit constraint on ({i}, {j}) contradicts the role-derived one")
    return np.where(z_explicit != 0, z_explicit, z_roles)


def _normalized_affinity(w_hat: np.ndarray) -> np.ndarray:
    degrees = w_hat.sum(axis=1)
    if np.any(degrees <= 0):
        raise InputError("affinity has a zero-degree row")
    s = 1.0 / np.sqrt(degrees)
    return s[:, None] * w_hat * s[None, :]


def propagate_e2cp(z, w_hat, alpha: float) -> np.ndarray:
    """Spread the sparse constraints in ``z`` over the affinity graph ``w_hat``.

    Computes (1-alpha)^2 (I - alpha Lbar)^-1 Z (I - alpha Lbar)^-1 with
    Lbar = D^-1/2 W D^-1/2, via a Cholesky factorization instead of an
    explicit inverse, and clamps the result to [-1, 1]. alpha = 1 returns the
    zero matrix, which is the limit of the closed form.
    """
    z = np.asarray(z, dtype=float)
    w_hat = np.asarray(w_hat, dtype=float)
    if z.shape != w_hat.shape or z.ndim != 2 or z.shape[0] != z.shape[1]:
        raise InputError(f"shape mismatch: Z {z.shape}, affinity {w_hat.shape}")
    if not 0.0 <= alpha <= 1.0:
        raise InputError(f"alpha={alpha} outside [0, 1]")
    n = len(z)
    if alpha == 1.0 or not z.any():
        return np.zeros_like(z)
    if alpha == 0.0:
        return np.clip(z, -1.0, 1.0)
    system = np.eye(n) - alpha * _normalized_affinity(w_hat)
    try:
        factor = scipy.linalg.cho_factor(system)
        left = scipy.linalg.cho_solve(factor, z)  # A^-1 Z
        f = scipy.linalg.cho_solve(factor, left.T).T  # (A^-1 Z) A^-1, A symmetric
    except (np.linalg.LinAlgError, ValueError) as exc:
        cond = np.linalg.cond(system)
        raise NumericalError(f"propagation system is singular (condition {cond:.3g}): {exc}") from None
    f *= (1.0 - alpha) ** 2
    if not np.all(np.isfinite(f)):
        raise NumericalError(f"non-finite propagated constraints (condition {np.linalg.cond(system):.3g})")
    return np.clip(f, -1.0, 1.0)


def apply_constraint_update(w_hat, f_star) -> np.ndarray:
    """Pull affinities towards 1 where F* > 0 and towards 0 where F* < 0."""
    w_hat = np.asarray(w_hat, dtype=float)
    f = np.asarray(f_star, dtype=float)
    if w_hat.shape != f.shape:
        raise InputError(f"shape mismatch: affinity {w_hat.shape}, F* {f.shape}")
    if f.size and (f.min() < -1 or f.max() > 1):
        raise InternalError("propagated constraints escaped [-1, 1]")
    # w + f(1-w) == 1 - (1-f)(1-w), written so that f == 0 leaves w bit-identical
    w = np.where(f >= 0, w_hat + f * (1.0 - w_hat), w_hat + f * w_hat)
    w = np.clip(0.5 * (w + w.T), 0.0, 1.0)
    np.fill_diagonal(w, 1.0)
    return w
