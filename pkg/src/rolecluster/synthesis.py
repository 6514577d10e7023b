"""Seeded synthetic sessions and a calibrated role-classifier simulator."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .constraints import RolePrediction, Scenario
from .errors import InputError
from .evaluation import LabeledTimeline
from .io import Segment

MAX_CENTROID_ATTEMPTS = 10_000
HOST, NON_HOST = "host", "non-host"


class RoleScheme(enum.Enum):
    ONE_TO_ONE = "one-to-one"  # role == speaker (dyadic clinical sessions)
    HOST_VS_REST = "host-vs-rest"  # speaker 0 is the host, everyone else non-host


def derive_seed(seed: int, *keys: int) -> int:
    """Stable 32-bit child seed for (seed, keys...)."""
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1)[0])


@dataclass
class SynthConfig:
    n_speakers: int = 2
    segments_per_speaker: int = 20
    dim: int = 16
    noise_sigma: float = 0.1
    role_scheme: RoleScheme = RoleScheme.ONE_TO_ONE
    classifier_accuracy_floor: float = 0.5
    seed: int = 0
    max_centroid_cosine: float = 0.3
    session_id: str = "session"

    def __post_init__(self):
        self.role_scheme = RoleScheme(self.role_scheme)
        if self.n_speakers < 2:
            raise InputError("n_speakers must be >= 2")
        if self.segments_per_speaker < 1:
            raise InputError("segments_per_speaker must be >= 1")
        if self.dim < 2:
            raise InputError("dim must be >= 2")
        if self.noise_sigma < 0:
            raise InputError("noise_sigma must be >= 0")
        if not 0.5 <= self.classifier_accuracy_floor <= 1.0:
            raise InputError("classifier_accuracy_floor must be in [0.5, 1]")
        if not -1.0 <= self.max_centroid_cosine <= 1.0:
            raise InputError("max_centroid_cosine must be in [-1, 1]")

    @property
    def role_names(self) -> tuple[str, ...]:
        if self.role_scheme is RoleScheme.HOST_VS_REST:
            return (HOST, NON_HOST)
        return tuple(f"role{s}" for s in range(self.n_speakers))


@dataclass
class SynthSession:
    session_id: str
    segments: list[Segment]
    embeddings: np.ndarray
    predictions: list[RolePrediction] = field(default_factory=list)
    role_names: tuple[str, ...] = ()

    @property
    def speakers(self) -> list[str]:
        return [s.speaker_id for s in self.segments]

    @property
    def oracle_roles(self) -> list[str]:
        return [s.oracle_role for s in self.segments]

    @property
    def reference(self) -> LabeledTimeline:
        return LabeledTimeline((s.start_s, s.end_s, s.speaker_id) for s in self.segments)


def _draw_centroids(n: int, dim: int, max_cos: float, rng: np.random.Generator) -> np.ndarray:
    centroids = []
    for _ in range(MAX_CENTROID_ATTEMPTS):
        v = rng.standard_normal(dim)
        v /= np.linalg.norm(v)
        if all(float(v @ c) <= max_cos for c in centroids):
            centroids.append(v)
            if len(centroids) == n:
                return np.array(centroids)
    raise InputError(f"could not place {n} speaker centroids with pairwise cosine <= {max_cos} "
                     f"in {dim} dimensions after {MAX_CENTROID_ATTEMPTS} attempts")


def generate_session(config: SynthConfig) -> SynthSession:
    rng = np.random.default_rng(config.seed)
    centroids = _draw_centroids(config.n_speakers, config.dim, config.max_centroid_cosine, rng)
    speakers = np.repeat(np.arange(config.n_speakers), config.segments_per_speaker)
    speakers = rng.permutation(speakers)
    n = len(speakers)
    x = centroids[speakers] + config.noise_sigma * rng.standard_normal((n, config.dim))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    durations = np.round(rng.uniform(3.0, 15.0, n), 3)
    words = rng.integers(1, 46, n)
    roles = config.role_names
    segments = []
    t = 0.0
    for i, (spk, dur, wc) in enumerate(zip(speakers, durations, words)):
        end = round(t + dur, 3)
        if config.role_scheme is RoleScheme.HOST_VS_REST:
            role = HOST if spk == 0 else NON_HOST
        else:
            role = roles[spk]
        segments.append(Segment(config.session_id, f"{config.session_id}-{i:04d}", t, end,
                                speaker_id=f"spk{spk}", word_count=int(wc), oracle_role=role))
        t = end
    session = SynthSession(config.session_id, segments, x, [], roles)
    if len(roles) == 2:
        session.predictions = simulate_role_classifier(
            session, config.classifier_accuracy_floor, derive_seed(config.seed, 1))
        session.segments = [replace(seg, role=pred.role, role_confidence=pred.confidence)
                            for seg, pred in zip(session.segments, session.predictions)]
    return session


def simulate_role_classifier(session: SynthSession, accuracy_floor: float, seed: int) -> list[RolePrediction]:
    """Binary role predictions whose confidence equals their probability of being right.

    Each segment draws a reliability r ~ U[accuracy_floor, 1], reports it as
    the confidence, and emits the true role with probability r.
    """
    if not 0.5 <= accuracy_floor <= 1.0:
        raise InputError("accuracy_floor must be in [0.5, 1]")
    names = session.role_names or tuple(sorted(set(session.oracle_roles)))
    if len(names) != 2:
        raise InputError(f"role simulator needs a binary role scheme, got {len(names)} roles")
    rng = np.random.default_rng(seed)
    n = len(session.segments)
    r = rng.uniform(accuracy_floor, 1.0, n)
    correct = rng.random(n) < r
    preds = []
    for i, seg in enumerate(session.segments):
        truth = seg.oracle_role
        other = names[1] if truth == names[0] else names[0]
        preds.append(RolePrediction(i, truth if correct[i] else other, float(r[i]), seg.word_count or 0))
    return preds


def sample_oracle_constraints(session, fraction: float, scenario: Scenario, seed: int) -> np.ndarray:
    """Oracle-role Z with a uniformly sampled fraction of the admissible pairs.

    Samples are prefixes of one seeded permutation, so for a fixed seed the
    pair sets are nested as ``fraction`` grows.
    """
    if not 0.0 <= fraction <= 1.0:
        raise InputError(f"fraction {fraction} outside [0, 1]")
    roles = np.array(session.oracle_roles, dtype=object)
    n = len(roles)
    iu, ju = np.triu_indices(n, 1)
    same = roles[iu] == roles[ju]
    admissible = (same & scenario.uses_ml) | (~same & scenario.uses_cl)
    iu, ju, same = iu[admissible], ju[admissible], same[admissible]
    m = len(iu)
    take = math.floor(fraction * m + 1e-9)
    pick = np.random.default_rng(seed).permutation(m)[:take]
    z = np.zeros((n, n))
    vals = np.where(same[pick], 1.0, -1.0)
    z[iu[pick], ju[pick]] = vals
    z[ju[pick], iu[pick]] = vals
    return z
