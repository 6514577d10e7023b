"""Segment / embedding / constraint file formats and run manifests."""

from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .constraints import RolePrediction
from .errors import InputError
from .evaluation import LabeledTimeline


@dataclass(frozen=True)
class Segment:
    session_id: str
    segment_id: str
    start_s: float
    end_s: float
    speaker_id: str | None = None
    role: str | None = None
    role_confidence: float | None = None
    word_count: int | None = None
    oracle_role: str | None = None  # ground-truth role; written by the synthesizer

    def to_json(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if getattr(self, f.name) is not None}


@dataclass
class SessionBundle:
    session_id: str
    segments: list[Segment]
    embeddings: np.ndarray
    predictions: list[RolePrediction] | None = None
    reference: LabeledTimeline | None = None

    def __post_init__(self):
        if len(self.segments) != len(self.embeddings):
            raise InputError(f"session {self.session_id}: {len(self.segments)} segments "
                             f"but {len(self.embeddings)} embeddings")
        ids = [s.segment_id for s in self.segments]
        if len(set(ids)) != len(ids):
            raise InputError(f"session {self.session_id}: duplicate segment ids")
        for p in self.predictions or []:
            if not 0 <= p.segment_index < len(self.segments):
                raise InputError(f"session {self.session_id}: prediction for unknown segment {p.segment_index}")

    @property
    def segment_index(self) -> dict[str, int]:
        return {s.segment_id: i for i, s in enumerate(self.segments)}

    @property
    def oracle_roles(self) -> list[str]:
        roles = [s.oracle_role for s in self.segments]
        if any(r is None for r in roles):
            raise InputError(f"session {self.session_id}: oracle roles are missing")
        return roles


def _parse_segment(obj, where: str) -> Segment:
    if not isinstance(obj, dict):
        raise InputError(f"{where}: expected a JSON object")
    try:
        seg = Segment(
            session_id=str(obj["session_id"]),
            segment_id=str(obj["segment_id"]),
            start_s=float(obj["start_s"]),
            end_s=float(obj["end_s"]),
            speaker_id=None if obj.get("speaker_id") is None else str(obj["speaker_id"]),
            role=None if obj.get("role") is None else str(obj["role"]),
            role_confidence=None if obj.get("role_confidence") is None else float(obj["role_confidence"]),
            word_count=None if obj.get("word_count") is None else int(obj["word_count"]),
            oracle_role=None if obj.get("oracle_role") is None else str(obj["oracle_role"]),
        )
    except KeyError as exc:
        raise InputError(f"{where}: missing key {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise InputError(f"{where}: {exc}") from None
    if not seg.end_s > seg.start_s:
        raise InputError(f"{where}: end_s must exceed start_s")
    if seg.role_confidence is not None and not 0 <= seg.role_confidence <= 1:
        raise InputError(f"{where}: role_confidence outside [0, 1]")
    if seg.word_count is not None and seg.word_count < 0:
        raise InputError(f"{where}: negative word_count")
    return seg


def read_segments_jsonl(path) -> list[Segment]:
    segments = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
            segments.append(_parse_segment(obj, f"{path}:{lineno}"))
    if not segments:
        raise InputError(f"{path}: no segments")
    return segments


def write_segments_jsonl(path, segments):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for seg in segments:
            fh.write(json.dumps(seg.to_json()) + "\n")


def read_embeddings_csv(path) -> tuple[list[str], np.ndarray]:
    """Read ``segment_id, v0..v{d-1}`` rows and normalize each vector to unit length."""
    ids, rows = [], []
    dim = None
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh), 1):
            if not rec:
                continue
            if lineno == 1 and rec[0].strip() == "segment_id":
                continue
            try:
                vec = [float(v) for v in rec[1:]]
            except ValueError as exc:
                raise InputError(f"{path}:{lineno}: {exc}") from None
            if dim is None:
                dim = len(vec)
                if dim < 2:
                    raise InputError(f"{path}:{lineno}: embeddings need dimension >= 2")
            elif len(vec) != dim:
                raise InputError(f"{path}:{lineno}: dimension {len(vec)} != {dim}")
            norm = float(np.linalg.norm(vec))
            if not np.isfinite(norm) or norm == 0:
                raise InputError(f"{path}:{lineno}: zero-norm or non-finite embedding")
            ids.append(rec[0].strip())
            rows.append(np.asarray(vec) / norm)
    if not rows:
        raise InputError(f"{path}: no embeddings")
    if len(set(ids)) != len(ids):
        raise InputError(f"{path}: duplicate segment ids")
    return ids, np.vstack(rows)


def write_embeddings_csv(path, segment_ids, embeddings):
    embeddings = np.asarray(embeddings, dtype=float)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["segment_id"] + [f"v{i}" for i in range(embeddings.shape[1])])
        for sid, row in zip(segment_ids, embeddings):
            w.writerow([sid] + [repr(float(v)) for v in row])


def read_constraints_csv(path, index_of: dict[str, int], other_ids=frozenset()) -> np.ndarray:
    """Explicit ``segment_i, segment_j, kind`` pairs as a Z matrix (ML=+1, CL=-1).

    Pairs lying entirely within ``other_ids`` (segments of other sessions) are
    skipped; a pair spanning two sessions is an error.
    """
    n = len(index_of)
    z = np.zeros((n, n))
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh), 1):
            if not rec:
                continue
            rec = [r.strip() for r in rec]
            if lineno == 1 and rec[:3] == ["segment_i", "segment_j", "kind"]:
                continue
            if len(rec) < 3:
                raise InputError(f"{path}:{lineno}: expected segment_i, segment_j, kind")
            a, b, kind = rec[:3]
            if a in other_ids and b in other_ids:
                continue
            if (a in other_ids) != (b in other_ids):
                raise InputError(f"{path}:{lineno}: pair ({a}, {b}) spans two sessions")
            if a not in index_of or b not in index_of:
                raise InputError(f"{path}:{lineno}: unknown segment id")
            if kind not in ("ML", "CL"):
                raise InputError(f"{path}:{lineno}: kind must be ML or CL, got {kind!r}")
            i, j = index_of[a], index_of[b]
            if i == j:
                raise InputError(f"{path}:{lineno}: self-constraint")
            val = 1.0 if kind == "ML" else -1.0
            if z[i, j] == -val:
                raise InputError(f"{path}:{lineno}: pair ({a}, {b}) is both ML and CL")
            z[i, j] = z[j, i] = val
    return z


def predictions_from_segments(segments) -> list[RolePrediction]:
    """Segments with a role and confidence become predictions; missing word counts count as 0."""
    preds = []
    for i, seg in enumerate(segments):
        if seg.role is None or seg.role_confidence is None:
            continue
        preds.append(RolePrediction(i, seg.role, seg.role_confidence, seg.word_count or 0))
    return preds


def reference_from_segments(segments) -> LabeledTimeline | None:
    if any(s.speaker_id is None for s in segments):
        return None
    return LabeledTimeline((s.start_s, s.end_s, s.speaker_id) for s in segments)


def load_bundles(segments_path, embeddings_path) -> list[SessionBundle]:
    """Group segments by session and attach their embeddings by segment id."""
    segments = read_segments_jsonl(segments_path)
    ids, emb = read_embeddings_csv(embeddings_path)
    row_of = {sid: i for i, sid in enumerate(ids)}
    by_session: dict[str, list[Segment]] = {}
    for seg in segments:
        by_session.setdefault(seg.session_id, []).append(seg)
    seen = [s.segment_id for s in segments]
    if len(set(seen)) != len(seen):
        raise InputError(f"{segments_path}: duplicate segment ids")
    missing = [sid for sid in seen if sid not in row_of]
    if missing:
        raise InputError(f"{embeddings_path}: no embedding for segment {missing[0]!r}")
    if len(ids) != len(seen):
        extra = sorted(set(ids) - set(seen))
        raise InputError(f"{embeddings_path}: embedding for unknown segment {extra[0]!r}")
    bundles = []
    for sid in sorted(by_session):
        segs = by_session[sid]
        bundles.append(SessionBundle(
            session_id=sid,
            segments=segs,
            embeddings=emb[[row_of[s.segment_id] for s in segs]],
            predictions=predictions_from_segments(segs),
            reference=reference_from_segments(segs),
        ))
    return bundles


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_manifest(path, *, command: str, config: dict, seed: int, inputs, outputs,
                   sessions: list[dict], version: str):
    """Run manifest listing a SHA-256 digest for every input and emitted file."""
    path = Path(path)
    manifest = {
        "toolkit_version": version,
        "command": command,
        "config": config,
        "seed": seed,
        "inputs": {str(p): sha256_file(p) for p in inputs},
        "outputs": {os.path.relpath(p, path.parent): sha256_file(p) for p in outputs},
        "sessions": sessions,
    }
    write_json(path, manifest)
    return manifest
