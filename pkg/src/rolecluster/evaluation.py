"""Diarization error rate scoring and RTTM input/output."""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import InputError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Turn:
    start: float
    end: float
    label: str


class LabeledTimeline:
    """Speaker turns; overlapping or touching same-label turns are merged."""

    def __init__(self, turns=()):
        by_label = defaultdict(list)
        for t in turns:
            start, end, label = (t.start, t.end, t.label) if isinstance(t, Turn) else t
            start, end, label = float(start), float(end), str(label)
            if not end > start:
                raise InputError(f"turn {label!r} [{start}, {end}) has non-positive duration")
            if not label:
                raise InputError("turn with empty label")
            by_label[label].append((start, end))
        merged = []
        for label, spans in by_label.items():
            spans.sort()
            cur_s, cur_e = spans[0]
            for s, e in spans[1:]:
                if s <= cur_e:
                    cur_e = max(cur_e, e)
                else:
                    merged.append(Turn(cur_s, cur_e, label))
                    cur_s, cur_e = s, e
            merged.append(Turn(cur_s, cur_e, label))
        self.turns = sorted(merged, key=lambda t: (t.start, t.end, t.label))

    @property
    def labels(self) -> list[str]:
        return sorted({t.label for t in self.turns})

    def __len__(self):
        return len(self.turns)

    def __iter__(self):
        return iter(self.turns)

    def __eq__(self, other):
        return isinstance(other, LabeledTimeline) and self.turns == other.turns

    def __repr__(self):
        return f"LabeledTimeline({len(self.turns)} turns, labels={self.labels})"


@dataclass(frozen=True)
class DerReport:
    false_alarm_s: float
    missed_s: float
    confusion_s: float
    scored_s: float
    der: float

    @classmethod
    def from_durations(cls, false_alarm_s, missed_s, confusion_s, scored_s):
        if scored_s <= 0:
            raise InputError("no scored reference speech")
        der = (false_alarm_s + missed_s + confusion_s) / scored_s
        return cls(false_alarm_s, missed_s, confusion_s, scored_s, der)

    def to_dict(self) -> dict:
        return asdict(self)

    def __add__(self, other: "DerReport") -> "DerReport":
        return DerReport.from_durations(self.false_alarm_s + other.false_alarm_s,
                                        self.missed_s + other.missed_s,
                                        self.confusion_s + other.confusion_s,
                                        self.scored_s + other.scored_s)


def _elementary_intervals(ref: LabeledTimeline, hyp: LabeledTimeline, collar_s: float):
    """Sweep over all boundaries; yield (duration, ref labels, hyp labels) per scored piece."""
    events = []
    for t in ref:
        events += [(t.start, 0, +1, t.label), (t.end, 0, -1, t.label)]
        if collar_s > 0:
            for b in (t.start, t.end):
                events += [(b - collar_s, 2, +1, None), (b + collar_s, 2, -1, None)]
    for t in hyp:
        events += [(t.start, 1, +1, t.label), (t.end, 1, -1, t.label)]
    events.sort(key=lambda e: e[0])
    active = (defaultdict(int), defaultdict(int))
    in_collar = 0
    pieces = []
    i = 0
    while i < len(events):
        now = events[i][0]
        while i < len(events) and events[i][0] == now:
            _, kind, delta, label = events[i]
            if kind == 2:
                in_collar += delta
            else:
                active[kind][label] += delta
            i += 1
        if i == len(events):
            break
        dur = events[i][0] - now
        if dur <= 0 or in_collar > 0:
            continue
        refs = frozenset(lab for lab, c in active[0].items() if c > 0)
        hyps = frozenset(lab for lab, c in active[1].items() if c > 0)
        if refs or hyps:
            pieces.append((dur, refs, hyps))
    return pieces


def _mapping_from_pieces(pieces, ref_labels, hyp_labels):
    if not ref_labels or not hyp_labels:
        return {}
    r_idx = {lab: i for i, lab in enumerate(ref_labels)}
    h_idx = {lab: i for i, lab in enumerate(hyp_labels)}
    overlap = np.zeros((len(hyp_labels), len(ref_labels)))
    for dur, refs, hyps in pieces:
        for h in hyps:
            for r in refs:
                overlap[h_idx[h], r_idx[r]] += dur
    rows, cols = linear_sum_assignment(overlap, maximize=True)
    return {hyp_labels[r]: ref_labels[c] for r, c in zip(rows, cols) if overlap[r, c] > 0}


def optimal_speaker_mapping(ref: LabeledTimeline, hyp: LabeledTimeline, collar_s: float = 0.0) -> dict:
    """One-to-one hyp -> ref label map maximizing total co-occurring duration."""
    pieces = _elementary_intervals(ref, hyp, collar_s)
    return _mapping_from_pieces(pieces, ref.labels, hyp.labels)


def compute_der(ref: LabeledTimeline, hyp: LabeledTimeline, collar_s: float = 0.0,
                mapping: dict | None = None) -> DerReport:
    """Score ``hyp`` against ``ref``.

    ``collar_s`` seconds either side of every reference boundary are excluded
    from scoring. ``mapping`` (hyp label -> ref label) overrides the optimal
    assignment, e.g. to score pieces of a session under one global mapping.
    """
    if collar_s < 0:
        raise InputError("collar must be >= 0")
    if len(ref) == 0:
        raise InputError("empty reference")
    pieces = _elementary_intervals(ref, hyp, collar_s)
    if mapping is None:
        mapping = _mapping_from_pieces(pieces, ref.labels, hyp.labels)
    fa = miss = conf = scored = 0.0
    for dur, refs, hyps in pieces:
        n_ref, n_hyp = len(refs), len(hyps)
        n_correct = sum(1 for h in hyps if mapping.get(h) in refs)
        scored += dur * n_ref
        miss += dur * max(0, n_ref - n_hyp)
        fa += dur * max(0, n_hyp - n_ref)
        conf += dur * (min(n_ref, n_hyp) - n_correct)
    return DerReport.from_durations(fa, miss, conf, scored)


def timeline_from_labels(starts, ends, labels) -> LabeledTimeline:
    return LabeledTimeline(zip(starts, ends, [str(lab) for lab in labels]))


def read_rttm(path) -> dict[str, LabeledTimeline]:
    """Parse SPEAKER lines into one timeline per file id."""
    turns = defaultdict(list)
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            fields = line.split()
            if not fields or fields[0].startswith("#"):
                continue
            if fields[0] != "SPEAKER":
                log.warning("%s:%d: skipping %s line", path, lineno, fields[0])
                continue
            if len(fields) < 8:
                raise InputError(f"{path}:{lineno}: expected at least 8 fields, got {len(fields)}")
            try:
                start, dur = float(fields[3]), float(fields[4])
            except ValueError:
                raise InputError(f"{path}:{lineno}: bad onset/duration {fields[3]!r} {fields[4]!r}") from None
            if not (np.isfinite(start) and np.isfinite(dur)) or dur < 0:
                raise InputError(f"{path}:{lineno}: invalid onset/duration")
            if dur == 0:
                log.warning("%s:%d: skipping zero-duration turn", path, lineno)
                continue
            turns[fields[1]].append((start, start + dur, fields[7]))
    return {fid: LabeledTimeline(ts) for fid, ts in turns.items()}


def format_rttm(file_id: str, timeline: LabeledTimeline) -> str:
    return "".join(
        f"SPEAKER {file_id} 1 {t.start:.3f} {t.end - t.start:.3f} <NA> <NA> {t.label} <NA> <NA>\n"
        for t in timeline
    )


def write_rttm(path, timelines: dict[str, LabeledTimeline]):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for fid in sorted(timelines):
            fh.write(format_rttm(fid, timelines[fid]))


def score_files(ref: dict[str, LabeledTimeline], hyp: dict[str, LabeledTimeline],
                collar_s: float = 0.0) -> DerReport:
    """Per-file mapping, durations summed over files."""
    if not ref:
        raise InputError("reference has no speaker turns")
    total = None
    for fid in sorted(ref):
        report = compute_der(ref[fid], hyp.get(fid, LabeledTimeline()), collar_s)
        total = report if total is None else total + report
    extra = sorted(set(hyp) - set(ref))
    if extra:
        log.warning("hypothesis files without reference ignored: %s", ", ".join(extra))
    return total
