"""Experiment sweeps over synthetic datasets: oracle fraction, alpha, confidence threshold."""

from __future__ import annotations

import csv
import dataclasses
import math
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .constraints import PropagationParams, Scenario, is_eligible
from .errors import InputError
from .evaluation import compute_der, timeline_from_labels
from .io import load_bundles
from .pipeline import ClusteringConfig, run_pipeline
from .synthesis import derive_seed, sample_oracle_constraints

MODES = ("oracle-fraction", "alpha", "conf-threshold")
BASE_COLUMNS = ["mode_value", "alpha", "mean_der", "std_der", "n_sessions", "mean_constraints"]


def parse_grid(text: str) -> list[float]:
    """``a,b,c`` or inclusive ``start:stop:step``."""
    try:
        if ":" in text:
            parts = [float(x) for x in text.split(":")]
            if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
                raise ValueError
            start, stop, step = parts
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            values = [round(start + i * step, 10) for i in range(count)]
        else:
            values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"malformed grid {text!r}; use 'a,b,c' or 'start:stop:step'") from None
    if not values:
        raise InputError(f"empty grid {text!r}")
    return values


def load_dataset(root) -> list:
    """Every ``<root>/<session>/`` holding segments.jsonl + embeddings.csv, sorted by session id."""
    root = Path(root)
    if not root.is_dir():
        raise InputError(f"dataset directory {root} not found")
    bundles = []
    for sub in sorted(p for p in root.iterdir() if (p / "segments.jsonl").exists()):
        bundles.extend(load_bundles(sub / "segments.jsonl", sub / "embeddings.csv"))
    if not bundles:
        raise InputError(f"{root}: no session directories with segments.jsonl")
    bundles.sort(key=lambda b: b.session_id)
    return bundles


def session_der(bundle, labels) -> float:
    if bundle.reference is None:
        raise InputError(f"session {bundle.session_id}: no speaker_id reference to score against")
    segs = bundle.segments
    hyp = timeline_from_labels([s.start_s for s in segs], [s.end_s for s in segs], labels)
    return compute_der(bundle.reference, hyp).der


def role_only_der(bundle) -> float:
    """Score the predicted roles themselves as speaker labels."""
    preds = {p.segment_index: p.role for p in bundle.predictions or []}
    if len(preds) != len(bundle.segments):
        raise InputError(f"session {bundle.session_id}: role predictions missing for some segments")
    return session_der(bundle, [preds[i] for i in range(len(bundle.segments))])


def _evaluate(task):
    bundle, config, fraction, sample_seed = task
    constraints = None
    predictions = bundle.predictions
    if fraction is not None:
        constraints = sample_oracle_constraints(bundle, fraction, config.scenario, sample_seed)
        config = dataclasses.replace(config, scenario=Scenario.NONE)
        predictions = None
    result = run_pipeline(bundle.embeddings, predictions, config, constraints)
    return session_der(bundle, result.labels), result.n_constraints


def _role_accuracy(bundles, params: PropagationParams):
    hits = support = 0
    for b in bundles:
        truth = b.oracle_roles
        for p in b.predictions or []:
            if is_eligible(p, params):
                support += 1
                hits += p.role == truth[p.segment_index]
    return (hits / support if support else float("nan")), support


def run_sweep(bundles, mode: str, grid, config: ClusteringConfig, fraction: float | None = None,
              jobs: int = 1) -> list[dict]:
    """One row of averaged results per grid value.

    ``oracle-fraction`` samples oracle-role constraints; ``alpha`` varies the
    propagation constant (oracle constraints if ``fraction`` is given, else
    role predictions); ``conf-threshold`` varies the prediction gate and also
    reports role accuracy and support above it.
    """
    if mode not in MODES:
        raise InputError(f"unknown sweep mode {mode!r}")
    bundles = sorted(bundles, key=lambda b: b.session_id)
    points = []
    for value in grid:
        if mode == "oracle-fraction":
            cfg, frac = config, value
        elif mode == "alpha":
            cfg, frac = dataclasses.replace(config, alpha=value), fraction
        else:
            cfg, frac = dataclasses.replace(config, confidence_threshold=value), None
        cfg.propagation  # validates alpha / threshold before fanning out
        if frac is not None and not 0 <= frac <= 1:
            raise InputError(f"fraction {frac} outside [0, 1]")
        points.append((value, cfg, frac))
    tasks = [(b, cfg, frac, derive_seed(config.seed, i))
             for _, cfg, frac in points for i, b in enumerate(bundles)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_evaluate, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        outcomes = [_evaluate(t) for t in tasks]
    rows = []
    n = len(bundles)
    for p_idx, (value, cfg, _) in enumerate(points):
        chunk = outcomes[p_idx * n:(p_idx + 1) * n]
        ders = np.array([d for d, _ in chunk])
        row = {
            "mode_value": value,
            "alpha": cfg.alpha,
            "mean_der": float(ders.mean()),
            "std_der": float(ders.std()),
            "n_sessions": n,
            "mean_constraints": float(np.mean([c for _, c in chunk])),
        }
        if mode == "conf-threshold":
            row["accuracy"], row["support"] = _role_accuracy(bundles, cfg.propagation)
        rows.append(row)
    return rows


def _fmt(v):
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return str(v)


def write_sweep_csv(path, rows, mode: str):
    columns = BASE_COLUMNS + (["accuracy", "support"] if mode == "conf-threshold" else [])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in columns])
