"""Command-line entry points: cluster, score, synth, sweep.

Exit codes: 0 success, 2 invalid input or flags, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .constraints import Scenario
from .errors import InputError, NumericalError, RoleClusterError
from .evaluation import compute_der, format_rttm, read_rttm, score_files, timeline_from_labels
from .io import (
    load_bundles,
    read_constraints_csv,
    write_embeddings_csv,
    write_manifest,
    write_segments_jsonl,
)
from .pipeline import ClusteringConfig, run_pipeline
from .sweep import MODES, load_dataset, parse_grid, run_sweep, write_sweep_csv
from .synthesis import RoleScheme, SynthConfig, derive_seed, generate_session

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3  # argparse itself exits 2 on bad flags


def _int_range(text: str, arity: int):
    try:
        parts = [int(x) for x in text.split(":")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers separated by ':', got {text!r}") from None
    if arity == 3 and len(parts) == 2:
        parts.append(5)
    if len(parts) != arity or parts[1] < parts[0] or (arity == 3 and parts[2] <= 0):
        raise argparse.ArgumentTypeError(f"bad range {text!r}")
    return tuple(parts)


def _p_range(text):
    return _int_range(text, 3)


def _k_range(text):
    return _int_range(text, 2)


def _resolve_seed(seed):
    if seed is not None:
        return seed
    env = os.environ.get("ROLECLUSTER_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise InputError(f"ROLECLUSTER_SEED must be an integer, got {env!r}") from None


def _add_clustering_flags(p, default_scenario="none", default_alpha=0.5):
    p.add_argument("--scenario", choices=[s.value for s in Scenario], default=default_scenario)
    p.add_argument("--alpha", type=float, default=default_alpha)
    p.add_argument("--tau", type=float, default=0.01)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--p", type=float, default=None, help="fixed p-threshold percentage")
    g.add_argument("--p-range", type=_p_range, default=(40, 95, 5), help="start:stop[:step], inclusive")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--k", type=int, default=None, help="fixed number of speakers")
    g.add_argument("--k-range", type=_k_range, default=(2, 50), help="min:max, inclusive")
    p.add_argument("--conf-threshold", type=float, default=0.98)
    p.add_argument("--min-words", type=int, default=5)
    p.add_argument("--seed", type=int, default=None, help="defaults to $ROLECLUSTER_SEED, then 0")
    p.add_argument("--jobs", type=int, default=1)


def _config_from(args, seed) -> ClusteringConfig:
    cfg = ClusteringConfig(alpha=args.alpha, tau=args.tau, p=args.p, p_range=args.p_range,
                           k=args.k, k_range=args.k_range, scenario=Scenario(args.scenario),
                           confidence_threshold=args.conf_threshold, min_words=args.min_words,
                           seed=seed)
    cfg.propagation  # validates alpha / threshold / min_words
    if cfg.tau <= 0 or cfg.tau >= 1:
        raise InputError(f"--tau must be in (0, 1), got {cfg.tau}")
    return cfg


def _config_snapshot(cfg: ClusteringConfig) -> dict:
    return {
        "alpha": cfg.alpha, "tau": cfg.tau, "p": cfg.p, "p_range": list(cfg.p_range),
        "k": cfg.k, "k_range": list(cfg.k_range), "scenario": cfg.scenario.value,
        "confidence_threshold": cfg.confidence_threshold, "min_words": cfg.min_words,
    }


def cmd_cluster(args) -> int:
    seed = _resolve_seed(args.seed)
    cfg = _config_from(args, seed)
    cfg.jobs = max(1, args.jobs)
    bundles = load_bundles(args.segments, args.embeddings)
    all_ids = {s.segment_id for b in bundles for s in b.segments}
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rttm_lines, label_lines, sessions = [], [], []
    for b in bundles:
        explicit = None
        if args.constraints:
            index = b.segment_index
            explicit = read_constraints_csv(args.constraints, index, all_ids - set(index))
        try:
            result = run_pipeline(b.embeddings, b.predictions, cfg, explicit)
        except RoleClusterError as exc:
            exc.args = (f"session {b.session_id}: {exc.args[0]}",)
            raise
        labels = [f"C{c}" for c in result.labels]
        segs = b.segments
        hyp = timeline_from_labels([s.start_s for s in segs], [s.end_s for s in segs], labels)
        rttm_lines.append(format_rttm(b.session_id, hyp))
        for seg, c in zip(segs, result.labels):
            label_lines.append(json.dumps({"segment_id": seg.segment_id, "cluster": int(c)}) + "\n")
        outcome = {"session_id": b.session_id, "n_segments": len(segs), "p": result.p, "k": result.k,
                   "n_constraints": result.n_constraints}
        if b.reference is not None:
            outcome["der"] = compute_der(b.reference, hyp).to_dict()
        sessions.append(outcome)
    rttm_path, labels_path = out / "hypothesis.rttm", out / "labels.jsonl"
    rttm_path.write_text("".join(rttm_lines), encoding="utf-8", newline="\n")
    labels_path.write_text("".join(label_lines), encoding="utf-8", newline="\n")
    inputs = [args.segments, args.embeddings] + ([args.constraints] if args.constraints else [])
    write_manifest(out / "manifest.json", command="cluster", config=_config_snapshot(cfg), seed=seed,
                   inputs=inputs, outputs=[rttm_path, labels_path], sessions=sessions,
                   version=__version__)
    return EXIT_OK


def cmd_score(args) -> int:
    ref = read_rttm(args.ref)
    hyp = read_rttm(args.hyp)
    report = score_files(ref, hyp, args.collar)
    print(json.dumps(report.to_dict()))
    return EXIT_OK


def _write_session(root: Path, session):
    d = root / session.session_id
    d.mkdir(parents=True, exist_ok=True)
    write_segments_jsonl(d / "segments.jsonl", session.segments)
    write_embeddings_csv(d / "embeddings.csv", [s.segment_id for s in session.segments], session.embeddings)
    (d / "reference.rttm").write_text(format_rttm(session.session_id, session.reference),
                                      encoding="utf-8", newline="\n")
    return [d / "segments.jsonl", d / "embeddings.csv", d / "reference.rttm"]


def _synth_one(task):
    root, config = task
    return _write_session(root, generate_session(config))


def cmd_synth(args) -> int:
    seed = _resolve_seed(args.seed)
    if args.sessions < 1:
        raise InputError("--sessions must be >= 1")
    base = dict(n_speakers=args.n_speakers, segments_per_speaker=args.segments_per_speaker,
                dim=args.dim, noise_sigma=args.noise_sigma, role_scheme=RoleScheme(args.role_scheme),
                classifier_accuracy_floor=args.accuracy_floor, max_centroid_cosine=args.max_centroid_cosine)
    configs = [SynthConfig(**base, seed=derive_seed(seed, i), session_id=f"session_{i:03d}")
               for i in range(args.sessions)]
    root = Path(args.out)
    root.mkdir(parents=True, exist_ok=True)
    tasks = [(root, c) for c in configs]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            written = list(pool.map(_synth_one, tasks))
    else:
        written = [_synth_one(t) for t in tasks]
    config_snapshot = {**base, "role_scheme": base["role_scheme"].value, "sessions": args.sessions}
    write_manifest(root / "manifest.json", command="synth", config=config_snapshot, seed=seed,
                   inputs=[], outputs=[p for files in written for p in files],
                   sessions=[{"session_id": c.session_id, "seed": c.seed} for c in configs],
                   version=__version__)
    return EXIT_OK


def cmd_sweep(args) -> int:
    seed = _resolve_seed(args.seed)
    cfg = _config_from(args, seed)
    grid = parse_grid(args.grid)
    bundles = load_dataset(args.dataset)
    rows = run_sweep(bundles, args.mode, grid, cfg, fraction=args.fraction, jobs=max(1, args.jobs))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_sweep_csv(out, rows, args.mode)
    snapshot = {**_config_snapshot(cfg), "mode": args.mode, "grid": grid, "fraction": args.fraction}
    inputs = sorted(p for b in sorted(Path(args.dataset).iterdir()) if b.is_dir()
                    for p in (b / "segments.jsonl", b / "embeddings.csv") if p.exists())
    write_manifest(out.with_name(out.stem + ".manifest.json"), command="sweep", config=snapshot,
                   seed=seed, inputs=inputs, outputs=[out],
                   sessions=[{"session_id": b.session_id, "n_segments": len(b.segments)} for b in bundles],
                   version=__version__)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rolecluster", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="cluster segments into speakers")
    p.add_argument("--segments", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--constraints", default=None, help="CSV of segment_i,segment_j,kind (ML/CL)")
    p.add_argument("--out", default="rolecluster_out")
    _add_clustering_flags(p)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("score", help="DER of a hypothesis RTTM against a reference RTTM")
    p.add_argument("--ref", required=True)
    p.add_argument("--hyp", required=True)
    p.add_argument("--collar", type=float, default=0.0)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("synth", help="write a synthetic dataset")
    p.add_argument("--sessions", type=int, default=10)
    p.add_argument("--n-speakers", type=int, default=2)
    p.add_argument("--segments-per-speaker", type=int, default=20)
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--noise-sigma", type=float, default=0.1)
    p.add_argument("--role-scheme", choices=[r.value for r in RoleScheme], default="one-to-one")
    p.add_argument("--accuracy-floor", type=float, default=0.5)
    p.add_argument("--max-centroid-cosine", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("sweep", help="average DER over a dataset for a grid of settings")
    p.add_argument("--dataset", required=True)
    p.add_argument("--mode", choices=MODES, required=True)
    p.add_argument("--grid", required=True, help="'a,b,c' or 'start:stop:step'")
    p.add_argument("--fraction", type=float, default=None,
                   help="alpha mode: use this fraction of oracle constraints instead of role predictions")
    p.add_argument("--out", required=True)
    _add_clustering_flags(p, default_scenario="both")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
