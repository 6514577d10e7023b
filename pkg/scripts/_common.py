"""Shared helpers for the experiment scripts."""

import argparse
import csv
import math

from rolecluster.synthesis import RoleScheme, SynthConfig, derive_seed, generate_session


def dataset_args(parser: argparse.ArgumentParser, sessions=20, noise=0.4):
    parser.add_argument("--sessions", type=int, default=sessions)
    parser.add_argument("--n-speakers", type=int, default=2)
    parser.add_argument("--segments-per-speaker", type=int, default=20)
    parser.add_argument("--dim", type=int, default=16)
    parser.add_argument("--noise-sigma", type=float, default=noise)
    parser.add_argument("--role-scheme", choices=[r.value for r in RoleScheme], default="one-to-one")
    parser.add_argument("--accuracy-floor", type=float, default=0.5)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--out", default=None, help="CSV path; prints only when omitted")


def make_sessions(args):
    return [generate_session(SynthConfig(
        n_speakers=args.n_speakers, segments_per_speaker=args.segments_per_speaker, dim=args.dim,
        noise_sigma=args.noise_sigma, role_scheme=RoleScheme(args.role_scheme),
        classifier_accuracy_floor=args.accuracy_floor, seed=derive_seed(args.seed, i),
        session_id=f"session_{i:03d}")) for i in range(args.sessions)]


def emit(rows, columns, out=None):
    widths = [max(len(c), 10) for c in columns]
    print("  ".join(c.rjust(w) for c, w in zip(columns, widths)))
    for row in rows:
        cells = []
        for c, w in zip(columns, widths):
            v = row[c]
            cells.append((f"{v:.4f}" if isinstance(v, float) and not math.isnan(v) else str(v)).rjust(w))
        print("  ".join(cells))
    if out:
        with open(out, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
            writer.writeheader()
            writer.writerows(rows)
