"""Role accuracy, support and DER as the confidence gate on role predictions rises.

    python scripts/confidence_threshold_curve.py --thresholds 0.5:0.98:0.04
"""

import argparse

from _common import dataset_args, emit, make_sessions
from rolecluster.constraints import Scenario
from rolecluster.pipeline import ClusteringConfig
from rolecluster.sweep import parse_grid, run_sweep


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    dataset_args(parser)
    parser.add_argument("--thresholds", default="0.5:0.98:0.04")
    parser.add_argument("--alpha", type=float, default=0.5)
    parser.add_argument("--min-words", type=int, default=5)
    parser.add_argument("--scenario", choices=[s.value for s in Scenario], default="both")
    args = parser.parse_args()

    cfg = ClusteringConfig(alpha=args.alpha, scenario=Scenario(args.scenario), min_words=args.min_words,
                           seed=args.seed)
    rows = run_sweep(make_sessions(args), "conf-threshold", parse_grid(args.thresholds), cfg,
                     jobs=args.jobs)
    for row in rows:
        row["threshold"] = row["mode_value"]
    emit(rows, ["threshold", "accuracy", "support", "mean_der", "std_der", "mean_constraints"], args.out)


if __name__ == "__main__":
    main()
