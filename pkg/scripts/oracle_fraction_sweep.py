"""Mean DER against the fraction of oracle-role constraints, one curve per alpha.

    python scripts/oracle_fraction_sweep.py --alphas 0,0.25,0.5,0.75 --out oracle.csv
"""

import argparse

from _common import dataset_args, emit, make_sessions
from rolecluster.constraints import Scenario
from rolecluster.pipeline import ClusteringConfig
from rolecluster.sweep import parse_grid, run_sweep


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    dataset_args(parser)
    parser.add_argument("--alphas", default="0,0.25,0.5,0.75")
    parser.add_argument("--fractions", default="0:1:0.125")
    parser.add_argument("--scenario", choices=[s.value for s in Scenario], default="both")
    parser.add_argument("--k", type=int, default=None)
    args = parser.parse_args()

    sessions = make_sessions(args)
    rows = []
    for alpha in parse_grid(args.alphas):
        cfg = ClusteringConfig(alpha=alpha, k=args.k, scenario=Scenario(args.scenario), seed=args.seed)
        for row in run_sweep(sessions, "oracle-fraction", parse_grid(args.fractions), cfg, jobs=args.jobs):
            rows.append({"fraction": row["mode_value"], **row})
    emit(rows, ["alpha", "fraction", "mean_der", "std_der", "mean_constraints"], args.out)


if __name__ == "__main__":
    main()
