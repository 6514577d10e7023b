"""DER of unconstrained clustering, role-constrained clustering and role labels alone.

Role labels only make sense as speaker labels when roles map one-to-one onto
speakers; for other schemes that column is left empty.

    python scripts/method_comparison.py --sessions 30 --conf-threshold 0.9
"""

import argparse

import numpy as np

from _common import dataset_args, emit, make_sessions
from rolecluster.constraints import Scenario
from rolecluster.pipeline import ClusteringConfig, run_pipeline
from rolecluster.sweep import role_only_der, session_der


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    dataset_args(parser)
    parser.add_argument("--alpha", type=float, default=0.5)
    parser.add_argument("--conf-threshold", type=float, default=0.98)
    parser.add_argument("--min-words", type=int, default=5)
    args = parser.parse_args()

    sessions = make_sessions(args)
    plain_cfg = ClusteringConfig(seed=args.seed)
    rows = []
    for scenario in (Scenario.CL_ONLY, Scenario.ML_ONLY, Scenario.BOTH):
        cfg = ClusteringConfig(alpha=args.alpha, scenario=scenario, confidence_threshold=args.conf_threshold,
                               min_words=args.min_words, seed=args.seed)
        plain, constrained, role_only = [], [], []
        for s in sessions:
            plain.append(session_der(s, run_pipeline(s.embeddings, None, plain_cfg).labels))
            constrained.append(session_der(s, run_pipeline(s.embeddings, s.predictions, cfg).labels))
            if args.role_scheme == "one-to-one" and s.predictions:
                role_only.append(role_only_der(s))
        rows.append({
            "scenario": scenario.value,
            "unconstrained": float(np.mean(plain)),
            "constrained": float(np.mean(constrained)),
            "role_only": float(np.mean(role_only)) if role_only else float("nan"),
        })
    emit(rows, ["scenario", "unconstrained", "constrained", "role_only"], args.out)


if __name__ == "__main__":
    main()
