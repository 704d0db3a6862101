"""A small Monte Carlo study through the harness API.

The same thing can be run from the shell:

    spatialvs experiment demos/experiment.ini --out raw.csv
    spatialvs report raw.csv --out-prefix table
"""

from spatialvs.harness import ExperimentConfig, compute_metrics, format_tables, run_replications

cfg = ExperimentConfig(replications=10, n_list=(12,), a_list=(5.0, 25.0),
                       kappa2_list=(0.0, 1.0), master_seed=2024)
rows = run_replications(cfg)
metrics = compute_metrics(rows, cfg.true_set)
print(format_tables(metrics))
