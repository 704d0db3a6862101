"""Choose the penalty rates (gamma, beta) by cross validation.

On a 12 x 12 grid the default is leave-one-out; each held-out site is
predicted by least squares on the variables selected from the other sites.
"""

from spatialvs import SimulationConfig, TuningGrid, generate_dataset, optimize_tuning

sample = generate_dataset(SimulationConfig(n=12, a=25.0, kappa2=1.0, seed=3))
grid = TuningGrid(gamma_values=(0.05, 0.25, 0.45), beta_values=(0.05, 0.25, 0.45))
gamma, beta, table = optimize_tuning(sample, grid)

print(f"{'gamma':>6} {'beta':>6} {'CV':>10}")
for row in table:
    mark = "  <- minimum" if (row.gamma, row.beta) == (gamma, beta) else ""
    print(f"{row.gamma:6.2f} {row.beta:6.2f} {row.cv:10.4f}{mark}")
