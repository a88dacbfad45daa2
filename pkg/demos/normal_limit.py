"""
Checking the normal limit
=========================

A small Monte Carlo run: 200 replications of a pure fractional model at
n = 1024. The studentized estimates should look standard normal and the
95% intervals should cover d about 95% of the time.
"""

import numpy as np

from longmem import ModelSpec, MonteCarloConfig, ParamVector, run_experiment

config = MonteCarloConfig(ModelSpec(ParamVector(0.3)), n_grid=(1024,), replications=200,
                          master_seed=11)
report = run_experiment(config)
print(report.summary_table())

# %%
# Text histogram of sqrt(n) (d_hat - d) / sqrt(6 / pi^2)
est = np.array([r["theta_hat"][0] for r in report.records if r["converged"]])
z = (est - 0.3) / np.sqrt(6 / np.pi ** 2 / 1024)
counts, edges = np.histogram(z, bins=np.arange(-3.5, 3.6, 0.5))
for c, lo in zip(counts, edges):
    print(f"{lo:+.1f} {'#' * c}")
print(f"mean {z.mean():+.3f}, sd {z.std(ddof=1):.3f}")
