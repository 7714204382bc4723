"""Reproduce a small version of the helix prediction benchmark.

Noisy helix positions stream into per-axis estimator banks; from each anchor
step every method extrapolates one second ahead (100 steps), and predictions
are scored against the noiseless trajectory at the horizon endpoint. The
full-size benchmark (5000 steps, anchors from 2000) is available through
`run_experiment(ExperimentConfig(scenario="helical"))` or the CLI:

    aisepred experiment --scenario helical --out-dir out/
"""

import numpy as np

from aisepred import ExperimentConfig, run_experiment

config = ExperimentConfig(
    scenario="helical",
    n_steps=2000,
    k0=1000,
    horizon=100,
    seed=0,
)
report = run_experiment(config)

print(f"helix, {config.n_steps} steps, sigma = {report.config['sigma']} m, "
      f"{report.n_tilde} anchors, horizon {config.horizon} steps")
print(f"{'method':10s} {'RMSE x':>10s} {'RMSE y':>10s} {'RMSE z':>10s}")
for method, values in report.methods.items():
    print(f"{method:10s} {values[0]:10.3f} {values[1]:10.3f} {values[2]:10.3f}")
print(f"\ncompleted in {report.runtime_s:.1f} s")

best = min(report.methods, key=lambda m: float(np.sum(report.methods[m])))
print(f"lowest summed RMSE: {best}")
