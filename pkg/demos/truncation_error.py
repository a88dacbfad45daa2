"""
The cost of not seeing the past
===============================

The CSS residual e_t uses only x_1..x_t, so it differs from the innovation
eps_t. This compares the Monte Carlo mean of (e_t - eps_t)^2 with its exact
value and shows the roughly 1/t decay.
"""

import numpy as np

from longmem import ModelSpec, ParamVector, truncation_diagnostic
from longmem.montecarlo import truncation_mse_theory

spec = ModelSpec(ParamVector(0.4))
n, R = 1024, 200
curve = truncation_diagnostic(spec, n, R, seed=3)

# the simulator stops its MA weights at lag 100 n, so that is the exact reference;
# the infinite-past value is shown for comparison
sim_law = truncation_mse_theory(spec.theta, curve.t, ma_truncation=100 * n)
infinite = truncation_mse_theory(spec.theta, curve.t)

print("     t    Monte Carlo   exact (sim)   infinite past   t * MC")
for t, mc, a, b in zip(curve.t, curve.mse, sim_law, infinite):
    print(f"{t:>6}   {mc:.3e}     {a:.3e}     {b:.3e}       {t * mc:.3f}")
print(f"log-log slope {curve.slope:.3f}, max t*MSE / (16*MSE(16)) = {curve.boundedness_ratio:.3f}")
print(f"slope of the infinite-past curve: "
      f"{np.polyfit(np.log(curve.t), np.log(infinite), 1)[0]:.3f}")
