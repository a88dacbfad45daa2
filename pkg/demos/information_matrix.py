"""
How an ARMA part costs precision on d
=====================================

For a pure fractional model the information about d is pi^2/6 whatever d
is. Adding a short-memory AR coefficient that competes for the same low
frequencies inflates the standard error of d.
"""

import numpy as np

from longmem import ParamVector, information_matrix, standard_errors

n = 1024
pure = information_matrix(ParamVector(0.3))
print(f"pure fractional: Omega = {pure.omega[0, 0]:.7f} (pi^2/6 = {np.pi ** 2 / 6:.7f})")
se, _ = standard_errors(pure, n)
print(f"  se(d) at n={n}: {se[0]:.5f}")

# %%
# Sweep the AR coefficient. A positive phi piles power near frequency zero,
# where the fractional pole lives, so d and phi become strongly confounded.
# At phi = 0.9 the AR peak is narrow enough to separate again.
print("\n  phi    se(d)   se(phi)  corr(d, phi)")
for phi in (-0.5, 0.0, 0.3, 0.6, 0.9):
    im = information_matrix(ParamVector(0.3, (phi,)))
    cov = im.inverse()
    se, _ = standard_errors(im, n)
    corr = cov[0, 1] / np.sqrt(cov[0, 0] * cov[1, 1])
    print(f"  {phi:+.1f}  {se[0]:.4f}  {se[1]:.4f}  {corr:+.3f}")
