"""Measure how the Newton-Schulz iteration reshapes a random matrix's spectrum.

The quintic iteration with coefficients (3.4445, -4.7750, 2.0315) drives the
normalized matrix's singular values toward 1. This script sweeps the
iteration count on one matrix, then reproduces the measurement that froze the
regression band used by `optlab verify`: the min/max singular value of the
5-iteration output over 50 seeded 64x64 matrices.
"""

import numpy as np

from optlab import Rng, newton_schulz_orthogonalize, svd_singular_values

# --- one matrix, increasing iteration count ------------------------------
g = Rng(7, "ns-demo").normal_matrix(64, 64)
print("iterations -> singular value range of the output")
for iters in (1, 2, 3, 5, 8, 12):
    sv = svd_singular_values(newton_schulz_orthogonalize(g, iters))
    print(f"  {iters:>2}: [{sv.min():8.5f}, {sv.max():8.5f}]  (median {np.median(sv):.5f})")

# --- the frozen regression band ------------------------------------------
# same 50 seeds as the verify check; the band in optlab.verify.NS_BAND is
# these extremes with a small margin
lo, hi = np.inf, -np.inf
for i in range(50):
    sample = Rng(7, f"ns-band/{i}").normal_matrix(64, 64)
    sv = svd_singular_values(newton_schulz_orthogonalize(sample, 5))
    lo, hi = min(lo, sv.min()), max(hi, sv.max())
print(f"\n5-iteration extremes over 50 seeded 64x64 matrices: [{lo:.5f}, {hi:.5f}]")
print("frozen band in optlab.verify.NS_BAND: (0.0075, 1.21)")
