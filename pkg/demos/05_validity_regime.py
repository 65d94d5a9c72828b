"""
Where the weak-value picture holds
==================================

With a common weak value alpha the centre-of-mass pointer magnitude is a
competition between a growing scalar-product term and the decaying
Gaussian. While (alpha^2 - 1) lambda^2 < 1 the peak stays at Q = 0.
"""

import math

from weakmeas import validity

alpha = math.sqrt(2)
for lam in (0.5, 0.8, 1.0, 1.2, 1.5):
    r = validity.regime_check(alpha, lam, 100)
    print(f"lambda = {lam:.1f}  lhs = {r.regime_lhs:.2f}  peak at {r.peak_location:+.3f}  at origin: {r.peak_at_origin}")

# %%
# Inside the regime the single-trial signal-to-noise grows like sqrt(N).

for n in (25, 100, 400):
    r = validity.regime_check(alpha, 0.5, n)
    print(f"N = {n:4d}  shift = {r.shift:.3f}  spread = {r.uncertainty:.3f}  amplification / sqrtN = {r.amplification / math.sqrt(n):.3f}")
