"""
One pointer, many particles
===========================

Couple a single pointer to the average spin of N identically prepared
particles. When every particle passes post-selection, the pointer shift
is sqrt(2) up to O(1/sqrt N) in a single trial; the price is a success
probability of 2^-N.
"""

import math

from weakmeas import protocols
from weakmeas.protocols import Scenario

for n in (1, 4, 25, 100, 400):
    res = protocols.stwm_pointer_state(Scenario(protocol="stwm", lam=1.0, particle_count=n))
    print(
        f"N = {n:4d}  shift = {res.shift:.5f}  "
        f"|shift - sqrt2| * sqrtN = {abs(res.shift - math.sqrt(2)) * math.sqrt(n):.4f}  "
        f"P(success) = {res.success_probability:.3g}"
    )
