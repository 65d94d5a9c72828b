"""
An eccentric weak value
=======================

Pre-select spin up along x, post-select spin up along y and ask for the
spin component along the 45 degree direction in the x-y plane. The
eigenvalues are +-1, yet the weak value is sqrt(2).
"""

import numpy as np

from weakmeas import spin

sel = spin.PrePostSelection(spin.UP_X, spin.UP_Y)
w = spin.weak_value(sel, spin.SIGMA_45)
print("weak value of sigma_45:", w)
print("eigenvalues:           ", np.linalg.eigvalsh(spin.SIGMA_45))

# %%
# The ordinary expectation value splits into post-selection branches, each
# weighted by its probability and carrying its own weak value.

branches = spin.post_selected_decomposition(spin.UP_X, spin.SIGMA_45, [spin.UP_Y, spin.DOWN_Y])
for b in branches:
    print(f"p = {b.probability:.3f}  weak value = {b.weak_value:.4f}")
print("sum p * Re w =", sum(b.probability * b.weak_value.real for b in branches))
print("<sigma_45>   =", spin.expectation(spin.UP_X, spin.SIGMA_45))

# %%
# Weak values need not be real: sigma_z with the same selection gives i.

print("weak value of sigma_z:", spin.weak_value(sel, spin.SIGMA_Z))
