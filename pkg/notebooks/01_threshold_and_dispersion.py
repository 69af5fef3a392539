# %% [markdown]
# # Threshold and dispersion roots
#
# With a decreasing swim-speed law, a homogeneous suspension is linearly
# unstable when the flux `phi * v(phi)` decreases with `phi`. In reduced form
# one number `zeta` controls this, and the threshold is `zeta = 1/(2 pi)`.
# Here we locate the threshold, then compare the root of the dispersion
# function with the closed form.

# %%
import math

import numpy as np

from abpstab.dispersion import d_closed, gamma_closed, inviscid_root_value
from abpstab.dispersion import model_b_root_value
from abpstab.model import HomogeneousState, classify_state, flux_derivative, make_velocity_law, zeta_of

law = make_velocity_law("affine")
for phi in (0.3, 0.5, 0.7):
    st = HomogeneousState(phi, law)
    print(f"phi={phi}: zeta={zeta_of(st):.4f}  flux'={flux_derivative(st):+.3f}  {classify_state(st).label.value}")

# %% [markdown]
# For the affine law `zeta` crosses `1/(2 pi)` at `phi = 1/2`, which is
# where the flux derivative changes sign. For `zeta > 1/(2 pi)` the reduced dispersion function has one real positive
# zero. We check it against `(2 pi zeta - 1)/sqrt(4 pi zeta - 1)`.

# %%
for zeta in (0.2, 1 / math.pi, 0.6):
    lam = inviscid_root_value(zeta)
    exact = (2 * math.pi * zeta - 1) / math.sqrt(4 * math.pi * zeta - 1)
    print(f"zeta={zeta:.4f}  root={lam:.12f}  formula={exact:.12f}  |D|={abs(d_closed(zeta, lam)):.1e}")

# %% [markdown]
# The two-moment model has its own determinant. At `zeta = 1/pi` the root
# is `3/sqrt(7)`.

# %%
zeta = 1 / math.pi
lam_b = model_b_root_value(zeta)
print(lam_b, 3 / math.sqrt(7), abs(gamma_closed(zeta, lam_b)))

# %% [markdown]
# Below the threshold `D` stays away from zero on the open right half plane.
# A coarse grid shows how far away.

# %%
re, im = np.meshgrid(np.linspace(0.1, 3, 150), np.linspace(-4, 4, 300))
print("min |D| at zeta=1/(4 pi):", np.abs(d_closed(1 / (4 * math.pi), re + 1j * im)).min())
