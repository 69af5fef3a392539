# %% [markdown]
# # Phase mixing and density decay
#
# Free transport `f_t + i sin(theta) f = 0` moves the density only through
# phase mixing, so `rho(t)` decays algebraically. The density of a smooth
# datum behaves like `t^(-1/2)`. This comes from the stationary points of
# `sin` at `theta = +/- pi/2`.

# %%
import math

import numpy as np

from abpstab.evolution import evolve_reduced, fit_rate, free_transport_density, TimeSeries
from abpstab.fourier import FourierField
from abpstab.model import ReducedParams

f0 = FourierField.from_function(lambda th: np.exp(np.cos(th - 0.3)), 32)
t = np.linspace(0, 400, 8001)
free = TimeSeries(t, free_transport_density(f0, t))
print("free transport exponent:", fit_rate(free, "algebraic", window=(50, 400)).rate)

# %% [markdown]
# Turning on a stable coupling changes the exponent. The density transform
# is the free one divided by the dispersion function. Both have square-root
# singularities at `lambda = +/- i`, and those cancel in the quotient. The
# surviving singularity is one order weaker, so the coupled density decays
# like `t^(-3/2)`.

# %%
zeta = 1 / (4 * math.pi)
run = evolve_reduced(ReducedParams(zeta), f0, 200.0, dt=0.01, N=256)
print("coupled exponent:", fit_rate(run, "algebraic", window=(50, 200)).rate)

# %% [markdown]
# The same density is available by convolving the free density with the
# Green kernel. That route involves no angular discretisation at all.

# %%
from abpstab.kernels import density_via_convolution

grid = np.linspace(0, 50, 5001)
conv = density_via_convolution(zeta, f0, grid)
short = evolve_reduced(ReducedParams(zeta), f0, 50.0, dt=0.01, N=128)
print("max difference:", np.max(np.abs(conv.rho - short.rho)))
