"""Linear stability of active Brownian particle suspensions, reduced to one angular mode.

The reduced problem for a Fourier mode of the density perturbation reads

    d_t f + i sin(theta) f - nu d^2_theta f = zeta i sin(theta) int f dtheta,

and everything here either evaluates its dispersion function, integrates it
in time, or solves the Volterra equation satisfied by the density.
"""
from .model import (HomogeneousState, ReducedParams, StabilityClass, ValidationError, VelocityLaw,
                    affine_state, classify_state, flux_derivative, lift_growth_rate, make_velocity_law,
                    reduce_mode, zeta_of)
from .fourier import FourierField, TruncationWarning, smooth_random_field
from .dispersion import (BranchError, CutError, DispersionValue, MarginalParameterError, NearCutWarning,
                         RootReport, SpectrumError, dispersion_closed_form, dispersion_quadrature,
                         inviscid_root_value, inviscid_roots, model_b_gamma, model_b_matrix, model_b_roots,
                         rational_integral_oracle, rational_integral_quadrature, resolvent_apply, weyl_residual)
from .spectral import (ConditioningError, OperatorConfig, diffusive_dispersion, diffusive_root,
                       leading_eigenvalue, model_b_diffusive_matrix, model_b_diffusive_root,
                       propagate_semigroup, resolvent_solve, semigroup_norm_decay, semigroup_rate)
from .evolution import (BlowUpError, TimeSeries, evolve_model_b, evolve_reduced, fit_rate,
                        free_transport_bessel, free_transport_density, rotation_invariance_check)
from .kernels import (MarginReport, density_via_convolution, green_kernel, kernel_laplace, model_b_kernel,
                      model_b_margin, stability_margin_scan, volterra_kernel)
from .volterra import (PreconditionError, ResolventKernel, SampledKernel, VolterraSystem, paley_wiener_check,
                       resolvent_kernel, solve_density_volterra, solve_model_b_volterra, solve_volterra,
                       weighted_decay_transfer)

__version__ = "0.1.0"
