"""Spherical Dirichlet-to-Neumann operators for Helmholtz problems with complex wavenumber."""

from .dtn import (
    DtnKind, apply_dtn, definiteness_report, dtn_form, indexed_trace_norm, sobolev_norm,
)
from .exceptions import (
    AccuracyError, BandLimitError, ConvergenceError, DegenerateFamilyError, DomainError,
    DtnError, KindError, RegimeError,
)
from .exterior import (
    ExteriorField, annulus_h1_norm, evaluate_exterior, ode_residual, radial_factor, radiation_check,
)
from .friedrichs import build_modal, corollary_check, friedrichs_ratio, friedrichs_sweep, volume_norms
from .harmonics import BoundaryCoefficients, analyze, eigenvalue, multiplicity, surface_grid, synthesize
from .special_functions import (
    ModulusPoint, Order, QuadratureSpec, bessel_i, bessel_k, bessel_k_asymptotic, bessel_k_ratio,
    hankel_modulus_sq, nicholson_modulus_sq,
)
from .spectral import Mode, calibrate_c2, check_bounds, w_mu, z_coefficient

__version__ = "0.1.0"
