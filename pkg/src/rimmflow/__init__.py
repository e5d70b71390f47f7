"""Spectral analysis of the rimming-flow thin-film equation near the uniform film.

Fourier-Galerkin steady states, the linearized spectrum and its critical
conjugate pair, the second-order eigenvalue expansion, numerical tracing of
the Hopf curve and time integration on an invariant mass hyperplane.
"""

from .errors import (
    BlowUp,
    DegenerateNormalization,
    GapViolation,
    LostPositivity,
    NoBracket,
    NoConvergence,
    NoCrossing,
    RimmflowError,
)
from .evolve import TrajectorySummary, detect_cycle, evolve, perturbed_state, rhs, step
from .hopf import (
    PathSpec,
    Stability,
    classify,
    locate_crossing,
    r_numeric,
    trace_E2,
    transversality,
    zero_branch_directions,
)
from .linear import (
    SpectrumReport,
    assemble_A,
    assemble_Q,
    eigenvector_normalized,
    full_spectrum,
    lambda_plus,
    leading_pair,
    spectrum,
    spectrum_at,
)
from .perturbation import e2_asymptotic, e2_slope, hessian_model, lambda_coeffs, r_quadratic
from .spectral import (
    Params,
    SpectralField,
    apply_B,
    apply_G_inv,
    derivative,
    inner,
    product,
    project_mean_zero,
    rescale_physical,
    sobolev_norm,
)
from .steady import SteadyState, mean_mass, solve_steady, taylor_steady

__version__ = "0.1.0"
