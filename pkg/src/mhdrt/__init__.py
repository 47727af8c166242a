"""Linear stability of the viscous, non-resistive two-fluid MHD Rayleigh-Taylor
problem in the slab (-1, 1): critical field strength, critical wavenumbers,
growth-rate dispersion curves, normal modes and per-mode energy evolution."""
from .core import (
    DegenerateFrequencyError,
    FluidParams,
    Frequency,
    InterfaceMesh,
    InvalidMeshError,
    MagneticConfig,
    MHDRTError,
    Orientation,
    OrientationMismatchError,
    ParameterError,
    StableConfigurationError,
    SupercriticalFieldError,
    build_mesh,
)
from .eigen import ModifiedEigenResult, alpha_of_s, jump_residuals, smallest_eigenpair
from .evolve import ModeTrajectory, energy_balance_residual, evolve_mode, fit_growth_exponent
from .forms import (
    FormSet,
    HermiteSpace,
    LinearSpace,
    assemble_E0,
    assemble_E0_horizontal,
    assemble_E0_vertical,
    assemble_E1,
    assemble_forms,
    assemble_h1_forms,
    assemble_J,
)
from .growth import (
    DispersionCurve,
    GrowthResult,
    Status,
    dispersion_sweep,
    euler_lambda,
    find_s_star,
    growth_bound,
    reconstruct_mode,
    solve_growth_rate,
)
from .variational import (
    CriticalValues,
    critical_freq_horizontal,
    critical_freq_vertical,
    critical_magnetic_number,
    critical_values,
    xi_hc_oracle,
    xi_vc_oracle,
)

__version__ = "0.1.0"
