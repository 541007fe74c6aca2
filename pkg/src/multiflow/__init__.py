"""multiflow: diffusion, dimensional flow, and random walkers on multiscale spacetimes.

The package evaluates measure weights and geometric coordinate profiles,
closed-form dispersion laws ell^2(sigma) for weighted-, ordinary-, and
q-Laplacian diffusion, spectral/Hausdorff/walk dimension flows, heat-kernel
traces and their normalizations, and Monte Carlo walkers whose fitted scaling
exponents verify the closed forms.  A CLI (``multiflow``) drives parameter
sweeps and CSV emission.
"""

from .dispersion import (
    DiffusionSpec,
    DispersionCurve,
    dispersion,
    dispersion_fractional,
    dispersion_multiscale_weighted,
    dispersion_q,
    dispersion_quadrature,
    qm_time,
    sample_dispersion,
)
from .errors import (
    BoxError,
    ConfigError,
    ConvergenceError,
    DomainError,
    ExponentDomainError,
    GridError,
    MultiflowError,
    PoleError,
    SingularPointError,
)
from .kernel import (
    HeatKernelCurve,
    PdfEvaluation,
    ds_from_kernel,
    fixed_dim_trace_slopes,
    gaussian_pdf,
    heat_kernel_curve,
    ordinary_normalization,
    ordinary_pdf,
    pdf_evaluate,
    q_pdf,
    return_probability,
    weighted_pdf,
)
from .measure import (
    FractionalCharges,
    GeometryScales,
    MeasureProfile,
    ball_volume,
    fractional_weight,
    geometric_profile,
    geometric_profile_inverse,
    hausdorff_dimension,
    multiscale_profile,
    multiscale_weight,
)
from .spectral import (
    DimensionTriple,
    LegacyAnsatzWarning,
    SpectralFlow,
    density_of_states_exponent,
    dimension_triple,
    fixed_point_ds,
    legacy_ds,
    q_flow_curve,
    spectral_from_dispersion,
    spectral_q_flow,
    spectral_weighted_flow,
    walk_dimension,
    weighted_flow_curve,
)
from .specfun import DEFAULT_CONTROL, SeriesControl, gamma_fn, gauss_2f1, kummer_phi
from .walker import (
    IncrementReport,
    MsdFit,
    WalkerEnsemble,
    fit_scaling_exponent,
    fit_scaling_exponent_batched,
    geometric_grid,
    increment_diagnostics,
    msd,
    simulate,
    simulate_bm,
    simulate_fsbm_q,
    simulate_fsbm_v,
    simulate_sbm,
    uniform_grid,
)

__version__ = "0.1.0"
