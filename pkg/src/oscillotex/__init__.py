"""oscillotex: oscillatory shear flows over complex-viscosity phase textures.

Worked-example solvers (Stokes-II half space, layered Couette, spanwise
block-Toeplitz mode coupling), the constitutive kernel/texture layer they
share, and the resolvent/non-normality diagnostics suite, with a CLI for
sweeps and CSV/JSON artifacts.
"""

from .viscosity import (
    ConstantPhase,
    Cosine,
    OneSided,
    PhaseOnly,
    PhaseTexture1D,
    PronySpectrum,
    SmoothDefect,
    SpanwiseTexture,
    TwoLayerPhase,
    bessel_j,
    bessel_tail,
    laplace_quadrature,
)
from .solvers1d import (
    DirichletTop,
    FluxFormProblem,
    Grid1D,
    HalfSpace,
    Interval,
    RobinTop,
    SingularSystemError,
    Solution1D,
    greens_function_constant,
    phase_compensate,
    power_residual,
    shear_wavenumber,
    solution_table,
    solve_bvp,
    wall_flux,
    wall_traction,
)
from .stokes2 import (
    DefectShape,
    HalfSpaceSetup,
    impedance_positivity,
    solve_halfspace,
    wall_impedance_numeric,
    zw1_chiprime_form,
    zw1_perturbative,
)
from .couette import (
    ExceptionalCompatibilityError,
    Layer,
    LayerStack,
    operator_matrix,
    profile_states,
    stack_solve,
    tau_correction_first_order,
    transfer_matrix,
)
from .toeplitz import (
    BlockSystemSpec,
    BoundUnavailableError,
    ConvergenceCertificateError,
    SmallnessCertificate,
    UnsupportedTextureError,
    assemble_blocks,
    conservative_sideband_bound,
    resolvent_block,
    second_order_mean_mode,
    smallness_certificate,
    solve_direct,
    solve_neumann,
    stability_constants,
    support_sets,
    truncation_error_report,
    verify_support,
)
from .diagnostics import (
    OperatorHandle,
    SignatureRecord,
    corner_functionals,
    dissipation_weighted_gain,
    modal_wall_flux,
    nonnormality_metric,
    numerical_range_sample,
    pseudospectrum_grid,
    resolvent_gain,
    sideband_ratios,
    spanwise_energy_fraction,
    traction_signature,
    transfer_norm,
    transfer_norm_leading,
    unwrap_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # viscosity
    "PronySpectrum", "laplace_quadrature", "ConstantPhase", "TwoLayerPhase",
    "SmoothDefect", "PhaseTexture1D", "OneSided", "Cosine", "PhaseOnly",
    "SpanwiseTexture", "bessel_j", "bessel_tail",
    # 1d solvers
    "Grid1D", "DirichletTop", "RobinTop", "FluxFormProblem", "Solution1D",
    "SingularSystemError", "solve_bvp", "wall_flux", "wall_traction",
    "power_residual", "phase_compensate", "Interval", "HalfSpace",
    "greens_function_constant", "shear_wavenumber", "solution_table",
    # stokes2
    "DefectShape", "HalfSpaceSetup", "solve_halfspace",
    "wall_impedance_numeric", "zw1_perturbative", "zw1_chiprime_form",
    "impedance_positivity",
    # couette
    "Layer", "LayerStack", "ExceptionalCompatibilityError", "transfer_matrix",
    "stack_solve", "profile_states", "tau_correction_first_order",
    "operator_matrix",
    # toeplitz
    "BlockSystemSpec", "SmallnessCertificate", "ConvergenceCertificateError",
    "UnsupportedTextureError", "BoundUnavailableError", "assemble_blocks",
    "solve_direct", "solve_neumann", "resolvent_block",
    "smallness_certificate", "conservative_sideband_bound",
    "stability_constants", "truncation_error_report", "support_sets",
    "verify_support", "second_order_mean_mode",
    # diagnostics
    "OperatorHandle", "SignatureRecord", "resolvent_gain",
    "dissipation_weighted_gain", "nonnormality_metric",
    "numerical_range_sample", "pseudospectrum_grid", "sideband_ratios",
    "spanwise_energy_fraction", "transfer_norm", "transfer_norm_leading",
    "modal_wall_flux", "traction_signature", "unwrap_sweep",
    "corner_functionals",
]
