"""Numerical laboratory for Schrodinger dispersion on step-2 stratified Lie groups."""

from .errors import (
    BudgetExceeded,
    DegenerateLambda,
    FrameUnavailable,
    InadmissibleParameters,
    NotLinear,
    OrderTooLarge,
    QuadratureNotConverged,
    StratwaveError,
    UnknownGroupKind,
    ZeroTime,
)
from .groups import (
    EtaMode,
    FrameMode,
    GroupElement,
    GroupSpec,
    b_form,
    catalog,
    dilate,
    eta,
    group_product,
    homogeneous_dimension,
    pfaffian,
    spec_from_json,
    spec_to_json,
)
# note: the scalar evaluator itself lives at stratwave.hermite.hermite; the
# bare name is not re-exported so that the submodule stays importable
from .hermite import (
    HermiteEvaluator,
    WignerValue,
    hermite_scaled,
    radial_derivative_bound,
    wigner_g,
    wigner_g_closed,
    wigner_g_full,
)
from .spectrum import (
    AlphaSupport,
    WindowSpec,
    alpha_support,
    window,
    window_product,
    zeta,
    zeta_components,
    zeta_gradient,
)
from .quadrature import (
    MonteCarloResult,
    OscIntegral,
    QuadratureBudget,
    QuadratureResult,
    RingBlock,
    integrate,
    monte_carlo_check,
)
from .kernel import (
    KernelRequest,
    KernelValue,
    amplitude_G,
    fresnel_factor,
    kernel,
    ktilde,
    series_tail_bound,
    series_uniform_bound,
)
from .analysis import (
    DecayReport,
    RankReport,
    WitnessResult,
    assumption_check,
    decay_scan,
    fit_loglog_slope,
    hessian_rank,
    nondispersion_witness,
    optimality_witness,
    stationary_z_grid,
    theoretical_decay_slope,
)
from .fourier import (
    FourierData,
    FourierGrid,
    diagonalization_residual,
    forward,
    inverse_at,
    plancherel_kappa,
    rep_matrix_element,
)

__version__ = "0.1.0"
