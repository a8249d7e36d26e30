"""Information bottleneck and distributed IB trade-offs on finite and Gaussian sources."""
from ._backend import BACKEND
from .closedform import (
    GaussianIBModel,
    GaussianIBProjection,
    binary_ib,
    critical_betas,
    scalar_gaussian_ib,
    vector_gaussian_ib,
)
from .coding import (
    CranModel,
    combining_identity_check,
    cr_rate,
    cran_region_point,
    ib_curve_value,
    remote_rd_inverse,
    remote_rd_point,
    wak_rate,
)
from .curve import CurvePoint, pareto_frontier, upper_concave_envelope
from .dib import (
    DIBComponents,
    DIBSolveConfig,
    DistributedJoint,
    EncoderBank,
    GaussianDIBModel,
    dib_lagrangian,
    dib_region_check,
    eval_vdib_bound,
    gaussian_dib_delta,
    optimal_dib_components,
    optimize_gaussian_dib,
    solve_dib_discrete,
    symmetric_scalar_dib,
)
from .errors import IBKitError
from .ib_discrete import IBSolution, IBSolveConfig, ba_step, solve_ib, sweep_curve, sweep_solutions
from .oracle import GridSpec, exhaustive_deterministic, grid_dib_frontier, grid_ib_frontier
from .prob import (
    Encoder,
    InfoValue,
    JointPMF,
    binary_entropy,
    induced_distributions,
    kl_divergence,
    log_loss,
    mutual_information,
    validate_joint,
)
from .variational import (
    ConcreteParams,
    VariationalComponents,
    empirical_vib,
    eval_vib_bound,
    log_loss_floor_check,
    optimal_components,
    sample_gaussian_reparam,
    sample_gumbel_softmax,
)

__version__ = "0.1.0"
