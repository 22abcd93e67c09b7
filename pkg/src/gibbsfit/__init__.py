"""gibbsfit: Gibbs-manifold state estimation and level-of-description
selection for small classical and quantum systems.

The pipeline in one breath: choose a reference state and a set of
observables (a level of description), project measured sample means onto
the matching manifold of generalized Gibbs states, weigh the projection
against the prior with the evidence procedure, and decide between
competing levels with a chi-square-per-parameter rule anchored at ln N.
"""

from .errors import (
    DataFormatError,
    DomainError,
    EvidenceNotApplicableError,
    GibbsFitError,
    InfeasibleTargetError,
    ManifoldMismatchError,
    NotConvergedError,
    ValidationError,
)
from .gibbs import (
    BlochVector,
    GibbsModel,
    bloch_from_lambdas,
    bloch_log_norm,
    bloch_metric,
    bloch_relative_entropy,
    bloch_to_model,
    bloch_volume_weight,
    gibbs_state,
    grand_potential,
    lambdas_from_bloch,
    manifold_relative_entropy,
    model_to_bloch,
    pauli_level,
    project,
    project_state,
    quadratic_form,
    thermodynamic_entropy,
    volume_weight,
)
from .inference import (
    AlphaEstimate,
    ComparisonReport,
    EntropicPrior,
    ExperimentData,
    PosteriorEstimate,
    SignificanceReport,
    chi2_log_tail,
    chi2_logpdf,
    chi2_pdf,
    chi2_tail,
    compare_levels,
    entropic_log_density,
    estimate_alpha,
    gaussian_log_norm,
    interpolate_states,
    level_significance,
    log_linear_mix,
    posterior_estimate,
    pythagoras_residual,
    significance,
    verdict_from_rate,
)
from .levels import (
    LevelOfDescription,
    complement,
    full_classical_level,
    full_quantum_level,
    intersection,
    is_sublevel,
    make_level,
    tensor,
    trivial_level,
    union,
)
from .state_space import (
    DensityOperator,
    HermitianOperator,
    bloch_state,
    classical_state,
    expectation,
    hs_inner,
    kmb_inner,
    pauli_x,
    pauli_y,
    pauli_z,
    relative_entropy,
    uniform_state,
    von_neumann_entropy,
)

__version__ = "0.1.0"
