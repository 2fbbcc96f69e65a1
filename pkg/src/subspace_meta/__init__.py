"""Bayesian multi-task learning through a shared predictor subspace.

Tasks share a low-dimensional subspace of predictor space; training
estimates the subspace and the task-diversity parameter jointly with the
per-task coefficients by Gibbs sampling, and new tasks adapt with few
labels by mixing their Gaussian conditionals over the learned posterior.
"""

from .errors import (
    ConfigError,
    DegenerateError,
    DimensionError,
    InvariantError,
    MassUnderflowError,
    ModeError,
    NotPositiveDefiniteError,
    NumericFailureError,
)
from .rng import RngStream
from .manifold import (
    CsFactors,
    PrincipalAngleSet,
    ProjectionMatrix,
    StiefelPoint,
    cs_recover_projection,
    frechet_mean,
    principal_angles,
    projection_from_basis,
    sample_uniform_stiefel,
)
from .samplers import (
    BinghamParam,
    ThetaConditionalCoeffs,
    mh_theta_update,
    sample_matrix_bingham,
    sample_matrix_vmf,
    sample_mvn,
    sample_polya_gamma_1,
    sample_trunc_inverse_gamma,
    sample_vector_bingham,
    sample_vector_vmf,
)
from .linear import (
    GlobalState,
    HyperParams,
    PosteriorDraws,
    SimConfig,
    TaskData,
    TaskState,
    beta_full_conditional,
    calibrate_b1,
    generate_tasks,
    gibbs_meta_train,
    meta_test_posterior,
    phi_full_conditional,
    posterior_predictive,
    sigma2_full_conditional,
    variance_proportion,
    z_full_conditional_param,
)
from .classify import (
    BinaryTaskData,
    MultiClassModel,
    MulticlassDraws,
    PgAugmentation,
    beta_pg_full_conditional,
    logistic_gibbs_meta_train,
    multiclass_gibbs_meta_train,
    pg_update,
    stick_breaking_probs,
)
from .metrics import (
    MetricsReport,
    coverage_radius,
    empirical_coverage,
    kl_gaussian_and_bound,
    r_squared,
    sin2_theta_series,
)
from .estimators import SubspaceMetaClassifier, SubspaceMetaRegressor

__version__ = "0.1.0"
