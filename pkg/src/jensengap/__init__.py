"""Two-sided bounds on the gap in Jensen's inequality.

The package has three layers:

* :mod:`jensengap.bounds` and :mod:`jensengap.distributions` — the analytic
  core: coefficient tables, bound kernels for smooth functions of a random
  variable, and moment providers for the stock distributions.
* :mod:`jensengap.gallery`, :mod:`jensengap.mc`, :mod:`jensengap.latent`,
  :mod:`jensengap.pacbayes` — applications: closed-form worked examples and
  baseline sweeps, the sample-mean interval estimator with normality
  diagnostics, linear-Gaussian marginal-likelihood brackets, and exact
  cross-entropy oracle bounds for two-model averaging.
* :mod:`jensengap.benchmark`, :mod:`jensengap.plots`, :mod:`jensengap.cli` —
  the scored toy-model suite, figure rendering, and the command-line front
  end (installed as ``jensengap``).
"""

from .bounds import (
    K_MAX,
    BoundReport,
    CoefficientTable,
    FunctionSpec,
    coeff_a,
    coeff_b,
    exp_function,
    general_bounds,
    general_bounds_zero_mean,
    harmonic_minus_b_identity,
    log_bounds_central,
    log_bounds_raw,
    neg_log_function,
    simple_cov_bounds,
)
from .distributions import (
    EmpiricalProvider,
    ExponentialProvider,
    GammaProvider,
    LogNormalProvider,
    MomentProvider,
    MomentValue,
    NormalProvider,
    exact_log_gap,
    load_samples,
)
from .errors import (
    ArgumentError,
    ComputationError,
    DataError,
    DomainError,
    JensenGapError,
    ModelError,
    NumericalError,
)
from .gallery import (
    GALLERY_CASES,
    GalleryCase,
    SweepRow,
    comparison_sweep,
    exp_exponential_bounds,
    exp_normal_bounds,
    gamma_log_bounds,
    lognormal_log_bounds,
    struski_log_upper,
)
from .latent import (
    BenchmarkPair,
    LatentGaussianModel,
    importance_ratio_sampler,
    log_marginal_oracle,
    make_benchmark_suite,
    model_from_json_dict,
    model_to_json_dict,
    with_posterior_encoder,
)
from .mc import (
    GridSearchResult,
    McBoundEstimate,
    McConfig,
    NGrid,
    NormalityDiagnostics,
    distribution_sampler,
    empirical_sampler,
    estimate_with_auto_n,
    grid_search_n,
    normality_diagnostics,
    sample_mean_log_bounds,
)
from .pacbayes import (
    MISSPECIFIED_DEFAULT,
    PERFECT_DEFAULT,
    FiniteModelFamily,
    MixtureCurvePoint,
    MixtureWeights,
    argmin_rho,
    binomial_family,
    cross_entropy,
    expected_log_loss,
    first_order_term,
    model_averaging_sweep,
    oracle_bound,
)
from .benchmark import BenchmarkPairResult, BenchmarkResult, run_benchmark

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # bounds
    "K_MAX",
    "BoundReport",
    "CoefficientTable",
    "FunctionSpec",
    "coeff_a",
    "coeff_b",
    "exp_function",
    "general_bounds",
    "general_bounds_zero_mean",
    "harmonic_minus_b_identity",
    "log_bounds_central",
    "log_bounds_raw",
    "neg_log_function",
    "simple_cov_bounds",
    # distributions
    "EmpiricalProvider",
    "ExponentialProvider",
    "GammaProvider",
    "LogNormalProvider",
    "MomentProvider",
    "MomentValue",
    "NormalProvider",
    "exact_log_gap",
    "load_samples",
    # errors
    "ArgumentError",
    "ComputationError",
    "DataError",
    "DomainError",
    "JensenGapError",
    "ModelError",
    "NumericalError",
    # gallery
    "GALLERY_CASES",
    "GalleryCase",
    "SweepRow",
    "comparison_sweep",
    "exp_exponential_bounds",
    "exp_normal_bounds",
    "gamma_log_bounds",
    "lognormal_log_bounds",
    "struski_log_upper",
    # latent
    "BenchmarkPair",
    "LatentGaussianModel",
    "importance_ratio_sampler",
    "log_marginal_oracle",
    "make_benchmark_suite",
    "model_from_json_dict",
    "model_to_json_dict",
    "with_posterior_encoder",
    # mc
    "GridSearchResult",
    "McBoundEstimate",
    "McConfig",
    "NGrid",
    "NormalityDiagnostics",
    "distribution_sampler",
    "empirical_sampler",
    "estimate_with_auto_n",
    "grid_search_n",
    "normality_diagnostics",
    "sample_mean_log_bounds",
    # pacbayes
    "MISSPECIFIED_DEFAULT",
    "PERFECT_DEFAULT",
    "FiniteModelFamily",
    "MixtureCurvePoint",
    "MixtureWeights",
    "argmin_rho",
    "binomial_family",
    "cross_entropy",
    "expected_log_loss",
    "first_order_term",
    "model_averaging_sweep",
    "oracle_bound",
    # benchmark
    "BenchmarkPairResult",
    "BenchmarkResult",
    "run_benchmark",
]
