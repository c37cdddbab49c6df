"""Shapley interaction indices via weighted least squares (KernelSHAP-IQ), with exact
oracles, sampling baselines and benchmark tooling."""
from .combinatorics import Coalition, bernoulli, enumerate_subsets, kernel_weight_mu, lambda_weight
from .estimators import (
    EstimatorConfig,
    Estimate,
    estimate,
    inconsistent_kernelshap_iq,
    kernelshap_iq,
    permutation_sampling_sii,
    shap_iq_sii,
)
from .exact import discrete_derivative, exact_ksii, exact_sii, exact_sv, k_additive_approx, moebius_transform
from .games import (
    CenteredGame,
    FunctionGame,
    Game,
    LookupGame,
    SoumGame,
    center,
    generate_soum,
    load_lookup_game,
    soum_evaluate,
    soum_exact_sii,
    store_lookup_game,
)
from .metrics import mse, prec_at_10
from .sampling import SamplingBatch, compute_sampling_order, default_sampling_weights, sample_batch
from .values import InteractionValues
from .wls import (
    aggregate_sii_to_ksii,
    build_design_matrix,
    conjectured_precision_matrix,
    sii_subset_weight,
    solve_wls,
)

__version__ = "0.1.0"
