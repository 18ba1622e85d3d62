"""Categorical value-distribution laboratory for process verifiers.

The heavy lifting lives in the compiled ``catval._core`` extension; this
package re-exports its public surface.
"""

from ._core import (  # noqa: F401
    AnnotatedSample,
    CategoricalDistribution,
    Dataset,
    EnvConfig,
    EvalReport,
    EvalRow,
    MlpVerifier,
    ReasoningTreeEnv,
    Rng,
    State,
    Support,
    TrainResult,
    __version__,
    annotate,
    beam_search_eval,
    best_of_n,
    binomial_pmf,
    canonical_env_json,
    distance_sweep,
    entropy_profile,
    env_config_hash,
    expectation,
    featurize,
    kl_divergence,
    load_env_config,
    load_model,
    make_posterior,
    make_support,
    predict_value,
    read_dataset,
    save_env_config,
    save_model,
    statistics_distance,
    std_normal_cdf,
    train,
    wasserstein1,
    write_dataset,
)
