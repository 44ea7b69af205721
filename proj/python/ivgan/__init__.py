"""Intervention GAN core bindings."""

from ._core import (
    ConfigError,
    ContractError,
    DomainError,
    FormatError,
    ShapeError,
    anneal_noise,
    config_keys,
    evaluate,
    gradcheck,
    invariance,
    load_checkpoint_tensors,
    mode_coverage,
    multi_js_discrete,
    optimal_classifier_posterior,
    parse_config,
    sample_dataset,
    square_fit,
    square_fitting_table,
    train,
)

__all__ = [
    "ConfigError",
    "ContractError",
    "DomainError",
    "FormatError",
    "ShapeError",
    "anneal_noise",
    "config_keys",
    "evaluate",
    "gradcheck",
    "invariance",
    "load_checkpoint_tensors",
    "mode_coverage",
    "multi_js_discrete",
    "optimal_classifier_posterior",
    "parse_config",
    "sample_dataset",
    "square_fit",
    "square_fitting_table",
    "train",
]
