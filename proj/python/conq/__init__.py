"""Quantile treatment effects for clustered A/B data."""

from ._conq import (
    ConfigError,
    DataError,
    DomainError,
    Error,
    Sketch,
    analyze,
    analyze_file,
    balanced_assignments,
    bandwidth_normal_reference,
    bh_adjust,
    blb_variance,
    build_sketch,
    default_grid,
    delta_percent,
    delta_se,
    ecdf,
    kde_density,
    log_scale,
    p_value,
    parse_grid,
    qte_row,
    quantile,
    simulate_experiment,
    spearman,
    woodruff_se,
)

__all__ = [
    "ConfigError",
    "DataError",
    "DomainError",
    "Error",
    "Sketch",
    "analyze",
    "analyze_file",
    "balanced_assignments",
    "bandwidth_normal_reference",
    "bh_adjust",
    "blb_variance",
    "build_sketch",
    "default_grid",
    "delta_percent",
    "delta_se",
    "ecdf",
    "kde_density",
    "log_scale",
    "p_value",
    "parse_grid",
    "qte_row",
    "quantile",
    "simulate_experiment",
    "spearman",
    "woodruff_se",
]
