"""Banded precision matrix estimation by blockwise inversion."""

from ._bandprec import (
    DegenerateUpdateError,
    NotPositiveDefiniteError,
    build_omega,
    correction_decay_report,
    default_bandwidth,
    empirical_covariance,
    estimate,
    run_sweep,
    run_trial,
    sample,
    spectral_norm,
    taper_apply,
)

__all__ = [
    "DegenerateUpdateError",
    "NotPositiveDefiniteError",
    "build_omega",
    "correction_decay_report",
    "default_bandwidth",
    "empirical_covariance",
    "estimate",
    "run_sweep",
    "run_trial",
    "sample",
    "spectral_norm",
    "taper_apply",
]
