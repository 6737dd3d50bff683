"""Max-margin classification under label noise.

Thin Python layer over the C++ core: data generators, the exact max-margin
solver, gradient descent on the exponential loss, risk diagnostics and
seeded simulation sweeps.
"""

import json as _json

from ._core import (
    Classifier,
    ConfigError,
    Dataset,
    DivergingLoss,
    DomainError,
    IoError,
    KktResiduals,
    ModelSpec,
    NoiseSpec,
    NotSeparable,
    SolverConfig,
    TrainResult,
    TrainTrace,
    analytic_risk_gaussian,
    apply_noise,
    brute_force_max_margin,
    corollary_bound,
    direction_gap,
    exp_loss,
    grad_exp_loss,
    kkt_residuals,
    margin_ratio,
    margins,
    max_margin,
    mc_risk,
    normal_cdf,
    read_dataset_csv,
    sample_clean,
    theorem_bound,
    train_error,
    train_gd,
    write_dataset_csv,
)
from . import _core

__version__ = "0.1.0"


def check_events(data, mu, delta=0.1, c=2.0, c_prime=0.05, eta=0.0):
    """Event report for a dataset as a dict."""
    return _json.loads(_core._check_events(data, mu, delta, c, c_prime, eta))


def preset(name, trials=100):
    """Sweep configuration of a figure preset as a dict."""
    return _json.loads(_core._preset(name, trials))


def run_sweep(config, threads=0):
    """Runs a sweep described by a config dict; returns one dict per trial."""
    return _json.loads(_core._run_sweep(_json.dumps(config), threads))
