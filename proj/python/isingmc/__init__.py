"""Sparse Ising structure learning with MCMC Lasso.

Parameters are 1-D float arrays of length d(d-1)/2 in row-major pair order
(1,2), (1,3), ..., (d-1,d). Datasets are (n, d) arrays of +1/-1.
"""

import json

from ._core import (
    IoError,
    McObjective,
    NumericalError,
    WeightUnderflowError,
    __version__,
    edge_index,
    edge_pair,
    exact_nll,
    fit_pl,
    importance_ratio_bound,
    lambda_grid,
    lambda_max,
    log_norming_constant,
    mc_path,
    norming_constant,
    num_edges,
    pl_gradient,
    pl_path,
    pl_value,
    sample_dataset,
    spectral_constants,
    theorem_alpha,
    theorem_report,
)
from ._core import run_experiment as _run_experiment


def fit_mc(data, lam, m=100000, burn_in=None, psi=None, seed=1, **solver):
    """One MCMC Lasso fit at penalty `lam` from a chain drawn at `psi` (default 0)."""
    return McObjective(data, psi=psi, m=m, burn_in=burn_in, seed=seed).fit(lam, **solver)


def run_experiment(config):
    """Runs a simulation study. `config` is a dict with the keys of the CLI's JSON config."""
    results, records, summary = _run_experiment(json.dumps(config))
    return {"results_tsv": results, "records_tsv": records, "summary": json.loads(summary)}


__all__ = [
    "IoError",
    "McObjective",
    "NumericalError",
    "WeightUnderflowError",
    "__version__",
    "edge_index",
    "edge_pair",
    "exact_nll",
    "fit_mc",
    "fit_pl",
    "importance_ratio_bound",
    "lambda_grid",
    "lambda_max",
    "log_norming_constant",
    "mc_path",
    "norming_constant",
    "num_edges",
    "pl_gradient",
    "pl_path",
    "pl_value",
    "run_experiment",
    "sample_dataset",
    "spectral_constants",
    "theorem_alpha",
    "theorem_report",
]
