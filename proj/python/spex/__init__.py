"""Sparse spectral explanations of set functions.

Masks are lists of feature indices. Spectra are Fourier expansions over
parities; ``Spectrum.coefficients()`` maps index tuples to coefficients.
"""

import json

from ._spex import (
    CapacityError,
    ConfigError,
    InvalidArgument,
    Model,
    ProviderError,
    SpexError,
    Spectrum,
    compute_index,
    exact_transform,
    extract,
    fit_gbt,
    hierarchy_rate,
    identify,
    kernel_shap,
    r2,
    sample_masks,
    shapley,
    sparsify,
    synthetic_truth,
    to_mobius,
)
from ._spex import run_json as _spex_run


def run(config, value_fn=None):
    """Run the full pipeline and return the report as a dict.

    ``config`` uses the same layout as ``spex run --config``. With
    ``value_fn`` given, it is called with batches of masks and must return
    one float per mask; ``config["value_function"]["n"]`` sets the width.
    """
    return json.loads(_spex_run(json.dumps(config), value_fn))


__all__ = [
    "CapacityError",
    "ConfigError",
    "InvalidArgument",
    "Model",
    "ProviderError",
    "SpexError",
    "Spectrum",
    "compute_index",
    "exact_transform",
    "extract",
    "fit_gbt",
    "hierarchy_rate",
    "identify",
    "kernel_shap",
    "r2",
    "run",
    "sample_masks",
    "shapley",
    "sparsify",
    "synthetic_truth",
    "to_mobius",
]
