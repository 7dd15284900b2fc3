"""Boolean-model percolation, thinning, conductivity and homogenization."""

import json
import os

from ._core import (
    CoverageError,
    ParameterError,
    PointCloud,
    SolverError,
    analyze_field,
    clusters,
    code_version,
    count_channels,
    default_k_scale,
    delta_hat,
    effective_conductivity,
    intensity_ladder,
    percolate,
    render,
    sample_poisson,
    solve_homogenized,
    thin,
    vacancy,
    verify_manifest,
)
from ._core import run_scenario as _run_scenario


def run_scenario(config):
    """Run a scenario from a dict, a JSON string or a path; returns the manifest."""
    if isinstance(config, dict):
        text = json.dumps(config)
    elif isinstance(config, (str, os.PathLike)) and os.path.exists(config):
        with open(config) as fh:
            text = fh.read()
    else:
        text = config
    return json.loads(_run_scenario(text))


__all__ = [
    "CoverageError",
    "ParameterError",
    "PointCloud",
    "SolverError",
    "analyze_field",
    "clusters",
    "code_version",
    "count_channels",
    "default_k_scale",
    "delta_hat",
    "effective_conductivity",
    "intensity_ladder",
    "percolate",
    "render",
    "run_scenario",
    "sample_poisson",
    "solve_homogenized",
    "thin",
    "vacancy",
    "verify_manifest",
]
