"""Resonances and invariant Ruelle distributions of the three-disc billiard."""

import json

from ._core import (
    ConfigError,
    CycleExpansion,
    NumericalError,
    OrbitTable,
    PeriodicOrbit,
    Resonance,
    __version__,
    build_expansions,
    distribution,
    enumerate_prime_cycles,
    find_orbit,
    localization_metric,
    residue,
    scan,
    sigma1_mask,
    weighted_zeta,
)
from ._core import run as _run


def run(command, config=None, **overrides):
    """Run one of the file-producing commands and return the written paths.

    `config` is a dict with the same keys as the JSON configuration file;
    keyword arguments override individual keys.
    """
    cfg = dict(config or {})
    cfg.update(overrides)
    return _run(command, json.dumps(cfg))


__all__ = [
    "ConfigError",
    "CycleExpansion",
    "NumericalError",
    "OrbitTable",
    "PeriodicOrbit",
    "Resonance",
    "__version__",
    "build_expansions",
    "distribution",
    "enumerate_prime_cycles",
    "find_orbit",
    "localization_metric",
    "residue",
    "run",
    "scan",
    "sigma1_mask",
    "weighted_zeta",
]
