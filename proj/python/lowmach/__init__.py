"""Low Mach number limit lab.

Thin Python layer over the C++ core. The numerical work happens in
``lowmach._core``; :func:`main` exposes the same command line as the
``lowmach`` executable.
"""

import json
import sys

from ._core import (
    ConfigError,
    Error,
    FitError,
    GeometryError,
    NumericalError,
    DomainError,
    GammaExponents,
    LinearizationCoeffs,
    PerforatedGeometry,
    ScalingFit,
    ScalingParams,
    ThermoParams,
    build_perforation,
    entropy,
    gamma_exponents,
    hole_measure,
    internal_energy,
    linearization,
    pressure,
    read_cell_field,
    run_cli,
    scaling_fit,
)
from ._core import normalize_config as _normalize_config


def normalize_config(config):
    """Validate a configuration (dict or JSON text) and fill in defaults."""
    text = config if isinstance(config, str) else json.dumps(config)
    return json.loads(_normalize_config(text))


def main(argv=None):
    args = sys.argv[1:] if argv is None else list(argv)
    return run_cli(args)


__all__ = [name for name in dir() if not name.startswith("_")]
