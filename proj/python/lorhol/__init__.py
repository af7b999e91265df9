"""Walker and toric Lorentzian metrics: curvature, holonomy, geodesics and structure checks."""

import json

from ._core import (
    DomainError,
    MetricChart,
    NumericalError,
    ParseError,
    ScalarField,
    ValidationError,
    __version__,
    check_hyperkahler,
    demo,
    demo_config,
    demo_names,
    dual_lefschetz,
    g2_condition,
    geodesic,
    holonomy,
    one_one_residual,
    screen_twist,
    spin7_condition,
    walker,
)
from ._core import run_command as _run_command


def run(command, config, seed=0):
    """Runs a CLI command on INI text and returns the report as a dict."""
    return json.loads(_run_command(command, config, seed))


__all__ = [
    "DomainError",
    "MetricChart",
    "NumericalError",
    "ParseError",
    "ScalarField",
    "ValidationError",
    "__version__",
    "check_hyperkahler",
    "demo",
    "demo_config",
    "demo_names",
    "dual_lefschetz",
    "g2_condition",
    "geodesic",
    "holonomy",
    "one_one_residual",
    "run",
    "screen_twist",
    "spin7_condition",
    "walker",
]
