"""Python access to the coupled fluid-plate solver.

Reports produced by the C++ side are JSON documents; they are returned here
as plain dictionaries.
"""

import json

from . import _core
from ._core import ConfigError, RunConfig, decay_fit, load_config, parse_config, suite_names

__all__ = [
    "ConfigError",
    "RunConfig",
    "decay_fit",
    "load_config",
    "parse_config",
    "probe",
    "simulate",
    "suite_names",
    "verify",
    "write_simulation",
]


def _command(result):
    result["report"] = json.loads(result["report"])
    return result


def simulate(config):
    """Runs a trajectory in memory; returns columns, summary, error, audits_passed."""
    out = _core.simulate(config)
    out["summary"] = json.loads(out["summary"])
    return out


def write_simulation(config, output_dir):
    return _command(_core.cmd_simulate(config, str(output_dir)))


def verify(config, suite, output_dir):
    return _command(_core.cmd_verify(config, suite, str(output_dir)))


def probe(config, kind, output_dir):
    return _command(_core.cmd_probe(config, kind, str(output_dir)))
