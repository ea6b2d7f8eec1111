"""Experiment config files: one JSON document per experiment.

Schema (version 1)::

    {
      "schema": 1,
      "law":    {"family": "exponential", "rate": 1.0},
      "kernel": {"kind": "indicator", "eta": {"family": "exponential", "rate": 1.0}},
      "seed":   7,
      ...command-specific fields...
    }

Command fields (all numbers unless noted):

* ``simulate``:  ``t``, ``u_grid`` (sorted list), ``n_replicates``
* ``stationary``: ``u_grid``, ``n_replicates``, ``tol``, optional ``c``
  (window half-width for ``--dump-window``) and ``c_max``
* ``converge``: ``t_list`` (list), ``u_grid``, ``n_replicates``, ``alpha``,
  ``tol``, optional ``n_permutations``
* ``dri``: ``dri`` object with ``k_max``, ``grid_per_unit``, ``n_mc``
* ``pointprocess``: optional ``pointprocess`` object with ``horizon``,
  ``n_realizations``, ``n_windows``, ``intervals`` (list of pairs),
  ``shift``, ``alpha``, and a ``laplace`` object (``h`` table config,
  ``t``, ``n_mc``)

``seed`` is mandatory everywhere: commands are pure functions of the config
file, never of the wall clock.
"""

import json
from dataclasses import dataclass

from .distributions import Law, law_from_config
from .errors import ConfigError, KernelError, LawError
from .kernels import KernelSpec, kernel_from_config

__all__ = ["ExperimentConfig", "load_config", "parse_config"]

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ExperimentConfig:
    law: Law
    kernel: KernelSpec
    seed: int
    raw: dict


def _fail(path, message):
    raise ConfigError(f"{path}: {message}")


def require_number(raw, path, minimum=None, exclusive_minimum=None, maximum=None):
    keys = path.split(".")
    node = raw
    for key in keys:
        if not isinstance(node, dict) or key not in node:
            _fail(path, "missing required field")
        node = node[key]
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        _fail(path, f"must be a number, got {node!r}")
    value = float(node)
    if minimum is not None and value < minimum:
        _fail(path, f"must be >= {minimum}, got {node!r}")
    if exclusive_minimum is not None and value <= exclusive_minimum:
        _fail(path, f"must be > {exclusive_minimum}, got {node!r}")
    if maximum is not None and value > maximum:
        _fail(path, f"must be <= {maximum}, got {node!r}")
    return value


def require_int(raw, path, minimum=None):
    value = require_number(raw, path, minimum=minimum)
    if value != int(value):
        _fail(path, "must be an integer")
    return int(value)


def require_grid(raw, path):
    keys = path.split(".")
    node = raw
    for key in keys:
        if not isinstance(node, dict) or key not in node:
            _fail(path, "missing required field")
        node = node[key]
    if not isinstance(node, list) or not node:
        _fail(path, "must be a nonempty list of numbers")
    try:
        values = [float(v) for v in node]
    except (TypeError, ValueError):
        _fail(path, "must be a nonempty list of numbers")
    if any(b <= a for a, b in zip(values, values[1:])):
        _fail(path, "must be strictly increasing")
    return values


def optional(raw, path, default=None):
    keys = path.split(".")
    node = raw
    for key in keys:
        if not isinstance(node, dict) or key not in node:
            return default
        node = node[key]
    return node


def parse_config(raw):
    """Validate the common fields and build the law/kernel objects."""
    if not isinstance(raw, dict):
        raise ConfigError("config: must be a JSON object")
    schema = raw.get("schema")
    if schema != SCHEMA_VERSION:
        _fail("schema", f"must be {SCHEMA_VERSION}, got {schema!r}")
    if "seed" not in raw:
        _fail("seed", "missing required field (wall-clock seeding is not supported)")
    seed = require_int(raw, "seed", minimum=0)
    if "law" not in raw:
        _fail("law", "missing required field")
    try:
        law = law_from_config(raw["law"], interarrival=True)
    except LawError as exc:
        _fail("law", str(exc))
    if "kernel" not in raw:
        _fail("kernel", "missing required field")
    try:
        kernel = kernel_from_config(raw["kernel"])
    except (KernelError, LawError) as exc:
        _fail("kernel", str(exc))
    return ExperimentConfig(law=law, kernel=kernel, seed=seed, raw=raw)


def load_config(path):
    """Read and validate a config file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON in {path}: {exc}") from exc
    return parse_config(raw)
