"""
Experiment configuration for r-cGA campaigns.

Campaigns are described by Python config modules holding UPPER_CASE constants (see
apps/gonemax-lab/config/). This module loads them by path, validates the keys and
materializes the grid: K per (n, r) cell and the iteration cap.
"""

import collections.abc
import importlib.util
import math
import os
import typing
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

from core.python.rcga_pipeline.eda_core import TRACE_FULL, TRACE_LEVELS, TRACE_NONE
from core.python.rcga_pipeline.errors import ConfigError, InvalidParameterError
from core.python.rcga_pipeline.fitness_core import CONSTANT, G_ONEMAX, OBJECTIVE_KINDS
from core.python.rcga_pipeline.theory_oracles import (
    DEFAULT_SIGNIFICANCE,
    ORACLE_VERIFIERS,
    adak_witt_k,
    rcga_on_gom_bound,
    theorem_k,
)

EXPERIMENT_KINDS = ("run", "scaling", "drift", "phases", "verify")

KNOWN_KEYS = {
    "EXPERIMENT_KIND", "OBJECTIVE", "N_VALUES", "R_VALUES", "K_RULE", "REPETITIONS", "BASE_SEED",
    "MAX_ITERATIONS_RULE", "TRACE_LEVEL", "SIGNIFICANCE", "ORACLES", "ORACLE_SETTINGS", "ACCEPTANCE",
    "DRIFT_HORIZON", "DRIFT_POSITION", "DRIFT_SUFFIX_START", "THREADS", "OUTPUT_DIR",
}

# Acceptance checks each campaign kind understands
ACCEPTANCE_KEYS = {
    "run": {"min_success_fraction", "exact_invariants"},
    "scaling": {"min_success_fraction", "max_normalized_spread"},
    "drift": {"max_biased_steps"},
    "phases": {"min_retention_fraction", "min_initial_ratio"},
    "verify": {"max_violations"},
}

FRACTION_CHECKS = {"min_success_fraction", "min_retention_fraction"}
COUNT_CHECKS = {"max_biased_steps", "max_violations"}

DEFAULT_THEOREM_C = 0.25
DEFAULT_ITERATION_FACTOR = 50


@dataclass
class ExperimentConfig:
    kind: str
    objective: str = G_ONEMAX
    n_values: List[int] = field(default_factory=lambda: [10])
    r_values: List[int] = field(default_factory=lambda: [4])
    k_rule: Dict[str, object] = field(default_factory=lambda: {"kind": "theorem", "c": DEFAULT_THEOREM_C})
    repetitions: int = 1
    base_seed: int = 0
    max_iterations_rule: Dict[str, object] = field(
        default_factory=lambda: {"kind": "multiple", "factor": DEFAULT_ITERATION_FACTOR})
    trace_level: str = TRACE_NONE
    significance: float = DEFAULT_SIGNIFICANCE
    oracles: List[str] = field(default_factory=list)
    oracle_settings: Dict[str, Dict[str, object]] = field(default_factory=dict)
    acceptance: Dict[str, object] = field(default_factory=dict)
    drift_horizon: Optional[int] = None
    drift_position: int = 0
    drift_suffix_start: Optional[int] = None
    threads: Optional[int] = None
    output_dir: Optional[str] = None
    name: str = ""

    def cells(self) -> List[Tuple[int, int, int]]:
        """(n, r, K) for every grid cell, n-major."""
        return [(n, r, materialize_k(self.k_rule, n, r)) for n in self.n_values for r in self.r_values]

    def max_iterations(self, n: int, r: int, K: int) -> int:
        return materialize_max_iterations(self.max_iterations_rule, n, r, K)

    def seeds(self) -> List[int]:
        return [self.base_seed + replica for replica in range(self.repetitions)]


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _rule_number(rule: Dict[str, object], key: str, default, what: str, integer: bool = False):
    value = rule.get(key, default)
    if not _is_number(value) or (integer and not isinstance(value, int)):
        expected = "an integer" if integer else "a number"
        raise ConfigError(f"{what} \"{key}\" must be {expected}, got {value!r}")
    return value


def round_up_to_multiple(value: float, r: int) -> int:
    """Smallest multiple of r that is >= value and >= r."""
    return max(r, math.ceil(value / r) * r)


def materialize_k(rule: Dict[str, object], n: int, r: int) -> int:
    """
    K for one grid cell; always well-behaved (a positive multiple of r).

    Formula rules are rounded up to the next multiple of r. An explicit K that is not a
    multiple of r is rejected unless the rule carries "round": True.
    """
    kind = rule.get("kind")
    if kind == "explicit":
        if "value" not in rule:
            raise ConfigError("explicit K rule needs a \"value\"")
        K = _rule_number(rule, "value", None, "explicit K rule", integer=True)
        if K < 1:
            raise InvalidParameterError(f"explicit K must be positive, got {K}")
        if K % r != 0:
            if not isinstance(rule.get("round", False), bool):
                raise ConfigError(f"K rule \"round\" must be True or False, got {rule['round']!r}")
            if not rule.get("round", False):
                raise InvalidParameterError(f"K={K} is not well-behaved for r={r} and rounding is disabled")
            return round_up_to_multiple(K, r)
        return K
    if kind == "theorem":
        c = _rule_number(rule, "c", DEFAULT_THEOREM_C, "theorem K rule")
        return round_up_to_multiple(theorem_k(c, n, r), r)
    if kind == "adak-witt":
        c = _rule_number(rule, "c", 1.0, "adak-witt K rule")
        return round_up_to_multiple(adak_witt_k(c, n, r), r)
    raise ConfigError(f"unknown K rule kind '{kind}' (expected explicit, theorem or adak-witt)")


def materialize_max_iterations(rule: Dict[str, object], n: int, r: int, K: int) -> int:
    """Explicit cap, or `factor` times K sqrt(n) ln n ln r (at least one iteration)."""
    kind = rule.get("kind")
    if kind == "explicit":
        if "value" not in rule:
            raise ConfigError("explicit max-iterations rule needs a \"value\"")
        value = _rule_number(rule, "value", None, "explicit max-iterations rule", integer=True)
        if value < 1:
            raise InvalidParameterError(f"max_iterations must be at least 1, got {value}")
        return value
    if kind == "multiple":
        factor = _rule_number(rule, "factor", DEFAULT_ITERATION_FACTOR, "max-iterations rule")
        return max(1, math.ceil(factor * rcga_on_gom_bound(n, r, K)))
    raise ConfigError(f"unknown max-iterations rule kind '{kind}' (expected explicit or multiple)")


def load_config_module(config_path: str):
    """Execute a config module by path (handles hyphenated app directories)."""
    if not os.path.isfile(config_path):
        raise ConfigError(f"config file not found: {config_path}")
    module_name = os.path.splitext(os.path.basename(config_path))[0]
    spec = importlib.util.spec_from_file_location(module_name, config_path)
    if spec is None or spec.loader is None:
        raise ConfigError(f"cannot load config file: {config_path}")
    module = importlib.util.module_from_spec(spec)
    try:
        spec.loader.exec_module(module)
    except Exception as e:
        raise ConfigError(f"config {config_path} failed to load: {e}") from e
    return module


def load_experiment_config(config_path: str, kind: Optional[str] = None) -> ExperimentConfig:
    """
    Load and validate an experiment config module.

    Args:
        config_path: Path to the config .py file
        kind: CLI subcommand; must agree with EXPERIMENT_KIND when the config sets it

    Returns:
        ExperimentConfig
    """
    module = load_config_module(config_path)
    values = {key: getattr(module, key) for key in dir(module) if key.isupper()}
    config = config_from_values(values, kind)
    config.name = os.path.splitext(os.path.basename(config_path))[0]
    return config


def _int_list(values: Dict[str, object], key: str, minimum: int) -> Optional[List[int]]:
    if key not in values:
        return None
    raw = values[key]
    if isinstance(raw, int):
        raw = [raw]
    if not isinstance(raw, (list, tuple)) or not raw:
        raise ConfigError(f"{key} must be a non-empty list of integers")
    if not all(isinstance(item, int) and not isinstance(item, bool) for item in raw):
        raise ConfigError(f"{key} must contain integers only, got {raw}")
    if min(raw) < minimum:
        raise InvalidParameterError(f"{key} entries must be >= {minimum}, got {raw}")
    return list(raw)


def _int_value(values: Dict[str, object], key: str, minimum: int) -> Optional[int]:
    if key not in values or values[key] is None:
        return None
    raw = values[key]
    if not isinstance(raw, int) or isinstance(raw, bool):
        raise ConfigError(f"{key} must be an integer, got {raw!r}")
    if raw < minimum:
        raise InvalidParameterError(f"{key} must be >= {minimum}, got {raw}")
    return raw


def _dict_value(values: Dict[str, object], key: str) -> Optional[dict]:
    if key not in values:
        return None
    if not isinstance(values[key], dict):
        raise ConfigError(f"{key} must be a dict, got {type(values[key]).__name__}")
    return dict(values[key])


def _matches_hint(value, hint) -> bool:
    """Loose isinstance against a verifier annotation (int, float, Optional[...], Sequence[...])."""
    if hint is type(None):
        return value is None
    origin = typing.get_origin(hint)
    if origin is Union:
        return any(_matches_hint(value, arg) for arg in typing.get_args(hint))
    if origin is collections.abc.Sequence:
        item_hint = (typing.get_args(hint) or (object,))[0]
        return isinstance(value, (list, tuple)) and all(_matches_hint(item, item_hint) for item in value)
    if hint is int:
        return isinstance(value, int) and not isinstance(value, bool)
    if hint is float:
        return _is_number(value)
    return True


def _check_oracle_settings(name: str, settings: object):
    if not isinstance(settings, dict):
        raise ConfigError(f"ORACLE_SETTINGS['{name}'] must be a dict")
    hints = typing.get_type_hints(ORACLE_VERIFIERS[name])
    hints.pop("return", None)
    unknown_settings = sorted(set(settings) - (set(hints) - {"seed", "significance"}))
    if unknown_settings:
        raise ConfigError(f"unknown settings for oracle '{name}': {', '.join(unknown_settings)}")
    for key, value in settings.items():
        if not _matches_hint(value, hints[key]):
            raise ConfigError(f"ORACLE_SETTINGS['{name}']['{key}'] has the wrong type: {value!r}")


def _check_acceptance(acceptance: Dict[str, object]):
    for key, value in acceptance.items():
        if key == "exact_invariants":
            valid = isinstance(value, bool)
        elif key in COUNT_CHECKS:
            valid = isinstance(value, int) and not isinstance(value, bool) and value >= 0
        elif key in FRACTION_CHECKS:
            valid = _is_number(value) and 0 <= value <= 1
        elif key == "min_initial_ratio":
            try:
                valid = not isinstance(value, bool) and Fraction(str(value)) >= 0
            except (ValueError, ZeroDivisionError):
                valid = False
        else:
            valid = _is_number(value) and value >= 0
        if not valid:
            raise ConfigError(f"ACCEPTANCE['{key}'] has an invalid value: {value!r}")


def config_from_values(values: Dict[str, object], kind: Optional[str] = None) -> ExperimentConfig:
    """Build an ExperimentConfig from UPPER_CASE key/value pairs."""
    unknown = sorted(set(values) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")

    declared = values.get("EXPERIMENT_KIND")
    if declared is not None and declared not in EXPERIMENT_KINDS:
        raise ConfigError(f"EXPERIMENT_KIND must be one of {', '.join(EXPERIMENT_KINDS)}, got {declared!r}")
    if kind is not None and declared is not None and kind != declared:
        raise ConfigError(f"config declares EXPERIMENT_KIND={declared!r} but the '{kind}' subcommand was used")
    kind = kind or declared
    if kind not in EXPERIMENT_KINDS:
        raise ConfigError("no experiment kind given (set EXPERIMENT_KIND or use a subcommand)")

    config = ExperimentConfig(kind=kind)
    if kind == "drift":
        config.objective = CONSTANT
        config.trace_level = TRACE_FULL

    objective = values.get("OBJECTIVE", config.objective)
    if objective not in OBJECTIVE_KINDS:
        raise ConfigError(f"OBJECTIVE must be one of {', '.join(OBJECTIVE_KINDS)}, got {objective!r}")
    config.objective = objective

    config.n_values = _int_list(values, "N_VALUES", 1) or config.n_values
    config.r_values = _int_list(values, "R_VALUES", 2) or config.r_values
    config.repetitions = _int_value(values, "REPETITIONS", 1) or config.repetitions
    base_seed = _int_value(values, "BASE_SEED", 0)
    config.base_seed = config.base_seed if base_seed is None else base_seed
    config.threads = _int_value(values, "THREADS", 1)
    config.drift_horizon = _int_value(values, "DRIFT_HORIZON", 0)
    position = _int_value(values, "DRIFT_POSITION", 0)
    config.drift_position = 0 if position is None else position
    config.drift_suffix_start = _int_value(values, "DRIFT_SUFFIX_START", 0)

    config.k_rule = _dict_value(values, "K_RULE") or config.k_rule
    config.max_iterations_rule = _dict_value(values, "MAX_ITERATIONS_RULE") or config.max_iterations_rule
    config.oracle_settings = _dict_value(values, "ORACLE_SETTINGS") or {}
    config.acceptance = _dict_value(values, "ACCEPTANCE") or {}

    trace_level = values.get("TRACE_LEVEL", config.trace_level)
    if trace_level not in TRACE_LEVELS:
        raise ConfigError(f"TRACE_LEVEL must be one of {', '.join(TRACE_LEVELS)}, got {trace_level!r}")
    if kind == "drift" and trace_level != TRACE_FULL:
        raise ConfigError("drift campaigns need TRACE_LEVEL = 'full'")
    config.trace_level = trace_level

    significance = values.get("SIGNIFICANCE", DEFAULT_SIGNIFICANCE)
    if not isinstance(significance, (int, float)) or not 0 < significance < 1:
        raise ConfigError(f"SIGNIFICANCE must lie in (0, 1), got {significance!r}")
    config.significance = float(significance)

    oracles = values.get("ORACLES", [])
    if not isinstance(oracles, (list, tuple)) or not all(isinstance(name, str) for name in oracles):
        raise ConfigError("ORACLES must be a list of oracle names")
    unknown_oracles = [name for name in oracles if name not in ORACLE_VERIFIERS]
    if unknown_oracles:
        raise ConfigError(f"unknown oracle(s): {', '.join(unknown_oracles)} "
                          f"(known: {', '.join(sorted(ORACLE_VERIFIERS))})")
    config.oracles = list(oracles)
    for name, settings in config.oracle_settings.items():
        if name not in ORACLE_VERIFIERS:
            raise ConfigError(f"ORACLE_SETTINGS names unknown oracle '{name}'")
        _check_oracle_settings(name, settings)

    unknown_checks = sorted(set(config.acceptance) - ACCEPTANCE_KEYS[kind])
    if unknown_checks:
        raise ConfigError(f"acceptance checks not available for '{kind}': {', '.join(unknown_checks)}")
    _check_acceptance(config.acceptance)

    output_dir = values.get("OUTPUT_DIR")
    if output_dir is not None and not isinstance(output_dir, str):
        raise ConfigError("OUTPUT_DIR must be a string")
    config.output_dir = output_dir

    if kind in ("drift", "phases") and (len(config.n_values) != 1 or len(config.r_values) != 1):
        raise ConfigError(f"{kind} campaigns take exactly one n and one r")
    if kind == "phases" and config.r_values[0] < 3:
        raise InvalidParameterError("phase campaigns need r >= 3 for the interval hierarchy")

    # Materialize once so rule errors surface before any work starts
    for n, r, K in config.cells():
        config.max_iterations(n, r, K)
    return config
