"""Run configuration: YAML schema, validation, object construction.

The config is a key-tree with sections law / bounds / plan / confidence /
entropy / output.  Unknown keys anywhere are rejected.  Every emitted
file carries the config hash so runs are traceable.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field as dc_field
from typing import Dict, List, Optional, Tuple

import yaml

from .distribution import MdtParams, make_mdt
from .entropy import FieldModel
from .errors import ConfigError
from .slowvary import parse_sv

_SCHEMA = {
    "law": {"beta": (int, float), "gamma": (int, float), "V": str,
            "u_star": (int, float, type(None))},
    "bounds": {"mode": str, "c1": (int, float, type(None)),
               "c2": (int, float, type(None)), "c3": (int, float, type(None)),
               "rosenthal_c0": (int, float),
               "calibration_slack_dkw": (int, float)},
    "plan": {"n_grid": list, "reps": int, "seed": int, "u_points": int,
             "u_min": (int, float, type(None)), "u_max": (int, float, type(None)),
             "dkw_delta": (int, float), "budget": int, "threads": int},
    "confidence": {"delta": (int, float), "n": int},
    "entropy": {"d": int, "alpha": (int, float), "C5": (int, float),
                "C9": (int, float), "C10": (int, float), "J": int,
                "weights": list, "M": int},
    "output": {"dir": str, "formats": list},
}

_DEFAULTS = {
    "law": {"beta": 4.0, "gamma": 0.0, "V": "c(1)", "u_star": None},
    "bounds": {"mode": "pessimistic", "c1": None, "c2": None, "c3": None,
               "rosenthal_c0": 2.0, "calibration_slack_dkw": 2.0},
    "plan": {"n_grid": [1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024],
             "reps": 100000, "seed": 1, "u_points": 64, "u_min": None,
             "u_max": None, "dkw_delta": 1e-3, "budget": 10 ** 9, "threads": 1},
    "confidence": {"delta": 1e-3, "n": 10000},
    "entropy": {"d": 1, "alpha": 1.0, "C5": 1.0, "C9": 1.0, "C10": 1.0,
                "J": 3, "weights": [1.0, 0.5, 0.25], "M": 64},
    "output": {"dir": "out", "formats": ["csv", "json"]},
}


def _validate(tree: Dict, schema: Dict, path: str = "") -> None:
    if not isinstance(tree, dict):
        raise ConfigError(f"section '{path or '<root>'}' must be a mapping")
    for key, val in tree.items():
        here = f"{path}.{key}" if path else key
        if key not in schema:
            raise ConfigError(f"unknown config key '{here}'")
        expected = schema[key]
        if isinstance(expected, dict):
            _validate(val, expected, here)
        else:
            if isinstance(val, bool) and bool not in (expected if isinstance(expected, tuple) else (expected,)):
                raise ConfigError(f"config key '{here}' has wrong type bool")
            if not isinstance(val, expected):
                raise ConfigError(
                    f"config key '{here}' has wrong type {type(val).__name__}")


def _merge(defaults: Dict, given: Dict) -> Dict:
    out = {}
    for key, dval in defaults.items():
        if isinstance(dval, dict):
            out[key] = _merge(dval, given.get(key, {}) or {})
        elif key in given:
            out[key] = given[key]
        else:
            out[key] = dval
    return out


@dataclass(frozen=True, eq=False)
class RunConfig:
    raw: Dict = dc_field(repr=False, default_factory=dict)

    @classmethod
    def load(cls, path: Optional[str]) -> "RunConfig":
        if path is None:
            given = {}
        else:
            try:
                with open(path) as fh:
                    given = yaml.safe_load(fh) or {}
            except FileNotFoundError as exc:
                raise ConfigError(f"config file not found: {path}") from exc
            except yaml.YAMLError as exc:
                raise ConfigError(f"cannot parse config {path}: {exc}") from exc
        _validate(given, _SCHEMA)
        merged = _merge(_DEFAULTS, given)
        cfg = cls(raw=merged)
        cfg.params()  # fail early on bad law parameters
        return cfg

    def override(self, **kwargs) -> "RunConfig":
        merged = json.loads(json.dumps(self.raw))
        for key, val in kwargs.items():
            if val is None:
                continue
            section, name = key.split("__")
            merged[section][name] = val
        return RunConfig(raw=merged)

    def digest(self) -> str:
        # threads and budget change scheduling, never results, so they
        # stay out of the hash and reruns remain byte-identical
        tree = json.loads(json.dumps(self.raw))
        tree["plan"].pop("threads", None)
        tree["plan"].pop("budget", None)
        return hashlib.sha256(
            json.dumps(tree, sort_keys=True).encode()).hexdigest()[:16]

    def params(self) -> MdtParams:
        law = self.raw["law"]
        try:
            v = parse_sv(law["V"])
        except Exception as exc:
            raise ConfigError(f"law.V: {exc}") from exc
        try:
            return make_mdt(law["beta"], law["gamma"], v, law["u_star"])
        except Exception as exc:
            raise ConfigError(f"law: {exc}") from exc

    def field_model(self) -> FieldModel:
        ent = self.raw["entropy"]
        weights = tuple(float(w) for w in ent["weights"])
        if len(weights) != ent["J"]:
            raise ConfigError(
                f"entropy.weights has {len(weights)} entries but entropy.J={ent['J']}")
        return FieldModel(params=self.params(), weights=weights, resolution=ent["M"])

    def u_range(self) -> Tuple[Optional[float], Optional[float], int]:
        plan = self.raw["plan"]
        return plan["u_min"], plan["u_max"], plan["u_points"]

    def header_lines(self) -> str:
        law = self.raw["law"]
        return (f"# config_hash={self.digest()} seed={self.raw['plan']['seed']}\n"
                f"# law: beta={law['beta']} gamma={law['gamma']} V={law['V']}\n")
