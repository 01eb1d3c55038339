"""Run configuration: a JSON file with nested sections, schema-validated
before execution.  Precedence: command-line flags > config file > defaults.
Unknown keys anywhere are rejected."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from .errors import StructureError

# schema: key -> type or nested dict schema; every command owns a section
_TOLERANCES_SCHEMA = {
    "commutation": float,
    "triangularization": float,
    "spectral_margin": float,
    "contraction": float,
}

CONFIG_SCHEMA = {
    "command": str,
    "seed": int,
    "out": str,
    "threads": int,
    "tolerances": _TOLERANCES_SCHEMA,
    "constants": dict,  # C(d) table: {"1": 1.0, ...}
    "validate": {"tuple": str, "random": str},
    "spectrum": {"tuple": str, "random": str},
    "pick-norm": {"points": str, "values": str, "function": str, "a": float},
    "npoint-search": {"function": str, "n": int, "budget": int, "a": float, "starts": int},
    "three-point-check": {},
    "schur": {
        "function": str,
        "tuple": str,
        "random": str,
        "a": float,
        "sup_budget": int,
        "quadrature_order": int,
        "safety": float,
    },
    "vn-fuzz": {"n": int, "budget": int, "est_budget": int, "d_max": int, "degree_max": int},
    "cdn-curve": {"d": int, "k_max": int, "trials": int, "budget": int},
    "fc-check": {"count": int, "n": int, "d": int, "samples": int},
}

DEFAULTS = {
    "seed": 0,
    "out": "ballmult-out",
    "threads": 0,  # 0 means all cores
    "tolerances": {
        "commutation": 1e-10,
        "triangularization": 1e-10,
        "spectral_margin": 1e-9,
        "contraction": 1e-8,
    },
    "constants": {},
}


def _check_section(value, schema, path):
    if not isinstance(value, dict):
        raise StructureError(f"config section {path or '<root>'} must be an object")
    for key, val in value.items():
        if key not in schema:
            raise StructureError(f"unknown config key {path + key!r}")
        want = schema[key]
        if isinstance(want, dict) and want:
            _check_section(val, want, path + key + ".")
        elif want is dict:
            if not isinstance(val, dict):
                raise StructureError(f"config key {path + key!r} must be an object")
        elif want is float:
            if not isinstance(val, (int, float)) or isinstance(val, bool):
                raise StructureError(f"config key {path + key!r} must be a number")
        elif want is int:
            if not isinstance(val, int) or isinstance(val, bool):
                raise StructureError(f"config key {path + key!r} must be an integer")
        elif want is str:
            if not isinstance(val, str):
                raise StructureError(f"config key {path + key!r} must be a string")
        elif isinstance(want, dict):
            if not isinstance(val, dict) or val:
                raise StructureError(f"config key {path + key!r} takes no parameters")


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.exists():
        raise StructureError(f"config file {path} does not exist")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise StructureError(f"config file is not valid JSON: {exc}") from exc
    _check_section(data, CONFIG_SCHEMA, "")
    return data


_COMMAND_SECTIONS = {
    k for k, v in CONFIG_SCHEMA.items() if isinstance(v, dict) and k != "tolerances"
}


def merge_config(command: str, file_cfg: dict, flags: dict) -> dict:
    """defaults <- file <- flags, returning a flat dict for the command."""
    if command not in _COMMAND_SECTIONS:
        raise StructureError(f"unknown command {command!r}")
    if "command" in file_cfg and file_cfg["command"] != command:
        raise StructureError(
            f"config file is for command {file_cfg['command']!r}, not {command!r}"
        )
    out = json.loads(json.dumps(DEFAULTS))
    out["params"] = {}
    for key, val in file_cfg.items():
        if key == "command":
            continue
        if key == command:
            out["params"].update(val)
        elif key == "tolerances":
            out["tolerances"].update(val)
        elif key == "constants":
            out["constants"].update(val)
        elif key in ("seed", "out", "threads"):
            out[key] = val
        elif key in _COMMAND_SECTIONS:
            raise StructureError(f"config carries section {key!r} for a different command")
    section_schema = CONFIG_SCHEMA[command]
    for key, val in flags.items():
        if val is None:
            continue
        if key in ("seed", "out", "threads"):
            out[key] = val
        else:
            if key not in section_schema:
                raise StructureError(f"flag {key!r} not valid for command {command!r}")
            out["params"][key] = val
    return out


def config_hash(command: str, merged: dict) -> str:
    canon = json.dumps({"command": command, **merged}, sort_keys=True)
    return hashlib.sha256(canon.encode()).hexdigest()[:16]
