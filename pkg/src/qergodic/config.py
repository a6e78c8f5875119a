"""Experiment configuration: TOML files validated against a JSON schema.

Every run resolves the file against :data:`DEFAULTS` so the written
sidecar lists all parameters actually used.
"""

from __future__ import annotations

import copy
import sys
from pathlib import Path

import jsonschema

from .dictionary import (
    TestDictionary,
    abs2_cutoff,
    constant_one,
    cutoff_power,
    default_dictionary,
    gaussian_bump,
    radial_hat,
)
from .exceptions import ConfigurationError
from .grid import GridSpec
from .model import build_measure, build_weight

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = ["SCHEMA_VERSION", "DEFAULTS", "PRESETS", "SCHEMA", "load_config", "resolve_config",
           "apply_overrides", "parse_symbol", "build_model", "build_dictionary"]

SCHEMA_VERSION = 1

PRESETS = {
    "flat_circle": {"weight": {"kind": "zero"},
                    "measure": {"kind": "circle", "resolution": 256, "radius": 1.0}},
    "abs2_disk": {"weight": {"kind": "abs_squared", "c": 1.0},
                  "measure": {"kind": "disk", "resolution": 96, "radius": 3.0}},
}

DEFAULTS = {
    "schema_version": SCHEMA_VERSION,
    "model": {"preset": "abs2_disk"},
    "N_list": [8, 16, 32, 64],
    "grid": {"x_min": -2.5, "x_max": 2.5, "y_min": -2.5, "y_max": 2.5, "nx": 401, "ny": 401},
    "ensemble": {"kind": "spherical", "n_samples": 100, "master_seed": 0},
    "dictionary": {"centers": [-1.0, 0.0, 1.0], "widths": [0.25, 0.5], "max_power": 4,
                   "hat_radii": [0.5, 1.0, 1.5], "hat_width": 0.5},
    "symbols": ["bump:0.5,0,0.5", "abs2_cutoff"],
    "onb": {"symbol": "re:1", "n_draws": 500, "eps": 0.01},
    "orbit": {"spectra": [[1.0, -1.0], [2.0, 0.0, -1.0]], "n_samples": 100000},
    "sample": {"points": [[0.5, 0.0], [0.0, 0.8], [1.2, -0.3]]},
    "output": {"dir": ""},
    "tolerances": {"envelope_tol": 1e-8, "orthonormality_tol": 1e-8, "extremal_rtol": 1e-6,
                   "coincidence_tol": 0.0},
}

_num = {"type": "number"}
_pos_int = {"type": "integer", "minimum": 1}
_point = {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["schema_version"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "model": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "preset": {"enum": sorted(PRESETS)},
                "weight": {"type": "object", "required": ["kind"], "properties": {
                    "kind": {"enum": ["zero", "abs_squared", "radial_power"]}}},
                "measure": {"type": "object", "required": ["kind", "resolution"],
                            "additionalProperties": False, "properties": {
                                "kind": {"enum": ["circle", "disk", "annulus", "truncated_plane"]},
                                "resolution": {"type": "integer", "minimum": 4},
                                "radius": {"type": "number", "exclusiveMinimum": 0},
                                "inner_radius": {"type": "number", "exclusiveMinimum": 0},
                                "n_angular": _pos_int}},
            },
        },
        "N_list": {"type": "array", "items": _pos_int, "minItems": 1},
        "grid": {"type": "object", "additionalProperties": False, "properties": {
            "x_min": _num, "x_max": _num, "y_min": _num, "y_max": _num,
            "nx": {"type": "integer", "minimum": 5}, "ny": {"type": "integer", "minimum": 5}}},
        "ensemble": {"type": "object", "additionalProperties": False, "properties": {
            "kind": {"enum": ["spherical", "gaussian"]},
            "n_samples": _pos_int,
            "master_seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1}}},
        "dictionary": {"type": "object", "additionalProperties": False, "properties": {
            "centers": {"type": "array", "items": _num},
            "widths": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
            "max_power": {"type": "integer", "minimum": 0},
            "hat_radii": {"type": "array", "items": {"type": "number", "minimum": 0}},
            "hat_width": {"type": "number", "exclusiveMinimum": 0}}},
        "symbols": {"type": "array", "items": {"type": "string"}},
        "onb": {"type": "object", "additionalProperties": False, "properties": {
            "symbol": {"type": "string"}, "n_draws": _pos_int,
            "eps": {"type": "number", "exclusiveMinimum": 0}}},
        "orbit": {"type": "object", "additionalProperties": False, "properties": {
            "spectra": {"type": "array", "items": {"type": "array", "items": _num, "minItems": 1}},
            "n_samples": {"type": "integer", "minimum": 2}}},
        "sample": {"type": "object", "additionalProperties": False, "properties": {
            "points": {"type": "array", "items": _point}}},
        "output": {"type": "object", "additionalProperties": False,
                   "properties": {"dir": {"type": "string"}}},
        "tolerances": {"type": "object", "additionalProperties": False, "properties": {
            "envelope_tol": {"type": "number", "exclusiveMinimum": 0},
            "orthonormality_tol": {"type": "number", "exclusiveMinimum": 0},
            "extremal_rtol": {"type": "number", "exclusiveMinimum": 0},
            "coincidence_tol": {"type": "number", "minimum": 0}}},
    },
}


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def validate(cfg):
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigurationError(f"config invalid at {where}: {exc.message}") from None


def resolve_config(raw=None):
    """Validate ``raw`` and expand every default."""
    raw = {"schema_version": SCHEMA_VERSION} if raw is None else raw
    validate(raw)
    cfg = _merge(DEFAULTS, {k: v for k, v in raw.items() if k != "model"})
    given = raw.get("model", {})
    preset = given.get("preset", None if given else DEFAULTS["model"]["preset"])
    model = copy.deepcopy(PRESETS[preset]) if preset else {}
    model.update(copy.deepcopy({k: v for k, v in given.items() if k != "preset"}))
    if "weight" not in model or "measure" not in model:
        raise ConfigurationError("model needs a preset or both weight and measure")
    if preset:
        model["preset"] = preset
    cfg["model"] = model
    validate(cfg)
    return cfg


def load_config(path=None):
    """Read and resolve a TOML config; ``None`` gives the defaults."""
    if path is None:
        return resolve_config()
    with Path(path).open("rb") as fh:
        try:
            raw = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigurationError(f"cannot parse {path}: {exc}") from None
    return resolve_config(raw)


def apply_overrides(cfg, pairs):
    """Apply ``KEY=VAL`` tolerance overrides and revalidate."""
    cfg = copy.deepcopy(cfg)
    for item in pairs or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigurationError(f"tolerance override {item!r} is not KEY=VAL")
        key = key.strip()
        if key not in DEFAULTS["tolerances"]:
            raise ConfigurationError(f"unknown tolerance {key!r}")
        try:
            cfg["tolerances"][key] = float(val)
        except ValueError:
            raise ConfigurationError(f"tolerance {key} needs a number, got {val!r}") from None
    validate(cfg)
    return cfg


def parse_symbol(text):
    """Test function from a short text form.

    ``one``, ``abs2_cutoff``, ``re:K`` / ``im:K`` (cut-off powers),
    ``bump:X,Y,W`` and ``hat:R0,W``.
    """
    name, _, args = text.partition(":")
    vals = [float(a) for a in args.split(",")] if args else []
    try:
        if name == "one":
            return constant_one()
        if name == "abs2_cutoff":
            return abs2_cutoff()
        if name in ("re", "im"):
            return cutoff_power(int(vals[0]), name)
        if name == "bump":
            return gaussian_bump(complex(vals[0], vals[1]), vals[2])
        if name == "hat":
            return radial_hat(vals[0], vals[1])
    except (IndexError, ValueError):
        pass
    raise ConfigurationError(f"cannot parse test symbol {text!r}")


def build_model(cfg):
    model = cfg["model"]
    wspec = dict(model["weight"])
    weight = build_weight(wspec.pop("kind"), **wspec)
    mspec = dict(model["measure"])
    measure = build_measure(mspec.pop("kind"), mspec.pop("resolution"), **mspec)
    return weight, measure, GridSpec(**cfg["grid"])


def build_dictionary(cfg):
    d = cfg["dictionary"]
    if d == DEFAULTS["dictionary"]:
        return default_dictionary()
    return TestDictionary(default_dictionary(tuple(d["centers"]), tuple(d["widths"]),
                                             d["max_power"], tuple(d["hat_radii"]),
                                             d["hat_width"]).functions)
