"""Scenario configuration: sectioned key-value files (INI) or JSON, parsed strictly.

Every key has a declared type and default; unknown sections or keys and
out-of-range values raise :class:`ConfigError` before any computation.
Lists are comma-separated in INI files. Overrides use ``section.key=value``.
"""

from __future__ import annotations

import configparser
import copy
import hashlib
import json
import math
from pathlib import Path

from .errors import ConfigError

__all__ = ["SCHEMA", "ScenarioConfig", "load_config", "default_config"]

POTENTIALS = ("quadratic-saddle", "cosine", "coulomb-regularized")

_pos = ("positive", lambda v: v > 0)
_nonneg = ("non-negative", lambda v: v >= 0)
_order = ("2 or 4", lambda v: v in (2, 4))
_pot = (f"one of {', '.join(POTENTIALS)}", lambda v: v in POTENTIALS)
_kernel = ("lorentzian or gaussian", lambda v: v in ("lorentzian", "gaussian"))

# section -> key -> (type, default, check)
SCHEMA = {
    "potential": {
        "id": ("str", "quadratic-saddle", _pot),
        "sigmas": ("floats", [1.0, -2.0], None),
        "quartic": ("floats", [], None),
        "rotation": ("float", 0.0, None),
        "g": ("float", 50.0, None),
        "eps": ("float", 0.1, _pos),
    },
    "physics": {
        "masses": ("floats", [1.0], _pos),
        "hbar": ("float", 1.0, _pos),
    },
    "solver": {
        "start": ("floats", [], None),
        "K": ("int", 128, ("at least 16", lambda v: v >= 16)),
        "N": ("ints", [128], ("at least 8", lambda v: v >= 8)),
        "box": ("floats", [], None),
        "n_levels": ("int", 10, _pos),
        "order": ("int", 4, _order),
        "monodromy_dt": ("float", 1e-4, _pos),
        "dt": ("float", 0.01, _pos),
        "steps": ("int", 1000, _pos),
        "grid": ("ints", [128, 512], ("at least 8", lambda v: v >= 8)),
        "grid_box": ("floats", [], None),
    },
    "analysis": {
        "target_energy": ("float", 101.189, None),
        "delta_e": ("float", 1.0, _pos),
        "n_values": ("ints", [0, 1, 2], _nonneg),
        "amplitude": ("float", 3.0, _pos),
        "smoothing": ("float", 0.2, _pos),
        "kernel": ("str", "lorentzian", _kernel),
        "n_passings": ("int", 10, _pos),
        "nu": ("int", 0, None),
        "x2_max": ("float", 0.0, _nonneg),
        "n_points": ("int", 201, ("at least 2", lambda v: v >= 2)),
        "localization_halfwidth": ("float", 0.0, _nonneg),
    },
    "output": {
        "directory": ("str", "out", None),
    },
}


def _convert(kind, raw, where):
    try:
        if kind == "str":
            if not isinstance(raw, str):
                raise TypeError
            return raw.strip()
        if kind in ("float", "int"):
            if isinstance(raw, (list, tuple, dict, bool)):
                raise TypeError
            if kind == "int":
                v = float(raw) if isinstance(raw, str) else raw
                if float(v) != int(float(v)):
                    raise ValueError
                return int(float(v))
            v = float(raw)
            if not math.isfinite(v):
                raise ValueError
            return v
        # lists
        if isinstance(raw, str):
            items = [s for s in (p.strip() for p in raw.replace(";", ",").split(",")) if s]
        elif isinstance(raw, (list, tuple)):
            items = list(raw)
        else:
            items = [raw]
        return [_convert(kind[:-1], s, where) for s in items]
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: cannot read {raw!r} as {kind}") from None


class ScenarioConfig:
    """Validated configuration; ``cfg[section][key]`` or ``cfg.get(section, key)``."""

    def __init__(self, values):
        self._v = values

    def __getitem__(self, section):
        return self._v[section]

    def get(self, section, key):
        return self._v[section][key]

    def as_dict(self):
        return copy.deepcopy(self._v)

    def digest(self):
        """SHA-256 of the canonical JSON form (output directory excluded)."""
        d = self.as_dict()
        d.pop("output", None)
        blob = json.dumps(d, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()


def default_config():
    return ScenarioConfig({s: {k: copy.deepcopy(v[1]) for k, v in keys.items()} for s, keys in SCHEMA.items()})


def _validate(values):
    for s, keys in SCHEMA.items():
        for k, (kind, _, check) in keys.items():
            if check is None:
                continue
            what, ok = check
            v = values[s][k]
            for item in v if isinstance(v, list) else [v]:
                if not ok(item):
                    raise ConfigError(f"{s}.{k} must be {what}, got {item!r}")
    box = values["solver"]["box"]
    if box and (len(box) % 2 or any(lo >= hi for lo, hi in zip(box[::2], box[1::2]))):
        raise ConfigError("solver.box must list (lo, hi) pairs with lo < hi")
    gb = values["solver"]["grid_box"]
    if gb and (len(gb) % 2 or any(lo >= hi for lo, hi in zip(gb[::2], gb[1::2]))):
        raise ConfigError("solver.grid_box must list (lo, hi) pairs with lo < hi")
    if values["potential"]["id"] == "quadratic-saddle":
        sig = values["potential"]["sigmas"]
        if not sig:
            raise ConfigError("potential.sigmas must not be empty")
        q = values["potential"]["quartic"]
        if q and len(q) != len(sig):
            raise ConfigError("potential.quartic must match potential.sigmas in length")
        if any(c < 0 for c in q):
            raise ConfigError("potential.quartic coefficients must be non-negative")


def _merge(values, section, key, raw, where):
    if section not in SCHEMA:
        raise ConfigError(f"{where}: unknown section [{section}]")
    if key not in SCHEMA[section]:
        raise ConfigError(f"{where}: unknown key {section}.{key}")
    values[section][key] = _convert(SCHEMA[section][key][0], raw, f"{section}.{key}")


def load_config(path=None, overrides=()):
    """Read ``path`` (INI or JSON; JSON if it parses as an object) and apply overrides."""
    values = default_config().as_dict()
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        data = None
        if text.lstrip().startswith("{"):
            try:
                data = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: invalid JSON: {exc}") from None
            for section, body in data.items():
                if not isinstance(body, dict):
                    raise ConfigError(f"{path}: section {section!r} must be an object")
                for key, raw in body.items():
                    _merge(values, section, key, raw, str(path))
        else:
            cp = configparser.ConfigParser(interpolation=None, default_section="\x00")
            cp.optionxform = str
            try:
                cp.read_string(text, source=str(path))
            except configparser.Error as exc:
                raise ConfigError(f"{path}: {exc}") from None
            for section in cp.sections():
                for key, raw in cp.items(section):
                    _merge(values, section, key, raw, str(path))
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override {item!r} is not of the form section.key=value")
        lhs, raw = item.split("=", 1)
        section, key = lhs.strip().split(".", 1)
        _merge(values, section, key.strip(), raw, "override")
    _validate(values)
    return ScenarioConfig(values)
