"""JSON run configuration for the command-line driver.

Complex numbers are two-element arrays ``[re, im]``. Unknown keys are
rejected. A minimal QHE config::

    {"model": {"type": "qhe", "splitting": 1.0,
               "state": {"p1": 0.3, "rho01": [0, 0]}},
     "beta": 1.0, "orders": [2, 3]}
"""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import jsonschema

from .bath import BathSpec, Susceptibility
from .models import OscillatorSpec, QheSpec, QheSteadyState

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_NONNEG = {"type": "number", "minimum": 0}
_COMPLEX = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}
_ENTRY = {"oneOf": [_NUM, _COMPLEX]}
_MATRIX = {"oneOf": [_NUM, {"type": "array", "minItems": 1,
                            "items": {"type": "array", "minItems": 1, "items": _ENTRY}}]}

_CHI = {
    "type": "object",
    "additionalProperties": False,
    "required": ["family"],
    "properties": {
        "family": {"enum": ["constant", "ohmic", "tabulated"]},
        "value": _MATRIX,
        "cutoff": _POS,
        "freqs": {"type": "array", "items": _POS, "minItems": 2},
        "values": {"type": "array", "items": _MATRIX, "minItems": 2},
    },
}

_BATH = {
    "type": "object",
    "additionalProperties": False,
    "required": ["beta"],
    "properties": {"beta": _POS, "chi": _CHI},
}

_QHE = {
    "type": "object",
    "additionalProperties": False,
    "required": ["type", "splitting"],
    "properties": {
        "type": {"const": "qhe"},
        "splitting": _POS,
        "rabi": _NONNEG,
        "pump": _NONNEG,
        "dephasing": _NONNEG,
        "other_baths": {"type": "array", "items": _BATH},
        "steady_state_includes_probe": {"type": "boolean"},
        "state": {
            "type": "object",
            "additionalProperties": False,
            "required": ["p1"],
            "properties": {"p1": {"type": "number", "minimum": 0, "maximum": 1}, "rho01": _COMPLEX},
        },
    },
}

_OSC = {
    "type": "object",
    "additionalProperties": False,
    "required": ["type", "omega0", "drive_frequency", "t_eff"],
    "properties": {
        "type": {"const": "oscillator"},
        "omega0": _POS,
        "drive_frequency": _POS,
        "t_eff": _POS,
        "a_plus": _COMPLEX,
        "a_minus": _COMPLEX,
        "occupation": _NONNEG,
        "degenerate": {"type": "boolean"},
    },
}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["model", "beta"],
    "properties": {
        "model": {"type": "object", "required": ["type"],
                  "properties": {"type": {"enum": ["qhe", "oscillator"]}}},
        "beta": _POS,
        "probe_chi": _CHI,
        "orders": {"type": "array", "items": _POS, "minItems": 1},
        "xi_grid": {"type": "array", "items": _COMPLEX},
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "required": ["name", "from", "to", "steps"],
            "properties": {"name": {"type": "string"}, "from": _NUM, "to": _NUM,
                           "steps": {"type": "integer", "minimum": 1}},
        },
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "oracle": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"duration": _POS, "n_traj": {"type": "integer", "minimum": 1}},
        },
    },
}


class ConfigError(ValueError):
    """Invalid configuration; carries a location-prefixed message."""


@dataclass(frozen=True)
class Sweep:
    name: str
    start: float
    stop: float
    steps: int

    def values(self) -> list[float]:
        if self.steps == 1:
            return [self.start]
        d = (self.stop - self.start) / (self.steps - 1)
        return [self.start + k * d for k in range(self.steps)]


@dataclass(frozen=True)
class RunConfig:
    model: QheSpec | OscillatorSpec
    beta: float
    probe: BathSpec
    orders: tuple[float, ...] = (2.0,)
    xi_grid: tuple[complex, ...] = ()
    sweep: Sweep | None = None
    seed: int | None = None
    state: QheSteadyState | None = None  # QHE populations override
    include_probe: bool = True
    oracle_duration: float = 50.0
    oracle_n_traj: int = 100_000
    raw: dict | None = None

    @property
    def digest(self) -> str:
        return config_digest(self.raw or {})


def config_digest(raw: dict) -> str:
    blob = json.dumps(raw, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def _complex(v) -> complex:
    return complex(v[0], v[1])


def _matrix(v):
    if isinstance(v, (int, float)):
        return v
    return [[_complex(x) if isinstance(x, list) else x for x in row] for row in v]


def _chi(d: dict | None) -> Susceptibility:
    if d is None:
        return Susceptibility.constant(1.0)
    fam = d["family"]
    if fam == "constant":
        return Susceptibility.constant(_matrix(d.get("value", 1.0)))
    if fam == "ohmic":
        return Susceptibility.ohmic(_matrix(d.get("value", 1.0)), d.get("cutoff", 10.0))
    if "freqs" not in d or "values" not in d:
        raise ConfigError("probe_chi: tabulated family needs 'freqs' and 'values'")
    return Susceptibility.tabulated(d["freqs"], [_matrix(v) for v in d["values"]])


def _model(d: dict, probe: BathSpec):
    kind = d["type"]
    if kind == "qhe":
        jsonschema.validate(d, _QHE)
        others = tuple(BathSpec(b["beta"], _chi(b.get("chi"))) for b in d.get("other_baths", []))
        spec = QheSpec(d["splitting"], probe, others, d.get("rabi", 0.0), d.get("pump", 0.0),
                       d.get("dephasing", 0.0))
        state = None
        if "state" in d:
            s = d["state"]
            state = QheSteadyState.from_populations(s["p1"], _complex(s.get("rho01", [0, 0])))
        return spec, state, d.get("steady_state_includes_probe", True)
    jsonschema.validate(d, _OSC)
    spec = OscillatorSpec(d["omega0"], d["drive_frequency"], d["t_eff"],
                          _complex(d.get("a_plus", [0, 0])), _complex(d.get("a_minus", [0, 0])),
                          d.get("occupation"), d.get("degenerate", False))
    return spec, None, True


def _where(err: jsonschema.ValidationError, prefix: str = "") -> str:
    path = "/".join(str(p) for p in err.absolute_path)
    return f"{prefix}{path}" if path else (prefix.rstrip("/") or "<root>")


def parse_config(raw: dict[str, Any]) -> RunConfig:
    """Validate a decoded JSON document and build the run objects."""
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as e:
        raise ConfigError(f"{_where(e)}: {e.message}") from None
    try:
        probe = BathSpec(raw["beta"], _chi(raw.get("probe_chi")))
        try:
            model, state, incl = _model(raw["model"], probe)
        except jsonschema.ValidationError as e:
            raise ConfigError(f"{_where(e, 'model/')}: {e.message}") from None
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(str(e)) from None
    sweep = None
    if "sweep" in raw:
        s = raw["sweep"]
        sweep = Sweep(s["name"], s["from"], s["to"], s["steps"])
        _check_sweep_name(raw, sweep.name)
    orc = raw.get("oracle", {})
    return RunConfig(
        model=model, beta=raw["beta"], probe=probe,
        orders=tuple(float(m) for m in raw.get("orders", [2])),
        xi_grid=tuple(_complex(x) for x in raw.get("xi_grid", [])),
        sweep=sweep, seed=raw.get("seed"), state=state, include_probe=incl,
        oracle_duration=orc.get("duration", 50.0), oracle_n_traj=orc.get("n_traj", 100_000),
        raw=copy.deepcopy(raw),
    )


def _check_sweep_name(raw: dict, name: str) -> None:
    parts = name.split(".")
    node = raw
    for p in parts[:-1]:
        node = node.get(p) if isinstance(node, dict) else None
    if not isinstance(node, dict) or parts[-1] in ("type",):
        raise ConfigError(f"sweep/name: cannot sweep {name!r}")
    schema = SCHEMA["properties"] if len(parts) == 1 else (_QHE if raw["model"]["type"] == "qhe" else _OSC)["properties"]
    if len(parts) > 2 or (len(parts) == 2 and parts[0] != "model") or schema.get(parts[-1]) not in (_NUM, _POS, _NONNEG):
        raise ConfigError(f"sweep/name: {name!r} is not a numeric parameter (use e.g. 'beta' or 'model.t_eff')")


def with_parameter(raw: dict, name: str, value: float) -> dict:
    """Copy of ``raw`` with the dotted numeric field ``name`` set to ``value``."""
    out = copy.deepcopy(raw)
    out.pop("sweep", None)
    parts = name.split(".")
    node = out
    for p in parts[:-1]:
        node = node[p]
    node[parts[-1]] = value
    return out


def load_config(path: str | Path) -> RunConfig:
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"line {e.lineno}, column {e.colno}: {e.msg}") from None
    return parse_config(raw)
