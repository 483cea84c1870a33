"""
Scenario files: JSON schema, validation and construction of run objects.

A scenario is validated in full before anything is computed. Errors carry
the JSON line/column for syntax problems and the field path for schema or
semantic problems.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from ..errors import ConfigError
from ..linalg import PAULI_X, PAULI_Y, PAULI_Z
from ..schedule import RescalingSchedule
from ..spectral import SCHEDULE_KINDS, CoefficientSchedule, ReferenceHamiltonian
from ..twolevel import TwoLevelParams

_number = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_vector = {"type": "array", "items": _number, "minItems": 1}
_matrix = {"type": "array", "items": _vector, "minItems": 1}
_complex_matrix = {
    "type": "object",
    "properties": {"re": _matrix, "im": _matrix},
    "required": ["re"],
    "additionalProperties": False,
}
_operator = {"oneOf": [{"type": "string", "enum": ["X", "Y", "Z", "I"]}, _complex_matrix]}
_coefficient_schedule = {
    "type": "object",
    "properties": {
        "kind": {"enum": list(SCHEDULE_KINDS)},
        "params": {"type": "array", "items": _number, "minItems": 1},
    },
    "required": ["kind", "params"],
    "additionalProperties": False,
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "ffscale scenario",
    "type": "object",
    "properties": {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "hbar": _pos,
        "seed": {"type": "integer"},
        "system": {
            "oneOf": [
                {
                    "type": "object",
                    "properties": {
                        "type": {"const": "two_level"},
                        "t_ref": _pos,
                        "hx": _coefficient_schedule,
                        "hz": _coefficient_schedule,
                    },
                    "required": ["type", "t_ref", "hx", "hz"],
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "properties": {
                        "type": {"const": "generic"},
                        "t_ref": _pos,
                        "basis": {"type": "array", "items": _operator, "minItems": 1},
                        "labels": {"type": "array", "items": {"type": "string"}},
                        "schedules": {"type": "array", "items": _coefficient_schedule, "minItems": 1},
                    },
                    "required": ["type", "t_ref", "basis", "schedules"],
                    "additionalProperties": False,
                },
            ]
        },
        "initial_state": {
            "oneOf": [
                {
                    "type": "object",
                    "properties": {"eigenstate": {"type": "integer", "minimum": 0}},
                    "required": ["eigenstate"],
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "properties": {
                        "amplitudes": {
                            "type": "object",
                            "properties": {"re": _vector, "im": _vector},
                            "required": ["re"],
                            "additionalProperties": False,
                        }
                    },
                    "required": ["amplitudes"],
                    "additionalProperties": False,
                },
            ]
        },
        "rescaling": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["identity", "linear", "pause", "rewind", "smooth_ramp", "piecewise"]},
                "t_ff": _pos,
                "window": {"type": "array", "items": _number, "minItems": 2, "maxItems": 2},
                "rate": _number,
                "rewind_rate": _number,
                "ramp": _pos,
                "blend": {"type": "number", "minimum": 0},
                "segments": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "properties": {"duration": _pos, "rate": _number},
                        "required": ["duration", "rate"],
                        "additionalProperties": False,
                    },
                },
            },
            "required": ["kind"],
            "additionalProperties": False,
        },
        "integrator": {
            "type": "object",
            "properties": {
                "dt": _pos,
                "ref_ds": _pos,
                "route": {"enum": ["direct", "series", "both"]},
                "series_tol": _pos,
                "k_max": {"type": "integer", "minimum": 1},
                "wrap_series": {"type": "boolean"},
                "degeneracy_tol": _pos,
            },
            "additionalProperties": False,
        },
        "control_basis": {
            "type": "object",
            "properties": {
                "labels": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                "operators": {"type": "array", "items": _operator, "minItems": 1},
            },
            "required": ["labels", "operators"],
            "additionalProperties": False,
        },
        "outputs": {
            "type": "object",
            "properties": {
                "csv": {"type": "string"},
                "stride": {"type": "integer", "minimum": 1},
                "plots": {"type": "boolean"},
            },
            "additionalProperties": False,
        },
        "verify": {
            "type": "object",
            "properties": {
                "tolerances": {"type": "object", "additionalProperties": _pos},
                "gauge_check": {"type": "boolean"},
            },
            "additionalProperties": False,
        },
    },
    "required": ["system", "initial_state", "rescaling"],
    "additionalProperties": False,
}

_PAULI = {"X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z, "I": np.eye(2, dtype=complex)}


def _operator_matrix(spec, where):
    if isinstance(spec, str):
        return _PAULI[spec]
    re = np.asarray(spec["re"], dtype=float)
    im = np.asarray(spec.get("im", np.zeros_like(re)), dtype=float)
    if re.ndim != 2 or re.shape != im.shape or re.shape[0] != re.shape[1]:
        raise ConfigError(f"{where}: re/im must be equal-shape square matrices")
    return re + 1j * im


@dataclass
class Scenario:
    """Validated scenario with the run objects already built."""

    name: str
    reference: ReferenceHamiltonian
    schedule: RescalingSchedule
    initial_state: object
    dt: float = 1e-3
    ref_ds: float = None
    route: str = "direct"
    series_tol: float = 1e-10
    k_max: int = 64
    wrap_series: bool = True
    degeneracy_tol: float = 1e-8
    hbar: float = 1.0
    seed: int = 0
    control_basis: tuple = None
    stride: int = 1
    csv_name: str = "trajectory.csv"
    plots: bool = True
    tolerances: dict = field(default_factory=dict)
    gauge_check: bool = True
    raw: dict = field(default_factory=dict, repr=False)
    two_level: TwoLevelParams = None

    def run_kwargs(self):
        return dict(
            hbar=self.hbar, route=self.route, series_tol=self.series_tol, k_max=self.k_max,
            wrap_series=self.wrap_series, degeneracy_tol=self.degeneracy_tol,
            control_basis=self.control_basis, ref_ds=self.ref_ds,
        )

    def with_reference(self, reference, schedule):
        out = Scenario(**{k: getattr(self, k) for k in self.__dataclass_fields__})
        out.reference = reference
        out.schedule = schedule
        return out


def _schedule(spec, t_ref):
    kind = spec["kind"]
    try:
        if kind == "identity":
            return RescalingSchedule.identity(t_ref)
        if "t_ff" not in spec and kind != "piecewise":
            raise ConfigError(f"rescaling.t_ff is required for kind {kind!r}")
        if kind == "linear":
            return RescalingSchedule.linear(t_ref, spec["t_ff"])
        if kind == "pause":
            a, b = spec["window"]
            return RescalingSchedule.pause(t_ref, spec["t_ff"], a, b, spec.get("rate"))
        if kind == "rewind":
            a, b = spec["window"]
            return RescalingSchedule.rewind(t_ref, spec["t_ff"], a, b, spec["rewind_rate"], spec.get("rate"))
        if kind == "smooth_ramp":
            return RescalingSchedule.smooth_ramp(t_ref, spec["t_ff"], spec["ramp"])
        segs = spec["segments"]
        return RescalingSchedule.piecewise([g["duration"] for g in segs], [g["rate"] for g in segs],
                                           t_ref, spec.get("blend", 0.0))
    except KeyError as exc:
        raise ConfigError(f"rescaling: missing field {exc.args[0]!r} for kind {kind!r}") from exc
    except ValueError as exc:
        raise ConfigError(f"rescaling: {exc}") from exc


def _coefficient(spec, where):
    try:
        return CoefficientSchedule(spec["kind"], tuple(spec["params"]))
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def scenario_from_dict(data, name="scenario"):
    """Validate ``data`` against :data:`SCHEMA` and build a :class:`Scenario`."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        lines = []
        for err in errors:
            path = "/".join(str(p) for p in err.absolute_path) or "<root>"
            lines.append(f"{path}: {err.message}")
        raise ConfigError("scenario failed schema validation:\n  " + "\n  ".join(lines))

    sysd = data["system"]
    t_ref = float(sysd["t_ref"])
    two_level = None
    try:
        if sysd["type"] == "two_level":
            two_level = TwoLevelParams(_coefficient(sysd["hx"], "system/hx"),
                                       _coefficient(sysd["hz"], "system/hz"))
            reference = two_level.reference(t_ref)
            default_control = (("X", "Y", "Z"), (PAULI_X, PAULI_Y, PAULI_Z))
        else:
            basis = [_operator_matrix(b, f"system/basis/{i}") for i, b in enumerate(sysd["basis"])]
            scheds = [_coefficient(c, f"system/schedules/{i}") for i, c in enumerate(sysd["schedules"])]
            labels = sysd.get("labels")
            reference = ReferenceHamiltonian(tuple(basis), tuple(scheds), t_ref,
                                             tuple(labels) if labels else None)
            default_control = None
    except ValueError as exc:
        raise ConfigError(f"system: {exc}") from exc

    control = default_control
    if "control_basis" in data:
        cb = data["control_basis"]
        if len(cb["labels"]) != len(cb["operators"]):
            raise ConfigError("control_basis: labels and operators differ in length")
        ops = [_operator_matrix(o, f"control_basis/operators/{i}") for i, o in enumerate(cb["operators"])]
        if any(o.shape != (reference.dim, reference.dim) for o in ops):
            raise ConfigError("control_basis: operator dimension does not match the system")
        control = (tuple(cb["labels"]), tuple(ops))

    init = data["initial_state"]
    if "eigenstate" in init:
        state = int(init["eigenstate"])
        if state >= reference.dim:
            raise ConfigError(f"initial_state/eigenstate: {state} >= dimension {reference.dim}")
    else:
        amp = init["amplitudes"]
        re = np.asarray(amp["re"], dtype=float)
        im = np.asarray(amp.get("im", np.zeros_like(re)), dtype=float)
        if re.shape != (reference.dim,) or im.shape != re.shape:
            raise ConfigError(f"initial_state/amplitudes: need {reference.dim} entries")
        state = re + 1j * im
        if abs(np.linalg.norm(state) - 1.0) > 1e-9:
            raise ConfigError("initial_state/amplitudes: state is not normalised")

    schedule = _schedule(data["rescaling"], t_ref)
    integ = data.get("integrator", {})
    outputs = data.get("outputs", {})
    verify = data.get("verify", {})
    return Scenario(
        name=data.get("name", name),
        reference=reference,
        schedule=schedule,
        initial_state=state,
        dt=integ.get("dt", 1e-3),
        ref_ds=integ.get("ref_ds"),
        route=integ.get("route", "direct"),
        series_tol=integ.get("series_tol", 1e-10),
        k_max=integ.get("k_max", 64),
        wrap_series=integ.get("wrap_series", True),
        degeneracy_tol=integ.get("degeneracy_tol", 1e-8),
        hbar=data.get("hbar", 1.0),
        seed=data.get("seed", 0),
        control_basis=control,
        stride=outputs.get("stride", 1),
        csv_name=outputs.get("csv", "trajectory.csv"),
        plots=outputs.get("plots", True),
        tolerances=dict(verify.get("tolerances", {})),
        gauge_check=verify.get("gauge_check", True),
        raw=data,
        two_level=two_level,
    )


def load_scenario(path):
    """Read and validate a scenario file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    try:
        return scenario_from_dict(data, name=path.stem)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def bundled_scenarios():
    """Paths of the scenario files shipped with the package."""
    return sorted((Path(__file__).parent / "scenarios").glob("*.json"))


def bundled(name):
    path = Path(__file__).parent / "scenarios" / (name if name.endswith(".json") else name + ".json")
    if not path.exists():
        raise ConfigError(f"no bundled scenario named {name!r}")
    return path
