"""JSON specifications for maps, loops, deformations and fields."""

import numpy as np
from jsonschema import Draft202012Validator

from .errors import ConfigError
from .liealg import ContactHamiltonian, base_pullback, from_contact_hamiltonian
from .s2maps import (
    Circle,
    Composition,
    Constant,
    ConstantDeformation,
    MappedCurve,
    Rotation,
    RotationFamily,
    SampledLoop,
    Squeeze,
    StreamFamily,
    StreamFlow,
    StreamFunction,
)
from .s3core import FrameField, named_field, random_s2

VEC3 = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}
COEFFS = {
    "type": "array",
    "items": {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3},
}


def _branch(kind, props, required=()):
    return {
        "type": "object",
        "properties": {"type": {"const": kind}, **props},
        "required": ["type", *required],
        "additionalProperties": False,
    }


MAP_SCHEMAS = {
    "rotation": _branch("rotation", {"axis": VEC3, "angle": {"type": "number"}}, ("axis", "angle")),
    "stream": _branch(
        "stream",
        {"coeffs": COEFFS, "time": {"type": "number"}, "dt": {"type": "number", "exclusiveMinimum": 0}},
        ("coeffs", "time"),
    ),
    "compose": _branch("compose", {"maps": {"type": "array", "items": {"type": "object"}}}, ("maps",)),
    "squeeze": _branch(
        "squeeze",
        {"factors": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0},
                     "minItems": 3, "maxItems": 3}},
    ),
}

LOOP_SCHEMAS = {
    "circle": _branch(
        "circle",
        {"colatitude": {"type": "number", "minimum": 0, "maximum": np.pi}, "axis": VEC3},
        ("colatitude",),
    ),
    "samples": _branch("samples", {"points": {"type": "array", "items": VEC3, "minItems": 3}}, ("points",)),
    "random_stream": _branch(
        "random_stream",
        {"seed": {"type": "integer"}, "lmax": {"type": "integer", "minimum": 1, "maximum": 6},
         "time": {"type": "number"}},
    ),
}

DEFORMATION_SCHEMAS = {
    "rotation": MAP_SCHEMAS["rotation"],
    "stream": MAP_SCHEMAS["stream"],
    "constant": _branch("constant", {}),
}

FIELD_SCHEMAS = {
    "contact": _branch("contact", {"coeffs": COEFFS}, ("coeffs",)),
    "horizontal_contact": _branch("horizontal_contact", {"coeffs": COEFFS}, ("coeffs",)),
    "frame": _branch("frame", {"f": {"type": "string"}, "g": {"type": "string"}, "h": {"type": "string"}}),
}


def validate(instance, schema, what="config"):
    """Validate ``instance`` against a JSON schema; raise :class:`ConfigError` on the first problem."""
    errors = sorted(Draft202012Validator(schema).iter_errors(instance), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"invalid {what} at {where}: {err.message}")


def validate_tagged(instance, schemas, what):
    """Validate a ``{"type": kind, ...}`` object against the schema for its kind."""
    if not isinstance(instance, dict) or instance.get("type") not in schemas:
        kinds = ", ".join(sorted(schemas))
        raise ConfigError(f"invalid {what}: expected an object with type in {{{kinds}}}")
    validate(instance, schemas[instance["type"]], what)


def _coeffs(raw):
    try:
        return StreamFunction(tuple((int(l), int(m), float(c)) for l, m, c in raw))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def parse_map(spec):
    validate_tagged(spec, MAP_SCHEMAS, "map spec")
    kind = spec["type"]
    if kind == "rotation":
        if np.linalg.norm(spec["axis"]) == 0:
            raise ConfigError("rotation axis must be non-zero")
        return Rotation(spec["axis"], spec["angle"])
    if kind == "stream":
        return StreamFlow(_coeffs(spec["coeffs"]), spec["time"], spec.get("dt", 1e-3))
    if kind == "compose":
        return Composition(tuple(parse_map(m) for m in spec["maps"]))
    return Squeeze(spec.get("factors", (1.0, 1.0, 2.0)))


def random_stream_loop(rng, lmax=3, time=0.7):
    """A random small circle carried along a random stream flow."""
    psi = StreamFunction.random(rng, lmax)
    axis = random_s2(1, rng)[0]
    circle = Circle(rng.uniform(0.3, 2.5), axis=axis, phase=rng.uniform(0, 2 * np.pi))
    return MappedCurve(StreamFlow(psi, time, 1e-2), circle)


def parse_loop(spec, seed=0):
    validate_tagged(spec, LOOP_SCHEMAS, "loop spec")
    kind = spec["type"]
    if kind == "circle":
        return Circle(spec["colatitude"], axis=spec.get("axis", (0.0, 0.0, 1.0)))
    if kind == "samples":
        pts = np.asarray(spec["points"], dtype=float)
        if np.any(np.linalg.norm(pts, axis=1) == 0):
            raise ConfigError("loop points must be non-zero")
        pts = pts / np.linalg.norm(pts, axis=1, keepdims=True)
        if np.max(np.linalg.norm(pts - pts[0], axis=1)) < 1e-12:
            return Constant(pts[0], closed=True)
        try:
            return SampledLoop(pts)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    rng = np.random.default_rng(spec.get("seed", seed))
    return random_stream_loop(rng, spec.get("lmax", 3), spec.get("time", 0.7))


def parse_deformation(spec):
    validate_tagged(spec, DEFORMATION_SCHEMAS, "deformation spec")
    kind = spec["type"]
    if kind == "rotation":
        if np.linalg.norm(spec["axis"]) == 0:
            raise ConfigError("rotation axis must be non-zero")
        return RotationFamily(tuple(spec["axis"]), spec["angle"])
    if kind == "stream":
        return StreamFamily(_coeffs(spec["coeffs"]), spec["time"], spec.get("dt", 1e-2))
    return ConstantDeformation()


def parse_field(spec):
    """Returns ``(FrameField, generating Hamiltonian or None)``."""
    validate_tagged(spec, FIELD_SCHEMAS, "field spec")
    kind = spec["type"]
    if kind in ("contact", "horizontal_contact"):
        f = base_pullback(_coeffs(spec["coeffs"]))
        X = from_contact_hamiltonian(ContactHamiltonian(f))
        return (X if kind == "contact" else X.horizontal_part()), f
    try:
        parts = [named_field(spec.get(k, "const:0")) for k in ("f", "g", "h")]
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return FrameField(*parts), None
