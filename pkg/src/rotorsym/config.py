"""JSON configuration for problem specs, and the shipped presets."""

from __future__ import annotations

import json
import math

import jsonschema

from .domain import (
    ZERO_POTENTIAL,
    ZERO_SCALAR,
    DriftProfile,
    DriftTerm,
    FourierProfile,
    GradientDrift,
    Monomial,
    PolynomialSeparable,
    PotentialSum,
    ProblemSpec,
    QuadraticIsotropic,
    RadialDrift,
    Rotational,
    ScalarSum,
)


class ConfigError(ValueError):
    """Raised for malformed configs; the message starts with the offending path."""


_PROFILE = {
    "type": "object",
    "properties": {
        "c0": {"type": "number"},
        "cos_coeffs": {"type": "array", "items": {"type": "number"}},
        "sin_coeffs": {"type": "array", "items": {"type": "number"}},
    },
    "additionalProperties": False,
}

_DRIFT = {
    "type": "object",
    "properties": {
        "rate": _PROFILE,
        "linear": {"type": "number"},
        "constant": {"type": "number"},
        "quadratic": {"type": "number"},
    },
    "additionalProperties": False,
}

_EXPONENT = {"type": "integer", "minimum": 0}

SCHEMA = {
    "type": "object",
    "properties": {
        "preset": {"type": "string"},
        "omega": _PROFILE,
        "name": {"type": "string"},
        "eliminate_scalar": {"type": "boolean"},
        "vector_potential": {
            "type": "object",
            "properties": {
                "rotational": _PROFILE,
                "radial_drift": _DRIFT,
                "gradient_drift": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "properties": {"i": _EXPONENT, "j": _EXPONENT, "drift": _DRIFT},
                        "required": ["i", "j", "drift"],
                        "additionalProperties": False,
                    },
                },
            },
            "additionalProperties": False,
        },
        "scalar_potential": {
            "type": "object",
            "properties": {
                "quadratic_isotropic": _PROFILE,
                "polynomial": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "properties": {"i": _EXPONENT, "j": _EXPONENT, "coeff": _PROFILE},
                        "required": ["i", "j", "coeff"],
                        "additionalProperties": False,
                    },
                },
            },
            "additionalProperties": False,
        },
        "domain_hint": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
            "minItems": 2,
            "maxItems": 2,
        },
    },
    "additionalProperties": False,
}


def _profile(d: dict | None) -> FourierProfile:
    d = d or {}
    return FourierProfile(d.get("c0", 0.0), tuple(d.get("cos_coeffs", ())), tuple(d.get("sin_coeffs", ())))


def _drift(d: dict) -> DriftProfile:
    return DriftProfile(
        rate=_profile(d.get("rate")),
        linear=float(d.get("linear", 0.0)),
        constant=float(d.get("constant", 0.0)),
        quadratic=float(d.get("quadratic", 0.0)),
    )


def _merry_go_round(doc: dict) -> ProblemSpec:
    from .transforms import make_merry_go_round

    if "omega" not in doc:
        raise ConfigError("$.omega: required by preset 'merry-go-round'")
    return make_merry_go_round(_profile(doc["omega"]))


def _free_particle(doc: dict) -> ProblemSpec:
    return ProblemSpec(ZERO_POTENTIAL, ZERO_SCALAR, name="free-particle")


PRESETS = {
    "merry-go-round": _merry_go_round,
    "free-particle": _free_particle,
}


def _path(err: jsonschema.ValidationError) -> str:
    return "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in err.absolute_path)


def _check_finite(node, path="$"):
    if isinstance(node, float) and not math.isfinite(node):
        raise ConfigError(f"{path}: non-finite number")
    if isinstance(node, dict):
        for k, v in node.items():
            _check_finite(v, f"{path}.{k}")
    elif isinstance(node, list):
        for i, v in enumerate(node):
            _check_finite(v, f"{path}[{i}]")


def build_spec(doc: dict) -> ProblemSpec:
    """Build a ProblemSpec from an already-decoded config document."""
    if not isinstance(doc, dict):
        raise ConfigError("$: config must be a JSON object")
    errors = sorted(jsonschema.Draft7Validator(SCHEMA).iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        if err.validator == "additionalProperties":
            extra = sorted(set(err.instance) - set(err.schema.get("properties", {})))
            raise ConfigError(f"{_path(err)}: unknown key(s) {', '.join(map(repr, extra))}")
        raise ConfigError(f"{_path(err)}: {err.message}")
    _check_finite(doc)

    has_preset = "preset" in doc
    has_fields = "vector_potential" in doc or "scalar_potential" in doc
    if has_preset and has_fields:
        raise ConfigError("$: give either 'preset' or 'vector_potential'/'scalar_potential', not both")
    if not has_preset and not has_fields:
        raise ConfigError("$: expected 'preset' or 'vector_potential'/'scalar_potential'")
    if "omega" in doc and not has_preset:
        raise ConfigError("$.omega: only valid together with a preset")

    if has_preset:
        name = doc["preset"]
        if name not in PRESETS:
            raise ConfigError(f"$.preset: unknown preset {name!r}; known presets: {', '.join(sorted(PRESETS))}")
        spec = PRESETS[name](doc)
    else:
        vp = doc.get("vector_potential", {})
        parts = []
        if "rotational" in vp:
            parts.append(Rotational(_profile(vp["rotational"])))
        if "radial_drift" in vp:
            parts.append(RadialDrift(_drift(vp["radial_drift"])))
        if "gradient_drift" in vp:
            parts.append(GradientDrift(tuple(DriftTerm(m["i"], m["j"], _drift(m["drift"])) for m in vp["gradient_drift"])))
        if not parts:
            potential = ZERO_POTENTIAL
        elif len(parts) == 1:
            potential = parts[0]
        else:
            potential = PotentialSum.of(*parts)

        sp = doc.get("scalar_potential", {})
        scalars = []
        if "quadratic_isotropic" in sp:
            scalars.append(QuadraticIsotropic(_profile(sp["quadratic_isotropic"])))
        if "polynomial" in sp:
            scalars.append(PolynomialSeparable(tuple(Monomial(m["i"], m["j"], _profile(m["coeff"])) for m in sp["polynomial"])))
        if not scalars:
            scalar = ZERO_SCALAR
        elif len(scalars) == 1:
            scalar = scalars[0]
        else:
            scalar = ScalarSum(tuple(scalars))
        spec = ProblemSpec(potential, scalar)

    hint = doc.get("domain_hint")
    if hint is not None:
        (x0, x1), (y0, y1) = hint
        if not (x0 < x1 and y0 < y1):
            raise ConfigError("$.domain_hint: each interval must satisfy min < max")
        hint = ((float(x0), float(x1)), (float(y0), float(y1)))
    if doc.get("eliminate_scalar"):
        from .transforms import eliminate_scalar

        spec = eliminate_scalar(spec)
    return ProblemSpec(spec.potential, spec.scalar, hint, doc.get("name", spec.name))


def parse_config(text: str) -> ProblemSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"$: invalid JSON ({exc.msg} at line {exc.lineno} column {exc.colno})") from None
    return build_spec(doc)


def load_config(path) -> ProblemSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


# configs exercised by `verify --all-presets`
SHIPPED_PRESETS = {
    "uniform": {"preset": "merry-go-round", "omega": {"c0": 2 * math.pi}, "name": "uniform"},
    "pulsing": {"preset": "merry-go-round", "omega": {"c0": 2 * math.pi, "sin_coeffs": [1.0]}, "name": "pulsing"},
    "uniform-eliminated": {
        "preset": "merry-go-round",
        "omega": {"c0": 2 * math.pi},
        "eliminate_scalar": True,
        "name": "uniform-eliminated",
    },
    "free-particle": {"preset": "free-particle", "name": "free-particle"},
}
