from enum import Enum
from typing import Any, Dict, FrozenSet, NamedTuple, Optional, Tuple

from pydantic import BaseModel, Field, TypeAdapter, ValidationError, ValidationInfo, field_validator


class Verb(str, Enum):
    EVAL = "eval"
    TABLE = "table"
    SIMULATE = "simulate"
    VERIFY = "verify"
    INVERT = "invert"


class Target(str, Enum):
    PSI_GAMMA = "psi_gamma"
    PSI_DELTA = "psi_delta"
    WRIGHT = "wright"
    DENSITY = "density"
    LAPLACE_N = "laplace_N"
    TRANSITION = "transition"
    ENTRANCE = "entrance"
    FIRST_PASSAGE = "first_passage"
    EXPFUN_MC = "expfun_mc"
    ABSORPTION_MC = "absorption_mc"
    IDENTITY = "identity"
    ALL = "all"


class Format(str, Enum):
    CSV = "csv"
    JSON = "json"


def parse_pairs(value: Any) -> Tuple[Tuple[float, float], ...]:
    """'A1,a1;A2,a2' (or a sequence of pairs) -> ((A1, a1), (A2, a2))"""
    if value is None or value == "":
        return ()
    if isinstance(value, str):
        chunks = [c for c in value.replace(" ", "").split(";") if c]
        value = [c.split(",") for c in chunks]
    pairs = []
    for item in value:
        if len(item) != 2:
            raise ValueError(f"expected (A, a) pairs, got {item!r}")
        pairs.append((float(item[0]), float(item[1])))
    return tuple(pairs)


def parse_flag(value: Any) -> bool:
    if isinstance(value, str):
        lowered = value.strip().lower()
        if lowered in ("", "1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {value!r}")
    return bool(value)


_FLOAT = TypeAdapter(float)
_INT = TypeAdapter(int)

PARAM_TYPES = {
    "alpha": _FLOAT.validate_python,
    "gamma": _FLOAT.validate_python,
    "delta": _FLOAT.validate_python,
    "lambda": _FLOAT.validate_python,
    "kappa": _FLOAT.validate_python,
    "c": _FLOAT.validate_python,
    "t": _FLOAT.validate_python,
    "x": _FLOAT.validate_python,
    "y": _FLOAT.validate_python,
    "q": _FLOAT.validate_python,
    "a": _FLOAT.validate_python,
    "tol": _FLOAT.validate_python,
    "eps_jump": _FLOAT.validate_python,
    "step": _FLOAT.validate_python,
    "horizon": _FLOAT.validate_python,
    "n": _INT.validate_python,
    "n_paths": _INT.validate_python,
    "nodes": _INT.validate_python,
    "seed": _INT.validate_python,
    "log": parse_flag,
    "upper": parse_pairs,
    "lower": parse_pairs,
    "direction": str,
}


class TargetParams(NamedTuple):
    required: FrozenSet[str]
    optional: FrozenSet[str]
    point: Optional[str]


def _tp(required: str, optional: str = "", point: Optional[str] = None) -> TargetParams:
    return TargetParams(frozenset(required.split()), frozenset(optional.split()), point)


TARGETS: Dict[Target, TargetParams] = {
    Target.PSI_GAMMA: _tp("alpha gamma lambda", point="lambda"),
    Target.PSI_DELTA: _tp("alpha delta lambda", point="lambda"),
    Target.WRIGHT: _tp("x", "upper lower tol", point="x"),
    Target.DENSITY: _tp("alpha delta y", "tol", point="y"),
    Target.LAPLACE_N: _tp("alpha delta x", "tol", point="x"),
    Target.TRANSITION: _tp("kappa delta t x y", "c tol", point="y"),
    Target.ENTRANCE: _tp("kappa delta t y", "c tol", point="y"),
    Target.FIRST_PASSAGE: _tp("kappa q x a", "c", point="q"),
    Target.IDENTITY: _tp("alpha gamma lambda", point="lambda"),
    Target.EXPFUN_MC: _tp("alpha", "gamma delta direction n_paths eps_jump step horizon seed"),
    Target.ABSORPTION_MC: _tp("kappa x", "c n_paths seed"),
    Target.ALL: _tp("", "seed"),
}

_POINT_TARGETS = frozenset(t for t, spec in TARGETS.items() if spec.point is not None) - {Target.IDENTITY}

VERB_TARGETS: Dict[Verb, FrozenSet[Target]] = {
    Verb.EVAL: _POINT_TARGETS | {Target.IDENTITY},
    Verb.TABLE: _POINT_TARGETS,
    Verb.SIMULATE: frozenset({Target.EXPFUN_MC, Target.ABSORPTION_MC}),
    Verb.VERIFY: frozenset({Target.ALL, Target.IDENTITY}),
    Verb.INVERT: frozenset({Target.ENTRANCE, Target.TRANSITION}),
}


def parameter_table(verb: Verb, target: Target) -> Tuple[FrozenSet[str], FrozenSet[str]]:
    """(required, optional) keys for a verb/target pair"""
    spec = TARGETS[target]
    required, optional = set(spec.required), set(spec.optional)
    if verb is Verb.VERIFY and target is Target.IDENTITY:
        required, optional = set(), {"seed"}
    elif verb in (Verb.TABLE, Verb.INVERT):
        var = spec.point
        required.discard(var)
        required |= {f"{var}min", f"{var}max", "n"}
        optional |= {"log"}
        if verb is Verb.INVERT:
            optional |= {"nodes"}
    return frozenset(required), frozenset(optional)


def _coerce(key: str, value: Any) -> Any:
    base = key[:-3] if key.endswith(("min", "max")) and key[:-3] in PARAM_TYPES else key
    return PARAM_TYPES[base](value)


class Command(BaseModel):
    """A validated CLI request; parameters are complete and typed before anything runs."""

    verb: Verb
    target: Target
    params: Dict[str, Any] = Field(default_factory=dict)
    output: Optional[str] = Field(default=None, description="Output path, stdout when unset")
    format: Format = Format.JSON

    model_config = {"frozen": True}

    @field_validator("params")
    @classmethod
    def complete_and_typed(cls, params: Dict[str, Any], info: ValidationInfo) -> Dict[str, Any]:
        verb, target = info.data.get("verb"), info.data.get("target")
        if verb is None or target is None:
            return params
        if target not in VERB_TARGETS[verb]:
            raise ValueError(f"target {target.value} is not available for {verb.value}")
        required, optional = parameter_table(verb, target)
        given = {k: v for k, v in params.items() if v is not None}
        unknown = sorted(set(given) - required - optional)
        if unknown:
            raise ValueError(f"unknown parameters for {verb.value} {target.value}: {', '.join(unknown)}")
        missing = sorted(required - set(given))
        if missing:
            raise ValueError(f"missing parameters for {verb.value} {target.value}: {', '.join(missing)}")
        typed = {}
        for key, value in given.items():
            try:
                typed[key] = _coerce(key, value)
            except (ValueError, TypeError, ValidationError) as exc:
                raise ValueError(f"{key}: cannot read {value!r} ({exc})") from None
        if verb in (Verb.TABLE, Verb.INVERT) and typed["n"] < 2:
            raise ValueError("n must be at least 2")
        return typed

    def get(self, key: str, default: Any = None) -> Any:
        return self.params.get(key, default)
