"""JSON scenario files.

A scenario names its ``kind`` and carries exactly one matching section::

    {"schema_version": "1.0", "kind": "prediction", "seed": 0,
     "prediction": {"labels": [...],
                    "utility": {"mode": "direct_factors", "values": [...]},
                    "attraction": {"mode": "quarter_law_prior", "signs": [...],
                                   "mu": 0, "mu_c": 1},
                    "empirical": [...]}}

Complex numbers are ``[re, im]`` pairs; matrices are nested lists of them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import ValidationError
from .eventlogic import InconclusiveEvent, Prospect
from .qdt import AttractionSpec, ProspectLattice, UtilitySpec
from .qstate import DensityOperator, HilbertSpace, product_space

SCHEMA_VERSIONS = ("1.0",)
KINDS = ("prediction", "quantum", "pipeline", "logic_demo")
SECTIONS = {"prediction": "prediction", "quantum": "quantum", "pipeline": "pipeline", "logic_demo": "logic_demo"}


class ScenarioError(ValidationError):
    """Scenario text failed to parse or validate; ``location`` points at the culprit."""

    def __init__(self, message: str, location: str = ""):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


@dataclass(frozen=True, eq=False)
class PredictionSection:
    labels: tuple[str, ...]
    utility: UtilitySpec
    attraction: AttractionSpec
    empirical: tuple[float, ...] | None

    @property
    def lattice(self) -> ProspectLattice:
        return ProspectLattice(self.labels)


@dataclass(frozen=True, eq=False)
class QuantumSection:
    dims: tuple[int, int]
    rho: DensityOperator
    lattice: ProspectLattice
    utility: UtilitySpec | None = None


@dataclass(frozen=True, eq=False)
class PipelineSection:
    dims: tuple[int, int, int]
    initial: tuple[DensityOperator, DensityOperator, DensityOperator]
    unitaries: dict
    timestamps: tuple[float, ...]


@dataclass(frozen=True, eq=False)
class ScenarioFile:
    schema_version: str
    kind: str
    prediction: PredictionSection | None = None
    quantum: QuantumSection | None = None
    pipeline: PipelineSection | None = None
    logic_demo: dict | None = None
    seed: int = 0
    name: str = ""


# -- field helpers --------------------------------------------------------------

def _require(obj: dict, key: str, where: str) -> Any:
    if not isinstance(obj, dict):
        raise ScenarioError("expected an object", where)
    if key not in obj:
        raise ScenarioError(f"missing field '{key}'", where)
    return obj[key]


def _number(x: Any, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ScenarioError(f"expected a number, got {x!r}", where)
    if not math.isfinite(x):
        raise ScenarioError("non-finite number", where)
    return float(x)


def _number_list(x: Any, where: str) -> tuple[float, ...]:
    if not isinstance(x, list):
        raise ScenarioError("expected a list of numbers", where)
    return tuple(_number(v, f"{where}[{i}]") for i, v in enumerate(x))


def _int(x: Any, where: str, minimum: int = 0) -> int:
    if isinstance(x, bool) or not isinstance(x, int) or x < minimum:
        raise ScenarioError(f"expected an integer >= {minimum}, got {x!r}", where)
    return int(x)


def _complex(x: Any, where: str) -> complex:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(_number(x, where))
    if not (isinstance(x, list) and len(x) == 2):
        raise ScenarioError("complex numbers are [re, im] pairs", where)
    return complex(_number(x[0], f"{where}[0]"), _number(x[1], f"{where}[1]"))


def _vector(x: Any, where: str, size: int | None = None) -> np.ndarray:
    if not isinstance(x, list) or not x:
        raise ScenarioError("expected a non-empty list of [re, im] pairs", where)
    v = np.array([_complex(e, f"{where}[{i}]") for i, e in enumerate(x)])
    if size is not None and v.size != size:
        raise ScenarioError(f"dimension mismatch: {v.size} entries, expected {size}", where)
    return v


def _matrix(x: Any, where: str, size: int) -> np.ndarray:
    if not isinstance(x, list) or len(x) != size:
        raise ScenarioError(f"dimension mismatch: expected {size} rows", where)
    return np.array([_vector(row, f"{where}[{i}]", size) for i, row in enumerate(x)])


def _dims(x: Any, where: str, count: int) -> tuple[int, ...]:
    if not isinstance(x, list) or len(x) != count:
        raise ScenarioError(f"expected {count} dimensions", where)
    return tuple(_int(d, f"{where}[{i}]", 1) for i, d in enumerate(x))


def _wrap(fn, where: str):
    try:
        return fn()
    except ScenarioError:
        raise
    except ValidationError as exc:
        raise ScenarioError(str(exc), where) from exc


# -- sections -------------------------------------------------------------------

def _utility(obj: Any, where: str) -> UtilitySpec:
    mode = _require(obj, "mode", where)
    values = _number_list(_require(obj, "values", where), f"{where}.values")
    return _wrap(lambda: UtilitySpec(mode, values), where)


def _attraction(obj: Any, where: str) -> AttractionSpec:
    mode = _require(obj, "mode", where)
    signs = obj.get("signs")
    if signs is not None:
        signs = tuple(int(s) for s in _number_list(signs, f"{where}.signs"))
    mags = obj.get("magnitudes")
    if mags is not None:
        mags = _number_list(mags, f"{where}.magnitudes")
    mu = _number(obj.get("mu", 0.0), f"{where}.mu")
    mu_c = _number(obj.get("mu_c", 1.0), f"{where}.mu_c")
    return _wrap(lambda: AttractionSpec(mode, signs, mags, mu, mu_c), where)


def _labels(x: Any, where: str) -> tuple[str, ...]:
    if not isinstance(x, list) or not all(isinstance(s, str) for s in x):
        raise ScenarioError("expected a list of strings", where)
    return tuple(x)


def _prediction(sec: dict) -> PredictionSection:
    w = "prediction"
    labels = _labels(_require(sec, "labels", w), f"{w}.labels")
    utility = _utility(_require(sec, "utility", w), f"{w}.utility")
    attraction = _attraction(_require(sec, "attraction", w), f"{w}.attraction")
    if len(utility.values) != len(labels):
        raise ScenarioError(f"{len(utility.values)} utility values for {len(labels)} labels", f"{w}.utility.values")
    if attraction.signs is not None and len(attraction.signs) != len(labels):
        raise ScenarioError(f"{len(attraction.signs)} signs for {len(labels)} labels", f"{w}.attraction.signs")
    empirical = sec.get("empirical")
    if empirical is not None:
        empirical = _number_list(empirical, f"{w}.empirical")
        if len(empirical) != len(labels):
            raise ScenarioError(f"{len(empirical)} empirical values for {len(labels)} labels", f"{w}.empirical")
    _wrap(lambda: ProspectLattice(labels), f"{w}.labels")
    return PredictionSection(labels, utility, attraction, empirical)


def _quantum(sec: dict) -> QuantumSection:
    w = "quantum"
    d_a, d_b = _dims(_require(sec, "dims", w), f"{w}.dims", 2)
    m = _matrix(_require(sec, "rho", w), f"{w}.rho", d_a * d_b)
    rho = _wrap(lambda: DensityOperator.from_user_matrix(m, product_space([d_a, d_b])), f"{w}.rho")
    raw = _require(sec, "prospects", w)
    if not isinstance(raw, list):
        raise ScenarioError("expected a list of prospects", f"{w}.prospects")
    space_a, space_b = HilbertSpace(d_a), HilbertSpace(d_b)
    prospects = []
    for i, p in enumerate(raw):
        pw = f"{w}.prospects[{i}]"
        n = _int(_require(p, "outcome_index", pw), f"{pw}.outcome_index")
        b = _vector(_require(p, "amplitudes", pw), f"{pw}.amplitudes", d_b)
        label = p.get("label", f"pi{i}")
        pi = _wrap(lambda: Prospect(space_a, n, InconclusiveEvent(space_b, b), str(label)), pw)
        if abs(pi.norm_squared - 1.0) > 1e-10:
            raise ScenarioError(f"norm violation: sum |b|^2 = {pi.norm_squared!r}", f"{pw}.amplitudes")
        prospects.append(pi)
    lattice = _wrap(lambda: ProspectLattice.from_prospects(prospects), f"{w}.prospects")
    utility = _utility(sec["utility"], f"{w}.utility") if sec.get("utility") is not None else None
    return QuantumSection((d_a, d_b), rho, lattice, utility)


def _pipeline(sec: dict) -> PipelineSection:
    w = "pipeline"
    dims = _dims(sec.get("dims", [2, 2, 2]), f"{w}.dims", 3)
    init_raw = sec.get("initial")
    if init_raw is None:
        initial = tuple(DensityOperator.of(np.diag([1.0] + [0.0] * (d - 1))) for d in dims)
    else:
        if not isinstance(init_raw, list) or len(init_raw) != 3:
            raise ScenarioError("expected three initial factor states", f"{w}.initial")
        initial = tuple(
            _wrap(lambda k=k: DensityOperator.from_user_matrix(_matrix(init_raw[k], f"{w}.initial[{k}]", dims[k])),
                  f"{w}.initial[{k}]")
            for k in range(3)
        )
    total = int(np.prod(dims))
    unitaries = {}
    raw_u = sec.get("unitaries") or {}
    if not isinstance(raw_u, dict):
        raise ScenarioError("expected an object", f"{w}.unitaries")
    for key in raw_u:
        if key not in ("preparation", "evolution_2", "evolution_4"):
            raise ScenarioError(f"unknown unitary '{key}'", f"{w}.unitaries")
    for key in ("preparation", "evolution_2", "evolution_4"):
        if raw_u.get(key) is not None:
            unitaries[key] = _matrix(raw_u[key], f"{w}.unitaries.{key}", total)
    ts = sec.get("timestamps", [1, 2, 3, 4, 5])
    timestamps = _number_list(ts, f"{w}.timestamps")
    if len(timestamps) != 5 or any(b <= a for a, b in zip(timestamps, timestamps[1:])):
        raise ScenarioError("timestamps must be five strictly increasing values", f"{w}.timestamps")
    return PipelineSection(dims, initial, unitaries, timestamps)


def parse_scenario(text: str | bytes, name: str = "") -> ScenarioFile:
    """Parse and validate scenario JSON, raising :class:`ScenarioError` on any problem."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ScenarioError(f"not UTF-8: {exc}") from exc
    try:
        doc = json.loads(text, parse_constant=lambda c: float(c))
    except json.JSONDecodeError as exc:
        raise ScenarioError(exc.msg, f"line {exc.lineno} column {exc.colno}") from exc
    if not isinstance(doc, dict):
        raise ScenarioError("top level must be an object")
    version = _require(doc, "schema_version", "(root)")
    if version not in SCHEMA_VERSIONS:
        raise ScenarioError(f"unknown schema_version {version!r}; supported: {', '.join(SCHEMA_VERSIONS)}",
                            "schema_version")
    kind = _require(doc, "kind", "(root)")
    if kind not in KINDS:
        raise ScenarioError(f"unknown kind {kind!r}", "kind")
    present = [k for k in SECTIONS.values() if k in doc]
    if present != [SECTIONS[kind]]:
        raise ScenarioError(f"kind '{kind}' needs exactly one '{SECTIONS[kind]}' section, found {present}", "kind")
    seed = _int(doc.get("seed", 0), "seed")
    sec = doc[SECTIONS[kind]]
    if not isinstance(sec, dict):
        raise ScenarioError("expected an object", SECTIONS[kind])
    fields: dict = {}
    if kind == "prediction":
        fields["prediction"] = _prediction(sec)
    elif kind == "quantum":
        fields["quantum"] = _quantum(sec)
    elif kind == "pipeline":
        fields["pipeline"] = _pipeline(sec)
    else:
        fields["logic_demo"] = dict(sec)
    return ScenarioFile(version, kind, seed=seed, name=name or str(doc.get("name", "")), **fields)


# -- builtin scenario texts -------------------------------------------------------

def _c(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def encode_matrix(m) -> list:
    return [[_c(complex(z)) for z in row] for row in np.asarray(m)]


def encode_vector(v) -> list:
    return [_c(complex(z)) for z in np.asarray(v).reshape(-1)]


def _prisoner_dilemma() -> dict:
    return {
        "schema_version": "1.0",
        "kind": "prediction",
        "name": "prisoner-dilemma",
        "prediction": {
            "labels": ["C1 x {C2,D2}", "D1 x {C2,D2}"],
            "utility": {"mode": "direct_factors", "values": [0.60, 0.40]},
            "attraction": {"mode": "quarter_law_prior", "signs": [-1, 1], "mu": 0.0, "mu_c": 1.0},
            "empirical": [0.37, 0.63],
        },
    }


def _entangled_prospects() -> dict:
    s = 1 / np.sqrt(2)
    psi = np.kron([1, 0], [s, s])
    return {
        "schema_version": "1.0",
        "kind": "quantum",
        "name": "entangled-prospects",
        "quantum": {
            "dims": [2, 2],
            "rho": encode_matrix(np.outer(psi, psi)),
            "prospects": [
                {"label": "A0 x B+", "outcome_index": 0, "amplitudes": encode_vector([s, s])},
                {"label": "A0 x B-", "outcome_index": 0, "amplitudes": encode_vector([s, -s])},
            ],
        },
    }


def _decohered_prospects() -> dict:
    s = 1 / np.sqrt(2)
    return {
        "schema_version": "1.0",
        "kind": "quantum",
        "name": "decohered-prospects",
        "quantum": {
            "dims": [2, 2],
            "rho": encode_matrix(np.diag([0.4, 0.1, 0.2, 0.3])),
            "prospects": [
                {"label": "A0 x B", "outcome_index": 0, "amplitudes": encode_vector([s, s])},
                {"label": "A1 x B", "outcome_index": 1, "amplitudes": encode_vector([s, s])},
            ],
        },
    }


def _spin_logic() -> dict:
    return {"schema_version": "1.0", "kind": "logic_demo", "name": "spin-half-logic", "logic_demo": {}}


def _pipeline_demo() -> dict:
    return {"schema_version": "1.0", "kind": "pipeline", "name": "random-pipeline", "seed": 0,
            "pipeline": {"dims": [2, 2, 2]}}


BUILTIN_SCENARIOS = {
    "prisoner-dilemma": _prisoner_dilemma,
    "entangled-prospects": _entangled_prospects,
    "decohered-prospects": _decohered_prospects,
    "spin-half-logic": _spin_logic,
    "random-pipeline": _pipeline_demo,
}


def builtin_text(name: str) -> str:
    if name not in BUILTIN_SCENARIOS:
        raise ScenarioError(f"unknown builtin {name!r}; available: {', '.join(sorted(BUILTIN_SCENARIOS))}")
    return json.dumps(BUILTIN_SCENARIOS[name](), indent=2)


def load_builtin(name: str) -> ScenarioFile:
    return parse_scenario(builtin_text(name), name=name)
