"""Scenario file loading, validation, serialization, and attack derivation.

Scenario files are UTF-8 JSON; see docs/scenario.schema.json for the formal
schema. load_scenario checks syntax and shape only. Semantic rules (dangling
references, duplicate ids, taxonomy membership, numeric ranges) live in
validate_scenario, which reports violations as data instead of raising.
"""

from __future__ import annotations

import json
from pathlib import Path

from . import canon
from .config import DEFAULT_CONFIG, EngineConfig
from .model import (
    LAYERS,
    VERTICAL_KINDS,
    AttackRecord,
    DefenseRecord,
    Grant,
    InvalidScenarioError,
    ObjectRecord,
    ParseError,
    RelationshipEdge,
    ScenarioDoc,
    Violation,
    VulnerabilityRecord,
    normalize_permission,
    permission_problems,
)

SCHEMA_VERSION = 1


# --- parsing -----------------------------------------------------------------

def _expect(value, types, where: str):
    if not isinstance(value, types):
        names = types.__name__ if isinstance(types, type) else "/".join(t.__name__ for t in types)
        raise ParseError(f"{where}: expected {names}, got {type(value).__name__}")
    return value


def _number(value, where: str) -> float:
    # bool is an int subclass; reject it explicitly.
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{where}: expected number, got {type(value).__name__}")
    return float(value)


_REQUIRED = object()


def _take(record: dict, key: str, where: str, default=_REQUIRED):
    if key in record:
        return record.pop(key)
    if default is _REQUIRED:
        raise ParseError(f"{where}: missing required key {key!r}")
    return default


def _leftover_keys(record: dict, where: str, unknown: list[str]) -> None:
    for key in sorted(record):
        unknown.append(f"{where}.{key}")


def _parse_grant(raw, where: str) -> Grant:
    _expect(raw, dict, where)
    raw = dict(raw)
    obj = _expect(_take(raw, "object", where), str, f"{where}.object")
    perm = _expect(_take(raw, "permission", where), str, f"{where}.permission")
    if raw:
        raise ParseError(f"{where}: unexpected keys {sorted(raw)}")
    return Grant(obj, normalize_permission(perm))


def _parse_grant_list(raw, where: str) -> tuple[Grant, ...]:
    _expect(raw, list, where)
    return tuple(_parse_grant(g, f"{where}[{i}]") for i, g in enumerate(raw))


def _parse_object(raw, where: str, unknown: list[str]) -> ObjectRecord:
    _expect(raw, dict, where)
    raw = dict(raw)
    rec = ObjectRecord(
        id=_expect(_take(raw, "id", where), str, f"{where}.id"),
        layer=_expect(_take(raw, "layer", where), str, f"{where}.layer"),
        category=_expect(_take(raw, "category", where), str, f"{where}.category"),
        label=_expect(_take(raw, "label", where, ""), str, f"{where}.label"),
    )
    _leftover_keys(raw, where, unknown)
    return rec


def _parse_relationship(raw, where: str, unknown: list[str]) -> RelationshipEdge:
    _expect(raw, dict, where)
    raw = dict(raw)
    rec = RelationshipEdge(
        from_id=_expect(_take(raw, "from", where), str, f"{where}.from"),
        to_id=_expect(_take(raw, "to", where), str, f"{where}.to"),
        kind=_expect(_take(raw, "kind", where), str, f"{where}.kind"),
        directed=_expect(_take(raw, "directed", where, False), bool, f"{where}.directed"),
    )
    _leftover_keys(raw, where, unknown)
    return rec


def _parse_attack(raw, where: str, unknown: list[str]) -> AttackRecord:
    _expect(raw, dict, where)
    raw = dict(raw)
    rec = AttackRecord(
        id=_expect(_take(raw, "id", where), str, f"{where}.id"),
        object=_expect(_take(raw, "object", where), str, f"{where}.object"),
        condition=tuple(sorted(_parse_grant_list(_take(raw, "condition", where, []), f"{where}.condition"))),
        method=_expect(_take(raw, "method", where, ""), str, f"{where}.method"),
        a_results=_parse_grant_list(_take(raw, "a_results", where), f"{where}.a_results"),
        cost=_number(_take(raw, "cost", where, 1.0), f"{where}.cost"),
        severity=_number(_take(raw, "severity", where, 1.0), f"{where}.severity"),
        detect_prob=_number(_take(raw, "detect_prob", where, 1.0), f"{where}.detect_prob"),
        entry_only=_expect(_take(raw, "entry_only", where, False), bool, f"{where}.entry_only"),
    )
    _leftover_keys(raw, where, unknown)
    return rec


def _parse_defense(raw, where: str, unknown: list[str]) -> DefenseRecord:
    _expect(raw, dict, where)
    raw = dict(raw)
    d_results = _expect(_take(raw, "d_results", where), list, f"{where}.d_results")
    rec = DefenseRecord(
        id=_expect(_take(raw, "id", where), str, f"{where}.id"),
        cost=_number(_take(raw, "cost", where), f"{where}.cost"),
        method=_expect(_take(raw, "method", where, ""), str, f"{where}.method"),
        d_results=tuple(_expect(a, str, f"{where}.d_results[{i}]") for i, a in enumerate(d_results)),
    )
    _leftover_keys(raw, where, unknown)
    return rec


def _parse_vulnerability(raw, where: str, unknown: list[str]) -> VulnerabilityRecord:
    _expect(raw, dict, where)
    raw = dict(raw)
    rec = VulnerabilityRecord(
        id=_expect(_take(raw, "id", where), str, f"{where}.id"),
        affects_category=_expect(_take(raw, "affects_category", where), str, f"{where}.affects_category"),
        yields_permission=normalize_permission(
            _expect(_take(raw, "yields_permission", where), str, f"{where}.yields_permission")
        ),
        exploit_cost=_number(_take(raw, "exploit_cost", where, 1.0), f"{where}.exploit_cost"),
        severity=_number(_take(raw, "severity", where, 1.0), f"{where}.severity"),
    )
    _leftover_keys(raw, where, unknown)
    return rec


_TOP_KEYS = (
    "objects",
    "relationships",
    "attacks",
    "defenses",
    "vulnerabilities",
    "entry_grants",
    "targets",
    "extensions",
)


def parse_scenario(text: str, source: str = "<string>") -> ScenarioDoc:
    """Parse scenario JSON text into a ScenarioDoc. Syntax/shape checks only."""
    if not text.strip():
        raise ParseError(f"{source}: file is empty")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    _expect(data, dict, source)
    data = dict(data)
    unknown: list[str] = []

    def section(key: str) -> list:
        raw = _take(data, key, source, [])
        return _expect(raw, list, f"{source}.{key}")

    objects = tuple(_parse_object(o, f"objects[{i}]", unknown) for i, o in enumerate(section("objects")))
    relationships = tuple(
        _parse_relationship(r, f"relationships[{i}]", unknown) for i, r in enumerate(section("relationships"))
    )
    attacks = tuple(_parse_attack(a, f"attacks[{i}]", unknown) for i, a in enumerate(section("attacks")))
    defenses = tuple(_parse_defense(d, f"defenses[{i}]", unknown) for i, d in enumerate(section("defenses")))
    vulnerabilities = tuple(
        _parse_vulnerability(v, f"vulnerabilities[{i}]", unknown) for i, v in enumerate(section("vulnerabilities"))
    )
    entry_grants = tuple(sorted(_parse_grant_list(_take(data, "entry_grants", source, []), "entry_grants")))
    targets_raw = _expect(_take(data, "targets", source, []), list, "targets")
    targets = tuple(sorted(_expect(t, str, f"targets[{i}]") for i, t in enumerate(targets_raw)))
    ext_raw = _expect(_take(data, "extensions", source, []), list, "extensions")
    extensions = tuple(_expect(e, str, f"extensions[{i}]") for i, e in enumerate(ext_raw))

    for key in sorted(data):
        unknown.append(key)

    return ScenarioDoc(
        objects=objects,
        relationships=relationships,
        attacks=attacks,
        defenses=defenses,
        vulnerabilities=vulnerabilities,
        entry_grants=entry_grants,
        targets=targets,
        extensions=extensions,
        unknown_keys=tuple(unknown),
    )


def load_scenario(path: str | Path) -> ScenarioDoc:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    return parse_scenario(text, source=str(path))


# --- serialization -----------------------------------------------------------

def scenario_to_dict(doc: ScenarioDoc) -> dict:
    def attack(a: AttackRecord) -> dict:
        out = {
            "id": a.id,
            "object": a.object,
            "condition": [g.as_dict() for g in a.condition],
            "method": a.method,
            "a_results": [g.as_dict() for g in a.a_results],
            "cost": a.cost,
            "severity": a.severity,
            "detect_prob": a.detect_prob,
        }
        if a.entry_only:
            out["entry_only"] = True
        return out

    return {
        "objects": [{"id": o.id, "layer": o.layer, "category": o.category, "label": o.label} for o in doc.objects],
        "relationships": [r.as_dict() for r in doc.relationships],
        "attacks": [attack(a) for a in doc.attacks],
        "defenses": [
            {"id": d.id, "cost": d.cost, "method": d.method, "d_results": list(d.d_results)} for d in doc.defenses
        ],
        "vulnerabilities": [
            {
                "id": v.id,
                "affects_category": v.affects_category,
                "yields_permission": v.yields_permission,
                "exploit_cost": v.exploit_cost,
                "severity": v.severity,
            }
            for v in doc.vulnerabilities
        ],
        "entry_grants": [g.as_dict() for g in doc.entry_grants],
        "targets": list(doc.targets),
        "extensions": list(doc.extensions),
    }


def serialize_scenario(doc: ScenarioDoc) -> str:
    """Render a scenario back to canonical JSON text (unknown keys dropped)."""
    return canon.dumps(scenario_to_dict(doc)) + "\n"


# --- validation --------------------------------------------------------------

def _check_token(problems, record_class: str, record_id: str, token: str, what: str):
    msg = permission_problems(token)
    if msg:
        problems.append(Violation("error", record_class, record_id, f"{what}: {msg}"))


def validate_scenario(doc: ScenarioDoc) -> tuple[Violation, ...]:
    """Return every invariant violation, sorted by (record class, id).

    An empty report means the scenario is fully valid. Entries with severity
    "warning" flag suspicious-but-legal constructs (unknown file keys, attack
    edges with no underlying relationship) and do not make the scenario
    invalid.
    """
    out: list[Violation] = []
    ids = doc.object_ids()
    by_id = doc.object_by_id()
    categories = doc.allowed_categories()

    seen: set[str] = set()
    for o in doc.objects:
        if not o.id or o.id != o.id.strip():
            out.append(Violation("error", "object", o.id, f"object id {o.id!r} is empty or padded"))
        if o.id in seen:
            out.append(Violation("error", "object", o.id, f"duplicate object id {o.id!r}"))
        seen.add(o.id)
        if o.layer not in LAYERS:
            out.append(Violation("error", "object", o.id, f"unknown layer {o.layer!r} (expected one of {LAYERS})"))
        if o.category not in categories:
            out.append(Violation("error", "object", o.id, f"unknown category {o.category!r}"))

    for i, r in enumerate(doc.relationships):
        rid = f"relationships[{i}]"
        missing = [x for x in (r.from_id, r.to_id) if x not in ids]
        for x in missing:
            out.append(Violation("error", "relationship", rid, f"endpoint {x!r} does not exist"))
        if not missing and by_id[r.from_id].layer != by_id[r.to_id].layer and r.kind not in VERTICAL_KINDS:
            out.append(
                Violation(
                    "error",
                    "relationship",
                    rid,
                    f"vertical edge {r.from_id}->{r.to_id} has kind {r.kind!r}, expected one of {VERTICAL_KINDS}",
                )
            )

    seen = set()
    derived_ids = {f"drv:{v.id}:{o.id}" for v in doc.vulnerabilities for o in doc.objects if o.category == v.affects_category}
    for a in doc.attacks:
        if a.id in seen:
            out.append(Violation("error", "attack", a.id, f"duplicate attack id {a.id!r}"))
        seen.add(a.id)
        if a.id in derived_ids:
            out.append(Violation("error", "attack", a.id, f"attack id {a.id!r} collides with a derivable attack id"))
        if a.object not in ids:
            out.append(Violation("error", "attack", a.id, f"attacked object {a.object!r} does not exist"))
        if not a.a_results:
            out.append(Violation("error", "attack", a.id, "a_results is empty"))
        for g in a.a_results:
            if g.object not in ids:
                out.append(Violation("error", "attack", a.id, f"a_result object {g.object!r} does not exist"))
            _check_token(out, "attack", a.id, g.permission, f"a_result on {g.object!r}")
        for g in a.condition:
            if g.object not in ids:
                out.append(Violation("error", "attack", a.id, f"condition object {g.object!r} does not exist"))
            _check_token(out, "attack", a.id, g.permission, f"condition on {g.object!r}")
        if a.cost < 0:
            out.append(Violation("error", "attack", a.id, f"cost {a.cost} is negative"))
        if a.severity < 0:
            out.append(Violation("error", "attack", a.id, f"severity {a.severity} is negative"))
        if not 0.0 <= a.detect_prob <= 1.0:
            out.append(Violation("error", "attack", a.id, f"detect_prob {a.detect_prob} outside [0, 1]"))
        # Warn when an attack edge jumps between objects no relationship
        # connects; self-loop effects are always plausible.
        for g in a.a_results:
            if g.object in ids and a.object in ids and g.object != a.object:
                if not any(r.touches(a.object, g.object) or r.touches(g.object, a.object) for r in doc.relationships):
                    out.append(
                        Violation(
                            "warning",
                            "attack",
                            a.id,
                            f"edge {a.object}->{g.object} has no relationship counterpart in the base graph",
                        )
                    )

    attack_ids = {a.id for a in doc.attacks}
    seen = set()
    for d in doc.defenses:
        if d.id in seen:
            out.append(Violation("error", "defense", d.id, f"duplicate defense id {d.id!r}"))
        seen.add(d.id)
        if not d.d_results:
            out.append(Violation("error", "defense", d.id, "d_results is empty"))
        for aid in d.d_results:
            if aid not in attack_ids:
                out.append(Violation("error", "defense", d.id, f"d_result attack {aid!r} does not exist"))
        if d.cost < 0:
            out.append(Violation("error", "defense", d.id, f"cost {d.cost} is negative"))

    seen = set()
    for v in doc.vulnerabilities:
        if v.id in seen:
            out.append(Violation("error", "vulnerability", v.id, f"duplicate vulnerability id {v.id!r}"))
        seen.add(v.id)
        if v.affects_category not in categories:
            out.append(Violation("error", "vulnerability", v.id, f"unknown category {v.affects_category!r}"))
        _check_token(out, "vulnerability", v.id, v.yields_permission, "yields_permission")
        if v.exploit_cost < 0:
            out.append(Violation("error", "vulnerability", v.id, f"exploit_cost {v.exploit_cost} is negative"))
        if v.severity < 0:
            out.append(Violation("error", "vulnerability", v.id, f"severity {v.severity} is negative"))

    for g in doc.entry_grants:
        if g.object not in ids:
            out.append(Violation("error", "scenario", "entry_grants", f"entry grant object {g.object!r} does not exist"))
        _check_token(out, "scenario", "entry_grants", g.permission, f"entry grant on {g.object!r}")
    for t in doc.targets:
        if t not in ids:
            out.append(Violation("error", "scenario", "targets", f"target {t!r} does not exist"))
    for key in doc.unknown_keys:
        out.append(Violation("warning", "scenario", "unknown_keys", f"unknown key {key!r} ignored"))

    return tuple(sorted(out, key=Violation.sort_key))


def require_valid(doc: ScenarioDoc) -> None:
    """Raise InvalidScenarioError when the doc has error-severity violations."""
    errors = [v for v in validate_scenario(doc) if v.severity == "error"]
    if errors:
        raise InvalidScenarioError(errors)


# --- derivation --------------------------------------------------------------

def derive_attacks(doc: ScenarioDoc, config: EngineConfig = DEFAULT_CONFIG) -> tuple[AttackRecord, ...]:
    """Derive attack records from the vulnerability catalog.

    One rule: a vulnerability spawns an attack on every object of its
    category. The derived attack needs read access to the object, yields the
    vulnerability's permission on it, and inherits its cost and severity.
    Ids are deterministic ("drv:<vuln>:<object>"), so the result is stable
    and repeatable; a collision with a hand-written attack id is a scenario
    violation, never an overwrite.
    """
    require_valid(doc)
    out = []
    for v in doc.vulnerabilities:
        for o in doc.objects:
            if o.category != v.affects_category:
                continue
            out.append(
                AttackRecord(
                    id=f"drv:{v.id}:{o.id}",
                    object=o.id,
                    condition=(Grant(o.id, "read"),),
                    method=f"exploit {v.id}",
                    a_results=(Grant(o.id, v.yields_permission),),
                    cost=v.exploit_cost,
                    severity=v.severity,
                    detect_prob=config.derived_detect_prob,
                )
            )
    return tuple(out)
