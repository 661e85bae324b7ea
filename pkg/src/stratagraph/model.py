"""Domain model for layered network attack/defense scenarios.

A scenario describes a small 5G-style network as four stacked layers of
objects (devices, channels, virtual entities, OSes, controllers, apps,
protocols), the relationships between them, a catalog of attacks and
defenses, plus the attacker's entry foothold and the defender's targets.

Everything here is an immutable value type: a loaded scenario never
mutates, so documents and derived graphs are safe to share across
threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

LAYERS = ("physical", "virtual", "service", "application")

CATEGORIES = (
    "hardware-device",
    "channel",
    "virtual-entity",
    "os",
    "control-software",
    "application-software",
    "protocol",
)

# Relationship kinds allowed on edges that span two layers.
VERTICAL_KINDS = ("functional-support", "resource-sharing", "management", "orchestration")

CANONICAL_PERMISSIONS = ("read", "write", "execute", "disable")

# Adjective spellings accepted in scenario files and folded to canonical tokens.
PERMISSION_ALIASES = {
    "readable": "read",
    "writable": "write",
    "executable": "execute",
}


class ScenarioError(Exception):
    """Base class for all scenario/analysis failures."""


class ParseError(ScenarioError):
    """Scenario file is syntactically or structurally malformed."""


class InvalidScenarioError(ScenarioError):
    """Operation requires a valid scenario but validation found errors."""

    def __init__(self, violations):
        self.violations = tuple(violations)
        lines = "; ".join(v.message for v in self.violations[:5])
        super().__init__(f"scenario invalid ({len(self.violations)} violations): {lines}")


class UnknownIdError(ScenarioError):
    """A referenced object/attack/edge id does not exist."""


class EmptyEntryGrantsError(ScenarioError):
    """Chain analysis requested but the scenario declares no entry grants."""


class InfeasibleCutError(ScenarioError):
    """No defense subset can break every target-reaching chain."""

    def __init__(self, message, uncut_chains=()):
        self.uncut_chains = tuple(uncut_chains)
        super().__init__(message)


class ConfigError(ScenarioError):
    """Engine or game configuration is malformed."""


def normalize_permission(token: str) -> str:
    return PERMISSION_ALIASES.get(token, token)


def permission_problems(token: str) -> str | None:
    """Return a description of why a permission token is malformed, or None."""
    if not isinstance(token, str) or not token:
        return "permission is empty"
    if token != token.lower():
        return f"permission {token!r} is not lowercase"
    if any(c.isspace() for c in token):
        return f"permission {token!r} contains whitespace"
    return None


@dataclass(frozen=True, order=True)
class Grant:
    """A capability the attacker holds: one permission on one object.

    The same pair shape doubles as a condition requirement on attacks.
    """

    object: str
    permission: str

    def as_dict(self) -> dict:
        return {"object": self.object, "permission": self.permission}


@dataclass(frozen=True)
class ObjectRecord:
    id: str
    layer: str
    category: str
    label: str = ""


@dataclass(frozen=True)
class RelationshipEdge:
    from_id: str
    to_id: str
    kind: str
    directed: bool = False

    def as_dict(self) -> dict:
        return {"from": self.from_id, "to": self.to_id, "kind": self.kind, "directed": self.directed}

    def touches(self, a: str, b: str) -> bool:
        """True when this edge links a to b, honoring directedness."""
        if self.from_id == a and self.to_id == b:
            return True
        return not self.directed and self.from_id == b and self.to_id == a


@dataclass(frozen=True)
class AttackRecord:
    """One attack event on one object, with a list of granted effects.

    Each a_result instantiates one directed edge in the attack graph, so a
    record with k results contributes k edges. The condition is a set of
    grants the attacker must already hold before this attack can fire;
    entry_only restricts the attack to the first step of a chain.
    """

    id: str
    object: str
    condition: tuple[Grant, ...] = ()
    method: str = ""
    a_results: tuple[Grant, ...] = ()
    cost: float = 1.0
    severity: float = 1.0
    detect_prob: float = 1.0
    entry_only: bool = False


@dataclass(frozen=True)
class DefenseRecord:
    """A countermeasure: applying it neutralizes every edge of the named attacks."""

    id: str
    cost: float
    method: str = ""
    d_results: tuple[str, ...] = ()


@dataclass(frozen=True)
class VulnerabilityRecord:
    id: str
    affects_category: str
    yields_permission: str
    exploit_cost: float = 1.0
    severity: float = 1.0


@dataclass(frozen=True)
class ScenarioDoc:
    """A fully parsed scenario file. Parsing does not validate semantics;
    run validate_scenario to get the violation report."""

    objects: tuple[ObjectRecord, ...] = ()
    relationships: tuple[RelationshipEdge, ...] = ()
    attacks: tuple[AttackRecord, ...] = ()
    defenses: tuple[DefenseRecord, ...] = ()
    vulnerabilities: tuple[VulnerabilityRecord, ...] = ()
    entry_grants: tuple[Grant, ...] = ()
    targets: tuple[str, ...] = ()
    extensions: tuple[str, ...] = ()
    # Unknown keys seen while parsing; reported as warnings, never persisted.
    unknown_keys: tuple[str, ...] = field(default=(), compare=False)

    def object_ids(self) -> frozenset[str]:
        return frozenset(o.id for o in self.objects)

    def object_by_id(self) -> dict[str, ObjectRecord]:
        return {o.id: o for o in self.objects}

    def attack_by_id(self) -> dict[str, AttackRecord]:
        return {a.id: a for a in self.attacks}

    def defense_by_id(self) -> dict[str, DefenseRecord]:
        return {d.id: d for d in self.defenses}

    def allowed_categories(self) -> tuple[str, ...]:
        return CATEGORIES + self.extensions


@dataclass(frozen=True)
class Violation:
    """One invariant breach found by validate_scenario.

    severity is "error" (scenario unusable) or "warning" (suspicious but legal).
    """

    severity: str
    record_class: str
    record_id: str
    message: str

    def sort_key(self):
        return (self.record_class, self.record_id, self.severity, self.message)

    def as_dict(self) -> dict:
        return {
            "severity": self.severity,
            "record_class": self.record_class,
            "record_id": self.record_id,
            "message": self.message,
        }
