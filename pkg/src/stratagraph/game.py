"""Turn-based attacker/defender game on the attack graph.

Desk-scale stand-in for a live testbed: each turn the attacker fires one
satisfiable, not-yet-fired, not-yet-neutralized attack (chosen by policy)
and a seeded coin decides whether the defender detects it. Once anything
has been detected, a reactive defender predicts the chains reachable from
the attacker's current grants and spends its per-turn budget breaking the
most threatening ones. The game ends when the attacker holds any permission
on a target, runs out of attacks, or the turn limit expires. Every run is a
pure function of (scenario, config): the RNG stream derives from the seed
alone.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

from .chains import enumerate_chains
from .config import DEFAULT_CONFIG, EngineConfig
from .defense import neutralized_attacks, plan_budgeted
from .graphs import AttackGraph
from .model import ConfigError, EmptyEntryGrantsError, Grant, ScenarioDoc

ATTACKER_POLICIES = ("greedy_cheapest", "max_threat", "random")
DEFENDER_POLICIES = ("none", "reactive_cut")

OUTCOME_COMPROMISED = "target_compromised"
OUTCOME_EXHAUSTED = "attacker_exhausted"
OUTCOME_TURN_LIMIT = "turn_limit"


@dataclass(frozen=True)
class GameConfig:
    max_turns: int = 12
    attacker_policy: str = "greedy_cheapest"
    defender_policy: str = "none"
    defender_budget_per_turn: float = 0.0
    rng_seed: int = 1
    semantics: str = "accumulated"
    # None = any permission on a target ends the game.
    compromise_permissions: tuple[str, ...] | None = None

    def check(self) -> "GameConfig":
        if self.max_turns < 1:
            raise ConfigError(f"max_turns must be >= 1, got {self.max_turns}")
        if self.attacker_policy not in ATTACKER_POLICIES:
            raise ConfigError(f"attacker_policy must be one of {ATTACKER_POLICIES}")
        if self.defender_policy not in DEFENDER_POLICIES:
            raise ConfigError(f"defender_policy must be one of {DEFENDER_POLICIES}")
        if self.defender_budget_per_turn < 0:
            raise ConfigError("defender_budget_per_turn must be non-negative")
        if self.semantics not in ("accumulated", "strict"):
            raise ConfigError(f"semantics must be accumulated or strict, got {self.semantics!r}")
        return self

    def as_dict(self) -> dict:
        return {
            "max_turns": self.max_turns,
            "attacker_policy": self.attacker_policy,
            "defender_policy": self.defender_policy,
            "defender_budget_per_turn": self.defender_budget_per_turn,
            "rng_seed": self.rng_seed,
            "semantics": self.semantics,
            "compromise_permissions": list(self.compromise_permissions)
            if self.compromise_permissions is not None
            else None,
        }


@dataclass(frozen=True)
class TurnRecord:
    turn: int
    attack: str | None
    detected: bool
    defenses: tuple[str, ...]
    grants: tuple[Grant, ...]

    def as_dict(self) -> dict:
        return {
            "turn": self.turn,
            "attack": self.attack,
            "detected": self.detected,
            "defenses": list(self.defenses),
            "grants": [g.as_dict() for g in self.grants],
        }


@dataclass(frozen=True)
class GameTrace:
    outcome: str
    turns: tuple[TurnRecord, ...]
    attacker_cost: float
    defender_cost: float
    turns_elapsed: int
    fired: tuple[str, ...]

    def as_dict(self) -> dict:
        return {
            "outcome": self.outcome,
            "turns": [t.as_dict() for t in self.turns],
            "attacker_cost": self.attacker_cost,
            "defender_cost": self.defender_cost,
            "turns_elapsed": self.turns_elapsed,
            "fired": list(self.fired),
        }


def _compromised(grants, targets, permissions) -> bool:
    for g in grants:
        if g.object in targets and (permissions is None or g.permission in permissions):
            return True
    return False


def run_game(
    doc: ScenarioDoc,
    graph: AttackGraph,
    game: GameConfig,
    config: EngineConfig = DEFAULT_CONFIG,
) -> GameTrace:
    game = game.check()
    if not doc.entry_grants:
        raise EmptyEntryGrantsError("scenario declares no entry grants")
    if not doc.targets:
        raise ConfigError("simulation requires at least one target")
    engine = replace(config, semantics=game.semantics)
    rng = random.Random(game.rng_seed)
    targets = frozenset(doc.targets)
    permissions = frozenset(game.compromise_permissions) if game.compromise_permissions is not None else None

    grants: set[Grant] = set(doc.entry_grants)
    fired: list[str] = []
    neutralized: frozenset[str] = frozenset()
    applied_defenses: set[str] = set()
    detected_any = False
    attacker_cost = 0.0
    defender_cost = 0.0
    turns: list[TurnRecord] = []

    if _compromised(grants, targets, permissions):
        return GameTrace(OUTCOME_COMPROMISED, (), 0.0, 0.0, 0, ())

    outcome = OUTCOME_TURN_LIMIT
    for turn in range(1, game.max_turns + 1):
        candidates = []
        for record in sorted(doc.attacks, key=lambda a: a.id):
            if record.id in fired or record.id in neutralized:
                continue
            if record.entry_only and fired:
                continue
            if all(need in grants for need in record.condition):
                candidates.append(record)
        if not candidates:
            outcome = OUTCOME_EXHAUSTED
            break

        if game.attacker_policy == "greedy_cheapest":
            pick = min(candidates, key=lambda a: (a.cost, a.id))
        elif game.attacker_policy == "max_threat":
            pick = min(candidates, key=lambda a: (-a.severity, a.id))
        else:
            pick = candidates[rng.randrange(len(candidates))]

        fired.append(pick.id)
        attacker_cost += pick.cost
        grants.update(pick.a_results)
        detected = rng.random() < pick.detect_prob
        detected_any = detected_any or detected

        if _compromised(grants, targets, permissions):
            outcome = OUTCOME_COMPROMISED
            turns.append(TurnRecord(turn, pick.id, detected, (), tuple(sorted(grants))))
            break

        new_defenses: tuple[str, ...] = ()
        if game.defender_policy == "reactive_cut" and detected_any:
            predicted = enumerate_chains(
                doc,
                graph,
                config=engine,
                targets=targets,
                blocked_attacks=neutralized,
                entry_grants=tuple(sorted(grants)),
            )
            plan = plan_budgeted(doc, graph, predicted, game.defender_budget_per_turn, config=engine)
            new_defenses = tuple(d for d in plan.chosen if d not in applied_defenses)
            if new_defenses:
                applied_defenses.update(new_defenses)
                defender_cost += sum(doc.defense_by_id()[d].cost for d in new_defenses)
                neutralized = neutralized_attacks(doc, applied_defenses)

        turns.append(TurnRecord(turn, pick.id, detected, new_defenses, tuple(sorted(grants))))

    return GameTrace(
        outcome=outcome,
        turns=tuple(turns),
        attacker_cost=attacker_cost,
        defender_cost=defender_cost,
        turns_elapsed=len(turns),
        fired=tuple(fired),
    )


def run_batch(
    doc: ScenarioDoc,
    graph: AttackGraph,
    game: GameConfig,
    runs: int,
    config: EngineConfig = DEFAULT_CONFIG,
) -> tuple[GameTrace, ...]:
    """Execute runs games with seeds rng_seed .. rng_seed+runs-1."""
    if runs < 1:
        raise ConfigError("runs must be >= 1")
    return tuple(
        run_game(doc, graph, replace(game, rng_seed=game.rng_seed + i), config=config) for i in range(runs)
    )


@dataclass(frozen=True)
class GameSummary:
    runs: int
    outcomes: dict[str, int]
    mean_turns: float
    mean_attacker_cost: float
    mean_defender_cost: float

    def as_dict(self) -> dict:
        return {
            "runs": self.runs,
            "outcomes": dict(sorted(self.outcomes.items())),
            "mean_turns": self.mean_turns,
            "mean_attacker_cost": self.mean_attacker_cost,
            "mean_defender_cost": self.mean_defender_cost,
        }


def summarize(traces) -> GameSummary:
    traces = list(traces)
    if not traces:
        raise ValueError("summarize requires at least one trace")
    outcomes: dict[str, int] = {}
    for t in traces:
        outcomes[t.outcome] = outcomes.get(t.outcome, 0) + 1
    n = len(traces)
    return GameSummary(
        runs=n,
        outcomes=outcomes,
        mean_turns=sum(t.turns_elapsed for t in traces) / n,
        mean_attacker_cost=sum(t.attacker_cost for t in traces) / n,
        mean_defender_cost=sum(t.defender_cost for t in traces) / n,
    )
