from dataclasses import replace

import pytest

from stratagraph import (
    Grant,
    InvalidScenarioError,
    ParseError,
    derive_attacks,
    load_scenario,
    parse_scenario,
    serialize_scenario,
    validate_scenario,
)
from stratagraph.config import EngineConfig

from genscen import random_scenario


def test_load_toy5g_counts(toy5g):
    doc, _, _ = toy5g
    assert len(doc.objects) == 6
    assert {o.layer for o in doc.objects} == {"physical", "virtual", "service", "application"}
    assert len(doc.attacks) == 5
    assert len(doc.defenses) == 4
    assert doc.targets == ("APP1",)


def test_empty_file_is_parse_error(tmp_path):
    path = tmp_path / "empty.scenario"
    path.write_text("")
    with pytest.raises(ParseError):
        load_scenario(path)


def test_missing_file_is_io_error(tmp_path):
    with pytest.raises(OSError):
        load_scenario(tmp_path / "nope.scenario")


def test_parse_error_carries_record_context():
    with pytest.raises(ParseError, match=r"attacks\[0\].cost"):
        parse_scenario(
            '{"objects": [{"id": "x", "layer": "physical", "category": "os"}],'
            ' "attacks": [{"id": "a", "object": "x", "a_results": [], "cost": "free"}]}'
        )


def test_duplicate_id_parses_then_fails_validation():
    doc = parse_scenario(
        '{"objects": [{"id": "x", "layer": "physical", "category": "os"},'
        ' {"id": "x", "layer": "virtual", "category": "os"}]}'
    )
    report = validate_scenario(doc)
    assert any("duplicate object id" in v.message for v in report)


def test_toy5g_validates_clean(toy5g):
    doc, _, _ = toy5g
    assert validate_scenario(doc) == ()


def test_dangling_a_result_names_the_object(toy5g):
    doc, _, _ = toy5g
    attacks = list(doc.attacks)
    attacks[0] = replace(attacks[0], a_results=(Grant("X9", "read"),))
    report = validate_scenario(replace(doc, attacks=tuple(attacks)))
    assert any("X9" in v.message and v.severity == "error" for v in report)


def test_detect_prob_out_of_range(toy5g):
    doc, _, _ = toy5g
    attacks = list(doc.attacks)
    attacks[0] = replace(attacks[0], detect_prob=1.5)
    report = validate_scenario(replace(doc, attacks=tuple(attacks)))
    assert any("detect_prob" in v.message for v in report)


def test_vertical_edge_kind_enforced(toy5g):
    doc, _, _ = toy5g
    rels = list(doc.relationships)
    rels[3] = replace(rels[3], kind="connectivity")  # BS1->HV1 spans layers
    report = validate_scenario(replace(doc, relationships=tuple(rels)))
    assert any(v.record_class == "relationship" and "vertical" in v.message for v in report)


def test_unknown_keys_warn_but_stay_valid():
    doc = parse_scenario('{"objects": [], "frobnicate": 1}')
    report = validate_scenario(doc)
    assert [v.severity for v in report] == ["warning"]
    assert "frobnicate" in report[0].message
    nested = parse_scenario('{"objects": [{"id": "x", "layer": "physical", "category": "os", "color": "red"}]}')
    report = validate_scenario(nested)
    assert any("objects[0].color" in v.message and v.severity == "warning" for v in report)


def test_attack_edge_without_relationship_warns():
    doc = parse_scenario(
        '{"objects": [{"id": "x", "layer": "physical", "category": "os"},'
        ' {"id": "y", "layer": "physical", "category": "os"}],'
        ' "attacks": [{"id": "a", "object": "x",'
        ' "a_results": [{"object": "y", "permission": "read"}]}]}'
    )
    report = validate_scenario(doc)
    assert any(v.severity == "warning" and "counterpart" in v.message for v in report)
    # self-loops are exempt
    doc2 = parse_scenario(
        '{"objects": [{"id": "x", "layer": "physical", "category": "os"}],'
        ' "attacks": [{"id": "a", "object": "x",'
        ' "a_results": [{"object": "x", "permission": "read"}]}]}'
    )
    assert validate_scenario(doc2) == ()


def test_category_extensions_allowed():
    doc = parse_scenario(
        '{"objects": [{"id": "x", "layer": "physical", "category": "ric-xapp"}],'
        ' "extensions": ["ric-xapp"]}'
    )
    assert validate_scenario(doc) == ()
    doc2 = parse_scenario('{"objects": [{"id": "x", "layer": "physical", "category": "ric-xapp"}]}')
    assert any("unknown category" in v.message for v in validate_scenario(doc2))


def test_violation_report_ordering_is_deterministic(toy5g):
    doc, _, _ = toy5g
    broken = replace(
        doc,
        targets=("GHOST",),
        entry_grants=(Grant("GHOST2", "read"),),
    )
    report = validate_scenario(broken)
    assert list(report) == sorted(report, key=lambda v: v.sort_key())
    assert len(report) == 2


@pytest.mark.parametrize("name", ["toy5g", "minichain", "multiedge", "strictmode", "hitting_trio"])
def test_round_trip_identity_fixtures(fixtures_dir, name):
    doc = load_scenario(fixtures_dir / f"{name}.scenario")
    assert parse_scenario(serialize_scenario(doc)) == doc


def test_round_trip_identity_random():
    for seed in range(25):
        doc = random_scenario(seed)
        again = parse_scenario(serialize_scenario(doc))
        assert again == doc, f"round trip drifted for seed {seed}"


def test_single_field_corruption_is_caught(toy5g):
    doc, _, _ = toy5g
    mutations = [
        replace(doc, objects=doc.objects + (replace(doc.objects[0]),)),
        replace(doc, objects=(replace(doc.objects[0], layer="cloud"),) + doc.objects[1:]),
        replace(doc, objects=(replace(doc.objects[0], category="widget"),) + doc.objects[1:]),
        replace(doc, attacks=(replace(doc.attacks[0], object="GONE"),) + doc.attacks[1:]),
        replace(doc, attacks=(replace(doc.attacks[0], a_results=()),) + doc.attacks[1:]),
        replace(doc, attacks=(replace(doc.attacks[0], cost=-1.0),) + doc.attacks[1:]),
        replace(doc, attacks=(replace(doc.attacks[0], severity=-0.5),) + doc.attacks[1:]),
        replace(doc, attacks=(replace(doc.attacks[0], condition=(Grant("GONE", "read"),)),) + doc.attacks[1:]),
        replace(doc, defenses=(replace(doc.defenses[0], d_results=("NOPE",)),) + doc.defenses[1:]),
        replace(doc, defenses=(replace(doc.defenses[0], d_results=()),) + doc.defenses[1:]),
        replace(doc, defenses=(replace(doc.defenses[0], cost=-2.0),) + doc.defenses[1:]),
        replace(doc, vulnerabilities=(replace(doc.vulnerabilities[0], affects_category="widget"),)),
        replace(doc, vulnerabilities=(replace(doc.vulnerabilities[0], yields_permission="Read It"),)),
        replace(doc, entry_grants=(Grant("GONE", "read"),)),
        replace(doc, targets=("GONE",)),
    ]
    for i, mutant in enumerate(mutations):
        errors = [v for v in validate_scenario(mutant) if v.severity == "error"]
        assert errors, f"mutation {i} produced no error"


def test_type_corruption_always_raises_parse_error(fixtures_dir):
    import json

    original = json.loads((fixtures_dir / "toy5g.scenario").read_text())

    def paths(node, prefix=()):
        yield prefix
        if isinstance(node, dict):
            for k, v in node.items():
                yield from paths(v, prefix + (k,))
        elif isinstance(node, list):
            for i, v in enumerate(node):
                yield from paths(v, prefix + (i,))

    def corrupt(path, value):
        doc = json.loads(json.dumps(original))
        node = doc
        for step in path[:-1]:
            node = node[step]
        node[path[-1]] = value
        return json.dumps(doc)

    outcomes = {"ok": 0, "parse_error": 0}
    for path in list(paths(original)):
        if not path:
            continue
        for junk in (17, [1], {"x": 1}, None, True):
            try:
                parse_scenario(corrupt(path, junk))
                outcomes["ok"] += 1
            except ParseError:
                outcomes["parse_error"] += 1
    # Every corruption either still parses (runtime-compatible value, caught
    # by validate_scenario later) or fails with ParseError; anything else
    # would have propagated out of the loop.
    assert outcomes["parse_error"] > 100


def test_permission_aliases_normalize_at_load(multiedge):
    doc, _, _ = multiedge
    perms = [g.permission for g in doc.attacks[0].a_results]
    assert perms == ["read", "execute"]


def test_derive_two_os_objects(fixtures_dir):
    doc = load_scenario(fixtures_dir / "derive_os.scenario")
    derived = derive_attacks(doc)
    assert [a.id for a in derived] == ["drv:VOS:OS1", "drv:VOS:OS2"]
    for rec in derived:
        assert rec.condition == (Grant(rec.object, "read"),)
        assert rec.a_results == (Grant(rec.object, "execute"),)
        assert rec.cost == 3.0 and rec.severity == 7.0 and rec.detect_prob == 1.0


def test_derive_respects_config_detect_prob(fixtures_dir):
    doc = load_scenario(fixtures_dir / "derive_os.scenario")
    derived = derive_attacks(doc, EngineConfig(derived_detect_prob=0.25))
    assert all(a.detect_prob == 0.25 for a in derived)


def test_derive_no_vulnerabilities_is_empty(minichain):
    doc, _, _ = minichain
    assert derive_attacks(doc) == ()


def test_derive_yields_permission_on_matching_object(toy5g):
    doc, _, _ = toy5g
    derived = derive_attacks(doc)
    assert [a.id for a in derived] == ["drv:V1:HV1"]
    assert derived[0].a_results == (Grant("HV1", "execute"),)


def test_derive_is_deterministic_and_idempotent(fixtures_dir):
    doc = load_scenario(fixtures_dir / "derive_os.scenario")
    assert derive_attacks(doc) == derive_attacks(doc)


def test_derived_id_collision_is_violation(fixtures_dir):
    doc = load_scenario(fixtures_dir / "derive_os.scenario")
    from stratagraph.model import AttackRecord

    clash = AttackRecord(
        id="drv:VOS:OS1", object="OS1", a_results=(Grant("OS1", "read"),)
    )
    broken = replace(doc, attacks=(clash,))
    assert any("collides" in v.message for v in validate_scenario(broken))
    with pytest.raises(InvalidScenarioError):
        derive_attacks(broken)
