import json

from stratagraph.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def scen(fixtures_dir, name):
    return str(fixtures_dir / f"{name}.scenario")


def test_validate_toy5g(capsys, fixtures_dir):
    code, out, _ = run_cli(capsys, "validate", "--scenario", scen(fixtures_dir, "toy5g"))
    assert code == 0
    assert out.strip() == "valid"


def test_validate_invalid_exits_2(capsys, tmp_path):
    bad = tmp_path / "bad.scenario"
    bad.write_text('{"objects": [{"id": "x", "layer": "nowhere", "category": "os"}]}')
    code, out, _ = run_cli(capsys, "validate", "--scenario", str(bad), "--format", "json")
    assert code == 2
    payload = json.loads(out)
    assert payload["valid"] is False
    assert payload["violations"]


def test_validate_warnings_only_exits_0(capsys, tmp_path):
    warny = tmp_path / "warny.scenario"
    warny.write_text('{"objects": [], "surprise": true}')
    code, out, _ = run_cli(capsys, "validate", "--scenario", str(warny))
    assert code == 0
    assert out.splitlines()[0] == "valid (0 errors, 1 warnings)"
    assert "surprise" in out


def test_parse_error_exits_2(capsys, tmp_path):
    broken = tmp_path / "broken.scenario"
    broken.write_text("{not json")
    code, _, err = run_cli(capsys, "validate", "--scenario", str(broken))
    assert code == 2
    assert "error" in err


def test_missing_file_exits_2(capsys, tmp_path):
    code, _, err = run_cli(capsys, "validate", "--scenario", str(tmp_path / "ghost.scenario"))
    assert code == 2


def test_usage_error_exits_1(capsys, fixtures_dir):
    code, _, _ = run_cli(capsys, "validate")
    assert code == 1
    code, _, _ = run_cli(capsys, "chains", "--scenario", scen(fixtures_dir, "toy5g"), "--objective", "psychic")
    assert code == 1
    code, _, _ = run_cli(capsys, "frobnicate")
    assert code == 1


def test_version_flag(capsys):
    code, out, _ = run_cli(capsys, "--version")
    assert code == 0
    assert "stratagraph" in out and "schema" in out


def test_chains_json_is_byte_stable(capsys, fixtures_dir):
    args = ("chains", "--scenario", scen(fixtures_dir, "toy5g"), "--format", "json")
    code1, out1, _ = run_cli(capsys, *args)
    code2, out2, _ = run_cli(capsys, *args)
    assert code1 == code2 == 0
    assert out1 == out2
    payload = json.loads(out1)
    assert payload["count"] == 4
    assert payload["chains"][0]["edges"] == ["A1#0", "A2#1", "A4#0"]


def test_chains_objective_and_target_flags(capsys, fixtures_dir):
    code, out, _ = run_cli(
        capsys, "chains", "--scenario", scen(fixtures_dir, "toy5g"), "--objective", "min_cost", "--format", "json"
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["count"] == 1
    assert payload["chains"][0]["total_cost"] == 6.5
    code, out, _ = run_cli(
        capsys, "chains", "--scenario", scen(fixtures_dir, "toy5g"), "--target", "HV1", "--format", "json"
    )
    assert json.loads(out)["count"] == 2
    code, out, _ = run_cli(
        capsys, "chains", "--scenario", scen(fixtures_dir, "toy5g"), "--unrestricted", "--format", "json"
    )
    assert json.loads(out)["count"] == 11
    code, _, _ = run_cli(capsys, "chains", "--scenario", scen(fixtures_dir, "toy5g"), "--target", "NOPE")
    assert code == 1


def test_chains_strict_semantics_flag(capsys, fixtures_dir):
    code, out, _ = run_cli(
        capsys, "chains", "--scenario", scen(fixtures_dir, "strictmode"), "--format", "json"
    )
    accumulated = json.loads(out)["count"]
    code, out, _ = run_cli(
        capsys, "chains", "--scenario", scen(fixtures_dir, "strictmode"), "--semantics", "strict", "--format", "json"
    )
    strict = json.loads(out)["count"]
    assert accumulated == 2 and strict == 1


def test_defend_cut_infeasible_exits_3(capsys, fixtures_dir):
    code, _, err = run_cli(capsys, "defend", "--mode", "cut", "--scenario", scen(fixtures_dir, "infeasible"))
    assert code == 3
    assert "cut" in err


def test_defend_modes(capsys, fixtures_dir):
    code, out, _ = run_cli(
        capsys, "defend", "--mode", "cut", "--scenario", scen(fixtures_dir, "toy5g"), "--format", "json"
    )
    assert code == 0
    assert json.loads(out)["chosen"] == ["D1"]
    code, out, _ = run_cli(
        capsys, "defend", "--mode", "coverage", "--scenario", scen(fixtures_dir, "toy5g"), "--format", "json"
    )
    assert json.loads(out)["chosen"] == ["D1", "D3"]
    code, out, _ = run_cli(
        capsys,
        "defend", "--mode", "coverage", "--chain", "A1#0,A2#1,A5#0",
        "--scenario", scen(fixtures_dir, "toy5g"), "--format", "json",
    )
    assert json.loads(out)["chosen"] == ["D1", "D4"]
    code, out, _ = run_cli(
        capsys,
        "defend", "--mode", "budget", "--budget", "3.0",
        "--scenario", scen(fixtures_dir, "toy5g"), "--format", "json",
    )
    assert json.loads(out)["chosen"] == ["D4"]
    code, _, _ = run_cli(capsys, "defend", "--mode", "budget", "--scenario", scen(fixtures_dir, "toy5g"))
    assert code == 1  # --budget required


def test_risk_output(capsys, fixtures_dir):
    code, out, _ = run_cli(capsys, "risk", "--scenario", scen(fixtures_dir, "toy5g"), "--format", "json")
    assert code == 0
    rows = json.loads(out)["rows"]
    assert rows[0] == {"object": "APP1", "chain_count": 4, "max_chain_threat": 11.0, "min_chain_cost": 6.5}
    assert rows[-1]["min_chain_cost"] is None


def test_potential_output(capsys, fixtures_dir):
    code, out, _ = run_cli(
        capsys,
        "potential", "--scenario", scen(fixtures_dir, "potential_gap"),
        "--from", "PB", "--to", "PV", "--format", "json",
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["count"] == 1
    assert payload["potential_chains"][0]["missing_hops"] == [
        {"from": "PH", "to": "PV", "suggested_attacks": ["G9"]}
    ]


def test_graph_json_and_dot(capsys, fixtures_dir):
    code, out, _ = run_cli(capsys, "graph", "--scenario", scen(fixtures_dir, "toy5g"), "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert payload["attack_edge_count"] == 7
    code, dot1, _ = run_cli(capsys, "graph", "--scenario", scen(fixtures_dir, "toy5g"), "--dot")
    code, dot2, _ = run_cli(capsys, "graph", "--scenario", scen(fixtures_dir, "toy5g"), "--dot")
    assert dot1 == dot2
    assert dot1.startswith("digraph scenario {")


def test_simulate_runs(capsys, fixtures_dir):
    code, out, _ = run_cli(
        capsys,
        "simulate", "--scenario", scen(fixtures_dir, "minichain"),
        "--runs", "3", "--seed", "5", "--format", "json",
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["summary"]["runs"] == 3
    assert len(payload["traces"]) == 3
    assert payload["summary"]["outcomes"] == {"target_compromised": 3}


def test_config_file_overrides(capsys, fixtures_dir, tmp_path):
    cfg = tmp_path / "engine.json"
    cfg.write_text('{"semantics": "strict"}')
    code, out, _ = run_cli(
        capsys,
        "chains", "--scenario", scen(fixtures_dir, "strictmode"),
        "--config", str(cfg), "--format", "json",
    )
    assert code == 0
    assert json.loads(out)["count"] == 1
    bad = tmp_path / "bad.json"
    bad.write_text('{"semantics": "psychic"}')
    code, _, _ = run_cli(capsys, "chains", "--scenario", scen(fixtures_dir, "strictmode"), "--config", str(bad))
    assert code == 1
    typo = tmp_path / "typo.json"
    typo.write_text('{"max_length": 4}')
    code, _, _ = run_cli(capsys, "chains", "--scenario", scen(fixtures_dir, "strictmode"), "--config", str(typo))
    assert code == 1


def test_text_tables_render(capsys, fixtures_dir):
    toy = scen(fixtures_dir, "toy5g")
    code, out, _ = run_cli(capsys, "chains", "--scenario", toy)
    assert code == 0 and "A1#0->A2#1->A4#0" in out and "6.5" in out
    code, out, _ = run_cli(capsys, "risk", "--scenario", toy)
    assert "APP1" in out and out.splitlines()[0].startswith("object")
    code, out, _ = run_cli(capsys, "defend", "--mode", "cut", "--scenario", toy)
    assert "chosen: D1" in out and "total cost: 5" in out
    code, out, _ = run_cli(capsys, "graph", "--scenario", toy)
    assert "attack edges: 7" in out
    code, out, _ = run_cli(capsys, "simulate", "--scenario", toy, "--runs", "2")
    assert "outcomes:" in out and "mean turns:" in out
    code, out, _ = run_cli(
        capsys, "potential", "--scenario", scen(fixtures_dir, "potential_gap"), "--from", "PB", "--to", "PV"
    )
    assert "PB->PH->PV" in out and "G9" in out
    code, out, _ = run_cli(capsys, "chains", "--scenario", toy, "--target", "SL1")
    assert out.strip() == "no chains"


def test_console_script_entry_point():
    import subprocess
    import sys

    proc = subprocess.run(
        [sys.executable, "-m", "stratagraph.cli", "--version"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert "stratagraph" in proc.stdout
