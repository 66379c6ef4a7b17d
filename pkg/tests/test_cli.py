import json

import pandas as pd
import pytest
from conftest import ASSETS, get_g1, get_g1_witness

from mtdlib.cli import main, parse_seeds
from mtdlib.mutation import initial_deployment
from mtdlib.utils.json_format import deployment_to_dict, scenario_to_dict


def asset(name):
    return str(ASSETS / name)


def dump(data, path):
    path.write_text(json.dumps(data))
    return str(path)


def test_parse_seeds():

    assert parse_seeds("1..5") == [1, 2, 3, 4, 5]
    assert parse_seeds("3,1,2") == [3, 1, 2]
    assert parse_seeds("7") == [7]

    with pytest.raises(ValueError):
        parse_seeds("5..1")

    with pytest.raises(ValueError):
        parse_seeds("")


def test_generate(capsys):

    assert main(["generate", "--aps", "4", "--users", "6", "--grid", "10x10", "--seed", "3"]) == 0

    doc = json.loads(capsys.readouterr().out)
    assert len(doc["aps"]) == 4
    assert len(doc["users"]) == 6

    assert main(["generate", "--aps", "4", "--users", "6", "--grid", "10x10", "--seed", "3"]) == 0
    assert json.loads(capsys.readouterr().out) == doc

    assert main(["generate", "--aps", "4"]) == 1
    assert "required" in capsys.readouterr().err


def test_rnm_validate_replay(tmp_path, capsys):

    out = tmp_path / "schedule.json"
    scenario = asset("s0.json")

    assert main(["rnm", "--scenario", scenario, "--horizon", "2", "--seed", "7", "--out", str(out)]) == 0

    schedule = json.loads(out.read_text())
    assert schedule["horizon"] == 2
    assert schedule["energy"] == {"ap1": 3.0, "ap2": 3.0}

    manifest_path = tmp_path / "schedule.json.manifest.json"
    manifest = json.loads(manifest_path.read_text())
    assert manifest["command"] == "rnm"
    assert manifest["seeds"] == 7
    assert manifest["outputs"] == [str(out)]

    assert main(["validate", "--scenario", scenario, "--schedule", str(out)]) == 0
    assert json.loads(capsys.readouterr().out) == []

    first = out.read_text()
    out.unlink()

    assert main(["replay", str(manifest_path)]) == 0
    assert out.read_text() == first


def test_rnm_timeline(capsys):

    assert main(["rnm", "--scenario", asset("s0.json"), "--seed", "1", "--interval-seconds", "30"]) == 0

    doc = json.loads(capsys.readouterr().out)
    assert {s["ap"] for s in doc["timeline"]} == {"ap1", "ap2"}
    assert max(s["end"] for s in doc["timeline"]) == 60.0


def test_rnm_infeasible(capsys):

    assert main(["rnm", "--scenario", asset("s0_no_energy.json"), "--seed", "0"]) == 2

    captured = capsys.readouterr()
    assert captured.out == ""
    assert "unsatisfiable: energy" in captured.err


def test_validate_violations(tmp_path, capsys):

    out = tmp_path / "violations.json"

    code = main(
        ["validate", "--scenario", asset("s0.json"), "--schedule", asset("s0_repeated.json"), "--out", str(out)]
    )

    assert code == 3
    assert [v["name"] for v in json.loads(out.read_text())] == ["unpredictability"]
    assert not (tmp_path / "violations.json.manifest.json").exists()


def test_rtm(tmp_path, capsys):

    scenario = get_g1()
    path = dump(scenario_to_dict(scenario), tmp_path / "g1.json")
    current = dump(deployment_to_dict(scenario, initial_deployment(scenario)), tmp_path / "current.json")
    target = dump(deployment_to_dict(scenario, get_g1_witness()), tmp_path / "target.json")

    deployment = tmp_path / "deployment.json"
    assert main(["rtm", "deploy", "--scenario", path, "--delta", "2", "--seed", "0", "--out", str(deployment)]) == 0
    assert main(["validate", "--scenario", path, "--deployment", str(deployment), "--delta", "2"]) == 0
    assert json.loads(capsys.readouterr().out) == []

    plan = tmp_path / "plan.json"
    args = ["--scenario", path, "--from", current, "--to", target]
    assert main(["rtm", "move", *args, "--max-steps", "2", "--seed", "0", "--out", str(plan)]) == 0
    assert json.loads(plan.read_text())["moves"] == {"ap1": 1, "ap2": 0, "ap3": 1}
    assert main(["validate", "--plan", str(plan), *args]) == 0

    assert main(["rtm", "move", *args, "--max-steps", "1", "--seed", "0"]) == 2
    assert "step-budget" in capsys.readouterr().err


def test_simulate(tmp_path, capsys):

    trace = tmp_path / "trace.csv"
    per_seed = tmp_path / "seeds.csv"

    common = ["simulate", "--scenario", asset("s0_geometric.json"), "--adversary", asset("eavesdropper.json")]
    code = main(
        [*common, "--plan", asset("s0_witness.json"), "--intervals", "10", "--csv", str(trace), "--seed-csv", str(per_seed)]
    )

    assert code == 0

    doc = json.loads(capsys.readouterr().out)
    assert doc["report"]["compromised_flow_fraction"] == 0.5
    assert doc["report"]["handoff_count"] == 18
    assert doc["comparison"]["reduction"] == 0.0
    assert doc["seeds_improved"] == 0

    frame = pd.read_csv(trace)
    assert len(frame) == 10
    assert set(frame["target_ap"]) == {"ap1"}

    frame = pd.read_csv(per_seed)
    assert frame["configuration"].tolist() == ["static", "mutated"]

    assert main([*common, "--static", "--intervals", "10", "--seeds", "0..2"]) == 0

    doc = json.loads(capsys.readouterr().out)
    assert doc["static"]["seeds"] == [0, 1, 2]
    assert doc["static"]["summary"]["compromised_flow_fraction"]["mean"] == 0.5
    assert "report" not in doc


def test_simulate_planned_per_seed(capsys):

    code = main(
        [
            "simulate",
            "--scenario",
            asset("s0_geometric.json"),
            "--reference-adversary",
            "--rnm-horizon",
            "2",
            "--intervals",
            "6",
            "--seeds",
            "1,2",
        ]
    )

    assert code == 0

    doc = json.loads(capsys.readouterr().out)
    assert doc["mutated"]["seeds"] == [1, 2]


def test_input_errors(tmp_path, capsys):

    assert main(["rnm", "--scenario", asset("bad_ranges.json"), "--seed", "0"]) == 1
    assert "mtdlib: " in capsys.readouterr().err

    assert main(["rnm", "--scenario", str(tmp_path / "missing.json"), "--seed", "0"]) == 1
    assert main(["rnm", "--scenario", asset("unknown_key.json"), "--seed", "0"]) == 1

    # argument errors
    assert main(["rnm", "--scenario", asset("s0.json")]) == 1
    assert main(["simulate", "--scenario", asset("s0.json"), "--static", "--reference-adversary"]) == 1
    assert main([]) == 1

    common = ["simulate", "--scenario", asset("s0_geometric.json"), "--static", "--reference-adversary"]
    assert main([*common, "--intervals", "0"]) == 1
    assert main([*common, "--intervals", "4", "--handoff-cost", "2"]) == 1

    assert main(["replay", asset("s0.json")]) == 1


def test_malformed_positions(tmp_path, capsys):

    scenario = get_g1()
    path = dump(scenario_to_dict(scenario), tmp_path / "g1.json")
    current = dump(deployment_to_dict(scenario, initial_deployment(scenario)), tmp_path / "current.json")

    broken = deployment_to_dict(scenario, get_g1_witness())
    broken["positions"]["ap1"] = [None, 1]
    deployment = dump(broken, tmp_path / "broken.json")

    assert main(["validate", "--scenario", path, "--deployment", deployment, "--delta", "2"]) == 1
    assert "mtdlib: positions.ap1[0]: expected a number" in capsys.readouterr().err

    positions = [{"ap1": [1, 2], "ap2": [2, 2], "ap3": [3, 2]}, {"ap1": [1, "1"], "ap2": [2, 2], "ap3": [3, 3]}]
    plan = dump({"steps": 2, "positions": positions}, tmp_path / "plan.json")
    target = dump(deployment_to_dict(scenario, get_g1_witness()), tmp_path / "target.json")

    assert main(["validate", "--scenario", path, "--plan", plan, "--from", current, "--to", target]) == 1
    assert "mtdlib: positions[1].ap1[1]: expected a number" in capsys.readouterr().err


def test_version(capsys):

    assert main(["--version"]) == 0
    assert capsys.readouterr().out.startswith("mtdlib ")


if __name__ == "__main__":
    test_parse_seeds()
