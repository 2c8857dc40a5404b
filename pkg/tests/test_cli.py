"""Tests for the hexborel command line and the scenario pipeline."""

import json

import pytest

from app.agents import analysis_agent, orchestrator
from app.agents.ingestion_agent import ScenarioError, build_source, resolve_resolution
from app.main import main
from app.models.schemas import DescentRequest, OracleRequest, Scenario


def _write(tmp_path, payload, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


def _run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def test_analyze_diagonal(tmp_path, capsys):
    path = _write(
        tmp_path,
        {"family": "diagonal", "resolution": {"window": {"kind": "ball", "radius": 50}, "n_max": 3}, "analyses": ["phi4"]},
    )
    code, out = _run(capsys, ["analyze", path])
    assert code == 0
    report = json.loads(out)
    assert report["phi4"]["verdict"] == "true"
    assert set(report["phi4"]["parts"]) == {"phi1", "phi2+", "phi2-", "phi3+", "phi3-"}


def test_analyze_empty_defaults_to_every_formula(tmp_path, capsys):
    path = _write(tmp_path, {"family": "empty", "window": {"kind": "ball", "radius": 20}})
    code, out = _run(capsys, ["analyze", path])
    assert code == 0
    report = json.loads(out)
    assert list(report) == sorted(report)
    assert report["phi1"]["verdict"] == "false"
    assert report["phi1"]["certificate_kind"] == "no_anchor"
    assert report["phi4"]["verdict"] == "false"


def test_reports_are_deterministic(tmp_path, capsys):
    path = _write(tmp_path, {"blacks": [[0, 0], [1, 0], [2, -1]], "window": {"kind": "ball", "radius": 10}})
    first = _run(capsys, ["analyze", path])
    second = _run(capsys, ["analyze", path])
    assert first == second


def test_reduce_constant_true(tmp_path, capsys):
    path = _write(
        tmp_path,
        {
            "reduction": {"family": {"kind": "const", "value": True}},
            "analyses": [{"descent_stats": {"path": 0, "steps": 16}}, {"plan": {"paths": 4, "steps": 6}}],
        },
    )
    code, out = _run(capsys, ["reduce", path])
    assert code == 0
    report = json.loads(out)
    assert report["descent_stats(path=0,steps=16)"]["counts"] == [0] * 17
    assert report["plan(paths=4,steps=6)"]["violations"] == []


def test_reduce_bit_bound(tmp_path, capsys):
    path = _write(
        tmp_path,
        {
            "reduction": {"family": {"kind": "bit_test"}, "bits": {"prefix": "0110", "period": "10"}},
            "window": {"kind": "ball", "radius": 12},
            "analyses": ["bit_bound"],
        },
    )
    code, out = _run(capsys, ["reduce", path])
    assert code == 0
    bound = json.loads(out)["bit_bound"]
    assert bound["consumed"] <= bound["bound"]
    assert bound["blacks"] > 0


def test_oracle_defaults_to_every_n(tmp_path, capsys):
    path = _write(tmp_path, {"family": "diagonal", "window": {"kind": "ball", "radius": 20}})
    code, out = _run(capsys, ["oracle", path])
    assert code == 0
    report = json.loads(out)
    assert sorted(report) == sorted(f"oracle({n})" for n in range(-3, 4))
    assert all(entry["crossing"] for entry in report.values())


def test_trace_defaults_to_cycles(tmp_path, capsys):
    path = _write(tmp_path, {"blacks": [[0, 0]], "window": {"kind": "ball", "radius": 3}})
    code, out = _run(capsys, ["trace", path])
    assert code == 0
    (cycle,) = json.loads(out)["cycles"]
    assert cycle["period"] == 6
    assert cycle["orientation"] == 1


def test_trace_request(tmp_path, capsys):
    path = _write(
        tmp_path,
        {
            "family": "diagonal",
            "analyses": [
                {"trace": {"edge": [[0, 0], [0, -1]], "max_steps": 30, "lines": [{"axis": "V", "index": 2}]}}
            ],
        },
    )
    code, out = _run(capsys, ["trace", path])
    assert code == 0
    entry = json.loads(out)["trace((0,0)->(0,-1),forward)"]
    assert entry["outcome"] == "budget"
    assert len(entry["edges"]) == 31
    assert "V2" in entry["line_visits"]


def test_random_scenario_uses_seed(tmp_path, capsys):
    path = _write(tmp_path, {"random": {"radius": 8, "density": 0.5}, "analyses": ["phi1"]})
    first = _run(capsys, ["--seed", "3", "analyze", path])
    second = _run(capsys, ["--seed", "3", "analyze", path])
    assert first[0] == 0
    assert first == second


def test_render_to_file(tmp_path, capsys):
    path = _write(tmp_path, {"family": "diagonal", "window": {"kind": "ball", "radius": 6}})
    out = tmp_path / "board.svg"
    assert main(["render", path, "-o", str(out)]) == 0
    assert out.read_text(encoding="utf-8").count('class="tile black"') == 13


def test_render_to_stdout(tmp_path, capsys):
    path = _write(tmp_path, {"family": "empty", "window": {"kind": "ball", "radius": 2}})
    code, out = _run(capsys, ["render", path])
    assert code == 0
    assert "<svg" in out


def test_malformed_json_exits_2(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json", encoding="utf-8")
    assert main(["analyze", str(path)]) == 2
    assert "malformed JSON" in capsys.readouterr().err


def test_missing_file_exits_2(tmp_path, capsys):
    assert main(["analyze", str(tmp_path / "nope.json")]) == 2
    assert "not found" in capsys.readouterr().err


@pytest.mark.parametrize(
    "payload",
    [
        {"family": "diagonal", "blacks": [[0, 0]]},
        {"name": "no source"},
        {"family": "spiral"},
        {"blacks": [[0, 0]], "window": {"kind": "ball", "radius": -1}},
    ],
)
def test_invalid_scenario_exits_2(tmp_path, capsys, payload):
    assert main(["analyze", _write(tmp_path, payload)]) == 2
    assert "invalid scenario" in capsys.readouterr().err


@pytest.mark.parametrize(
    "payload,command",
    [
        ({"family": "diagonal", "analyses": ["descent_stats"]}, "reduce"),
        ({"family": "diagonal", "analyses": ["phi9"]}, "analyze"),
        ({"family": "comb", "params": {"amplitudes": [3, 2]}}, "analyze"),
        ({"reduction": {"family": {"kind": "const"}, "geometry": {"gap_scale": 3}}}, "reduce"),
        ({"family": "diagonal", "resolution": {"window": {"kind": "ball", "radius": 2}, "n_max": 3}}, "analyze"),
        ({"blacks": [[0, 0]], "analyses": [{"trace": {"edge": [[0, 1], [0, 0]]}}]}, "trace"),
    ],
    ids=["needs-reduction", "unknown-analysis", "bad-comb", "odd-gap", "small-window", "bad-edge"],
)
def test_unrunnable_scenario_exits_2(tmp_path, capsys, payload, command):
    assert main([command, _write(tmp_path, payload)]) == 2
    assert "error:" in capsys.readouterr().err


def test_plan_paths_default_to_the_window(tmp_path, capsys):
    assert analysis_agent.entry_key(*analysis_agent.parse_entry("plan")) == "plan(paths=window,steps=32)"
    path = _write(
        tmp_path,
        {
            "reduction": {"family": {"kind": "const", "value": True}},
            "window": {"kind": "ball", "radius": 12},
            "analyses": [{"plan": {"steps": 2}}],
        },
    )
    code, out = _run(capsys, ["reduce", path])
    assert code == 0
    plan = json.loads(out)["plan(paths=window,steps=2)"]
    assert plan["paths"] == 7
    assert plan["steps"] == 2


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert capsys.readouterr().out.strip() == "Hex Borel Toolkit 1.0.0"


def test_undecodable_file_exits_2(tmp_path, capsys):
    path = tmp_path / "latin.json"
    path.write_bytes(b"\xff\xfe{")
    assert main(["analyze", str(path)]) == 2
    assert "not UTF-8" in capsys.readouterr().err


def test_directory_exits_2(tmp_path, capsys):
    assert main(["analyze", str(tmp_path)]) == 2
    assert "error:" in capsys.readouterr().err


def test_parse_entry_and_keys():
    assert analysis_agent.parse_entry("oracle(-2)") == ("oracle", OracleRequest(n=-2))
    kind, req = analysis_agent.parse_entry({"descent_stats": {"path": 3}})
    assert (kind, req) == ("descent_stats", DescentRequest(path=3))
    assert analysis_agent.entry_key(kind, req) == "descent_stats(path=3,steps=32)"
    kind, req = analysis_agent.parse_entry({"psi1": {"tile": [2, 0], "n": 1, "sign": "-"}})
    assert analysis_agent.entry_key(kind, req) == "psi1((2,0),n=1,-)"
    with pytest.raises(ScenarioError):
        analysis_agent.parse_entry({"oracle": {"n": 1}, "trace": {}})


def test_pipeline_without_cli():
    scenario = Scenario(family="diagonal", window={"kind": "ball", "radius": 8}, analyses=["oracle(0)"])
    assert resolve_resolution(scenario).window.radius == 8
    assert build_source(scenario).is_black((4, 0))
    assert orchestrator.run(scenario, "oracle") == {
        "oracle(0)": {"n": 0, "crossing": True, "window": {"kind": "ball", "center": [0, 0], "radius": 8}}
    }
    with pytest.raises(ScenarioError):
        orchestrator.run(scenario, "launch")
