import io
import json
import shlex

import pytest
import yaml

from ecalc import scenario_path
from ecalc.cli import (
    EXIT_FAIL, EXIT_OK, EXIT_TRUNCATED, EXIT_USAGE, build_parser, cmd_props, run,
)
from ecalc.epistemics import random_model, receive_model
from ecalc.frontend import save_model

from test_props import forgetful_update

SINGLETON = {"kind": "kripke", "agents": ["A", "B"], "atoms": ["p", "q"], "states": ["s"], "point": "s",
             "rel": {"A": [["s", "s"]], "B": [["s", "s"]]}, "val": {"p": ["s"]}}


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for var in ("ECALC_SEED", "ECALC_COUNT", "ECALC_MAX_DEPTH", "ECALC_MAX_NODES", "ECALC_MAX_KRIPKE",
                "ECALC_MODE", "ECALC_OUT", "ECALC_FORMAT", "ECALC_NO_QUOTIENT"):
        monkeypatch.delenv(var, raising=False)


def call(*argv, stdin=""):
    out = io.StringIO()
    code = run([str(a) for a in argv], stdin=io.StringIO(stdin), stdout=out)
    return code, out.getvalue()


def write_json(path, data):
    path.write_text(json.dumps(data))
    return path


def write_scenario(path, **data):
    path.write_text(yaml.safe_dump(data))
    return path


def replay(command: str):
    argv = shlex.split(command)
    assert argv[0] == "ecalc"
    return call(*argv[1:])


# -- check -------------------------------------------------------------------------------------

def test_check_true(tmp_path):
    code, out = call("check", write_json(tmp_path / "m.json", SINGLETON), "K[A] p")
    assert code == EXIT_OK
    assert "true" in out.splitlines()[1]


def test_check_false(tmp_path):
    code, out = call("check", write_json(tmp_path / "m.json", SINGLETON), "p & ~p")
    assert code == EXIT_FAIL and "false" in out


@pytest.mark.parametrize("seed", range(5))
def test_receiving_makes_the_fact_known(tmp_path, seed):
    path = tmp_path / "m.json"
    save_model(random_model(3, ["A", "B"], ["q"], seed), path)
    code, out = call("check", path, "[recv q B] K[B] q")
    assert code == EXIT_OK


def test_check_table(tmp_path):
    m = dict(SINGLETON, states=["s", "t"], val={"p": ["s"]}, rel={"A": [], "B": []})
    code, out = call("check", write_json(tmp_path / "m.json", m), "p", "--table")
    assert "* 's': true" in out and "'t': false" in out


@pytest.mark.parametrize("formula", ["K[Z] p", "r", "K[A"])
def test_check_rejects_bad_formulas(tmp_path, formula):
    code, _ = call("check", write_json(tmp_path / "m.json", SINGLETON), formula)
    assert code == EXIT_USAGE


def test_check_rejects_missing_and_wrong_files(tmp_path):
    assert call("check", tmp_path / "none.json", "p")[0] == EXIT_USAGE
    save_model(receive_model("p", "A", ["A", "B"]), tmp_path / "am.json")
    assert call("check", tmp_path / "am.json", "p")[0] == EXIT_USAGE
    assert call("check")[0] == EXIT_USAGE


# -- bisim ---------------------------------------------------------------------------------------

def test_bisim_of_identical_models(tmp_path):
    path = write_json(tmp_path / "m.json", SINGLETON)
    code, out = call("bisim", path, path)
    assert code == EXIT_OK and "true" in out


def test_bisim_reports_distinguishing_blocks(tmp_path):
    a = write_json(tmp_path / "a.json", SINGLETON)
    b = write_json(tmp_path / "b.json", dict(SINGLETON, val={"p": []}))
    code, out = call("bisim", a, b)
    assert code == EXIT_FAIL
    assert "false" in out and "block ['s'] of model 1" in out


def test_bisim_needs_same_universes(tmp_path):
    a = write_json(tmp_path / "a.json", SINGLETON)
    b = write_json(tmp_path / "b.json", dict(SINGLETON, atoms=["p"], val={"p": ["s"]}))
    assert call("bisim", a, b)[0] == EXIT_USAGE


# -- step ------------------------------------------------------------------------------------------

def idle_scenario(tmp_path):
    return write_scenario(tmp_path / "idle.yaml", agents=["A"], atoms=["p"],
                          model={"worlds": "all-valuations"}, system="[0]@A")


def test_step_on_inactive_system(tmp_path):
    code, out = call("step", idle_scenario(tmp_path))
    assert code == EXIT_OK and "no transitions" in out


def test_step_lists_the_interaction():
    code, out = call("step", scenario_path("e_chain"))
    assert "[0] Interact(b,p,A,B)" in out
    code, out = call("step", scenario_path("e_chain"), "--path", "0")
    assert "[0] Interact(c,p,A,C)" in out
    code, out = call("step", scenario_path("e_chain"), "--path", "0,0")
    assert "no transitions" in out


def test_step_path_errors():
    assert call("step", scenario_path("e_chain"), "--path", "3")[0] == EXIT_USAGE
    assert call("step", scenario_path("e_chain"), "--path", "x")[0] == EXIT_USAGE


def test_step_all_labels(tmp_path):
    path = write_scenario(tmp_path / "s.yaml", agents=["A"], atoms=["p"], fact_vars=["x"],
                          model={"worlds": "all-valuations"}, system="[a?(x)]@A")
    assert "no transitions" in call("step", path)[1]
    assert "AgentInFact(a,p,A)" in call("step", path, "--mode", "open")[1]
    assert "AgentInFact(a,p,A)" in call("step", path, "--all-labels")[1]


def test_interactive_step_reprompts():
    code, out = call("step", scenario_path("e_chain"), "-i", stdin="7\nfoo\n0\n0\n")
    assert code == EXIT_OK
    assert "index 7 out of range (0..0)" in out
    assert "not an index: 'foo'" in out
    assert "path: Interact(b,p,A,B) . Interact(c,p,A,C)" in out
    # the out-of-range choice left the configuration alone
    assert out.count("[0] Interact(b,p,A,B)") == 3


def test_interactive_step_quits_on_q():
    code, out = call("step", scenario_path("e_chain"), "-i", stdin="q\n")
    assert "path: (empty)" in out


# -- explore / scenario -------------------------------------------------------------------------------

def test_fifo_single_fact_terminals(tmp_path):
    out_file = tmp_path / "lts.json"
    code, out = call("--cex-dir", tmp_path / "cx", "explore", scenario_path("fifo_revised_n1"),
                     "--out", out_file)
    assert code == EXIT_OK, out
    assert "PASS  all-terminal: K[A] q1 & K[B] q1" in out
    data = json.loads(out_file.read_text())
    assert data["terminals"] and not data["truncated"]


def test_scenario_with_traces():
    code, out = call("scenario", scenario_path("e_chain"))
    assert code == EXIT_OK
    assert "PASS  trace a-to-b-to-c" in out and "PASS  trace a-to-c-first" in out


def test_truncation_exit_code_and_precedence(tmp_path, monkeypatch):
    monkeypatch.setenv("ECALC_MAX_DEPTH", "1")
    # the terminal assertions see no terminals, and a failure outranks truncation
    code, out = call("explore", scenario_path("e_chain"))
    assert code == EXIT_FAIL and "TRUNCATED (max_depth)" in out
    spec = yaml.safe_load(scenario_path("e_chain").read_text())
    plain = {k: v for k, v in spec.items() if k not in ("assertions", "traces", "trace_relations")}
    path = write_scenario(tmp_path / "plain.yaml", **plain)
    code, out = call("explore", path)
    assert code == EXIT_TRUNCATED and "TRUNCATED (max_depth)" in out
    # a flag beats the environment
    assert call("explore", scenario_path("e_chain"), "--max-depth", "5")[0] == EXIT_OK
    monkeypatch.setenv("ECALC_MAX_DEPTH", "zero")
    assert call("explore", scenario_path("e_chain"))[0] == EXIT_USAGE


def test_environment_output_options(tmp_path, monkeypatch):
    target = tmp_path / "g.dot"
    monkeypatch.setenv("ECALC_OUT", str(target))
    monkeypatch.setenv("ECALC_FORMAT", "dot-graph")
    assert call("explore", scenario_path("e_chain"))[0] == EXIT_OK
    assert target.read_text().startswith("digraph lts {")
    monkeypatch.setenv("ECALC_FORMAT", "gif")
    assert call("explore", scenario_path("e_chain"))[0] == EXIT_USAGE


def test_mode_and_quotient_options(tmp_path, monkeypatch):
    monkeypatch.setenv("ECALC_NO_QUOTIENT", "1")
    assert call("explore", scenario_path("e_chain"))[0] == EXIT_OK
    monkeypatch.setenv("ECALC_MODE", "diagonal")
    assert call("explore", scenario_path("e_chain"))[0] == EXIT_USAGE


def test_failed_assertion_writes_replayable_counterexample(tmp_path):
    spec = scenario_path("e_chain").read_text().replace(
        "K[B] p & K[C] p & K[B] K[A] p & K[C] K[A] p", "K[B] p & ~K[C] p")
    path = tmp_path / "broken.yaml"
    path.write_text(spec)
    cx = tmp_path / "cx"
    code, out = call("--cex-dir", cx, "scenario", path)
    assert code == EXIT_FAIL
    summary = json.loads(next(cx.glob("*.summary.json")).read_text())
    assert summary["path"] == ["Interact(b,p,A,B)", "Interact(c,p,A,C)"]
    code, out = replay(summary["replay"][0])
    assert code == EXIT_FAIL and "false" in out


def test_invalid_scenario_is_a_usage_error(tmp_path):
    path = write_scenario(tmp_path / "bad.yaml", agents=["A"], atoms=["p"],
                          model={"worlds": "all-valuations"}, system="[0]@B")
    assert call("scenario", path)[0] == EXIT_USAGE
    assert call("scenario", tmp_path / "missing.yaml")[0] == EXIT_USAGE


# -- props -----------------------------------------------------------------------------------------------

def _strip_times(text):
    return [line.split(", ")[0:2] if "checked" in line else line for line in text.splitlines()
            if not line.startswith("time:")]


def test_props_single_seed_is_deterministic():
    a = call("props", "--seed", "4", "--count", "1")
    b = call("props", "--seed", "4", "--count", "1")
    assert a[0] == b[0] == EXIT_OK
    assert _strip_times(a[1]) == _strip_times(b[1])
    assert "seed: 4" in a[1]


def test_props_environment_and_suite_selection(monkeypatch):
    monkeypatch.setenv("ECALC_COUNT", "7")
    code, out = call("props", "--suite", "succ-receive")
    assert code == EXIT_OK
    assert "--count 7" in out and "PASS  succ-receive: 7 checked" in out
    assert call("props", "--suite", "nonsense")[0] == EXIT_USAGE
    assert call("props", "--count", "0")[0] == EXIT_USAGE
    assert call("props", "--max-agents", "9")[0] == EXIT_USAGE


def test_broken_update_produces_replayable_counterexample(tmp_path):
    args = build_parser().parse_args(["--cex-dir", str(tmp_path), "props", "--count", "50",
                                      "--suite", "fact-preservation"])
    report = cmd_props(args, update=forgetful_update)
    assert report.exit_code == EXIT_FAIL
    outcome = report.outcomes[0]
    assert not outcome.passed and "failing seeds" in outcome.detail
    summary = outcome.counterexample
    assert summary["suite"] == "fact-preservation"
    assert set(summary["files"]) == {"model", "action", "updated"}
    code, out = replay(summary["replay"][0])
    assert code == EXIT_FAIL and "false" in out
    # the same formula holds before the broken update
    code, _ = call("check", summary["files"]["model"], summary["formula"])
    assert code == EXIT_OK
