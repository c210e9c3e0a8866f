"""Command-line surface: verbs, exit codes, JSON output."""

import json

import pytest

from conerisk.cli import main
from conerisk.corpus import build_avar4


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_check_text_and_expectations(capsys):
    code, out, _ = run(capsys, "check", "--corpus", "avar4")
    assert code == 0
    assert "time_consistent: True" in out
    code, _, err = run(capsys, "check", "--corpus", "avar4",
                       "--numeraire", "unit", "--expect", "true,true,true")
    assert code == 1 and "mismatch" in err
    code, _, _ = run(capsys, "check", "--corpus", "avar4",
                     "--numeraire", "unit", "--expect", "false,false,false")
    assert code == 0


def test_check_json_payload(capsys):
    code, out, _ = run(capsys, "check", "--corpus", "avar4", "--json")
    assert code == 0
    payload = json.loads(out)
    assert payload["time_consistent"] and payload["agreement"]


def test_eval_golden(capsys):
    code, out, _ = run(capsys, "eval", "--corpus", "avar4", "--t", "0",
                       "--claim", "[1,-1,-1,-1]")
    assert code == 0
    assert "rho_0 = (0, 0, 0, 0)" in out
    assert "epsilon_0 = (0, 0, 0, 0)" in out
    code, out, _ = run(capsys, "eval", "--corpus", "avar4", "--t", "0",
                       "--numeraire", "unit", "--claim", "[1,-1,-1,-1]")
    assert code == 0 and "epsilon_0 = (1, 1, 1, 1)" in out


def test_eval_rational_claim_entries(capsys):
    code, out, _ = run(capsys, "eval", "--corpus", "avar4", "--t", "1",
                       "--claim", '["1/2","-1/2","-1/2","-1/2"]', "--json")
    assert code == 0
    payload = json.loads(out)
    assert "rho" in payload and "epsilon" in payload


def test_decompose_and_refusal(capsys):
    code, out, _ = run(capsys, "decompose", "--corpus", "avar4",
                       "--claim", "[1,-1,-1,-1]")
    assert code == 0 and "validated: True" in out
    code, _, err = run(capsys, "decompose", "--corpus", "avar4",
                       "--numeraire", "unit", "--claim", "[1,-1,-1,-1]")
    assert code == 1 and "refused" in err


def test_paste_verb(capsys):
    code, out, _ = run(capsys, "paste", "--corpus", "avar4",
                       "--q", '["1/2","1/2",0,0]',
                       "--qprime", '[0,"1/2",0,"1/2"]', "--tau", "1")
    assert code == 0 and "pasted = (0, 1, 0, 0)" in out
    # donor missing mass on a charged stopped block
    code, _, err = run(capsys, "paste", "--corpus", "avar4",
                       "--q", '["1/2","1/2",0,0]',
                       "--qprime", '[0,0,"1/2","1/2"]', "--tau", "1")
    assert code == 2 and "error" in err


def test_duals_verb(capsys):
    code, out, _ = run(capsys, "duals", "--corpus", "avar4", "--t", "0",
                       "--json")
    assert code == 0
    payload = json.loads(out)
    assert payload["crucial_claim"] is True
    assert payload["dual_generators"] and payload["k_cone_generators"]


def test_witness_verb(capsys):
    code, out, _ = run(capsys, "witness", "--corpus", "haezendonck4",
                       "--numeraire", "unit", "--json")
    assert code == 0
    payload = json.loads(out)
    assert payload["witness"] is not None
    assert payload["witness"]["pasted"] == ["1", "0", "0", "0"]
    code, out, _ = run(capsys, "witness", "--corpus", "haezendonck4")
    assert code == 0 and "no pasting witness" in out


def test_corpus_list_and_emit_round_trip(tmp_path, capsys):
    code, out, _ = run(capsys, "corpus", "list")
    assert code == 0 and out.split() == ["avar4", "haezendonck4", "txcost"]
    code, out, _ = run(capsys, "corpus", "emit", "avar4")
    assert code == 0
    f = tmp_path / "scenario.json"
    f.write_text(out)
    code, out2, _ = run(capsys, "check", "--scenario", str(f))
    assert code == 0 and "agreement:       True" in out2


def test_input_errors_exit_2(capsys):
    code, _, err = run(capsys, "check", "--corpus", "nope")
    assert code == 2 and "unknown corpus" in err
    code, _, err = run(capsys, "eval", "--corpus", "avar4", "--t", "0",
                       "--claim", "[1,2]")
    assert code == 2
    code, _, err = run(capsys, "check")
    assert code == 2 and "exactly one" in err


def test_malformed_scenario_file_exits_2(tmp_path, capsys):
    f = tmp_path / "bad.json"
    f.write_text("{not json")
    code, _, err = run(capsys, "check", "--scenario", str(f))
    assert code == 2 and "cannot load scenario" in err


GOLDEN = {
    ("avar4", "paper"): "avar4-paper.json",
    ("avar4", "unit"): "avar4-unit.json",
    ("haezendonck4", "paper"): "haezendonck4-paper.json",
    ("haezendonck4", "unit"): "haezendonck4-unit.json",
    ("txcost", "paper"): "txcost-n4.json",
}


def test_corpus_emit_matches_golden_files(capsys):
    import pathlib
    golden_dir = pathlib.Path(__file__).parent / "golden"
    for (name, variant), fname in GOLDEN.items():
        code, out, _ = run(capsys, "corpus", "emit", name,
                           "--numeraire", variant)
        assert code == 0
        want = (golden_dir / fname).read_text()
        assert out == want, f"{fname} drifted from the emitted scenario"
