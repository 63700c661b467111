import json
import subprocess
import sys

import pytest

from adaptseq.cli import main
from adaptseq.engine import CONFIG_ENV

from helpers import GOLDEN


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_validate_ok(capsys):
    code, out, _ = run(capsys, "validate", str(GOLDEN / "chain_model.json"), str(GOLDEN / "chain_lexicon.json"))
    assert code == 0 and out == ""


def test_validate_cycle(capsys):
    code, out, _ = run(capsys, "validate", str(GOLDEN / "cyclic_model.json"), str(GOLDEN / "chain_lexicon.json"))
    assert code == 1
    assert "CycleDetected" in out and "a, b, c" in out


def test_validate_dangling(capsys):
    code, out, _ = run(capsys, "validate", str(GOLDEN / "dangling_model.json"), str(GOLDEN / "chain_lexicon.json"))
    assert code == 1 and "UnknownPrerequisite" in out and "ghost" in out


def test_validate_unknown_lexicon_feature(capsys):
    code, out, _ = run(capsys, "validate", str(GOLDEN / "chain_model.json"), str(GOLDEN / "bad_lexicon.json"))
    assert code == 1 and "zeta" in out


def test_validate_unreadable(capsys, tmp_path):
    code, _, err = run(capsys, "validate", str(tmp_path / "missing.json"), str(GOLDEN / "chain_lexicon.json"))
    assert code == 2 and "cannot read" in err


def test_plan_submit_inspect_loop(capsys, chain_config):
    cfg = ["--config", str(chain_config)]
    assert run(capsys, "init", "amy", "2", *cfg)[0] == 0
    code, out, _ = run(capsys, "plan", "amy", "--seed", "5", *cfg)
    plan = json.loads(out)
    assert code == 0 and plan["feature_id"] == "b" and plan["game_type"] == "accuracy"

    b_plays = 0
    for k in range(1, 7):
        if b_plays == 3:
            break
        code, out, _ = run(capsys, "plan", "amy", "--seed", str(k), *cfg)
        plan = json.loads(out)
        result = {
            "session_index": plan["session_index"],
            "feature_id": plan["feature_id"],
            "game_type": plan["game_type"],
            "item_outcomes": [True] * len(plan["items"]),
            "score": 1.0,
            "seed": plan["seed"],
        }
        path = chain_config.parent / f"r{k}.json"
        path.write_text(json.dumps(result))
        code, out, _ = run(capsys, "submit", "amy", str(path), *cfg)
        assert code == 0, out
        assert json.loads(out)["session_index"] == k
        b_plays += plan["feature_id"] == "b"
    assert b_plays == 3

    code, out, _ = run(capsys, "inspect", "amy", *cfg)
    assert code == 0
    b_line = next(line for line in out.splitlines() if line.strip().startswith("b "))
    assert "10.0000/10" in b_line and "mastered" in b_line


def test_error_exit_codes(capsys, chain_config):
    cfg = ["--config", str(chain_config)]
    assert run(capsys, "plan", "ghost", *cfg)[0] == 3
    assert run(capsys, "init", "zed", "5", *cfg)[0] == 0
    # year 5: everything assumed mastered, nothing stale yet
    assert run(capsys, "plan", "zed", *cfg)[0] == 4
    assert run(capsys, "init", "zed", "5", *cfg)[0] == 9

    assert run(capsys, "init", "bo", "2", *cfg)[0] == 0
    stale = chain_config.parent / "stale.json"
    stale.write_text(json.dumps({"session_index": 4, "feature_id": "b", "game_type": "accuracy",
                                 "item_outcomes": [True], "seed": 1}))
    assert run(capsys, "submit", "bo", str(stale), *cfg)[0] == 8
    wrong = chain_config.parent / "wrong.json"
    wrong.write_text(json.dumps({"session_index": 1, "feature_id": "a", "game_type": "accuracy",
                                 "item_outcomes": [True], "seed": 1}))
    assert run(capsys, "submit", "bo", str(wrong), *cfg)[0] == 6


def test_no_content_exit_code(capsys, tmp_path, chain_config):
    lex = json.loads((GOLDEN / "chain_lexicon.json").read_text())
    (chain_config.parent / "chain_lexicon.json").write_text(json.dumps([i for i in lex if "b" not in i["features"]]))
    cfg = ["--config", str(chain_config)]
    assert run(capsys, "init", "cy", "2", *cfg)[0] == 0
    code, _, err = run(capsys, "plan", "cy", *cfg)
    assert code == 5 and "'b'" in err


def test_config_from_env(capsys, chain_config, monkeypatch):
    monkeypatch.setenv(CONFIG_ENV, str(chain_config))
    assert run(capsys, "init", "env", "1")[0] == 0
    code, out, _ = run(capsys, "inspect", "env", "--json")
    assert code == 0 and json.loads(out)["states"]["a"]["mastery_display"] == "5.0000/10"


def test_missing_config(capsys, monkeypatch):
    monkeypatch.delenv(CONFIG_ENV, raising=False)
    assert run(capsys, "plan", "x")[0] == 2


def test_simulate_writes_reports(capsys, chain_config):
    cohort = chain_config.parent / "cohort.json"
    cohort.write_text(json.dumps({"size": 4, "skill": 1.0, "n_sessions": 20, "year": 1}))
    out_dir = chain_config.parent / "rep"
    code, _, _ = run(capsys, "simulate", str(cohort), "--out", str(out_dir), "--seed", "3", "--config", str(chain_config))
    assert code == 0
    summary = json.loads((out_dir / "summary.json").read_text())
    assert len(summary["students"]) == 4 and summary["starvation_count"] == 0
    assert (out_dir / "trajectories.csv").read_text().startswith("student_id,session,feature_id,mastery\n")


def test_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "adaptseq.cli", "validate", str(GOLDEN / "cyclic_model.json"), str(GOLDEN / "chain_lexicon.json")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 1 and "CycleDetected" in proc.stdout
