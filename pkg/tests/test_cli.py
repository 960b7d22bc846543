from __future__ import annotations

import io
import json
import subprocess
import sys

import pytest

from amalgam_nim import cli, formula, harness
from amalgam_nim.engine import AMALGAMATION, RESTRICTED, canonicalize
from amalgam_nim.play import IllegalMove, apply_text_move, engine_move, play
from amalgam_nim.solver import BoundSpec, GrundySolver, load_table


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_classify_p12(capsys):
    code, out, _ = run(capsys, "classify", "--pos", "3,5,7")
    assert code == 0
    assert out.splitlines()[0] == "P (P_{1,2} via witness (3,5,6) ∈ N_{0,2})"


def test_classify_terminal(capsys):
    code, out, _ = run(capsys, "classify", "--pos", "0,0,0")
    assert code == 0 and out.splitlines()[0] == "P (P_{0,1})"


@pytest.mark.parametrize("pos", ["1,2", "1,2,3,4", "1,x,3", "1,-2,3"])
def test_classify_bad_position(capsys, pos):
    code, out, err = run(capsys, "classify", "--pos", pos)
    assert code == 2 and out == "" and "error" in err


def test_grundy_and_solve(capsys):
    assert run(capsys, "grundy", "--pos", "0,0,5", "--rules", "restricted")[:2] == (0, "5\n")
    assert run(capsys, "solve", "--pos", "1,1", "--rules", "amalgamation")[:2] == (0, "P\n")
    assert run(capsys, "solve", "--pos", "3,5,6", "--rules", "restricted")[:2] == (0, "N\n")


def test_usage_errors(capsys):
    assert run(capsys, "solve", "--pos", "1,1", "--rules", "misere")[0] == 2
    assert run(capsys, "solve", "--pos", "1,1", "--threshold", "0")[0] == 2
    assert run(capsys, "bogus")[0] == 2
    assert run(capsys, "verify", "theorem", "--max-total", "5", "--max-pile", "5")[0] == 2
    assert run(capsys, "verify", "lemma-transitions", "--max-pile", "5")[0] == 2
    assert run(capsys, "verify", "two-pile", "--max-total", "5")[0] == 2
    assert run(capsys, "verify", "theorem", "--max", "5")[0] == 2
    assert run(capsys, "table", "--rules", "restricted")[0] == 2
    assert run(capsys, "table", "--rules", "restricted", "--ppositions")[0] == 2


def test_verify_theorem_small(capsys):
    code, out, _ = run(capsys, "verify", "theorem", "--max-total", "20")
    assert code == 0
    assert out.startswith("theorem: pass")


def test_verify_json_out(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, out, _ = run(capsys, "verify", "conjecture", "--max-pile", "10", "--out", str(path))
    assert code == 0
    assert json.loads(path.read_text())["verdict"] == "open"
    assert out.startswith("conjecture: open")


def test_verify_two_pile_json_stdout(capsys):
    code, out, _ = run(capsys, "verify", "two-pile", "--max", "30", "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["verdict"] == "pass" and d["checked"] == 31 * 32 // 2


def test_verify_lemmas_writes_both_reports(capsys, tmp_path):
    path = tmp_path / "l.json"
    code, _, _ = run(
        capsys, "verify", "lemmas", "--max-pile", "16", "--max-total", "24",
        "--digit-limit", "32", "--out", str(path),
    )
    reports = json.loads(path.read_text())
    assert code == 0
    assert [r["check"] for r in reports] == ["lemma-structure", "lemma-transitions"]


def test_verify_failure_exits_one(capsys, monkeypatch):
    real = formula.is_p_position
    monkeypatch.setattr(formula, "is_p_position", lambda p: not real(p))
    code, out, _ = run(capsys, "verify", "theorem", "--max-total", "6")
    assert code == 1 and out.startswith("theorem: fail")


def test_conjecture_counterexample_exits_one(capsys, monkeypatch):
    real = harness.nim_sum
    monkeypatch.setattr(harness, "nim_sum", lambda p: 2 if p == (1, 2, 4) else real(p))
    assert run(capsys, "verify", "conjecture", "--max-pile", "4")[0] == 1


def test_stdout_is_deterministic(capsys):
    args = ("verify", "lemma-transitions", "--max-total", "30", "--format", "json")
    first = run(capsys, *args)[1]
    second = run(capsys, *args, "--workers", "2")[1]
    assert first == second
    assert json.loads(first)["elapsed_ms"] == 0


def test_table_csv(capsys, tmp_path):
    path = tmp_path / "t.csv"
    code, _, _ = run(capsys, "table", "--rules", "restricted", "--max-total", "20", "--csv", str(path))
    assert code == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "# amalgam-nim grundy v1; ruleset=restricted; threshold=2; piles=3; bound=total_stones:20"
    assert len(lines) == 1 + BoundSpec.total_stones(20).count()
    assert load_table(path, expected=RESTRICTED)[(3, 5, 7)] == 0


def test_table_ppositions(capsys):
    code, out, _ = run(
        capsys, "table", "--rules", "amalgamation", "--ppositions", "--small-max", "7", "--max", "40"
    )
    assert code == 0
    assert out.startswith("# amalgam-nim p-positions v1")
    assert "\n0,40,40\n" in out and "\n0,1,2\n" not in out


def test_table_resource_error(capsys):
    code, out, err = run(capsys, "table", "--rules", "restricted", "--max-pile", "1000000000")
    assert code == 1 and out == "" and "resource limit" in err


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "amalgam_nim", "classify", "--pos", "1,2,3"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("P (P_{0,1})")


# -- play -------------------------------------------------------------------


def play_script(piles, rules, lines):
    out = io.StringIO()
    code = play(piles, rules, io.StringIO("".join(f"{ln}\n" for ln in lines)), out)
    return code, out.getvalue()


def test_play_human_takes_last():
    code, out = play_script([0, 0, 1], RESTRICTED, ["take 1 from 3"])
    assert code == 0 and "You win" in out


def test_play_illegal_then_eof():
    code, out = play_script([1, 1, 1], RESTRICTED, ["merge 1 2", "take 5 from 1", "jump"])
    assert code == 0
    assert out.count("Illegal move") == 3
    assert "you resign" in out


def test_play_merge_allowed_at_threshold():
    assert apply_text_move([2, 2], "merge 1 2", RESTRICTED) == [4, 0]
    with pytest.raises(IllegalMove):
        apply_text_move([1, 2], "merge 1 2", RESTRICTED)
    assert apply_text_move([1, 2], "merge 2 1", AMALGAMATION) == [3, 0]


def test_play_engine_wins_from_n_position():
    # engine answers every human move with a P-position, so it wins
    code, out = play_script([0, 2, 2], RESTRICTED, ["take 1 from 2", "take 1 from 2"])
    assert "Engine made the last move" in out


@pytest.mark.parametrize("rules, piles", [(RESTRICTED, [3, 9, 5]), (AMALGAMATION, [4, 1, 6]), (RESTRICTED, [5, 2])])
def test_engine_moves_to_p_positions(rules, piles):
    solver = GrundySolver(rules)
    desc, new = engine_move(piles, rules)
    if not solver.is_p(canonicalize(piles)):
        assert solver.is_p(canonicalize(new))
        options = sorted(
            canonicalize(q)
            for q in (apply_text_move(piles, d, rules) for d in _all_move_texts(piles, rules))
            if solver.is_p(canonicalize(q))
        )
        assert canonicalize(new) == options[0]
    assert apply_text_move(piles, desc, rules) == new


def _all_move_texts(piles, rules):
    from amalgam_nim.play import ordered_moves

    return [d for d, _ in ordered_moves(piles, rules)]


def test_play_cli_eof(monkeypatch, capsys):
    monkeypatch.setattr(sys, "stdin", io.StringIO(""))
    code, out, _ = run(capsys, "play", "--pos", "2,2", "--rules", "restricted")
    assert code == 0 and "resign" in out
