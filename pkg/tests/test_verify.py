import json
import random

import pytest

from gardner.oracle.edit import delete_branch, opponent_branch_sites
from gardner.oracle.gdo import parse_oracle
from gardner.oracle.model import OpponentNode, walk
from gardner.rules import (
    Outcome, RuleProfile, format_san, generate_legal_moves, initial_position, play_line,
)
from gardner.search import Budget
from gardner.verify import (
    Level, Status, VerifyOptions, joint_main_line, verify_all_bundled, verify_document,
    worker_count,
)

FAST = Budget(200_000, None)


def fen_after(sans: str) -> str:
    return play_line(initial_position(), sans.split()).fen()


def options(level, budget=FAST, mate=None, **kw):
    return VerifyOptions(level=level, mate_budget=mate or budget, safety_budget=budget,
                         deterministic=True, **kw)


def records(report, obligation=None, status=None):
    return [r for r in report.records
            if (obligation is None or r.obligation == obligation)
            and (status is None or r.status is status)]


SMALL = """\
oracle white
move b4
opponent {
  c4 -> {
    id a
    move d4
    opponent {
      exd4 exd4 => draw "blocked"
      Nxb4 dxe5+ => mate black 9
    }
  }
  cxb4 cxb4 => cannotwin black
  Nd4 => ref a
}
"""


def test_l0_passes_legal_document():
    doc = parse_oracle(SMALL.replace("  Nd4 => ref a\n", ""))
    rep = verify_document(doc, options(Level.L0), "small")
    assert rep.ok
    assert rep.records[0].obligation == "legality" and rep.records[0].status is Status.PASS


def test_l0_reference_must_reach_same_position():
    rep = verify_document(parse_oracle(SMALL), options(Level.L0), "small")
    [bad] = records(rep, "reference")
    assert bad.status is Status.FAIL and len(bad.witness) == 2
    assert rep.exit_code == 1


def test_l0_reference_transposition_passes():
    doc = parse_oracle("""\
oracle white
move Nb4
opponent {
  Nd4 -> {
    move Nc2
    opponent {
      Nc6 => ref root
      Nb3 => unverified "not analysed"
      default => cannotwin black
    }
  }
  default => cannotwin black
}
""")
    rep = verify_document(doc, options(Level.L0), "t")
    assert rep.ok
    assert records(rep, "reference")[0].status is Status.PASS
    assert records(rep, "claim")[0].status is Status.UNVERIFIED


def test_l0_turn_order():
    doc = parse_oracle("oracle black\nmove b4\nleaf draw \"wrong side\"\n")
    rep = verify_document(doc, options(Level.L0), "turn")
    [bad] = records(rep, "turn-order")
    assert bad.status is Status.FAIL
    assert not records(rep, "legality", Status.PASS)


def test_l1_coverage_matches_brute_force(docs):
    doc = docs["white-b4"]
    rep = verify_document(doc, options(Level.L1), "white-b4")
    coverage = records(rep, "coverage")
    sites = [(p, n) for p, n in walk(doc.tree) if isinstance(n, OpponentNode)]
    assert len(coverage) == len(sites)
    for rec, (path, node) in zip(coverage, sites):
        pos = play_line(doc.root_position, path)
        legal = {format_san(pos, m) for m in generate_legal_moves(pos)}
        assert {b.san for b in node.branches} <= legal
        assert set(rec.witness) == legal - {b.san for b in node.branches}
        assert rec.status is Status.PASS


def test_l1_uncovered_and_default():
    doc = parse_oracle("oracle white\nmove b4\nopponent {\n  c4 => draw \"x\"\n}\n")
    rep = verify_document(doc, options(Level.L1), "u")
    [cov] = records(rep, "coverage")
    assert cov.status is Status.FAIL and "uncovered=6" in cov.detail
    assert len(cov.witness) == 6
    doc = parse_oracle("oracle white\nmove b4\nopponent {\n  c4 => draw \"x\"\n"
                       "  default => cannotwin black\n}\n")
    [cov] = records(verify_document(doc, options(Level.L1), "d"), "coverage")
    assert cov.status is Status.PASS and "default=6" in cov.detail


def test_l1_mutation_on_white_oracle(docs):
    doc = docs["white-b4"]
    sites = opponent_branch_sites(doc.tree)
    rng = random.Random(1)
    for path, san in rng.sample(sites, 10):
        mutant = delete_branch(doc, path, san)
        rep = verify_document(mutant, options(Level.L1), "mutant")
        assert any(r.obligation == "coverage" and r.status is Status.FAIL
                   and san in r.witness for r in rep.records)


def test_l2_mate_and_checkmate():
    doc = parse_oracle(f"""\
oracle white
root {fen_after("b4 cxb4 cxb4 d4 e4 f4 Bxf4 exf4 Qd2")}
opponent {{
  Ne5 -> {{
    move Qxf4+
    leaf mate black 2
  }}
  Qe5 => mate black 1
  default => cannotwin black
}}
""")
    rep = verify_document(doc, options(Level.L2), "m")
    mates = records(rep, "mate")
    assert [r.status for r in mates] == [Status.PASS, Status.FAIL]
    assert mates[0].pv and mates[1].witness
    assert rep.exit_code == 1


def test_l2_checkmate_claims():
    doc = parse_oracle("""\
oracle black
root rnbqk/ppppp/5/PPPPP/RNBQK w 0 1
opponent {
  b4 => checkmate
  default => cannotwin white
}
""")
    [rec] = records(verify_document(doc, options(Level.L2), "c"), "checkmate")
    assert rec.status is Status.FAIL and rec.witness


def test_l3_draw_leaves_of_white_oracle(docs):
    doc = docs["white-b4"]
    rep = verify_document(doc, options(Level.L3, mate=Budget(2_000, None)), "white-b4")
    nonloss = records(rep, "non-loss")
    assert nonloss and all(r.status is Status.PASS for r in nonloss)
    assert records(rep, "opponent-cannot-win", Status.UNKNOWN)
    assert "H=8" in rep.to_text()


def test_l3_flags_lost_draw_leaf():
    doc = parse_oracle(
        "oracle black\nroot " + fen_after("b4 cxb4 cxb4 d4 e4 f4 Bxf4 exf4 Qd2 Ne5")
        + "\nopponent {\n  Qxf4+ => draw \"wrong\"\n  default => cannotwin white\n}\n")
    rep = verify_document(doc, options(Level.L3), "lost")
    bad = [r for r in records(rep, "non-loss") if r.path == ("Qxf4+",)]
    assert bad[0].status is Status.FAIL and bad[0].witness


def test_jsonl_is_deterministic(docs):
    opts = options(Level.L3, mate=Budget(2_000, None))
    a = verify_document(docs["white-b4"], opts, "white-b4").to_jsonl()
    b = verify_document(docs["white-b4"], opts, "white-b4").to_jsonl()
    assert a == b
    rows = [json.loads(x) for x in a.splitlines()]
    assert rows[-1]["type"] == "summary"
    assert all(r["type"] == "record" and "seconds" not in r for r in rows[:-1])
    assert rows[-1]["counts"]["fail"] == 0


def test_parallel_matches_sequential(docs):
    small = Budget(2_000, None)
    seq = verify_document(docs["white-b4"], options(Level.L3, mate=small), "w").to_jsonl()
    par = verify_document(docs["white-b4"], options(Level.L3, mate=small, threads=2),
                          "w").to_jsonl()
    assert seq == par


def test_empty_bundle():
    rep = verify_all_bundled(options(Level.L3), entries=[])
    assert rep.ok and rep.documents == [] and rep.records == []
    assert json.loads(rep.to_jsonl())["type"] == "summary"


def test_bundle_l1(bundle):
    rep = verify_all_bundled(options(Level.L1), entries=bundle)
    assert rep.ok
    assert sorted(rep.documents) == sorted(e.file for e, _ in bundle)
    joint = records(rep, "joint-game")
    assert joint and joint[0].status is Status.PASS
    assert rep.swept_moves > 0


def test_joint_main_line(docs):
    game = joint_main_line(docs["white-b4"], docs["black-b4"])
    assert game.outcome is Outcome.DRAW_BY_REPETITION
    assert game.moves[0] == "b4"
    assert len(game.moves) == 17 and game.oracle_plies == 11
    strict = joint_main_line(docs["white-b4"], docs["black-b4"], RuleProfile(repetition=2))
    assert strict.outcome is Outcome.DRAW_BY_REPETITION
    assert len(strict.moves) < len(game.moves)


def test_worker_count(monkeypatch):
    monkeypatch.delenv("GARDNER_THREADS", raising=False)
    assert worker_count() == 1
    assert worker_count(4) == 4
    monkeypatch.setenv("GARDNER_THREADS", "2")
    assert worker_count(8) == 2
    assert worker_count() == 2
    monkeypatch.setenv("GARDNER_THREADS", "junk")
    assert worker_count(3) == 3


@pytest.mark.parametrize("level", list(Level))
def test_levels_are_cumulative(level):
    doc = parse_oracle(SMALL.replace("  Nd4 => ref a\n", "  default => cannotwin black\n"))
    opts = options(level, Budget(20_000, None))
    obligations = {r.obligation for r in verify_document(doc, opts, "s").records}
    assert ("coverage" in obligations) == (level >= Level.L1)
    assert ("mate" in obligations) == (level >= Level.L2)
    assert ("non-loss" in obligations) == (level >= Level.L3)
