import pytest

from gardner.build import (
    BuildPolicy, GuideConflict, backed_up_mate, build_oracle, load_guide, root_claim,
    select_move,
)
from gardner.oracle.gdo import parse_oracle, print_oracle
from gardner.oracle.model import Claim, ClaimKind, leaves
from gardner.rules import BLACK, WHITE, initial_position, parse_fen, play_line
from gardner.search import Budget
from gardner.verify import Level, Status, VerifyOptions, verify_document

AFTER_KE2 = "rn1qk/p2b1/P1pPp/2P1P/RNQK1 b 3 6"


def line(text: str):
    return play_line(initial_position(), text.split())


def test_build_is_deterministic():
    root = line("b4 Nd4")
    policy = BuildPolicy(WHITE, max_depth=3)
    a, b = build_oracle(root, policy), build_oracle(root, policy)
    assert print_oracle(a.document) == print_oracle(b.document)
    assert a.log_jsonl() == b.log_jsonl()
    assert a.stats == b.stats
    assert "seconds" not in a.log_jsonl() and "seconds" in a.log_jsonl(timings=True)


def test_build_finds_short_mate():
    root = line("b4 cxb4 cxb4 d4 e4 f4 Bxf4 exf4 Qd2 Ne5")
    result = build_oracle(root, BuildPolicy(WHITE, max_depth=4))
    assert print_oracle(result.document).splitlines()[2:] == [
        "move Qxf4+", "opponent {", "  Qf5 Qxf5+ => checkmate", "}"]
    assert result.root_claim == Claim.mate(BLACK, 1)
    rep = verify_document(result.document, VerifyOptions(level=Level.L2), "mate")
    assert rep.ok and rep.counts()["pass"] >= 3


def test_build_king_shuffle_repetition():
    result = build_oracle(parse_fen(AFTER_KE2),
                          BuildPolicy(WHITE, max_depth=4, decided_threshold=10 ** 6))
    doc = result.document
    reps = [p for p, leaf in leaves(doc.tree) if leaf.claim == Claim.draw("repetition")]
    assert ("Bd6", "Kf2", "Be5", "Ke2") in reps
    rep = verify_document(doc, VerifyOptions(level=Level.L1), "shuffle")
    assert rep.ok
    assert rep.counts()["unverified-claim"] > 0


def test_build_safe_horizon_rule():
    root = line("b4 c4 d4 exd4 exd4 f4 Qxe6+ Kxe6")
    result = build_oracle(root, BuildPolicy(WHITE, max_depth=2, draw_rule="safe"))
    tree = result.document.tree
    assert tree.san == "Ke2"
    assert all(leaf.claim == Claim.draw("safe for 8 plies") for _, leaf in leaves(tree))
    rep = verify_document(result.document,
                          VerifyOptions(level=Level.L3, safety_budget=Budget(200_000, None)),
                          "safe")
    assert rep.ok and not rep.by_status(Status.UNKNOWN)


def test_build_from_checkmated_root():
    result = build_oracle(parse_fen("k4/1Q3/1K3/5/5 b 0 1"), BuildPolicy(BLACK))
    assert result.document.tree.claim.kind is ClaimKind.UNVERIFIED
    assert result.root_claim is None and result.root_status == "unknown"
    result = build_oracle(parse_fen("k4/1Q3/1K3/5/5 b 0 1"), BuildPolicy(WHITE))
    assert result.document.tree.claim == Claim.checkmate()


def test_guide_is_followed_and_checked():
    start = initial_position()
    result = build_oracle(start, BuildPolicy(WHITE, max_depth=1, guide={start.key: "Nd4"}))
    assert result.document.tree.san == "Nd4"
    with pytest.raises(GuideConflict):
        build_oracle(start, BuildPolicy(WHITE, max_depth=1, guide={start.key: "b5"}))
    assert select_move(start, BuildPolicy(WHITE, guide={start.key: "e4"})) == "e4"
    with pytest.raises(ValueError):
        select_move(line("b4"), BuildPolicy(WHITE))


def test_load_guide():
    text = "# opening book\n" \
           "rnbqk/ppppp/5/PPPPP/RNBQK w 0 1 b4  # main line\n\n" \
           "rnbqk/ppppp/P4/1PPPP/RNBQK b 0 1 cxb4\n"
    guide = load_guide(text)
    assert guide == {initial_position().key: "b4", line("b4").key: "cxb4"}
    with pytest.raises(ValueError):
        load_guide("rnbqk/ppppp/5/PPPPP/RNBQK w 0 b4")


def test_policy_validation():
    with pytest.raises(ValueError):
        BuildPolicy(WHITE, draw_rule="fifty")
    with pytest.raises(ValueError):
        BuildPolicy(WHITE, max_depth=-1)


def test_backed_up_mate_and_root_claim():
    doc = parse_oracle("""\
oracle white
move b4
opponent {
  c4 => mate black 3
  cxb4 cxb4 => mate black 5
  Nd4 Nxd4 => checkmate
}
""")
    assert backed_up_mate(doc.tree) == 7
    assert root_claim(doc) == Claim.mate(BLACK, 6)
    doc = parse_oracle("oracle white\nmove b4\nopponent {\n  c4 => mate black 3\n"
                       "  cxb4 => draw \"x\"\n}\n")
    assert root_claim(doc) is None
    assert root_claim(parse_oracle('oracle white\nleaf draw "x"\n')) == Claim.draw("x")
