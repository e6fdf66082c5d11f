import pytest

from conftest import random_positions, regression_queries
from gardner.oracle.bundle import load_bundled
from gardner.oracle.model import resolve_variation
from gardner.rules import (
    BLACK, WHITE, initial_position, is_checkmate, parse_fen, play_line, split_movetext,
)
from gardner.search import (
    Budget, MateStatus, SafetyStatus, TranspositionTable, check_immediate_checkmate,
    check_non_loss, evaluate, prove_mate,
)

NODES = Budget(1_000_000, None)


def line(text: str):
    return play_line(initial_position(), split_movetext(text))


def test_mate_in_three_after_qd4():
    pos = line("1.b4 c4 2.d4 Nxb4 3.dxe5+ Qxe5 4.Nxb4 Qd4 5.exd4")
    r = prove_mate(pos, WHITE, 3, NODES)
    assert r.status is MateStatus.PROVEN and r.moves <= 3
    assert is_checkmate(play_line(pos, r.pv))


def test_mate_in_two_after_qxf4():
    pos = line("1.b4 cxb4 2.cxb4 d4 3.e4 f4 4.Bxf4 exf4 5.Qd2 Ne5 6.Qxf4+")
    r = prove_mate(pos, WHITE, 2, NODES)
    assert r.status is MateStatus.PROVEN and r.moves <= 2
    assert is_checkmate(play_line(pos, r.pv))


def test_no_mate_in_two_from_start():
    r = prove_mate(initial_position(), WHITE, 2, NODES)
    assert r.status is MateStatus.DISPROVEN
    assert r.pv == []


def test_unknown_names_the_exhausted_budget():
    pos = line("1.b4 c4 2.d4 exd4 3.exd4 Bc5")
    r = prove_mate(pos, WHITE, 6, Budget(50, None))
    assert r.status is MateStatus.UNKNOWN and r.exhausted == "nodes"
    r = prove_mate(pos, WHITE, 6, Budget(None, 0.001))
    assert r.status is MateStatus.UNKNOWN and r.exhausted == "time"


def test_max_moves_must_be_positive():
    with pytest.raises(ValueError):
        prove_mate(initial_position(), WHITE, 0)


def test_pv_defender_deviations_still_lose():
    """Every defender reply along the PV is re-searched with the TT off."""
    from gardner.rules.board import legal_packed, make_packed
    pos = line("1.b4 c4 2.d4 Nxb4 3.dxe5+ Qxe5 4.Nxb4 Qd4 5.exd4")
    r = prove_mate(pos, WHITE, 3, NODES)
    assert r.status is MateStatus.PROVEN
    p, left = pos, r.moves
    for san in r.pv:
        if p.turn == BLACK and not is_checkmate(p):
            for m in legal_packed(p):
                alt = prove_mate(make_packed(p, m), WHITE, left, NODES, use_tt=False)
                assert alt.status is MateStatus.PROVEN
        if p.turn == WHITE:
            left -= 1
        p = play_line(p, [san])
        if left <= 1:
            break
    assert is_checkmate(play_line(pos, r.pv))


def test_mate_bound_monotonicity():
    pos = line("1.b4 cxb4 2.cxb4 d4 3.e4 f4 4.Bxf4 exf4 5.Qd2 Ne5 6.Qxf4+")
    found = prove_mate(pos, WHITE, 4, NODES).moves
    for x in range(1, 6):
        status = prove_mate(pos, WHITE, x, NODES).status
        assert status is (MateStatus.PROVEN if x >= found else MateStatus.DISPROVEN)


def test_checkmate_detection():
    assert check_immediate_checkmate(parse_fen("k4/1Q3/1K3/5/5 b 0 1"))
    assert not check_immediate_checkmate(parse_fen("k4/2Q2/1K3/5/5 b 0 1"))
    assert not check_immediate_checkmate(initial_position())


def test_non_loss_white_draw_leaf():
    pos, _ = resolve_variation(load_bundled("white-b4"), "1/1.1.1")
    assert pos == line("1.b4 c4 2.d4 exd4 3.exd4 f4 4.Qxe6+ Kxe6")
    r = check_non_loss(pos, WHITE, 8, NODES)
    assert r.status is SafetyStatus.SAFE


def test_non_loss_when_already_mated():
    pos = parse_fen("k4/1Q3/1K3/5/5 b 0 1")
    assert check_non_loss(pos, BLACK, 0).status is SafetyStatus.UNSAFE
    assert check_non_loss(pos, WHITE, 0).status is SafetyStatus.SAFE


def test_non_loss_king_and_pawn_ending():
    doc = load_bundled("black-b4")
    pos, _ = resolve_variation(doc, "1/1.1.2")
    end = play_line(pos, "e4 Qb3 Nd5+ Ke6 exf5+ Kxd5 f4 Qe3+ Qxe3 dxe3+ Kxe3".split())
    for h in (0, 1, 4, 8, 12):
        assert check_non_loss(end, BLACK, h, NODES).safe


def test_non_loss_finds_forced_loss():
    pos = line("1.b4 cxb4 2.cxb4 d4 3.e4 f4 4.Bxf4 exf4 5.Qd2 Ne5 6.Qxf4+")
    r = check_non_loss(pos, BLACK, 8, NODES)
    assert r.status is SafetyStatus.UNSAFE
    assert is_checkmate(play_line(pos, r.pv))


def test_non_loss_horizon_monotonicity():
    for pos in random_positions(20, seed=5, max_plies=20):
        safe = [check_non_loss(pos, pos.turn, h, NODES).safe for h in range(0, 6)]
        for shorter, longer in zip(safe, safe[1:]):
            assert shorter or not longer


def test_shared_tt_does_not_change_answers(bundle):
    tt = TranspositionTable()
    for pos, attacker, x in regression_queries(bundle)[:20]:
        shared = prove_mate(pos, attacker, x, NODES, tt=tt)
        fresh = prove_mate(pos, attacker, x, NODES)
        assert (shared.status, shared.moves) == (fresh.status, fresh.moves)


def test_search_is_deterministic():
    pos = line("1.b4 c4 2.d4 exd4 3.exd4 Bc5")
    a = prove_mate(pos, WHITE, 6, NODES)
    b = prove_mate(pos, WHITE, 6, NODES)
    assert (a.status, a.moves, a.pv, a.nodes) == (b.status, b.moves, b.pv, b.nodes)


def test_evaluate_initial_is_balanced():
    assert evaluate(initial_position()) == 0
