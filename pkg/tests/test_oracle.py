from pathlib import Path

import pytest

from gardner.oracle.bundle import load_bundled, manifest
from gardner.oracle.edit import (
    delete_branch, opponent_branch_sites, sweep_unlisted, uncovered_moves,
)
from gardner.oracle.gdo import (
    DanglingReference, IllegalMoveInLine, OracleSyntaxError, parse_oracle, print_oracle,
)
from gardner.oracle.model import (
    Claim, ClaimKind, Leaf, OpponentNode, OracleDocument, UnknownVariationId, count_nodes,
    leaves, node_at, resolve_variation,
)
from gardner.oracle.pgn import claim_comment, export_pgn
from gardner.rules import BLACK, WHITE, initial_position, play_line, split_movetext

GOLDEN = Path(__file__).resolve().parent / "golden"


def line(text: str):
    return play_line(initial_position(), split_movetext(text))


def test_golden_round_trip():
    text = (GOLDEN / "small.gdo").read_text()
    doc = parse_oracle(text)
    assert print_oracle(doc) == text
    assert parse_oracle(print_oracle(doc)) == doc


def test_golden_pgn():
    doc = parse_oracle((GOLDEN / "small.gdo").read_text())
    assert export_pgn(doc) == (GOLDEN / "small.pgn").read_text()


def test_bundle_round_trips(docs):
    for name, doc in docs.items():
        printed = print_oracle(doc)
        again = parse_oracle(printed)
        assert again == doc, name
        assert print_oracle(again) == printed, name


def test_manifest_lists_every_bundled_file():
    files = {e.file for e in manifest()}
    on_disk = {p.name for p in (GOLDEN.parent.parent / "src/gardner/oracle/data").glob("*.gdo")}
    assert files == on_disk
    assert all(e.complete and e.repetition == 3 for e in manifest())


def test_single_draw_leaf_pgn():
    doc = parse_oracle('oracle white\nleaf draw "start"\n')
    pgn = export_pgn(doc)
    assert '[Result "1/2-1/2"]' in pgn
    assert pgn.rstrip().endswith("{draw: start} 1/2-1/2")


def test_mate_in_two_black_pgn():
    doc = parse_oracle(
        "oracle white\n"
        "root " + line("1.b4 cxb4 2.cxb4 d4 3.e4 f4 4.Bxf4 exf4 5.Qd2 Ne5").fen() + "\n"
        "move Qxf4+\n"
        "leaf mate black 2\n")
    pgn = export_pgn(doc)
    assert "{mate in <=2}" in pgn
    assert '[Result "1-0"]' in pgn and pgn.rstrip().endswith("1-0")


def test_claim_comments():
    assert claim_comment(Claim.mate(WHITE, 7)) == "{mate in <=7}"
    assert claim_comment(Claim.cannot_win(BLACK, "unlisted")) == "{black cannot win (unlisted)}"
    assert claim_comment(Claim.ref("1/2")) == "{transposes to 1/2}"
    assert claim_comment(Claim.unverified("a } b")) == "{unverified: a ) b}"


def test_resolve_variation_white():
    pos, node = resolve_variation(load_bundled("white-b4"), "1/1.1")
    assert pos == line("1.b4 c4 2.d4 exd4 3.exd4")
    assert isinstance(node, OpponentNode)


def test_resolve_variation_black():
    doc = load_bundled("black-b4")
    pos, _ = resolve_variation(doc, "1/2.1.1.1")
    ids = doc.variation_ids["1/2.1.1.1"]
    assert ids[-2:] == ("Rb3", "d4")
    assert pos == play_line(doc.root_position, ids)
    assert pos.fullmove_number == 7 and pos.turn == WHITE


def test_resolve_unknown_id():
    with pytest.raises(UnknownVariationId):
        resolve_variation(load_bundled("white-b4"), "9/9")
    pos, node = resolve_variation(load_bundled("white-b4"), "root")
    assert pos == initial_position()


def test_parse_canonicalises_san():
    doc = parse_oracle("oracle white\nmove b4\nopponent {\n  cb4 Nc2b4 => mate white 3\n}\n")
    branch = doc.tree.child.branches[0]
    assert (branch.san, branch.node.san) == ("cxb4", "Nxb4")
    assert "  cxb4 Nxb4 => mate white 3" in print_oracle(doc).splitlines()


@pytest.mark.parametrize("text,error", [
    ("move b4\n", OracleSyntaxError),
    ("oracle white\nmove b5\n", IllegalMoveInLine),
    ("oracle white\nmove b4\nopponent {\n  c4 => draw \"x\"\n", OracleSyntaxError),
    ("oracle white\nmove b4\nopponent {\n  c4 => ref nowhere\n}\n", DanglingReference),
    ("oracle white\nmove b4\nopponent {\n  c4 => draw \"x\"\n  c4 => draw \"y\"\n}\n",
     OracleSyntaxError),
    ("oracle white\nleaf mate black 0\n", OracleSyntaxError),
    ("oracle white\nleaf draw \"x\" justify b5\n", IllegalMoveInLine),
    ("oracle white\nleaf draw \"x\"\nleaf draw \"y\"\n", OracleSyntaxError),
    ("oracle grey\nleaf draw \"x\"\n", OracleSyntaxError),
])
def test_parse_errors(text, error):
    with pytest.raises(error):
        parse_oracle(text)


def test_syntax_error_names_the_line():
    with pytest.raises(OracleSyntaxError) as info:
        parse_oracle("oracle white\nmove b4\nopponent {\n  c4 ?? d4\n}\n")
    assert info.value.line == 4


def test_claim_validation():
    with pytest.raises(ValueError):
        Claim(ClaimKind.MATE, WHITE, 0)
    with pytest.raises(ValueError):
        Claim(ClaimKind.DRAW)
    with pytest.raises(ValueError):
        Claim(ClaimKind.CANNOT_WIN)


def test_sweep_and_delete():
    doc = parse_oracle("oracle white\nmove b4\nopponent {\n  c4 => draw \"x\"\n}\n")
    after_b4 = line("1.b4")
    assert len(uncovered_moves(after_b4, doc.tree.child)) == len(after_b4.legal_moves()) - 1
    swept = sweep_unlisted(doc)
    assert uncovered_moves(after_b4, swept.tree.child) == []
    extra = [b for b in swept.tree.child.branches if b.san != "c4"]
    assert all(b.node.claim == Claim.cannot_win(BLACK, "unlisted") for b in extra)
    sites = opponent_branch_sites(swept.tree)
    assert len(sites) == len(after_b4.legal_moves())
    cut = delete_branch(swept, ("b4",), "c4")
    assert uncovered_moves(after_b4, node_at(cut.tree, ("b4",))) == ["c4"]
    with pytest.raises(KeyError):
        delete_branch(swept, ("b4",), "Qa1")


def test_bundle_shapes(docs):
    assert set(docs) == {"white-b4", "black-b4", "black-c4", "black-d4", "black-e4",
                         "black-f4", "black-Nb4", "black-Nd4"}
    assert docs["white-b4"].side == WHITE
    for name, doc in docs.items():
        assert isinstance(doc, OracleDocument)
        if name.startswith("black"):
            assert doc.side == BLACK and doc.root_position.turn == BLACK
        counts = count_nodes(doc.tree)
        assert counts["leaf"] == len(leaves(doc.tree)) > 0


def test_checkmate_leaves_replay(docs):
    from gardner.search import check_immediate_checkmate
    total = 0
    for doc in docs.values():
        for path, leaf in leaves(doc.tree):
            if isinstance(leaf, Leaf) and leaf.claim.kind is ClaimKind.CHECKMATE:
                assert check_immediate_checkmate(play_line(doc.root_position, path))
                total += 1
    assert total == 19
