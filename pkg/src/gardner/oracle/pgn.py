"""PGN export: one game per root-to-leaf path of an oracle tree."""

from __future__ import annotations

import textwrap
from typing import List, Optional, Tuple

from ..rules.board import BLACK, WHITE, Position
from ..rules.notation import parse_fen, play_line
from .gdo import COLOR_WORDS
from .model import Claim, ClaimKind, Leaf, OracleDocument, walk


def claim_comment(claim: Claim) -> str:
    k = claim.kind
    if k is ClaimKind.MATE:
        text = f"mate in <={claim.moves}"
    elif k is ClaimKind.CHECKMATE:
        text = "checkmate"
    elif k is ClaimKind.DRAW:
        text = f"draw: {claim.text}"
    elif k is ClaimKind.CANNOT_WIN:
        text = f"{COLOR_WORDS[claim.color]} cannot win"
    elif k is ClaimKind.REF:
        text = f"transposes to {claim.text}"
    else:
        text = f"unverified: {claim.text}"
    if claim.note:
        text += f" ({claim.note})"
    return "{" + text.replace("}", ")") + "}"


def claim_result(claim: Claim, leaf_pos: Position) -> str:
    if claim.kind is ClaimKind.MATE:
        return "1-0" if claim.color == BLACK else "0-1"
    if claim.kind is ClaimKind.CHECKMATE:
        return "1-0" if leaf_pos.turn == BLACK else "0-1"
    if claim.kind is ClaimKind.DRAW:
        return "1/2-1/2"
    return "*"


def movetext(start: Position, sans: Tuple[str, ...]) -> List[str]:
    tokens = []
    number, turn = start.fullmove_number, start.turn
    for i, san in enumerate(sans):
        if turn == WHITE:
            tokens.append(f"{number}.{san}")
        else:
            tokens.append(f"{number}...{san}" if i == 0 else san)
            number += 1
        turn ^= 1
    return tokens


def _nearest_label(doc: OracleDocument, path: Tuple[str, ...]) -> str:
    best, depth = "root", -1
    for vid, vpath in sorted(doc.variation_ids.items()):
        if path[:len(vpath)] == vpath and len(vpath) > depth:
            best, depth = vid, len(vpath)
    return best


def export_pgn(doc: OracleDocument, event: Optional[str] = None) -> str:
    root = parse_fen(doc.root_fen)
    games = []
    index = 0
    for path, node in walk(doc.tree):
        if not isinstance(node, Leaf):
            continue
        index += 1
        leaf_pos = play_line(root, path)
        result = claim_result(node.claim, leaf_pos)
        tokens = movetext(root, path) + [claim_comment(node.claim)]
        if node.justification and path:
            # A variation replaying the last move, then the supporting line.
            before = play_line(root, path[:-1])
            tokens.append("(" + " ".join(movetext(before, path[-1:] + node.justification)) + ")")
        tokens.append(result)
        headers = [
            ("Event", event or f"Gardner {COLOR_WORDS[doc.side]} oracle"),
            ("Site", "?"),
            ("Date", "????.??.??"),
            ("Round", str(index)),
            ("White", "?"),
            ("Black", "?"),
            ("Result", result),
            ("Variant", "Gardner"),
            ("SetUp", "1"),
            ("FEN", doc.root_fen),
            ("Variation", _nearest_label(doc, path)),
        ]
        head = "\n".join(f'[{k} "{v}"]' for k, v in headers)
        body = textwrap.fill(" ".join(tokens), width=79, break_long_words=False,
                             break_on_hyphens=False)
        games.append(f"{head}\n\n{body}\n")
    return "\n".join(games)


__all__ = ["claim_comment", "claim_result", "export_pgn", "movetext"]
