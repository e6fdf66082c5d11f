"""Structural edits on oracle trees (coverage sweeps, branch deletion)."""

from __future__ import annotations

from dataclasses import replace
from typing import Callable, List, Optional, Tuple

from ..rules.board import Position, legal_packed, make_packed, move_order_key
from ..rules.notation import parse_san_packed, san_of_packed
from .model import Branch, Claim, Leaf, Node, OpponentNode, OracleDocument, OurMove, collect_ids

UNLISTED_NOTE = "unlisted"


def uncovered_moves(pos: Position, node: OpponentNode) -> List[str]:
    """Legal moves at ``pos`` with no branch, in canonical move order."""
    listed = {b.san for b in node.branches}
    out = []
    for m in sorted(legal_packed(pos), key=move_order_key):
        san = san_of_packed(pos, m)
        if san not in listed:
            out.append(san)
    return out


ClaimFactory = Callable[[Position, str], Claim]


def _sweep(node: Node, pos: Position, factory: ClaimFactory) -> Node:
    if isinstance(node, Leaf):
        return node
    if isinstance(node, OurMove):
        child_pos = make_packed(pos, parse_san_packed(pos, node.san))
        return replace(node, child=_sweep(node.child, child_pos, factory))
    branches = []
    for b in node.branches:
        child_pos = make_packed(pos, parse_san_packed(pos, b.san))
        branches.append(Branch(b.san, _sweep(b.node, child_pos, factory)))
    for san in uncovered_moves(pos, node):
        branches.append(Branch(san, Leaf(factory(pos, san))))
    return replace(node, branches=tuple(branches))


def sweep_unlisted(doc: OracleDocument, factory: Optional[ClaimFactory] = None) -> OracleDocument:
    """Give every uncovered opponent move an explicit branch.

    The default claim is ``cannotwin <opponent> "unlisted"``, i.e. the move
    is treated as one the oracle side survives without further guidance.
    """
    if factory is None:
        def factory(pos, san):
            return Claim.cannot_win(doc.side ^ 1, UNLISTED_NOTE)
    tree = _sweep(doc.tree, doc.root_position, factory)
    return replace(doc, tree=tree, variation_ids=collect_ids(tree))


def opponent_branch_sites(tree: Node) -> List[Tuple[Tuple[str, ...], str]]:
    """``(path to opponent node, branch SAN)`` for every opponent branch."""
    out = []

    def rec(node: Node, path: Tuple[str, ...]):
        if isinstance(node, OurMove):
            rec(node.child, path + (node.san,))
        elif isinstance(node, OpponentNode):
            for b in node.branches:
                out.append((path, b.san))
                rec(b.node, path + (b.san,))

    rec(tree, ())
    return out


def delete_branch(doc: OracleDocument, path: Tuple[str, ...], san: str) -> OracleDocument:
    """Copy of ``doc`` without the branch ``san`` of the opponent node at ``path``.

    Labels inside the removed subtree disappear; references to them are left
    in place, so the result may fail reference checks as well as coverage.
    """

    def rec(node: Node, rest: Tuple[str, ...]) -> Node:
        if not rest:
            if not isinstance(node, OpponentNode) or node.branch(san) is None:
                raise KeyError(f"no branch {san} at {' '.join(path)}")
            return replace(node, branches=tuple(b for b in node.branches if b.san != san))
        if isinstance(node, OurMove):
            return replace(node, child=rec(node.child, rest[1:]))
        if isinstance(node, OpponentNode):
            return replace(node, branches=tuple(
                Branch(b.san, rec(b.node, rest[1:])) if b.san == rest[0] else b
                for b in node.branches))
        raise KeyError(f"path {' '.join(path)} ends at a leaf")

    tree = rec(doc.tree, path)
    ids = {}
    for k, v in doc.variation_ids.items():
        if not (v[:len(path)] == path and len(v) > len(path) and v[len(path)] == san):
            ids[k] = v
    return replace(doc, tree=tree, variation_ids=ids)
