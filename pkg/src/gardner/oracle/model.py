"""Proof-tree data model for draw oracles."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple, Union

from ..rules.board import BLACK, WHITE, Position
from ..rules.notation import format_fen, parse_fen, play_line


class ClaimKind(enum.Enum):
    MATE = "mate"
    CHECKMATE = "checkmate"
    DRAW = "draw"
    CANNOT_WIN = "cannotwin"
    REF = "ref"
    UNVERIFIED = "unverified"


@dataclass(frozen=True)
class Claim:
    """Terminal judgment attached to the position after the last listed move.

    ``color`` is the mated side for MATE and the side that cannot win for
    CANNOT_WIN. ``text`` holds the draw reason, the referenced variation id or
    the unverified note. ``note`` is an optional free annotation.
    """

    kind: ClaimKind
    color: Optional[int] = None
    moves: Optional[int] = None
    text: Optional[str] = None
    note: Optional[str] = None

    def __post_init__(self):
        if self.kind is ClaimKind.MATE:
            if self.moves is None or self.moves < 1 or self.color not in (WHITE, BLACK):
                raise ValueError("mate claim needs a defender color and x >= 1")
        if self.kind is ClaimKind.CANNOT_WIN and self.color not in (WHITE, BLACK):
            raise ValueError("cannotwin claim needs a color")
        if self.kind in (ClaimKind.REF, ClaimKind.DRAW, ClaimKind.UNVERIFIED) and not self.text:
            raise ValueError(f"{self.kind.value} claim needs text")

    @classmethod
    def mate(cls, defender: int, moves: int, note: Optional[str] = None) -> "Claim":
        return cls(ClaimKind.MATE, defender, moves, note=note)

    @classmethod
    def checkmate(cls) -> "Claim":
        return cls(ClaimKind.CHECKMATE)

    @classmethod
    def draw(cls, reason: str) -> "Claim":
        return cls(ClaimKind.DRAW, text=reason)

    @classmethod
    def cannot_win(cls, side: int, note: Optional[str] = None) -> "Claim":
        return cls(ClaimKind.CANNOT_WIN, side, note=note)

    @classmethod
    def ref(cls, variation_id: str) -> "Claim":
        return cls(ClaimKind.REF, text=variation_id)

    @classmethod
    def unverified(cls, note: str) -> "Claim":
        return cls(ClaimKind.UNVERIFIED, text=note)


@dataclass(frozen=True)
class Leaf:
    claim: Claim
    justification: Tuple[str, ...] = ()
    label: Optional[str] = None


@dataclass(frozen=True)
class OurMove:
    san: str
    child: "Node"
    label: Optional[str] = None


@dataclass(frozen=True)
class Branch:
    san: str
    node: "Node"


@dataclass(frozen=True)
class OpponentNode:
    branches: Tuple[Branch, ...]
    default: Optional[Claim] = None
    label: Optional[str] = None

    def branch(self, san: str) -> Optional[Branch]:
        for b in self.branches:
            if b.san == san:
                return b
        return None


Node = Union[Leaf, OurMove, OpponentNode]

ROOT_ID = "root"


@dataclass(frozen=True)
class OracleDocument:
    side: int
    root_fen: str
    tree: Node
    variation_ids: Dict[str, Tuple[str, ...]] = field(default_factory=dict, compare=False)
    name: Optional[str] = field(default=None, compare=False)

    @property
    def root_position(self) -> Position:
        return parse_fen(self.root_fen)


class UnknownVariationId(KeyError):
    pass


def walk(node: Node, path: Tuple[str, ...] = ()) -> Iterator[Tuple[Tuple[str, ...], Node]]:
    """Yield ``(path, node)`` depth-first in document order."""
    yield path, node
    if isinstance(node, OurMove):
        yield from walk(node.child, path + (node.san,))
    elif isinstance(node, OpponentNode):
        for b in node.branches:
            yield from walk(b.node, path + (b.san,))


def collect_ids(tree: Node) -> Dict[str, Tuple[str, ...]]:
    ids: Dict[str, Tuple[str, ...]] = {ROOT_ID: ()}
    for path, node in walk(tree):
        if node.label is not None:
            if node.label in ids:
                raise ValueError(f"duplicate variation id {node.label}")
            ids[node.label] = path
    return ids


def node_at(tree: Node, path: Tuple[str, ...]) -> Node:
    node = tree
    for san in path:
        if isinstance(node, OurMove) and node.san == san:
            node = node.child
        elif isinstance(node, OpponentNode) and node.branch(san) is not None:
            node = node.branch(san).node
        else:
            raise KeyError(f"path {' '.join(path)} leaves the tree at {san}")
    return node


def resolve_variation(doc: OracleDocument, variation_id: str) -> Tuple[Position, Node]:
    """Position reached by replaying the labelled path, and the subtree there."""
    key = variation_id or ROOT_ID
    ids = doc.variation_ids or collect_ids(doc.tree)
    if key not in ids:
        raise UnknownVariationId(variation_id)
    path = ids[key]
    return play_line(doc.root_position, path), node_at(doc.tree, path)


def leaves(tree: Node) -> List[Tuple[Tuple[str, ...], Leaf]]:
    return [(p, n) for p, n in walk(tree) if isinstance(n, Leaf)]


def count_nodes(tree: Node) -> Dict[str, int]:
    out = {"our": 0, "opponent": 0, "leaf": 0, "branches": 0}
    for _, n in walk(tree):
        if isinstance(n, OurMove):
            out["our"] += 1
        elif isinstance(n, OpponentNode):
            out["opponent"] += 1
            out["branches"] += len(n.branches)
        else:
            out["leaf"] += 1
    return out


def default_root() -> str:
    from ..rules.board import initial_position
    return format_fen(initial_position())
