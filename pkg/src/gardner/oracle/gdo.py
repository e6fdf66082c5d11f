"""Reader and canonical writer for the line-oriented ``.gdo`` oracle format.

See docs/oracle-format.md for the grammar. Every SAN token is resolved
against the position it is played from, so a parsed document is always
path-legal and carries canonical SAN.
"""

from __future__ import annotations

import shlex
from typing import List, Optional, Tuple

from ..rules.board import BLACK, WHITE, Position, make_packed
from ..rules.notation import (
    NotationError, format_fen, parse_fen, parse_san_packed, san_of_packed,
)
from .model import (
    Branch, Claim, ClaimKind, Leaf, Node, OpponentNode, OracleDocument, OurMove,
    collect_ids, default_root, walk,
)

COLOR_NAMES = {"white": WHITE, "black": BLACK}
COLOR_WORDS = {WHITE: "white", BLACK: "black"}


class OracleFormatError(ValueError):
    pass


class OracleSyntaxError(OracleFormatError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class IllegalMoveInLine(OracleFormatError):
    def __init__(self, path: Tuple[str, ...], san: str, line: int, reason: str):
        where = " ".join(path) or "<root>"
        super().__init__(f"line {line}: {san!r} cannot be played after {where}: {reason}")
        self.path = path
        self.san = san
        self.line = line


class DanglingReference(OracleFormatError):
    def __init__(self, variation_id: str):
        super().__init__(f"reference to unknown variation id {variation_id!r}")
        self.variation_id = variation_id


# ---------------------------------------------------------------------------
# parsing


class _Lines:
    def __init__(self, text: str):
        self.rows: List[Tuple[int, List[str]]] = []
        for number, raw in enumerate(text.splitlines(), start=1):
            try:
                tokens = shlex.split(raw, comments=True)
            except ValueError as exc:
                raise OracleSyntaxError(number, str(exc)) from None
            if tokens:
                self.rows.append((number, tokens))
        self.i = 0

    def peek(self) -> Optional[Tuple[int, List[str]]]:
        return self.rows[self.i] if self.i < len(self.rows) else None

    def take(self) -> Tuple[int, List[str]]:
        row = self.peek()
        if row is None:
            last = self.rows[-1][0] if self.rows else 0
            raise OracleSyntaxError(last, "unexpected end of document")
        self.i += 1
        return row

    @property
    def last_line(self) -> int:
        return self.rows[-1][0] if self.rows else 0


def _color(word: str, line: int) -> int:
    try:
        return COLOR_NAMES[word]
    except KeyError:
        raise OracleSyntaxError(line, f"expected white or black, got {word!r}") from None


def parse_claim(tokens: List[str], line: int) -> Tuple[Claim, List[str]]:
    """Parse a claim from the front of ``tokens``; return it and the rest."""
    if not tokens:
        raise OracleSyntaxError(line, "missing claim")
    head, rest = tokens[0], tokens[1:]

    def note() -> Optional[str]:
        if rest and rest[0] != "justify":
            return rest.pop(0)
        return None

    try:
        if head == "mate":
            if len(rest) < 2 or not rest[1].isdigit():
                raise OracleSyntaxError(line, "expected: mate <white|black> <n>")
            color = _color(rest.pop(0), line)
            n = int(rest.pop(0))
            return Claim.mate(color, n, note()), rest
        if head == "checkmate":
            return Claim.checkmate(), rest
        if head == "draw":
            if not rest:
                raise OracleSyntaxError(line, "draw needs a quoted reason")
            return Claim.draw(rest.pop(0)), rest
        if head == "cannotwin":
            if not rest:
                raise OracleSyntaxError(line, "expected: cannotwin <white|black>")
            color = _color(rest.pop(0), line)
            return Claim.cannot_win(color, note()), rest
        if head == "ref":
            if not rest:
                raise OracleSyntaxError(line, "ref needs a variation id")
            return Claim.ref(rest.pop(0)), rest
        if head == "unverified":
            if not rest:
                raise OracleSyntaxError(line, "unverified needs a quoted note")
            return Claim.unverified(rest.pop(0)), rest
    except ValueError as exc:
        if isinstance(exc, OracleSyntaxError):
            raise
        raise OracleSyntaxError(line, str(exc)) from None
    raise OracleSyntaxError(line, f"unknown claim keyword {head!r}")


class _Parser:
    def __init__(self, text: str):
        self.lines = _Lines(text)

    def play(self, pos: Position, san: str, path: Tuple[str, ...], line: int):
        try:
            m = parse_san_packed(pos, san)
        except NotationError as exc:
            raise IllegalMoveInLine(path, san, line, str(exc)) from None
        return san_of_packed(pos, m), make_packed(pos, m)

    def justification(self, pos: Position, tokens: List[str], path, line: int) -> Tuple[str, ...]:
        if not tokens:
            return ()
        if tokens[0] != "justify":
            raise OracleSyntaxError(line, f"unexpected trailing text {' '.join(tokens)!r}")
        out = []
        for san in tokens[1:]:
            canon, pos = self.play(pos, san, path + tuple(out), line)
            out.append(canon)
        if not out:
            raise OracleSyntaxError(line, "justify needs at least one move")
        return tuple(out)

    def leaf(self, pos, tokens, path, line, label=None) -> Leaf:
        claim, rest = parse_claim(tokens, line)
        return Leaf(claim, self.justification(pos, rest, path, line), label)

    def body(self, pos: Position, path: Tuple[str, ...]) -> Node:
        """Parse one node; the caller consumes any closing brace."""
        line, tokens = self.lines.take()
        label = None
        if tokens[0] == "id":
            if len(tokens) != 2:
                raise OracleSyntaxError(line, "expected: id <variation-id>")
            label = tokens[1]
            line, tokens = self.lines.take()
        key = tokens[0]
        if key == "move":
            if len(tokens) != 2:
                raise OracleSyntaxError(line, "expected: move <SAN>")
            san, child_pos = self.play(pos, tokens[1], path, line)
            child = self.body(child_pos, path + (san,))
            return OurMove(san, child, label)
        if key == "leaf":
            return self.leaf(pos, tokens[1:], path, line, label)
        if key == "opponent":
            if tokens[1:] != ["{"]:
                raise OracleSyntaxError(line, "expected: opponent {")
            return self.opponent(pos, path, label)
        raise OracleSyntaxError(line, f"expected move, leaf or opponent, got {key!r}")

    def close(self):
        line, tokens = self.lines.take()
        if tokens != ["}"]:
            raise OracleSyntaxError(line, f"expected '}}', got {' '.join(tokens)!r}")

    def opponent(self, pos: Position, path: Tuple[str, ...], label) -> OpponentNode:
        branches: List[Branch] = []
        default = None
        seen = set()
        while True:
            row = self.lines.peek()
            if row is None:
                raise OracleSyntaxError(self.lines.last_line, "unterminated opponent block")
            line, tokens = row
            if tokens == ["}"]:
                self.lines.take()
                return OpponentNode(tuple(branches), default, label)
            self.lines.take()
            if tokens[0] == "default":
                if len(tokens) < 3 or tokens[1] != "=>":
                    raise OracleSyntaxError(line, "expected: default => <claim>")
                if default is not None:
                    raise OracleSyntaxError(line, "second default claim")
                default, rest = parse_claim(tokens[2:], line)
                if rest:
                    raise OracleSyntaxError(line, "default claims take no justification")
                continue
            if "=>" in tokens:
                k = tokens.index("=>")
                moves = tokens[:k]
                if not 1 <= len(moves) <= 2:
                    raise OracleSyntaxError(line, "a claim line lists one or two moves")
                san, npos = self.play(pos, moves[0], path, line)
                if len(moves) == 2:
                    reply, rpos = self.play(npos, moves[1], path + (san,), line)
                    node: Node = OurMove(reply, self.leaf(rpos, tokens[k + 1:], path + (san, reply), line))
                else:
                    node = self.leaf(npos, tokens[k + 1:], path + (san,), line)
            elif len(tokens) == 3 and tokens[1:] == ["->", "{"]:
                san, npos = self.play(pos, tokens[0], path, line)
                node = self.body(npos, path + (san,))
                self.close()
            else:
                raise OracleSyntaxError(line, f"cannot read branch {' '.join(tokens)!r}")
            if san in seen:
                raise OracleSyntaxError(line, f"duplicate branch {san}")
            seen.add(san)
            branches.append(Branch(san, node))

    def document(self) -> OracleDocument:
        side = None
        root = default_root()
        name = None
        while True:
            row = self.lines.peek()
            if row is None:
                raise OracleSyntaxError(self.lines.last_line, "document has no tree")
            line, tokens = row
            if tokens[0] == "oracle":
                if len(tokens) != 2:
                    raise OracleSyntaxError(line, "expected: oracle <white|black>")
                side = _color(tokens[1], line)
            elif tokens[0] == "root":
                try:
                    root = format_fen(parse_fen(" ".join(tokens[1:])))
                except NotationError as exc:
                    raise OracleSyntaxError(line, str(exc)) from None
            elif tokens[0] == "name":
                if len(tokens) != 2:
                    raise OracleSyntaxError(line, "expected: name \"<text>\"")
                name = tokens[1]
            else:
                break
            self.lines.take()
        if side is None:
            raise OracleSyntaxError(self.lines.peek()[0], "missing 'oracle <white|black>' header")
        tree = self.body(parse_fen(root), ())
        extra = self.lines.peek()
        if extra is not None:
            raise OracleSyntaxError(extra[0], "text after the end of the tree")
        try:
            ids = collect_ids(tree)
        except ValueError as exc:
            raise OracleSyntaxError(0, str(exc)) from None
        for _, node in walk(tree):
            claims = []
            if isinstance(node, Leaf):
                claims.append(node.claim)
            elif isinstance(node, OpponentNode) and node.default is not None:
                claims.append(node.default)
            for c in claims:
                if c.kind is ClaimKind.REF and c.text not in ids:
                    raise DanglingReference(c.text)
        return OracleDocument(side, root, tree, ids, name)


def parse_oracle(text: str) -> OracleDocument:
    return _Parser(text).document()


def load_oracle(path) -> OracleDocument:
    with open(path, encoding="utf-8") as fh:
        return parse_oracle(fh.read())


# ---------------------------------------------------------------------------
# printing


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def format_claim(claim: Claim) -> str:
    k = claim.kind
    if k is ClaimKind.MATE:
        out = f"mate {COLOR_WORDS[claim.color]} {claim.moves}"
    elif k is ClaimKind.CHECKMATE:
        out = "checkmate"
    elif k is ClaimKind.DRAW:
        out = f"draw {_quote(claim.text)}"
    elif k is ClaimKind.CANNOT_WIN:
        out = f"cannotwin {COLOR_WORDS[claim.color]}"
    elif k is ClaimKind.REF:
        out = f"ref {claim.text}"
    else:
        out = f"unverified {_quote(claim.text)}"
    if claim.note is not None:
        out += " " + _quote(claim.note)
    return out


def _leaf_text(leaf: Leaf) -> str:
    out = format_claim(leaf.claim)
    if leaf.justification:
        out += " justify " + " ".join(leaf.justification)
    return out


def _emit(node: Node, indent: int, out: List[str]):
    pad = "  " * indent
    if node.label is not None:
        out.append(f"{pad}id {node.label}")
    if isinstance(node, Leaf):
        out.append(f"{pad}leaf {_leaf_text(node)}")
    elif isinstance(node, OurMove):
        out.append(f"{pad}move {node.san}")
        _emit(node.child, indent, out)
    else:
        out.append(f"{pad}opponent {{")
        inner = pad + "  "
        for b in node.branches:
            n = b.node
            if isinstance(n, Leaf) and n.label is None:
                out.append(f"{inner}{b.san} => {_leaf_text(n)}")
            elif (isinstance(n, OurMove) and n.label is None and isinstance(n.child, Leaf)
                  and n.child.label is None):
                out.append(f"{inner}{b.san} {n.san} => {_leaf_text(n.child)}")
            else:
                out.append(f"{inner}{b.san} -> {{")
                _emit(n, indent + 2, out)
                out.append(f"{inner}}}")
        if node.default is not None:
            out.append(f"{inner}default => {format_claim(node.default)}")
        out.append(f"{pad}}}")


def print_oracle(doc: OracleDocument) -> str:
    out = [f"oracle {COLOR_WORDS[doc.side]}"]
    if doc.name is not None:
        out.append(f"name {_quote(doc.name)}")
    if doc.root_fen != default_root():
        out.append(f"root {doc.root_fen}")
    _emit(doc.tree, 0, out)
    return "\n".join(out) + "\n"
