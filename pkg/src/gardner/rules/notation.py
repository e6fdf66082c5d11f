"""FEN-5 and SAN for the 5x5 board (files b..f, ranks 2..6)."""

from __future__ import annotations

import re
from typing import Iterable, List

from .board import (
    BLACK, FILE_NAMES, KING, PAWN, PIECE_SYMBOLS, RANK_NAMES, SQUARE_NAMES, WHITE,
    Move, Piece, Position, gives_check_packed, legal_packed, make_packed,
    move_captured, move_from, move_kind, move_promotion, move_to, pack_public, square,
    square_file, square_rank, unpack_move, validate,
)


class NotationError(ValueError):
    pass


class NotationSyntaxError(NotationError):
    """Text is not well-formed SAN or FEN-5."""


class AmbiguousSAN(NotationError):
    pass


class UnmatchedSAN(NotationError):
    pass


# ---------------------------------------------------------------------------
# FEN-5


def parse_fen(text: str) -> Position:
    fields = text.split()
    if len(fields) != 4:
        raise NotationSyntaxError(f"FEN-5 needs 4 fields, got {len(fields)}: {text!r}")
    placement, turn, half, full = fields
    rows = placement.split("/")
    if len(rows) != 5:
        raise NotationSyntaxError(f"FEN-5 needs 5 ranks: {placement!r}")
    pieces = {}
    for i, row in enumerate(rows):
        rank = 4 - i
        file = 0
        for ch in row:
            if ch in "12345":
                file += int(ch)
            elif ch.lower() in PIECE_SYMBOLS:
                if file > 4:
                    raise NotationSyntaxError(f"rank {RANK_NAMES[rank]} overflows: {row!r}")
                pieces[square(file, rank)] = Piece.from_symbol(ch)
                file += 1
            else:
                raise NotationSyntaxError(f"bad character {ch!r} in {row!r}")
        if file != 5:
            raise NotationSyntaxError(f"rank {RANK_NAMES[rank]} has {file} squares: {row!r}")
    if turn not in ("w", "b"):
        raise NotationSyntaxError(f"side to move must be w or b: {turn!r}")
    if not (half.isdigit() and full.isdigit()):
        raise NotationSyntaxError(f"bad move counters: {half!r} {full!r}")
    pos = Position.from_pieces(pieces, WHITE if turn == "w" else BLACK, int(half), int(full))
    validate(pos)
    return pos


def format_fen(pos: Position) -> str:
    rows = []
    for rank in range(4, -1, -1):
        row, empty = "", 0
        for file in range(5):
            p = pos.piece_at(square(file, rank))
            if p is None:
                empty += 1
                continue
            if empty:
                row += str(empty)
                empty = 0
            row += p.symbol()
        if empty:
            row += str(empty)
        rows.append(row)
    turn = "w" if pos.turn == WHITE else "b"
    return f"{'/'.join(rows)} {turn} {pos.halfmove_clock} {pos.fullmove_number}"


# ---------------------------------------------------------------------------
# SAN

_SAN_RE = re.compile(r"^([NBRQK])?([b-f])?([2-6])?(x)?([b-f][2-6])(?:=?([QRBN]))?$")


def _san_packed(pos: Position, m: int, legal: List[int]) -> str:
    kind = move_kind(m)
    frm, to = move_from(m), move_to(m)
    capture = move_captured(m) >= 0
    if kind == PAWN:
        san = (FILE_NAMES[square_file(frm)] + "x" if capture else "") + SQUARE_NAMES[to]
        promo = move_promotion(m)
        if promo:
            san += "=" + PIECE_SYMBOLS[promo].upper()
    else:
        san = PIECE_SYMBOLS[kind].upper()
        rivals = [move_from(o) for o in legal
                  if o != m and move_kind(o) == kind and move_to(o) == to]
        if rivals:
            same_file = any(square_file(r) == square_file(frm) for r in rivals)
            same_rank = any(square_rank(r) == square_rank(frm) for r in rivals)
            if not same_file:
                san += FILE_NAMES[square_file(frm)]
            elif not same_rank:
                san += RANK_NAMES[square_rank(frm)]
            else:
                san += SQUARE_NAMES[frm]
        san += ("x" if capture else "") + SQUARE_NAMES[to]
    if gives_check_packed(pos, m):
        san += "+"
    return san


def format_san(pos: Position, move: Move) -> str:
    m = pack_public(pos, move)
    return _san_packed(pos, m, legal_packed(pos))


def san_of_packed(pos: Position, m: int) -> str:
    return _san_packed(pos, m, legal_packed(pos))


def parse_san_packed(pos: Position, text: str) -> int:
    raw = text.strip()
    core = raw.rstrip("+#!?")
    match = _SAN_RE.match(core)
    if not match:
        raise NotationSyntaxError(f"not SAN: {text!r}")
    piece, dfile, drank, _x, dest, promo = match.groups()
    kind = PIECE_SYMBOLS.index(piece.lower()) if piece else PAWN
    to = SQUARE_NAMES.index(dest)
    promo_kind = PIECE_SYMBOLS.index(promo.lower()) if promo else 0
    if promo_kind == KING:
        raise NotationSyntaxError(f"cannot promote to a king: {text!r}")
    candidates = []
    for m in legal_packed(pos):
        if move_kind(m) != kind or move_to(m) != to:
            continue
        frm = move_from(m)
        if dfile and FILE_NAMES[square_file(frm)] != dfile:
            continue
        if drank and RANK_NAMES[square_rank(frm)] != drank:
            continue
        if move_promotion(m) != promo_kind:
            continue
        if kind == PAWN and not dfile and move_captured(m) >= 0:
            continue
        candidates.append(m)
    if not candidates:
        raise UnmatchedSAN(f"no legal move matches {text!r} in {format_fen(pos)}")
    if len(candidates) > 1:
        raise AmbiguousSAN(f"{text!r} is ambiguous in {format_fen(pos)}")
    return candidates[0]


def parse_san(pos: Position, text: str) -> Move:
    return unpack_move(parse_san_packed(pos, text))


def play_line(pos: Position, sans: Iterable[str]) -> Position:
    for san in sans:
        pos = make_packed(pos, parse_san_packed(pos, san))
    return pos


def split_movetext(text: str) -> List[str]:
    """Split ``"1.b4 cxb4 2.cxb4"`` style text into bare SAN tokens."""
    tokens = []
    for tok in re.split(r"\s+", text.strip()):
        tok = re.sub(r"^\d+\.(\.\.)?", "", tok)
        if tok and not re.fullmatch(r"\d+\.(\.\.)?", tok):
            tokens.append(tok)
    return tokens

