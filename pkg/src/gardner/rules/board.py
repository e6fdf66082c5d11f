"""Board representation and legal move generation for Gardner's 5x5 chess.

Squares are integers ``rank * 5 + file`` with file 0..4 displayed as b..f and
rank 0..4 displayed as 2..6, so square 0 is ``b2`` (White's lower left corner).
Every position keeps one 25-bit mask per (color, kind); sliding attacks come
from small precomputed occupancy tables.

Internally moves are packed into ints for the search code::

    bits  0-4   from square
    bits  5-9   to square
    bits 10-12  promotion kind (0 = none)
    bits 13-15  moving kind
    bits 16-18  captured kind + 1 (0 = quiet)
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Tuple

WHITE = 0
BLACK = 1
COLORS = (WHITE, BLACK)
COLOR_NAMES = ("white", "black")

PAWN, KNIGHT, BISHOP, ROOK, QUEEN, KING = range(6)
KINDS = (PAWN, KNIGHT, BISHOP, ROOK, QUEEN, KING)
PIECE_SYMBOLS = "pnbrqk"
PROMOTION_KINDS = (QUEEN, ROOK, BISHOP, KNIGHT)

FILE_NAMES = "bcdef"
RANK_NAMES = "23456"
SQUARES = range(25)
SQUARE_NAMES = [f + r for r in RANK_NAMES for f in FILE_NAMES]
BB_ALL = (1 << 25) - 1

# White promotes on rank index 4, Black on rank index 0.
PROMOTION_RANK = (4, 0)


class IllegalMove(ValueError):
    """Raised when a move is not legal in the given position."""


class InvariantViolation(ValueError):
    """Raised when a position breaks one of the board invariants."""


def square(file: int, rank: int) -> int:
    return rank * 5 + file


def square_file(sq: int) -> int:
    return sq % 5


def square_rank(sq: int) -> int:
    return sq // 5


def square_name(sq: int) -> str:
    return SQUARE_NAMES[sq]


def parse_square(name: str) -> int:
    try:
        return SQUARE_NAMES.index(name)
    except ValueError:
        raise ValueError(f"not a square of the 5x5 board: {name!r}") from None


def other(color: int) -> int:
    return color ^ 1


@dataclass(frozen=True)
class Piece:
    color: int
    kind: int

    def symbol(self) -> str:
        s = PIECE_SYMBOLS[self.kind]
        return s.upper() if self.color == WHITE else s

    @classmethod
    def from_symbol(cls, symbol: str) -> "Piece":
        return cls(WHITE if symbol.isupper() else BLACK, PIECE_SYMBOLS.index(symbol.lower()))


@dataclass(frozen=True)
class Move:
    from_square: int
    to_square: int
    promotion: Optional[int] = None
    is_capture: bool = False

    def uci(self) -> str:
        promo = PIECE_SYMBOLS[self.promotion] if self.promotion else ""
        return SQUARE_NAMES[self.from_square] + SQUARE_NAMES[self.to_square] + promo

    def __str__(self) -> str:
        return self.uci()


# ---------------------------------------------------------------------------
# Precomputed tables


def _step_targets(sq: int, deltas) -> int:
    f, r = square_file(sq), square_rank(sq)
    bb = 0
    for df, dr in deltas:
        nf, nr = f + df, r + dr
        if 0 <= nf < 5 and 0 <= nr < 5:
            bb |= 1 << square(nf, nr)
    return bb


_KNIGHT_DELTAS = ((1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2))
_KING_DELTAS = ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1))
_ROOK_DIRS = ((1, 0), (-1, 0), (0, 1), (0, -1))
_BISHOP_DIRS = ((1, 1), (1, -1), (-1, 1), (-1, -1))

KNIGHT_ATTACKS = [_step_targets(sq, _KNIGHT_DELTAS) for sq in SQUARES]
KING_ATTACKS = [_step_targets(sq, _KING_DELTAS) for sq in SQUARES]
# PAWN_ATTACKS[color][sq]: squares a pawn of `color` on `sq` attacks.
PAWN_ATTACKS = [
    [_step_targets(sq, ((-1, 1), (1, 1))) for sq in SQUARES],
    [_step_targets(sq, ((-1, -1), (1, -1))) for sq in SQUARES],
]


def _ray(sq: int, df: int, dr: int) -> List[int]:
    out = []
    f, r = square_file(sq) + df, square_rank(sq) + dr
    while 0 <= f < 5 and 0 <= r < 5:
        out.append(square(f, r))
        f += df
        r += dr
    return out


def _slider_attacks(sq: int, occ: int, dirs) -> int:
    bb = 0
    for df, dr in dirs:
        for t in _ray(sq, df, dr):
            bb |= 1 << t
            if occ >> t & 1:
                break
    return bb


def _subsets(mask: int) -> Iterator[int]:
    sub = 0
    while True:
        yield sub
        sub = (sub - mask) & mask
        if sub == 0:
            return


def _build_slider_table(dirs) -> Tuple[List[int], List[Dict[int, int]]]:
    masks, tables = [], []
    for sq in SQUARES:
        mask = 0
        for df, dr in dirs:
            # the last square of a ray never blocks anything beyond it
            for t in _ray(sq, df, dr)[:-1]:
                mask |= 1 << t
        masks.append(mask)
        tables.append({sub: _slider_attacks(sq, sub, dirs) for sub in _subsets(mask)})
    return masks, tables


ROOK_MASKS, ROOK_TABLES = _build_slider_table(_ROOK_DIRS)
BISHOP_MASKS, BISHOP_TABLES = _build_slider_table(_BISHOP_DIRS)


def rook_attacks(sq: int, occ: int) -> int:
    return ROOK_TABLES[sq][occ & ROOK_MASKS[sq]]


def bishop_attacks(sq: int, occ: int) -> int:
    return BISHOP_TABLES[sq][occ & BISHOP_MASKS[sq]]


def iter_bits(bb: int) -> Iterator[int]:
    while bb:
        low = bb & -bb
        yield low.bit_length() - 1
        bb ^= low


def popcount(bb: int) -> int:
    return bin(bb).count("1")


# ---------------------------------------------------------------------------
# Zobrist keys

_rng = random.Random(0x5A5A_0405)
ZOBRIST_PIECE = [[_rng.getrandbits(64) for _ in SQUARES] for _ in range(12)]
ZOBRIST_BLACK_TO_MOVE = _rng.getrandbits(64)
del _rng


# ---------------------------------------------------------------------------
# Packed move helpers


def pack_move(frm: int, to: int, promo: int, kind: int, captured: int) -> int:
    """``captured`` is the captured kind or -1."""
    return frm | to << 5 | promo << 10 | kind << 13 | (captured + 1) << 16


def move_from(m: int) -> int:
    return m & 31


def move_to(m: int) -> int:
    return m >> 5 & 31


def move_promotion(m: int) -> int:
    return m >> 10 & 7


def move_kind(m: int) -> int:
    return m >> 13 & 7


def move_captured(m: int) -> int:
    return (m >> 16 & 7) - 1


def unpack_move(m: int) -> Move:
    promo = m >> 10 & 7
    return Move(m & 31, m >> 5 & 31, promo or None, (m >> 16 & 7) != 0)


# ---------------------------------------------------------------------------
# Position


class Position:
    """Immutable game state: piece masks, side to move and move counters.

    ``bbs[color * 6 + kind]`` is the 25-bit mask of that piece type.
    """

    __slots__ = ("bbs", "occ", "turn", "halfmove_clock", "fullmove_number", "key")

    def __init__(self, bbs, turn: int = WHITE, halfmove_clock: int = 0,
                 fullmove_number: int = 1, key: Optional[int] = None):
        bbs = tuple(bbs)
        white = bbs[0] | bbs[1] | bbs[2] | bbs[3] | bbs[4] | bbs[5]
        black = bbs[6] | bbs[7] | bbs[8] | bbs[9] | bbs[10] | bbs[11]
        self.bbs = bbs
        self.occ = (white, black)
        self.turn = turn
        self.halfmove_clock = halfmove_clock
        self.fullmove_number = fullmove_number
        self.key = compute_hash(bbs, turn) if key is None else key

    # -- construction -----------------------------------------------------

    @classmethod
    def from_pieces(cls, pieces: Dict[int, Piece], turn: int = WHITE,
                    halfmove_clock: int = 0, fullmove_number: int = 1) -> "Position":
        bbs = [0] * 12
        for sq, piece in pieces.items():
            bbs[piece.color * 6 + piece.kind] |= 1 << sq
        return cls(bbs, turn, halfmove_clock, fullmove_number)

    # -- queries ----------------------------------------------------------

    def piece_at(self, sq: int) -> Optional[Piece]:
        bit = 1 << sq
        if not (self.occ[0] | self.occ[1]) & bit:
            return None
        for idx, bb in enumerate(self.bbs):
            if bb & bit:
                return Piece(idx // 6, idx % 6)
        raise AssertionError("occupancy out of sync")

    def piece_map(self) -> Dict[int, Piece]:
        out = {}
        for idx, bb in enumerate(self.bbs):
            for sq in iter_bits(bb):
                out[sq] = Piece(idx // 6, idx % 6)
        return out

    def pieces(self, color: int, kind: int) -> int:
        return self.bbs[color * 6 + kind]

    def king(self, color: int) -> int:
        bb = self.bbs[color * 6 + KING]
        return bb.bit_length() - 1

    def is_check(self) -> bool:
        return is_in_check(self, self.turn)

    def legal_moves(self) -> List[Move]:
        return generate_legal_moves(self)

    def push(self, move: Move) -> "Position":
        return apply_move(self, move)

    def fen(self) -> str:
        from .notation import format_fen
        return format_fen(self)

    def mirror(self) -> "Position":
        """Rotate the board 180 degrees and swap colors."""
        bbs = [0] * 12
        for idx, bb in enumerate(self.bbs):
            color, kind = divmod(idx, 6)
            for sq in iter_bits(bb):
                bbs[(color ^ 1) * 6 + kind] |= 1 << (24 - sq)
        return Position(bbs, self.turn ^ 1, self.halfmove_clock, self.fullmove_number)

    # -- value semantics ----------------------------------------------------

    def _state(self):
        return (self.bbs, self.turn, self.halfmove_clock, self.fullmove_number)

    def __eq__(self, other_pos) -> bool:
        if not isinstance(other_pos, Position):
            return NotImplemented
        return self._state() == other_pos._state()

    def __hash__(self) -> int:
        return hash(self._state())

    def __repr__(self) -> str:
        return f"Position({self.fen()!r})"

    def __str__(self) -> str:
        rows = []
        for rank in range(4, -1, -1):
            row = []
            for file in range(5):
                p = self.piece_at(square(file, rank))
                row.append(p.symbol() if p else ".")
            rows.append(RANK_NAMES[rank] + " " + " ".join(row))
        rows.append("  " + " ".join(FILE_NAMES))
        return "\n".join(rows)


def compute_hash(bbs, turn: int) -> int:
    key = ZOBRIST_BLACK_TO_MOVE if turn == BLACK else 0
    for idx, bb in enumerate(bbs):
        table = ZOBRIST_PIECE[idx]
        while bb:
            low = bb & -bb
            key ^= table[low.bit_length() - 1]
            bb ^= low
    return key


def position_hash(pos: Position) -> int:
    """64-bit Zobrist key of the placement and side to move."""
    return pos.key


def initial_position() -> Position:
    back = (ROOK, KNIGHT, BISHOP, QUEEN, KING)
    pieces = {}
    for f, kind in enumerate(back):
        pieces[square(f, 0)] = Piece(WHITE, kind)
        pieces[square(f, 1)] = Piece(WHITE, PAWN)
        pieces[square(f, 3)] = Piece(BLACK, PAWN)
        pieces[square(f, 4)] = Piece(BLACK, kind)
    return Position.from_pieces(pieces)


def validate(pos: Position) -> None:
    """Raise InvariantViolation unless ``pos`` could occur in a legal game."""
    for color in COLORS:
        name = COLOR_NAMES[color]
        if popcount(pos.bbs[color * 6 + KING]) != 1:
            raise InvariantViolation(f"{name} must have exactly one king")
        if popcount(pos.bbs[color * 6 + PAWN]) > 5:
            raise InvariantViolation(f"{name} has more than 5 pawns")
        if popcount(pos.occ[color]) > 10:
            raise InvariantViolation(f"{name} has more than 10 pieces")
    overlap = 0
    seen = 0
    for bb in pos.bbs:
        overlap |= seen & bb
        seen |= bb
    if overlap:
        raise InvariantViolation("two pieces share a square")
    rank_mask = [0b11111 << (5 * PROMOTION_RANK[c]) for c in COLORS]
    if pos.bbs[PAWN] & rank_mask[WHITE] or pos.bbs[6 + PAWN] & rank_mask[BLACK]:
        raise InvariantViolation("pawn on its promotion rank")
    if pos.bbs[PAWN] & (0b11111) or pos.bbs[6 + PAWN] & (0b11111 << 20):
        raise InvariantViolation("pawn on its own back rank")
    if KING_ATTACKS[pos.king(WHITE)] & pos.bbs[6 + KING]:
        raise InvariantViolation("kings are adjacent")
    if is_in_check(pos, pos.turn ^ 1):
        raise InvariantViolation("side not to move is in check")
    if pos.halfmove_clock < 0 or pos.fullmove_number < 1:
        raise InvariantViolation("bad move counters")


# ---------------------------------------------------------------------------
# Attacks


def attackers_mask(bbs, occ_all: int, sq: int, by: int) -> int:
    base = by * 6
    return ((KNIGHT_ATTACKS[sq] & bbs[base + KNIGHT])
            | (KING_ATTACKS[sq] & bbs[base + KING])
            | (PAWN_ATTACKS[by ^ 1][sq] & bbs[base + PAWN])
            | (rook_attacks(sq, occ_all) & (bbs[base + ROOK] | bbs[base + QUEEN]))
            | (bishop_attacks(sq, occ_all) & (bbs[base + BISHOP] | bbs[base + QUEEN])))


def is_attacked(pos: Position, sq: int, by: int) -> bool:
    return attackers_mask(pos.bbs, pos.occ[0] | pos.occ[1], sq, by) != 0


def is_in_check(pos: Position, color: int) -> bool:
    ksq = pos.bbs[color * 6 + KING].bit_length() - 1
    if ksq < 0:
        return False
    return attackers_mask(pos.bbs, pos.occ[0] | pos.occ[1], ksq, color ^ 1) != 0


def piece_attacks(kind: int, color: int, sq: int, occ_all: int) -> int:
    if kind == KNIGHT:
        return KNIGHT_ATTACKS[sq]
    if kind == BISHOP:
        return bishop_attacks(sq, occ_all)
    if kind == ROOK:
        return rook_attacks(sq, occ_all)
    if kind == QUEEN:
        return bishop_attacks(sq, occ_all) | rook_attacks(sq, occ_all)
    if kind == KING:
        return KING_ATTACKS[sq]
    return PAWN_ATTACKS[color][sq]


# ---------------------------------------------------------------------------
# Move generation (packed ints)


def _captured_kind(bbs, base: int, bit: int) -> int:
    for k in range(6):
        if bbs[base + k] & bit:
            return k
    return -1


def pseudo_legal(pos: Position) -> List[int]:
    bbs = pos.bbs
    us = pos.turn
    them = us ^ 1
    own = pos.occ[us]
    enemy = pos.occ[them]
    occ_all = own | enemy
    ebase = them * 6
    ubase = us * 6
    out: List[int] = []
    append = out.append

    # pawns
    pawns = bbs[ubase]
    step = 5 if us == WHITE else -5
    promo_rank = PROMOTION_RANK[us]
    pattacks = PAWN_ATTACKS[us]
    while pawns:
        low = pawns & -pawns
        frm = low.bit_length() - 1
        pawns ^= low
        to = frm + step
        targets = pattacks[frm] & enemy
        if not occ_all >> to & 1:
            if to // 5 == promo_rank:
                for pk in PROMOTION_KINDS:
                    append(frm | to << 5 | pk << 10)
            else:
                append(frm | to << 5)
        while targets:
            tl = targets & -targets
            t = tl.bit_length() - 1
            targets ^= tl
            cap = (_captured_kind(bbs, ebase, tl) + 1) << 16
            if t // 5 == promo_rank:
                for pk in PROMOTION_KINDS:
                    append(frm | t << 5 | pk << 10 | cap)
            else:
                append(frm | t << 5 | cap)

    notown = ~own
    for kind in (KNIGHT, BISHOP, ROOK, QUEEN, KING):
        pcs = bbs[ubase + kind]
        kbits = kind << 13
        while pcs:
            low = pcs & -pcs
            frm = low.bit_length() - 1
            pcs ^= low
            if kind == KNIGHT:
                targets = KNIGHT_ATTACKS[frm]
            elif kind == BISHOP:
                targets = BISHOP_TABLES[frm][occ_all & BISHOP_MASKS[frm]]
            elif kind == ROOK:
                targets = ROOK_TABLES[frm][occ_all & ROOK_MASKS[frm]]
            elif kind == QUEEN:
                targets = (BISHOP_TABLES[frm][occ_all & BISHOP_MASKS[frm]]
                           | ROOK_TABLES[frm][occ_all & ROOK_MASKS[frm]])
            else:
                targets = KING_ATTACKS[frm]
            targets &= notown
            base = frm | kbits
            while targets:
                tl = targets & -targets
                t = tl.bit_length() - 1
                targets ^= tl
                if enemy & tl:
                    append(base | t << 5 | (_captured_kind(bbs, ebase, tl) + 1) << 16)
                else:
                    append(base | t << 5)
    return out


def is_legal_packed(pos: Position, m: int) -> bool:
    """True if the pseudo-legal packed move does not leave the mover in check."""
    bbs = pos.bbs
    us = pos.turn
    them = us ^ 1
    frm = m & 31
    to = m >> 5 & 31
    fb = 1 << frm
    tb = 1 << to
    occ2 = ((pos.occ[0] | pos.occ[1]) & ~fb) | tb
    if (m >> 13 & 7) == KING:
        ksq = to
    else:
        ksq = bbs[us * 6 + KING].bit_length() - 1
    keep = ~tb
    eb = them * 6
    if KNIGHT_ATTACKS[ksq] & bbs[eb + KNIGHT] & keep:
        return False
    if PAWN_ATTACKS[us][ksq] & bbs[eb] & keep:
        return False
    if KING_ATTACKS[ksq] & bbs[eb + KING]:
        return False
    q = bbs[eb + QUEEN]
    if ROOK_TABLES[ksq][occ2 & ROOK_MASKS[ksq]] & (bbs[eb + ROOK] | q) & keep:
        return False
    if BISHOP_TABLES[ksq][occ2 & BISHOP_MASKS[ksq]] & (bbs[eb + BISHOP] | q) & keep:
        return False
    return True


def legal_packed(pos: Position) -> List[int]:
    return [m for m in pseudo_legal(pos) if is_legal_packed(pos, m)]


def has_legal_move(pos: Position) -> bool:
    for m in pseudo_legal(pos):
        if is_legal_packed(pos, m):
            return True
    return False


def make_packed(pos: Position, m: int) -> Position:
    """Apply a packed move without legality checks."""
    us = pos.turn
    frm = m & 31
    to = m >> 5 & 31
    promo = m >> 10 & 7
    kind = m >> 13 & 7
    cap = (m >> 16 & 7) - 1
    bbs = list(pos.bbs)
    pi = us * 6 + kind
    zp = ZOBRIST_PIECE
    key = pos.key ^ ZOBRIST_BLACK_TO_MOVE ^ zp[pi][frm]
    bbs[pi] ^= 1 << frm
    if promo:
        bbs[us * 6 + promo] |= 1 << to
        key ^= zp[us * 6 + promo][to]
    else:
        bbs[pi] |= 1 << to
        key ^= zp[pi][to]
    if cap >= 0:
        ci = (us ^ 1) * 6 + cap
        bbs[ci] ^= 1 << to
        key ^= zp[ci][to]
        halfmove = 0
    elif kind == PAWN:
        halfmove = 0
    else:
        halfmove = pos.halfmove_clock + 1
    fullmove = pos.fullmove_number + 1 if us == BLACK else pos.fullmove_number
    return Position(bbs, us ^ 1, halfmove, fullmove, key)


def gives_check_packed(pos: Position, m: int) -> bool:
    return is_in_check(make_packed(pos, m), pos.turn ^ 1)


# ---------------------------------------------------------------------------
# Public move API


def _display_key(sq: int) -> Tuple[int, int]:
    # left to right, then top to bottom
    return (square_file(sq), -square_rank(sq))


_PROMO_ORDER = {0: 0, QUEEN: 1, ROOK: 2, BISHOP: 3, KNIGHT: 4}


def move_order_key(m: int) -> Tuple:
    """Pawn moves first by from-file, then pieces in N,B,R,Q,K order."""
    return (move_kind(m), _display_key(move_from(m)), _display_key(move_to(m)),
            _PROMO_ORDER[move_promotion(m)])


def pack_public(pos: Position, move: Move) -> int:
    """Find the packed encoding of ``move`` among the legal moves of ``pos``."""
    for m in legal_packed(pos):
        if (m & 31) == move.from_square and (m >> 5 & 31) == move.to_square \
                and (m >> 10 & 7) == (move.promotion or 0):
            return m
    raise IllegalMove(f"{move.uci()} is not legal in {pos.fen()}")


def generate_legal_moves(pos: Position) -> List[Move]:
    return [unpack_move(m) for m in sorted(legal_packed(pos), key=move_order_key)]


def apply_move(pos: Position, move: Move) -> Position:
    return make_packed(pos, pack_public(pos, move))


def perft(pos: Position, depth: int) -> int:
    if depth == 0:
        return 1
    moves = legal_packed(pos)
    if depth == 1:
        return len(moves)
    return sum(perft(make_packed(pos, m), depth - 1) for m in moves)
