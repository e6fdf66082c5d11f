"""Game-end detection under a configurable draw-rule profile."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

from .board import (
    BISHOP, BLACK, KING, KNIGHT, WHITE, Position, has_legal_move, is_in_check, popcount,
)


class Outcome(enum.Enum):
    ONGOING = "ongoing"
    CHECKMATE = "checkmate"
    STALEMATE = "stalemate"
    DRAW_BY_REPETITION = "repetition"
    DRAW_BY_HALFMOVE_RULE = "halfmove"
    DRAW_INSUFFICIENT_MATERIAL = "insufficient"

    @property
    def is_draw(self) -> bool:
        return self not in (Outcome.ONGOING, Outcome.CHECKMATE)


@dataclass(frozen=True)
class GameStatus:
    outcome: Outcome
    loser: Optional[int] = None  # set for checkmate only

    def __str__(self) -> str:
        if self.outcome is Outcome.CHECKMATE:
            return f"checkmate ({'white' if self.loser == WHITE else 'black'} is mated)"
        return self.outcome.value


@dataclass(frozen=True)
class RuleProfile:
    """Draw rules. ``halfmove_limit`` of None disables the clock rule."""

    repetition: int = 3
    halfmove_limit: Optional[int] = None

    def __post_init__(self):
        if self.repetition < 2:
            raise ValueError("repetition threshold must be at least 2")


DEFAULT_RULES = RuleProfile()


def insufficient_material(pos: Position) -> bool:
    """K vs K, K+B vs K and K+N vs K."""
    white = pos.occ[WHITE] & ~pos.bbs[KING]
    black = pos.occ[BLACK] & ~pos.bbs[6 + KING]
    if white and black:
        return False
    rest = white | black
    if not rest:
        return True
    if popcount(rest) > 1:
        return False
    minors = pos.bbs[KNIGHT] | pos.bbs[BISHOP] | pos.bbs[6 + KNIGHT] | pos.bbs[6 + BISHOP]
    return bool(rest & minors)


def game_status(pos: Position, history: Sequence[int] = (),
                rules: RuleProfile = DEFAULT_RULES) -> GameStatus:
    """``history`` holds hashes of all earlier positions of the line."""
    if not has_legal_move(pos):
        if is_in_check(pos, pos.turn):
            return GameStatus(Outcome.CHECKMATE, pos.turn)
        return GameStatus(Outcome.STALEMATE)
    if sum(1 for h in history if h == pos.key) + 1 >= rules.repetition:
        return GameStatus(Outcome.DRAW_BY_REPETITION)
    if rules.halfmove_limit is not None and pos.halfmove_clock >= rules.halfmove_limit:
        return GameStatus(Outcome.DRAW_BY_HALFMOVE_RULE)
    if insufficient_material(pos):
        return GameStatus(Outcome.DRAW_INSUFFICIENT_MATERIAL)
    return GameStatus(Outcome.ONGOING)


def is_checkmate(pos: Position) -> bool:
    return is_in_check(pos, pos.turn) and not has_legal_move(pos)
