"""Rules engine for Gardner's 5x5 minichess."""

from .board import (
    BISHOP, BLACK, COLOR_NAMES, KING, KNIGHT, PAWN, QUEEN, ROOK, SQUARE_NAMES, WHITE,
    IllegalMove, InvariantViolation, Move, Piece, Position, apply_move, generate_legal_moves,
    initial_position, is_attacked, is_in_check, parse_square, perft, position_hash,
    square, square_file, square_name, square_rank, validate,
)
from .notation import (
    AmbiguousSAN, NotationError, NotationSyntaxError, UnmatchedSAN, format_fen, format_san,
    parse_fen, parse_san, play_line, split_movetext,
)
from .status import (
    DEFAULT_RULES, GameStatus, Outcome, RuleProfile, game_status, insufficient_material,
    is_checkmate,
)

__all__ = [
    "BISHOP", "BLACK", "COLOR_NAMES", "KING", "KNIGHT", "PAWN", "QUEEN", "ROOK",
    "SQUARE_NAMES", "WHITE", "AmbiguousSAN", "DEFAULT_RULES", "GameStatus", "IllegalMove",
    "InvariantViolation", "Move", "NotationError", "NotationSyntaxError", "Outcome", "Piece",
    "Position", "RuleProfile", "UnmatchedSAN", "apply_move", "format_fen", "format_san",
    "game_status", "generate_legal_moves", "initial_position", "insufficient_material",
    "is_attacked", "is_checkmate", "is_in_check", "parse_fen", "parse_san", "parse_square",
    "perft", "play_line", "position_hash", "split_movetext", "square", "square_file",
    "square_name", "square_rank", "validate",
]
