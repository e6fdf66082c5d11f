import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from gardner.oracle.bundle import load_bundle  # noqa: E402
from gardner.rules.board import (  # noqa: E402
    BLACK, Position, initial_position, legal_packed, make_packed, move_captured, move_from,
    move_kind, move_promotion, move_to,
)


def random_positions(count: int, seed: int, max_plies: int = 40):
    """Positions sampled from seeded random playouts of the initial position."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        pos = initial_position()
        for _ in range(rng.randrange(1, max_plies)):
            moves = legal_packed(pos)
            if not moves:
                break
            pos = make_packed(pos, rng.choice(moves))
        out.append(pos)
    return out


@pytest.fixture(scope="session")
def bundle():
    return load_bundle()


@pytest.fixture(scope="session")
def docs(bundle):
    return {entry.file[:-4]: doc for entry, doc in bundle}


def regression_queries(bundle):
    """The 50 mate queries on which TT-on and TT-off answers must agree.

    Every bundled mate claim with x <= 4, the initial position at x = 1 and 2,
    and the first eleven of those claims asked one move short.
    """
    from gardner.oracle.model import ClaimKind, leaves
    from gardner.rules.notation import play_line

    claims = []
    for _, doc in bundle:
        for path, leaf in leaves(doc.tree):
            c = leaf.claim
            if c.kind is ClaimKind.MATE and c.moves <= 4:
                claims.append((play_line(doc.root_position, path), c.color ^ 1, c.moves))
    start = initial_position()
    queries = claims + [(start, 0, 1), (start, 0, 2)]
    queries += [(p, a, x - 1) for p, a, x in claims if x >= 2][:11]
    return queries


def revert_move(child: Position, m: int, parent_clock: int) -> Position:
    """Undo a packed move using only its encoded fields."""
    mover = child.turn ^ 1
    bbs = list(child.bbs)
    frm, to, kind = move_from(m), move_to(m), move_kind(m)
    placed = mover * 6 + (move_promotion(m) or kind)
    bbs[placed] &= ~(1 << to)
    bbs[mover * 6 + kind] |= 1 << frm
    if move_captured(m) >= 0:
        bbs[(mover ^ 1) * 6 + move_captured(m)] |= 1 << to
    full = child.fullmove_number - (1 if mover == BLACK else 0)
    return Position(bbs, mover, parent_clock, full)


def position_state(pos: Position):
    """Every field that make/unmake must restore."""
    return (pos.bbs, pos.occ, pos.turn, pos.halfmove_clock, pos.fullmove_number, pos.key)
