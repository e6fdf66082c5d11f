"""Bounded forced-mate prover, non-loss checker and a small evaluation.

The prover is a depth-first AND/OR search over the packed-move engine with
iterative deepening on the number of attacker moves. Results for a position
are cached per attacker as ``(smallest proven ply bound, largest disproven ply
bound, move)``; neither bound ever moves backwards.

Repetitions are not tracked inside the search. Following a proof that always
steps to a position of strictly smaller mate distance never revisits a
position, so a bounded mate exists with or without "repetition = failure for
the attacker"; stalemate is a failure for the attacker.
"""

from __future__ import annotations

import enum
import threading
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .rules.board import (
    BISHOP, KING, QUEEN, ROOK, BISHOP_MASKS, BISHOP_TABLES,
    KNIGHT_ATTACKS, PAWN_ATTACKS, ROOK_MASKS, ROOK_TABLES, Position, has_legal_move,
    is_in_check, legal_packed, make_packed, popcount, pseudo_legal, is_legal_packed,
)
from .rules.notation import san_of_packed

DEFAULT_MAX_NODES = 10_000_000
DEFAULT_MAX_SECONDS = 60.0


@dataclass(frozen=True)
class Budget:
    max_nodes: Optional[int] = DEFAULT_MAX_NODES
    max_seconds: Optional[float] = DEFAULT_MAX_SECONDS

    def scaled(self, factor: float) -> "Budget":
        return Budget(
            None if self.max_nodes is None else int(self.max_nodes * factor),
            None if self.max_seconds is None else self.max_seconds * factor,
        )


class MateStatus(enum.Enum):
    PROVEN = "proven"
    DISPROVEN = "disproven"
    UNKNOWN = "unknown"


@dataclass
class MateResult:
    status: MateStatus
    moves: Optional[int] = None          # attacker moves of the proof found
    pv: List[str] = field(default_factory=list)
    nodes: int = 0
    seconds: float = 0.0
    exhausted: Optional[str] = None      # "nodes" or "time" when UNKNOWN

    @property
    def proven(self) -> bool:
        return self.status is MateStatus.PROVEN


class _OutOfBudget(Exception):
    def __init__(self, which: str):
        self.which = which


class TranspositionTable:
    """Per-attacker cache of proven/disproven ply bounds.

    Entries are tuples replaced as a whole, so concurrent readers only ever see
    complete entries.
    """

    INF = 1 << 30

    def __init__(self, max_entries: int = 4_000_000):
        self.max_entries = max_entries
        self._tables: Tuple[Dict[int, tuple], Dict[int, tuple]] = ({}, {})
        self._lock = threading.Lock()

    def table(self, attacker: int) -> Dict[int, tuple]:
        return self._tables[attacker]

    def clear(self) -> None:
        for t in self._tables:
            t.clear()

    def __len__(self) -> int:
        return sum(len(t) for t in self._tables)

    def prune(self) -> None:
        with self._lock:
            for t in self._tables:
                if len(t) > self.max_entries:
                    # keep proofs, drop the rest
                    keep = {k: v for k, v in t.items() if v[0] < self.INF}
                    t.clear()
                    if len(keep) <= self.max_entries:
                        t.update(keep)


# ---------------------------------------------------------------------------
# Move ordering helpers

_VALUE = (1, 3, 3, 5, 9, 0)


def _check_candidates(pos: Position) -> Tuple[List[int], int]:
    """Squares that give direct check per attacker kind, and discovery sources."""
    us = pos.turn
    them = us ^ 1
    bbs = pos.bbs
    ksq = bbs[them * 6 + KING].bit_length() - 1
    occ = pos.occ[0] | pos.occ[1]
    ratt = ROOK_TABLES[ksq][occ & ROOK_MASKS[ksq]]
    batt = BISHOP_TABLES[ksq][occ & BISHOP_MASKS[ksq]]
    direct = [PAWN_ATTACKS[them][ksq], KNIGHT_ATTACKS[ksq], batt, ratt, ratt | batt, 0]
    own = pos.occ[us]
    base = us * 6
    rq = bbs[base + ROOK] | bbs[base + QUEEN]
    bq = bbs[base + BISHOP] | bbs[base + QUEEN]
    disc = 0
    for blockers, table, masks, sliders in ((ratt & own, ROOK_TABLES, ROOK_MASKS, rq),
                                            (batt & own, BISHOP_TABLES, BISHOP_MASKS, bq)):
        while blockers:
            low = blockers & -blockers
            blockers ^= low
            o2 = occ ^ low
            if table[ksq][o2 & masks[ksq]] & sliders:
                disc |= low
    return direct, disc


def _maybe_checks(pos: Position, moves: List[int]) -> Tuple[List[int], List[int]]:
    """Split moves into possible checks (superset) and the rest."""
    direct, disc = _check_candidates(pos)
    checks, rest = [], []
    for m in moves:
        kind = m >> 13 & 7
        if (m >> 10 & 7) or (direct[kind] >> (m >> 5 & 31) & 1) or (disc >> (m & 31) & 1):
            checks.append(m)
        else:
            rest.append(m)
    return checks, rest


def _capture_key(m: int) -> int:
    cap = (m >> 16 & 7)
    if not cap:
        return 0
    return 10 * _VALUE[cap - 1] - _VALUE[m >> 13 & 7]


# ---------------------------------------------------------------------------
# The AND/OR prover


class MateSearch:
    """Bounded mate prover for one attacker color.

    ``use_tt=False`` disables caching (for transparency checks); budgets count
    every visited node across the whole query.
    """

    def __init__(self, attacker: int, budget: Budget = Budget(),
                 tt: Optional[TranspositionTable] = None, use_tt: bool = True):
        self.attacker = attacker
        self.budget = budget
        self.use_tt = use_tt
        self.tt = tt if tt is not None else TranspositionTable()
        self.table = self.tt.table(attacker) if use_tt else {}
        self.nodes = 0
        self._deadline = None
        self._max_nodes = budget.max_nodes
        self._started = 0.0

    # -- budget -------------------------------------------------------------

    def _start(self) -> None:
        self._started = time.perf_counter()
        if self.budget.max_seconds is not None:
            self._deadline = self._started + self.budget.max_seconds

    def _tick(self) -> None:
        self.nodes += 1
        if self._max_nodes is not None and self.nodes > self._max_nodes:
            raise _OutOfBudget("nodes")
        if self._deadline is not None and not self.nodes & 1023:
            if time.perf_counter() > self._deadline:
                raise _OutOfBudget("time")

    # -- search -------------------------------------------------------------

    def attack(self, pos: Position, depth: int) -> bool:
        """Attacker to move: can it mate within ``depth`` plies (odd)?"""
        self._tick()
        key = pos.key
        table = self.table
        entry = table.get(key) if self.use_tt else None
        hint = 0
        if entry is not None:
            if entry[0] <= depth:
                return True
            if entry[1] >= depth:
                return False
            hint = entry[2]
        moves = pseudo_legal(pos)
        if depth == 1:
            checks, _ = _maybe_checks(pos, moves)
            for m in checks:
                if not is_legal_packed(pos, m):
                    continue
                child = make_packed(pos, m)
                if is_in_check(child, child.turn) and not has_legal_move(child):
                    self._store(key, entry, proven=1, move=m)
                    return True
            self._store(key, entry, disproven=1)
            return False
        checks, rest = _maybe_checks(pos, moves)
        checks.sort(key=_capture_key, reverse=True)
        rest.sort(key=_capture_key, reverse=True)
        ordered = checks + rest
        if hint and hint in moves:
            ordered.remove(hint)
            ordered.insert(0, hint)
        for m in ordered:
            if not is_legal_packed(pos, m):
                continue
            if self.defend(make_packed(pos, m), depth - 1):
                self._store(key, entry, proven=depth, move=m)
                return True
        self._store(key, entry, disproven=depth)
        return False

    def defend(self, pos: Position, depth: int) -> bool:
        """Defender to move: is it mated within ``depth`` plies (even) whatever it does?"""
        self._tick()
        moves = [m for m in pseudo_legal(pos) if is_legal_packed(pos, m)]
        if not moves:
            return is_in_check(pos, pos.turn)
        if depth == 0:
            return False
        key = pos.key
        entry = self.table.get(key) if self.use_tt else None
        hint = 0
        if entry is not None:
            if entry[0] <= depth:
                return True
            if entry[1] >= depth:
                return False
            hint = entry[2]
        moves.sort(key=_capture_key, reverse=True)
        if hint and hint in moves:
            moves.remove(hint)
            moves.insert(0, hint)
        for m in moves:
            if not self.attack(make_packed(pos, m), depth - 1):
                self._store(key, entry, disproven=depth, move=m)
                return False
        self._store(key, entry, proven=depth)
        return True

    def _store(self, key: int, entry, proven: int = 0, disproven: int = 0, move: int = 0):
        if not self.use_tt:
            return
        INF = TranspositionTable.INF
        if entry is None:
            entry = self.table.get(key, (INF, -1, 0))
        p, d, mv = entry
        if proven and proven < p:
            p = proven
            mv = move or mv
        if disproven and disproven > d:
            d = disproven
            if move and p == INF:
                mv = move
        self.table[key] = (p, d, mv)

    def proves(self, pos: Position, plies: int) -> bool:
        if plies <= 0:
            return pos.turn != self.attacker and is_in_check(pos, pos.turn) \
                and not has_legal_move(pos)
        if pos.turn == self.attacker:
            if plies % 2 == 0:
                plies -= 1
            return self.attack(pos, plies)
        if plies % 2:
            plies -= 1
        return self.defend(pos, plies)

    # -- principal variation -------------------------------------------------

    def _min_plies(self, pos: Position, limit: int) -> Optional[int]:
        start = 1 if pos.turn == self.attacker else 0
        for plies in range(start, limit + 1, 2):
            if self.proves(pos, plies):
                return plies
        return None

    def principal_variation(self, pos: Position, plies: int) -> List[int]:
        """Attacker plays a fastest mate; defender plays a longest resistance."""
        line: List[int] = []
        remaining = self._min_plies(pos, plies)
        while remaining:
            if pos.turn == self.attacker:
                best = None
                for m in legal_packed(pos):
                    child = make_packed(pos, m)
                    if self.proves(child, remaining - 1):
                        best = m
                        break
                if best is None:
                    raise AssertionError("proof vanished while extracting the PV")
            else:
                best, best_d = None, -1
                for m in legal_packed(pos):
                    d = self._min_plies(make_packed(pos, m), remaining - 1)
                    if d is None:
                        raise AssertionError("defender escape inside a proven node")
                    if d > best_d:
                        best, best_d = m, d
            line.append(best)
            pos = make_packed(pos, best)
            remaining -= 1
        return line


def mate_plies(pos: Position, attacker: int, max_moves: int) -> int:
    """Ply bound for mate in ``max_moves`` attacker moves from ``pos``."""
    return 2 * max_moves - 1 if pos.turn == attacker else 2 * max_moves


def prove_mate(pos: Position, attacker: int, max_moves: int, budget: Budget = Budget(),
               tt: Optional[TranspositionTable] = None, use_tt: bool = True,
               with_pv: bool = True) -> MateResult:
    """Decide whether ``attacker`` forces checkmate within ``max_moves`` of its moves."""
    if max_moves < 1:
        raise ValueError("max_moves must be >= 1")
    search = MateSearch(attacker, budget, tt, use_tt)
    search._start()
    try:
        found = None
        for n in range(1, max_moves + 1):
            plies = 2 * n - 1 if pos.turn == attacker else 2 * n
            if search.proves(pos, plies):
                found = n
                break
        elapsed = time.perf_counter() - search._started
        if found is None:
            return MateResult(MateStatus.DISPROVEN, None, [], search.nodes, elapsed)
        pv: List[str] = []
        if with_pv:
            line = search.principal_variation(pos, mate_plies(pos, attacker, found))
            p = pos
            for m in line:
                pv.append(san_of_packed(p, m))
                p = make_packed(p, m)
        elapsed = time.perf_counter() - search._started
        return MateResult(MateStatus.PROVEN, found, pv, search.nodes, elapsed)
    except _OutOfBudget as exc:
        elapsed = time.perf_counter() - search._started
        return MateResult(MateStatus.UNKNOWN, None, [], search.nodes, elapsed, exc.which)
    finally:
        search.tt.prune()


def check_immediate_checkmate(pos: Position) -> bool:
    return is_in_check(pos, pos.turn) and not has_legal_move(pos)


# ---------------------------------------------------------------------------
# Non-loss


class SafetyStatus(enum.Enum):
    SAFE = "safe"
    UNSAFE = "unsafe"
    UNKNOWN = "unknown"


@dataclass
class NonLossResult:
    status: SafetyStatus
    horizon: int
    pv: List[str] = field(default_factory=list)
    nodes: int = 0
    seconds: float = 0.0
    exhausted: Optional[str] = None

    @property
    def safe(self) -> bool:
        return self.status is SafetyStatus.SAFE


def check_non_loss(pos: Position, side: int, horizon: int, budget: Budget = Budget(),
                   tt: Optional[TranspositionTable] = None) -> NonLossResult:
    """Can ``side`` avoid being checkmated for ``horizon`` plies?

    Equivalent to the opponent having no forced mate within ``horizon`` plies;
    stalemate and repetition are safe terminals for ``side``.
    """
    opponent = side ^ 1
    search = MateSearch(opponent, budget, tt)
    search._start()
    try:
        if check_immediate_checkmate(pos):
            lost = pos.turn == side
            status = SafetyStatus.UNSAFE if lost else SafetyStatus.SAFE
            return NonLossResult(status, horizon, [], 1, 0.0)
        if horizon <= 0 or not has_legal_move(pos):
            return NonLossResult(SafetyStatus.SAFE, horizon, [], 1, 0.0)
        plies = horizon
        if search.proves(pos, plies):
            line = search.principal_variation(pos, plies)
            pv, p = [], pos
            for m in line:
                pv.append(san_of_packed(p, m))
                p = make_packed(p, m)
            return NonLossResult(SafetyStatus.UNSAFE, horizon, pv, search.nodes,
                                 time.perf_counter() - search._started)
        return NonLossResult(SafetyStatus.SAFE, horizon, [], search.nodes,
                             time.perf_counter() - search._started)
    except _OutOfBudget as exc:
        return NonLossResult(SafetyStatus.UNKNOWN, horizon, [], search.nodes,
                             time.perf_counter() - search._started, exc.which)


# ---------------------------------------------------------------------------
# Evaluation (move ordering for the builder only)

MATERIAL = (100, 300, 300, 500, 900, 0)


def _mobility(pos: Position, color: int) -> int:
    if pos.turn == color:
        return len(legal_packed(pos))
    flipped = Position(pos.bbs, color, pos.halfmove_clock, pos.fullmove_number)
    return len(legal_packed(flipped))


def evaluate(pos: Position) -> int:
    """Material plus twice the legal-move count difference, side to move's view."""
    us = pos.turn
    score = 0
    for kind in range(5):
        score += MATERIAL[kind] * (popcount(pos.bbs[us * 6 + kind])
                                   - popcount(pos.bbs[(us ^ 1) * 6 + kind]))
    score += 2 * (_mobility(pos, us) - _mobility(pos, us ^ 1))
    return score


__all__ = [
    "Budget", "MateResult", "MateSearch", "MateStatus", "NonLossResult", "SafetyStatus",
    "TranspositionTable", "check_immediate_checkmate", "check_non_loss", "evaluate",
    "mate_plies", "prove_mate",
]
