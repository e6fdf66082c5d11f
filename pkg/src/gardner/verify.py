"""Machine checks for the local proof obligations of an oracle document.

Levels are cumulative:

* L0 legality: every line and justification replays legally, moves alternate
  between the oracle side (own moves) and the opponent (branch nodes), and
  every transposition reference lands on an identical position.
* L1 completeness: every legal opponent move at every opponent node is
  covered by a branch or by the node's default claim.
* L2 mate claims: mate-in-x claims go to the bounded prover, checkmate
  claims to the immediate check.
* L3 draw leaves: draw and cannot-win leaves go to the non-loss check at a
  fixed ply horizon.

Findings are records in a report, never exceptions. Each record is keyed by
the move path from the document root, and records are kept in document order
regardless of how the expensive checks were scheduled.
"""

from __future__ import annotations

import enum
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .oracle.bundle import BundleEntry, load_bundle
from .oracle.edit import UNLISTED_NOTE, uncovered_moves
from .oracle.gdo import COLOR_WORDS, format_claim
from .oracle.model import (
    ClaimKind, Leaf, Node, OpponentNode, OracleDocument, OurMove, resolve_variation,
)
from .rules.board import Position, legal_packed, make_packed, move_kind, move_captured, \
    move_from, move_order_key, move_to, PAWN
from .rules.notation import NotationError, format_fen, parse_fen, parse_san_packed, \
    san_of_packed
from .rules.status import DEFAULT_RULES, Outcome, RuleProfile, game_status
from .search import (
    Budget, MateStatus, MateSearch, SafetyStatus, check_immediate_checkmate, check_non_loss,
    prove_mate,
)

DEFAULT_HORIZON = 8
HORIZON_NOTE = "non-loss is checked to a fixed ply horizon only"


class Level(enum.IntEnum):
    L0 = 0
    L1 = 1
    L2 = 2
    L3 = 3


class Status(enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    UNKNOWN = "unknown"
    UNVERIFIED = "unverified-claim"


# Obligation names, also the ``obligation`` field of the record stream.
LEGALITY = "legality"
TURN_ORDER = "turn-order"
REFERENCE = "reference"
COVERAGE = "coverage"
MATE = "mate"
CHECKMATE = "checkmate"
NON_LOSS = "non-loss"
OPPONENT_CANNOT_WIN = "opponent-cannot-win"
CLAIM = "claim"
JOINT_GAME = "joint-game"


@dataclass(frozen=True)
class VerifyOptions:
    level: Level = Level.L1
    mate_budget: Budget = Budget()
    safety_budget: Budget = Budget()
    horizon: int = DEFAULT_HORIZON
    rules: RuleProfile = DEFAULT_RULES
    threads: int = 1
    deterministic: bool = False

    def effective(self) -> "VerifyOptions":
        """Deterministic runs are bounded by node counts only."""
        if not self.deterministic:
            return self
        return replace(self,
                       mate_budget=Budget(self.mate_budget.max_nodes, None),
                       safety_budget=Budget(self.safety_budget.max_nodes, None))


@dataclass
class Record:
    document: str
    path: Tuple[str, ...]
    obligation: str
    status: Status
    claim: Optional[str] = None
    detail: str = ""
    witness: List[str] = field(default_factory=list)
    pv: List[str] = field(default_factory=list)
    nodes: int = 0
    seconds: float = 0.0

    def to_dict(self, timings: bool = True) -> dict:
        out = {
            "type": "record",
            "document": self.document,
            "path": " ".join(self.path),
            "obligation": self.obligation,
            "status": self.status.value,
            "claim": self.claim,
            "detail": self.detail,
            "witness": list(self.witness),
            "pv": list(self.pv),
            "nodes": self.nodes,
        }
        if timings:
            out["seconds"] = round(self.seconds, 3)
        return out


@dataclass
class VerificationReport:
    records: List[Record] = field(default_factory=list)
    documents: List[str] = field(default_factory=list)
    partial: List[str] = field(default_factory=list)
    level: Level = Level.L1
    horizon: int = DEFAULT_HORIZON
    deterministic: bool = False
    swept_moves: int = 0

    def extend(self, other: "VerificationReport") -> None:
        self.records.extend(other.records)
        self.documents.extend(other.documents)
        self.partial.extend(other.partial)
        self.swept_moves += other.swept_moves

    def counts(self) -> Dict[str, int]:
        out = {s.value: 0 for s in Status}
        for r in self.records:
            out[r.status.value] += 1
        return out

    def by_status(self, status: Status) -> List[Record]:
        return [r for r in self.records if r.status is status]

    @property
    def failures(self) -> List[Record]:
        return self.by_status(Status.FAIL)

    @property
    def ok(self) -> bool:
        return not self.failures

    @property
    def exit_code(self) -> int:
        return 0 if self.ok else 1

    def summary(self) -> dict:
        return {
            "type": "summary",
            "level": int(self.level),
            "horizon": self.horizon,
            "documents": list(self.documents),
            "partial": list(self.partial),
            "counts": self.counts(),
            "swept_moves": self.swept_moves,
            "note": HORIZON_NOTE,
        }

    def to_jsonl(self) -> str:
        timings = not self.deterministic
        lines = [json.dumps(r.to_dict(timings), sort_keys=True) for r in self.records]
        lines.append(json.dumps(self.summary(), sort_keys=True))
        return "\n".join(lines) + "\n"

    def to_text(self, verbose: bool = False) -> str:
        out = []
        for r in self.records:
            if not verbose and r.status is Status.PASS:
                continue
            line = f"{r.status.value.upper():16} {r.document} [{' '.join(r.path) or 'root'}] " \
                   f"{r.obligation}"
            if r.claim:
                line += f" ({r.claim})"
            if r.detail:
                line += f": {r.detail}"
            if r.witness:
                line += f"; witness {' '.join(r.witness)}"
            if r.pv:
                line += f"; pv {' '.join(r.pv)}"
            if not self.deterministic and r.nodes:
                line += f"; {r.nodes} nodes {r.seconds:.1f}s"
            out.append(line)
        c = self.counts()
        out.append(f"level L{int(self.level)}, {len(self.documents)} document(s): "
                   f"{c['pass']} pass, {c['fail']} fail, {c['unknown']} unknown, "
                   f"{c['unverified-claim']} unverified")
        if self.partial:
            out.append("partial transcriptions: " + ", ".join(self.partial))
        if self.level >= Level.L3:
            out.append(f"draw leaves: {HORIZON_NOTE} (H={self.horizon})")
        return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Expensive checks, run in-process or in worker processes


def _mate_task(fen: str, attacker: int, moves: int, budget: Budget) -> dict:
    pos = parse_fen(fen)
    res = prove_mate(pos, attacker, moves, budget)
    out = {"status": res.status.value, "moves": res.moves, "pv": res.pv,
           "nodes": res.nodes, "seconds": res.seconds, "exhausted": res.exhausted,
           "witness": []}
    if res.status is MateStatus.DISPROVEN:
        out["witness"] = _escape_witness(pos, attacker, moves)
    return out


def _escape_witness(pos: Position, attacker: int, moves: int) -> List[str]:
    """A defender reply that escapes the bound, when the defender is to move."""
    if pos.turn == attacker:
        return [f"none of {len(legal_packed(pos))} attacker moves forces mate"]
    search = MateSearch(attacker, Budget(None, None))
    search._start()
    plies = 2 * moves - 1
    for m in sorted(legal_packed(pos), key=move_order_key):
        if not search.proves(make_packed(pos, m), plies):
            return [san_of_packed(pos, m)]
    return []


def _safety_task(fen: str, side: int, horizon: int, budget: Budget) -> dict:
    res = check_non_loss(parse_fen(fen), side, horizon, budget)
    return {"status": res.status.value, "pv": res.pv, "nodes": res.nodes,
            "seconds": res.seconds, "exhausted": res.exhausted}


def worker_count(requested: Optional[int] = None) -> int:
    """Requested count capped by ``GARDNER_THREADS`` (default 1)."""
    env = os.environ.get("GARDNER_THREADS")
    cap = None
    if env:
        try:
            cap = max(1, int(env))
        except ValueError:
            cap = None
    n = requested if requested is not None else (cap or 1)
    if cap is not None:
        n = min(n, cap)
    return max(1, n)


def _run_tasks(tasks: List[tuple], workers: int) -> List[dict]:
    if workers <= 1 or len(tasks) <= 1:
        return [fn(*args) for fn, args in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, *args) for fn, args in tasks]
        return [f.result() for f in futures]


# ---------------------------------------------------------------------------
# Document walk


@dataclass
class _Pending:
    index: int
    kind: str
    claim: str
    path: Tuple[str, ...]


def _side_word(color: int) -> str:
    return COLOR_WORDS[color]


def verify_document(doc: OracleDocument, options: VerifyOptions = VerifyOptions(),
                    name: Optional[str] = None) -> VerificationReport:
    opts = options.effective()
    name = name or doc.name or "document"
    report = VerificationReport(documents=[name], level=opts.level, horizon=opts.horizon,
                                deterministic=opts.deterministic)
    records = report.records
    tasks: List[tuple] = []
    pending: List[_Pending] = []

    def add(path, obligation, status, **kw) -> Record:
        rec = Record(name, tuple(path), obligation, status, **kw)
        records.append(rec)
        return rec

    def schedule(path, kind, claim_text, fn, args):
        rec = add(path, kind, Status.UNKNOWN, claim=claim_text)
        pending.append(_Pending(len(records) - 1, kind, claim_text, tuple(path)))
        tasks.append((fn, args))
        return rec

    try:
        root = doc.root_position
    except NotationError as exc:
        add((), LEGALITY, Status.FAIL, detail=f"bad root position: {exc}")
        return report

    def replay(pos: Position, line: Sequence[str], path) -> Tuple[Optional[Position], List[str]]:
        played = []
        for san in line:
            try:
                m = parse_san_packed(pos, san)
            except NotationError as exc:
                return None, played + [san, f"({exc})"]
            played.append(san)
            pos = make_packed(pos, m)
        return pos, played

    def check_leaf(pos: Position, leaf: Leaf, path: Tuple[str, ...]):
        claim = leaf.claim
        text = format_claim(claim)
        if leaf.justification:
            end, played = replay(pos, leaf.justification, path)
            if end is None:
                add(path, LEGALITY, Status.FAIL, claim=text,
                    detail="justification does not replay", witness=played)
        kind = claim.kind
        if kind is ClaimKind.UNVERIFIED:
            add(path, CLAIM, Status.UNVERIFIED, claim=text, detail=claim.text)
            return
        if kind is ClaimKind.REF:
            try:
                target, _ = resolve_variation(doc, claim.text)
            except KeyError:
                add(path, REFERENCE, Status.FAIL, claim=text,
                    detail=f"no variation {claim.text}", witness=[claim.text])
                return
            if target.key == pos.key:
                add(path, REFERENCE, Status.PASS, claim=text)
            else:
                add(path, REFERENCE, Status.FAIL, claim=text,
                    detail="referenced position differs",
                    witness=[format_fen(pos), format_fen(target)])
            return
        if opts.level >= Level.L2 and kind is ClaimKind.CHECKMATE:
            mated = check_immediate_checkmate(pos)
            if mated and pos.turn != doc.side:
                add(path, CHECKMATE, Status.PASS, claim=text)
            elif mated:
                add(path, CHECKMATE, Status.FAIL, claim=text,
                    detail="the oracle side is the one mated", witness=[format_fen(pos)])
            else:
                moves = [san_of_packed(pos, m) for m in
                         sorted(legal_packed(pos), key=move_order_key)]
                add(path, CHECKMATE, Status.FAIL, claim=text,
                    detail="side to move is not checkmated", witness=moves[:1] or
                    [format_fen(pos)])
            return
        if opts.level >= Level.L2 and kind is ClaimKind.MATE:
            schedule(path, MATE, text, _mate_task,
                     (format_fen(pos), claim.color ^ 1, claim.moves, opts.mate_budget))
            return
        if opts.level >= Level.L3 and kind is ClaimKind.DRAW:
            schedule(path, NON_LOSS, text, _safety_task,
                     (format_fen(pos), doc.side, opts.horizon, opts.safety_budget))
            return
        if opts.level >= Level.L3 and kind is ClaimKind.CANNOT_WIN:
            schedule(path, NON_LOSS, text, _safety_task,
                     (format_fen(pos), claim.color ^ 1, opts.horizon, opts.safety_budget))
            add(path, OPPONENT_CANNOT_WIN, Status.UNKNOWN, claim=text,
                detail=f"that {_side_word(claim.color)} cannot win is not decided here")

    def rec(node: Node, pos: Position, path: Tuple[str, ...]):
        if isinstance(node, Leaf):
            check_leaf(pos, node, path)
            return
        if isinstance(node, OurMove):
            if pos.turn != doc.side:
                add(path, TURN_ORDER, Status.FAIL,
                    detail=f"own move {node.san} with {_side_word(pos.turn)} to move",
                    witness=[node.san])
                return
            try:
                m = parse_san_packed(pos, node.san)
            except NotationError as exc:
                add(path, LEGALITY, Status.FAIL, detail=str(exc), witness=[node.san])
                return
            rec(node.child, make_packed(pos, m), path + (san_of_packed(pos, m),))
            return
        if pos.turn == doc.side:
            add(path, TURN_ORDER, Status.FAIL,
                detail=f"opponent node with {_side_word(pos.turn)} to move")
            return
        children = []
        for b in node.branches:
            try:
                m = parse_san_packed(pos, b.san)
            except NotationError as exc:
                add(path, LEGALITY, Status.FAIL, detail=str(exc), witness=[b.san])
                continue
            children.append((b, make_packed(pos, m)))
        if opts.level >= Level.L1:
            missing = uncovered_moves(pos, node)
            swept = sum(1 for b in node.branches
                        if isinstance(b.node, Leaf) and b.node.claim.note == UNLISTED_NOTE)
            listed = len(node.branches) - swept
            report.swept_moves += swept
            detail = f"listed={listed} swept={swept}"
            if missing and node.default is not None:
                add(path, COVERAGE, Status.PASS, claim=format_claim(node.default),
                    detail=detail + f" default={len(missing)}", witness=missing)
            elif missing:
                add(path, COVERAGE, Status.FAIL, detail=detail + " uncovered=" +
                    str(len(missing)), witness=missing)
            else:
                add(path, COVERAGE, Status.PASS, detail=detail)
        for b, child in children:
            rec(b.node, child, path + (b.san,))

    rec(doc.tree, root, ())
    if not any(r.status is Status.FAIL and r.obligation in (LEGALITY, TURN_ORDER)
               for r in records):
        records.insert(0, Record(name, (), LEGALITY, Status.PASS,
                                 detail="all lines replay legally"))
        for p in pending:
            p.index += 1

    results = _run_tasks(tasks, worker_count(opts.threads))
    for p, res in zip(pending, results):
        r = records[p.index]
        r.nodes = res["nodes"]
        r.seconds = res["seconds"]
        r.pv = list(res["pv"])
        if p.kind == MATE:
            st = res["status"]
            if st == MateStatus.PROVEN.value:
                r.status = Status.PASS
                r.detail = f"mate in {res['moves']}"
            elif st == MateStatus.DISPROVEN.value:
                r.status = Status.FAIL
                r.detail = "no forced mate within the claimed bound"
                r.witness = list(res["witness"])
            else:
                r.status = Status.UNKNOWN
                r.detail = f"{res['exhausted']} budget exhausted"
        else:
            st = res["status"]
            if st == SafetyStatus.SAFE.value:
                r.status = Status.PASS
                r.detail = f"safe for {opts.horizon} plies"
            elif st == SafetyStatus.UNSAFE.value:
                r.status = Status.FAIL
                r.detail = f"mated within {opts.horizon} plies"
                r.witness = list(res["pv"])
            else:
                r.status = Status.UNKNOWN
                r.detail = f"{res['exhausted']} budget exhausted"
    return report


# ---------------------------------------------------------------------------
# Joint game of the two 1.b4 oracles


@dataclass
class JointGame:
    moves: List[str]
    oracle_plies: int
    outcome: Outcome
    detail: str = ""

    @property
    def drawn(self) -> bool:
        return self.outcome.is_draw


def _cursor_step(node: Node, san: str) -> Optional[Node]:
    if isinstance(node, OurMove):
        return node.child if node.san == san else None
    if isinstance(node, OpponentNode):
        b = node.branch(san)
        return b.node if b is not None else None
    return None


def _shuffle_move(pos: Position, history: Sequence[int], last_own: Optional[int],
                  budget: Budget) -> int:
    """Deterministic drawing move once both oracles have reached leaves.

    Preference: a move repeating an earlier position, then the move undoing
    our previous shuffle move, then the first quiet piece move after which
    we are not mated within 4 plies, then the first legal move.
    """
    moves = sorted(legal_packed(pos), key=move_order_key)
    seen = set(history)
    for m in moves:
        if make_packed(pos, m).key in seen and move_captured(m) < 0:
            return m
    if last_own is not None:
        for m in moves:
            if move_from(m) == move_to(last_own) and move_to(m) == move_from(last_own) \
                    and move_captured(m) < 0:
                return m
    for m in moves:
        if move_kind(m) == PAWN or move_captured(m) >= 0:
            continue
        if check_non_loss(make_packed(pos, m), pos.turn, 4, budget).safe:
            return m
    return moves[0]


def joint_main_line(white: OracleDocument, black: OracleDocument,
                    rules: RuleProfile = DEFAULT_RULES, max_plies: int = 200,
                    budget: Budget = Budget(200_000, None)) -> JointGame:
    """Play the White oracle against the Black oracle, then shuffle to a result.

    The Black oracle's root must be reachable from the White oracle's root by
    its first own move.
    """
    pos = white.root_position
    cursors: Dict[int, Optional[Node]] = {0: white.tree, 1: None}
    history: List[int] = []
    moves: List[str] = []
    oracle_plies = 0
    last_own: Dict[int, Optional[int]] = {0: None, 1: None}
    black_root = black.root_position.key
    status = game_status(pos, history, rules)
    while status.outcome is Outcome.ONGOING and len(moves) < max_plies:
        if cursors[1] is None and pos.key == black_root:
            cursors[1] = black.tree
        mover = pos.turn
        node = cursors[mover]
        if isinstance(node, OurMove):
            m = parse_san_packed(pos, node.san)
            oracle_plies += 1
        else:
            m = _shuffle_move(pos, history, last_own[mover], budget)
            last_own[mover] = m
        san = san_of_packed(pos, m)
        for side in (0, 1):
            if cursors[side] is not None and not isinstance(cursors[side], Leaf):
                cursors[side] = _cursor_step(cursors[side], san)
        history.append(pos.key)
        moves.append(san)
        pos = make_packed(pos, m)
        status = game_status(pos, history, rules)
    return JointGame(moves, oracle_plies, status.outcome, str(status))


# ---------------------------------------------------------------------------
# Bundle


def verify_all_bundled(options: VerifyOptions = VerifyOptions(),
                       entries: Optional[Iterable[Tuple[BundleEntry, OracleDocument]]] = None,
                       joint: bool = True) -> VerificationReport:
    """Verify every document of the bundle and the joint 1.b4 game."""
    opts = options.effective()
    bundle = list(load_bundle() if entries is None else entries)
    report = VerificationReport(level=opts.level, horizon=opts.horizon,
                                deterministic=opts.deterministic)
    for entry, doc in bundle:
        report.extend(verify_document(doc, opts, entry.file))
        if not entry.complete:
            report.partial.append(entry.file)
    if joint:
        by_key = {(e.side, e.opening): d for e, d in bundle}
        white, black = by_key.get(("white", "1.b4")), by_key.get(("black", "1.b4"))
        if white is not None and black is not None:
            game = joint_main_line(white, black, opts.rules)
            status = Status.PASS if game.drawn else Status.FAIL
            report.records.append(Record(
                "joint 1.b4", (), JOINT_GAME, status,
                detail=f"{game.detail} after {len(game.moves)} plies, "
                       f"{game.oracle_plies} from the oracles",
                pv=game.moves))
    return report


__all__ = [
    "DEFAULT_HORIZON", "JointGame", "Level", "Record", "Status", "VerificationReport",
    "VerifyOptions", "joint_main_line", "verify_all_bundled", "verify_document",
    "worker_count",
]
