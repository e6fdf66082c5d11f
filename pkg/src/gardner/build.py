"""Asymmetric oracle construction.

At nodes where the oracle side moves exactly one move is chosen; at opponent
nodes every legal reply is expanded. Children are closed by a mate proof,
by the draw rule, by a transposition to an already closed position, or by the
depth limit. Mate distances are then backed up from the leaves.

The build is sequential and uses a single transposition table, so with
node-only budgets the emitted document and log are reproducible.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

from .oracle.model import (
    Branch, Claim, ClaimKind, Leaf, Node, OpponentNode, OracleDocument, OurMove, collect_ids,
)
from .oracle.gdo import format_claim
from .rules.board import Position, has_legal_move, is_in_check, legal_packed, make_packed, \
    move_order_key
from .rules.notation import NotationError, format_fen, parse_fen, parse_san_packed, \
    san_of_packed
from .search import Budget, TranspositionTable, check_non_loss, evaluate, prove_mate

REPETITION = "repetition"
SAFE_HORIZON = "safe"
DEPTH_LIMIT_NOTE = "depth limit"
MATE_SCORE = 100_000


class GuideConflict(ValueError):
    """A guide move is not legal in the position it is attached to."""


@dataclass(frozen=True)
class BuildPolicy:
    side: int
    mate_budget: Budget = Budget(100_000, None)
    mate_moves: int = 20
    max_depth: int = 6
    guide: Mapping[int, str] = field(default_factory=dict)
    draw_rule: str = REPETITION
    safe_horizon: int = 8
    decided_threshold: int = 500
    safety_plies: int = 4
    safety_budget: Budget = Budget(50_000, None)

    def __post_init__(self):
        if self.draw_rule not in (REPETITION, SAFE_HORIZON):
            raise ValueError(f"draw rule must be {REPETITION!r} or {SAFE_HORIZON!r}")
        if self.max_depth < 0 or self.mate_moves < 1:
            raise ValueError("max_depth must be >= 0 and mate_moves >= 1")


@dataclass
class BuildStats:
    own_nodes: int = 0
    opponent_nodes: int = 0
    leaves: int = 0
    mate_queries: int = 0
    mate_nodes: int = 0
    max_opponent_branching: int = 0
    max_own_children: int = 0


@dataclass
class BuildResult:
    document: OracleDocument
    log: List[dict]
    stats: BuildStats
    root_claim: Optional[Claim]

    @property
    def root_status(self) -> str:
        return "unknown" if self.root_claim is None else format_claim(self.root_claim)

    def log_jsonl(self, timings: bool = False) -> str:
        out = []
        for rec in self.log:
            rec = dict(rec)
            if not timings:
                rec.pop("seconds", None)
            out.append(json.dumps(rec, sort_keys=True))
        return "\n".join(out) + ("\n" if out else "")


def load_guide(text: str) -> Dict[int, str]:
    """Parse guide lines ``<FEN-5> <SAN>``; ``#`` starts a comment."""
    guide: Dict[int, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 5:
            raise ValueError(f"guide line {lineno}: expected '<FEN-5> <SAN>'")
        guide[parse_fen(" ".join(parts[:4])).key] = parts[4]
    return guide


class _Builder:
    def __init__(self, policy: BuildPolicy):
        self.policy = policy
        self.side = policy.side
        self.tt = TranspositionTable()
        self.closed: Dict[int, Tuple[str, ...]] = {}
        self.referenced: Dict[Tuple[str, ...], str] = {}
        self.log: List[dict] = []
        self.stats = BuildStats()

    # -- helpers -------------------------------------------------------------

    def _record(self, pos: Position, path, claim: Claim, nodes: int = 0, seconds: float = 0.0):
        self.log.append({"path": " ".join(path), "hash": f"{pos.key:016x}",
                         "claim": format_claim(claim), "nodes": nodes,
                         "seconds": round(seconds, 3)})

    def _leaf(self, pos: Position, path, claim: Claim, nodes: int = 0,
              seconds: float = 0.0) -> Leaf:
        self.stats.leaves += 1
        self._record(pos, path, claim, nodes, seconds)
        return Leaf(claim)

    def _decided(self, pos: Position) -> bool:
        score = evaluate(pos)
        if pos.turn != self.side:
            score = -score
        return score >= self.policy.decided_threshold

    def _prove(self, pos: Position):
        self.stats.mate_queries += 1
        res = prove_mate(pos, self.side, self.policy.mate_moves, self.policy.mate_budget,
                         tt=self.tt)
        self.stats.mate_nodes += res.nodes
        return res

    def _safe(self, pos: Position, plies: int, budget: Budget) -> bool:
        return check_non_loss(pos, self.side, plies, budget, tt=None).safe

    def _terminal(self, pos: Position, path) -> Optional[Leaf]:
        if has_legal_move(pos):
            return None
        if is_in_check(pos, pos.turn):
            if pos.turn != self.side:
                return self._leaf(pos, path, Claim.checkmate())
            return self._leaf(pos, path, Claim.unverified("the oracle side is mated"))
        return self._leaf(pos, path, Claim.draw("stalemate"))

    def _ref(self, pos: Position, path) -> Optional[Leaf]:
        target = self.closed.get(pos.key)
        if target is None:
            return None
        label = self.referenced.setdefault(target, f"t{len(self.referenced) + 1}")
        return self._leaf(pos, path, Claim.ref(label))

    # -- own moves -----------------------------------------------------------

    def _choose(self, pos: Position, on_path: Dict[int, int]) -> Tuple[int, Optional[object]]:
        """Own move and, if it comes from a mate proof, the proof result."""
        legal = sorted(legal_packed(pos), key=move_order_key)
        guided = self.policy.guide.get(pos.key)
        if guided is not None:
            try:
                return parse_san_packed(pos, guided), None
            except NotationError as exc:
                raise GuideConflict(f"guide move {guided} in {format_fen(pos)}: {exc}") from None
        decided = self._decided(pos)
        if decided:
            res = self._prove(pos)
            if res.proven:
                return parse_san_packed(pos, res.pv[0]), res
        if self.policy.draw_rule == REPETITION and not decided:
            for m in legal:
                child = make_packed(pos, m)
                if child.key in on_path and self._safe(child, self.policy.safety_plies,
                                                       self.policy.safety_budget):
                    return m, None
        best, best_score = None, None
        for m in legal:
            child = make_packed(pos, m)
            score = self._reply_score(child)
            if not self._safe(child, self.policy.safety_plies, self.policy.safety_budget):
                score -= 1_000_000
            if best_score is None or score > best_score:
                best, best_score = m, score
        return best, None

    def _reply_score(self, child: Position) -> int:
        """Our evaluation after the opponent's best reply (two-ply minimax)."""
        replies = legal_packed(child)
        if not replies:
            return MATE_SCORE if is_in_check(child, child.turn) else 0
        return min(evaluate(make_packed(child, r)) for r in replies)

    # -- tree ----------------------------------------------------------------

    def own(self, pos: Position, path: Tuple[str, ...], on_path: Dict[int, int]) -> Node:
        m, proof = self._choose(pos, on_path)
        san = san_of_packed(pos, m)
        child = make_packed(pos, m)
        self.stats.own_nodes += 1
        self.stats.max_own_children = max(self.stats.max_own_children, 1)
        cpath = path + (san,)
        if proof is not None:
            n = proof.moves
            claim = Claim.checkmate() if n == 1 else Claim.mate(self.side ^ 1, n - 1)
            leaf = self._leaf(child, cpath, claim, proof.nodes, proof.seconds)
            return OurMove(san, leaf)
        return OurMove(san, self.node(child, cpath, on_path))

    def opponent(self, pos: Position, path: Tuple[str, ...], on_path: Dict[int, int]) -> Node:
        self.stats.opponent_nodes += 1
        moves = sorted(legal_packed(pos), key=move_order_key)
        self.stats.max_opponent_branching = max(self.stats.max_opponent_branching, len(moves))
        branches = []
        for m in moves:
            san = san_of_packed(pos, m)
            child = make_packed(pos, m)
            branches.append(Branch(san, self.node(child, path + (san,), on_path)))
        return OpponentNode(tuple(branches))

    def node(self, pos: Position, path: Tuple[str, ...], on_path: Dict[int, int]) -> Node:
        if pos.key in on_path:
            return self._leaf(pos, path, Claim.draw("repetition"))
        term = self._terminal(pos, path)
        if term is not None:
            return term
        ref = self._ref(pos, path)
        if ref is not None:
            return ref
        ours = pos.turn == self.side
        if ours and path and self._decided(pos):
            res = self._prove(pos)
            if res.proven:
                return self._leaf(pos, path, Claim.mate(self.side ^ 1, res.moves),
                                  res.nodes, res.seconds)
        if ours and path and self.policy.draw_rule == SAFE_HORIZON:
            started = time.perf_counter()
            if self._safe(pos, self.policy.safe_horizon, self.policy.mate_budget):
                return self._leaf(pos, path, Claim.draw(f"safe for {self.policy.safe_horizon} plies"),
                                  0, time.perf_counter() - started)
        if len(path) >= self.policy.max_depth:
            return self._leaf(pos, path, Claim.unverified(DEPTH_LIMIT_NOTE))
        on_path[pos.key] = len(path)
        try:
            if ours:
                out = self.own(pos, path, on_path)
            else:
                out = self.opponent(pos, path, on_path)
        finally:
            del on_path[pos.key]
        self.closed.setdefault(pos.key, path)
        return out


def _label(node: Node, path: Tuple[str, ...], labels: Dict[Tuple[str, ...], str]) -> Node:
    label = labels.get(path)
    if isinstance(node, Leaf):
        return Leaf(node.claim, node.justification, label)
    if isinstance(node, OurMove):
        return OurMove(node.san, _label(node.child, path + (node.san,), labels), label)
    return OpponentNode(tuple(Branch(b.san, _label(b.node, path + (b.san,), labels))
                              for b in node.branches), node.default, label)


def backed_up_mate(node: Node) -> Optional[int]:
    """Attacker moves to mate from the node's position, if every leaf is a mate."""
    if isinstance(node, Leaf):
        if node.claim.kind is ClaimKind.CHECKMATE:
            return 0
        if node.claim.kind is ClaimKind.MATE:
            return node.claim.moves
        return None
    if isinstance(node, OurMove):
        inner = backed_up_mate(node.child)
        return None if inner is None else inner + 1
    values = [backed_up_mate(b.node) for b in node.branches]
    if not values or any(v is None for v in values):
        return None
    return max(values)


def root_claim(doc: OracleDocument) -> Optional[Claim]:
    """Claim at the first claim position, i.e. after the oracle's first own move.

    None stands for unknown.
    """
    node = doc.tree
    if isinstance(node, OurMove):
        node = node.child
    if isinstance(node, Leaf) and node.claim.kind not in (ClaimKind.MATE, ClaimKind.CHECKMATE):
        return node.claim if node.claim.kind is not ClaimKind.UNVERIFIED else None
    x = backed_up_mate(node)
    if x is None:
        return None
    return Claim.checkmate() if x == 0 else Claim.mate(doc.side ^ 1, x)


def select_move(pos: Position, policy: BuildPolicy, history: Tuple[int, ...] = ()) -> str:
    """The builder's own-move choice at ``pos`` as SAN.

    ``history`` holds keys of earlier positions; in repetition mode a safe move
    back to one of them is preferred when the position is not decided.
    """
    if pos.turn != policy.side:
        raise ValueError("select_move needs the policy side to move")
    builder = _Builder(policy)
    m, _ = builder._choose(pos, {k: i for i, k in enumerate(history)})
    return san_of_packed(pos, m)


def build_oracle(root: Position, policy: BuildPolicy, name: Optional[str] = None) -> BuildResult:
    for key, san in policy.guide.items():
        if not isinstance(san, str) or not san:
            raise GuideConflict(f"empty guide move for hash {key:016x}")
    builder = _Builder(policy)
    tree = builder.node(root, (), {})
    if builder.referenced:
        tree = _label(tree, (), builder.referenced)
    doc = OracleDocument(policy.side, format_fen(root), tree, collect_ids(tree), name)
    return BuildResult(doc, builder.log, builder.stats, root_claim(doc))


__all__ = [
    "BuildPolicy", "BuildResult", "BuildStats", "GuideConflict", "REPETITION", "SAFE_HORIZON",
    "backed_up_mate", "build_oracle", "load_guide", "root_claim", "select_move",
]
