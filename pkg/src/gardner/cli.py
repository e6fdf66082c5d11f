"""Command-line entry point: ``gardner <command> ...``.

Exit codes: 0 success (unknowns allowed), 1 a verification failure, 2 bad
input (unreadable file, bad FEN, bad oracle document, illegal move).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import IO, List, Optional, Sequence

from .build import REPETITION, SAFE_HORIZON, BuildPolicy, GuideConflict, build_oracle, \
    load_guide, select_move
from .oracle.bundle import BUNDLE_DIR, load_bundle
from .oracle.gdo import OracleFormatError, load_oracle, print_oracle
from .oracle.model import Leaf, Node, OpponentNode, OracleDocument, OurMove
from .oracle.pgn import export_pgn
from .rules.board import BLACK, WHITE, Position, initial_position, legal_packed, make_packed, \
    move_order_key
from .rules.notation import NotationError, format_fen, parse_fen, parse_san_packed, \
    san_of_packed, split_movetext
from .rules.status import Outcome, RuleProfile, game_status
from .search import Budget, DEFAULT_MAX_NODES, DEFAULT_MAX_SECONDS, MateStatus, prove_mate
from .verify import DEFAULT_HORIZON, Level, VerifyOptions, verify_all_bundled, \
    verify_document, worker_count

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

COLORS = {"white": WHITE, "black": BLACK, "w": WHITE, "b": BLACK}


class InputError(Exception):
    """Bad user input; reported on stderr with exit code 2."""


# ---------------------------------------------------------------------------
# helpers


def _position(fen: Optional[str], moves: Optional[str] = None) -> Position:
    try:
        pos = parse_fen(fen) if fen else initial_position()
        for san in split_movetext(moves or ""):
            pos = make_packed(pos, parse_san_packed(pos, san))
    except (NotationError, ValueError) as exc:
        raise InputError(str(exc)) from None
    return pos


def _color(text: str) -> int:
    try:
        return COLORS[text.lower()]
    except KeyError:
        raise InputError(f"colour must be white or black, got {text!r}") from None


def _load(path: str) -> OracleDocument:
    p = Path(path)
    if not p.exists() and not p.suffix:
        p = BUNDLE_DIR / (path + ".gdo")
    elif not p.exists() and (BUNDLE_DIR / p.name).exists():
        p = BUNDLE_DIR / p.name
    try:
        return load_oracle(p)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None
    except (OracleFormatError, NotationError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _budget(nodes: Optional[int], seconds: Optional[float], deterministic: bool) -> Budget:
    nodes = None if nodes is not None and nodes <= 0 else nodes
    if deterministic:
        return Budget(nodes, None)
    seconds = None if seconds is not None and seconds <= 0 else seconds
    return Budget(nodes, seconds)


def _write(text: str, path: Optional[str], out: IO[str]) -> None:
    if path:
        try:
            Path(path).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise InputError(f"{path}: {exc.strerror or exc}") from None
    else:
        out.write(text)


def _legal_sans(pos: Position) -> List[str]:
    return [san_of_packed(pos, m) for m in sorted(legal_packed(pos), key=move_order_key)]


# ---------------------------------------------------------------------------
# commands


def cmd_perft(args, out: IO[str]) -> int:
    pos = _position(args.fen, args.moves)
    if args.depth < 0:
        raise InputError("depth must be >= 0")
    from .rules.board import perft as perft_packed
    total = 0
    if args.depth >= 1:
        for m in sorted(legal_packed(pos), key=move_order_key):
            n = perft_packed(make_packed(pos, m), args.depth - 1)
            total += n
            if args.split:
                out.write(f"{san_of_packed(pos, m)}: {n}\n")
    else:
        total = 1
    out.write(f"total: {total}\n")
    return EXIT_OK


def cmd_fen(args, out: IO[str]) -> int:
    pos = _position(args.fen, args.moves)
    out.write(format_fen(pos) + "\n")
    if args.board:
        out.write(str(pos) + "\n")
    return EXIT_OK


def cmd_moves(args, out: IO[str]) -> int:
    pos = _position(args.fen, args.moves)
    out.write(" ".join(_legal_sans(pos)) + "\n")
    return EXIT_OK


def cmd_solve(args, out: IO[str]) -> int:
    pos = _position(args.fen, args.moves)
    attacker = _color(args.attacker) if args.attacker else pos.turn
    if args.mate_in < 1:
        raise InputError("--mate-in must be >= 1")
    budget = _budget(args.mate_nodes, args.mate_time, args.deterministic)
    res = prove_mate(pos, attacker, args.mate_in, budget, use_tt=not args.no_tt)
    line = res.status.value
    if res.status is MateStatus.PROVEN:
        line += f" mate in {res.moves}: {' '.join(res.pv)}"
    elif res.status is MateStatus.UNKNOWN:
        line += f" ({res.exhausted} budget exhausted)"
    out.write(line + "\n")
    stats = f"nodes {res.nodes}"
    if not args.deterministic:
        stats += f", {res.seconds:.2f}s"
    out.write(stats + "\n")
    return EXIT_OK


def _verify_options(args) -> VerifyOptions:
    return VerifyOptions(
        level=Level(args.level),
        mate_budget=_budget(args.mate_nodes, args.mate_time, args.deterministic),
        safety_budget=_budget(args.mate_nodes, args.mate_time, args.deterministic),
        horizon=args.horizon,
        rules=RuleProfile(repetition=args.repetition),
        threads=worker_count(args.threads),
        deterministic=args.deterministic,
    )


def cmd_verify(args, out: IO[str]) -> int:
    if args.level not in range(4):
        raise InputError("--level must be 0, 1, 2 or 3")
    opts = _verify_options(args)
    if args.bundled:
        report = verify_all_bundled(opts)
    else:
        if not args.paths:
            raise InputError("give oracle files or --bundled")
        docs = [(p, _load(p)) for p in args.paths]
        report = None
        for path, doc in docs:
            part = verify_document(doc, opts, Path(path).name)
            if report is None:
                report = part
            else:
                report.extend(part)
    text = report.to_jsonl() if args.format == "jsonl" else report.to_text(args.verbose)
    _write(text, args.output, out)
    return report.exit_code


def cmd_build(args, out: IO[str]) -> int:
    pos = _position(args.fen, args.moves)
    guide = {}
    if args.guide:
        try:
            guide = load_guide(Path(args.guide).read_text(encoding="utf-8"))
        except OSError as exc:
            raise InputError(f"{args.guide}: {exc.strerror or exc}") from None
        except (NotationError, ValueError) as exc:
            raise InputError(f"{args.guide}: {exc}") from None
    policy = BuildPolicy(
        side=_color(args.side) if args.side else pos.turn,
        mate_budget=_budget(args.mate_nodes, args.mate_time, args.deterministic),
        mate_moves=args.mate_in,
        max_depth=args.max_depth,
        guide=guide,
        draw_rule=args.draw_rule,
        safe_horizon=args.horizon,
        decided_threshold=args.threshold,
    )
    try:
        result = build_oracle(pos, policy, name=args.name)
    except GuideConflict as exc:
        raise InputError(str(exc)) from None
    _write(print_oracle(result.document), args.output, out)
    if args.log:
        _write(result.log_jsonl(timings=not args.deterministic), args.log, out)
    st = result.stats
    sys.stderr.write(f"root claim: {result.root_status}; own nodes {st.own_nodes}, "
                     f"opponent nodes {st.opponent_nodes}, leaves {st.leaves}\n")
    return EXIT_OK


def cmd_export_pgn(args, out: IO[str]) -> int:
    doc = _load(args.input)
    _write(export_pgn(doc, args.event), args.output, out)
    return EXIT_OK


def cmd_bundle(args, out: IO[str]) -> int:
    for entry, doc in load_bundle():
        out.write(f"{entry.file}\t{entry.side}\t{entry.opening}\t{entry.status}\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# play


_OUTCOME_TEXT = {
    Outcome.STALEMATE: "draw by stalemate",
    Outcome.DRAW_BY_REPETITION: "draw by repetition",
    Outcome.DRAW_BY_HALFMOVE_RULE: "draw by the halfmove rule",
    Outcome.DRAW_INSUFFICIENT_MATERIAL: "draw by insufficient material",
}


class _Game:
    """Game state of the play loop: positions, oracle cursors, undo stack."""

    def __init__(self, doc: OracleDocument, rules: RuleProfile):
        self.doc = doc
        self.rules = rules
        self.positions: List[Position] = [initial_position()]
        self.cursors: List[Optional[Node]] = [None]
        self.left = [False]
        self._enter()

    @property
    def pos(self) -> Position:
        return self.positions[-1]

    def _enter(self):
        if self.cursors[-1] is None and not self.left[-1] \
                and self.pos.key == self.doc.root_position.key:
            self.cursors[-1] = self.doc.tree

    def push(self, san: str) -> None:
        node = self.cursors[-1]
        nxt: Optional[Node] = None
        left = self.left[-1]
        if isinstance(node, OurMove):
            nxt = node.child if node.san == san else None
        elif isinstance(node, OpponentNode):
            b = node.branch(san)
            nxt = b.node if b is not None else None
        if node is not None and not isinstance(node, Leaf) and nxt is None:
            left = True
        if isinstance(node, Leaf):
            left = True
        m = parse_san_packed(self.pos, san)
        self.positions.append(make_packed(self.pos, m))
        self.cursors.append(nxt)
        self.left.append(left)
        self._enter()

    def pop(self) -> None:
        self.positions.pop()
        self.cursors.pop()
        self.left.pop()

    def status(self):
        return game_status(self.pos, [p.key for p in self.positions[:-1]], self.rules)

    def oracle_move(self) -> Optional[str]:
        node = self.cursors[-1]
        return node.san if isinstance(node, OurMove) else None


def play_loop(doc: OracleDocument, human: int, rules: RuleProfile, inp: IO[str],
              out: IO[str], budget: Budget = Budget(50_000, None)) -> int:
    game = _Game(doc, rules)
    program = human ^ 1
    if program != doc.side:
        out.write(f"note: the oracle plays {'white' if doc.side == WHITE else 'black'}\n")
    policy = BuildPolicy(side=program, mate_budget=budget, mate_moves=6)
    warned = False

    def announce() -> bool:
        st = game.status()
        if st.outcome is Outcome.ONGOING:
            return False
        if st.outcome is Outcome.CHECKMATE:
            winner = "white" if st.loser == BLACK else "black"
            out.write(f"checkmate, {winner} wins\n")
        else:
            out.write(_OUTCOME_TEXT[st.outcome] + "\n")
        return True

    def reply() -> bool:
        nonlocal warned
        if announce():
            return True
        san = game.oracle_move()
        if san is None:
            if not warned:
                out.write("left oracle: engine move\n")
                warned = True
            san = select_move(game.pos, policy,
                              tuple(p.key for p in game.positions[:-1]))
        game.push(san)
        out.write(f"{_move_prefix(game.positions[-2])}{san}\n")
        return announce()

    if game.pos.turn == program and reply():
        return EXIT_OK
    while True:
        out.write("> ")
        out.flush()
        line = inp.readline()
        if not line:
            return EXIT_OK
        cmd = line.strip()
        if not cmd:
            continue
        if cmd == "quit":
            return EXIT_OK
        if cmd == "fen":
            out.write(format_fen(game.pos) + "\n")
            continue
        if cmd == "board":
            out.write(str(game.pos) + "\n")
            continue
        if cmd == "moves":
            out.write(" ".join(_legal_sans(game.pos)) + "\n")
            continue
        if cmd == "undo":
            while len(game.positions) > 1:
                game.pop()
                if game.pos.turn == human:
                    break
            out.write(format_fen(game.pos) + "\n")
            if game.pos.turn == program and reply():
                return EXIT_OK
            continue
        try:
            m = parse_san_packed(game.pos, cmd)
        except NotationError:
            legal = _legal_sans(game.pos)
            out.write(f"illegal move {cmd!r}; {len(legal)} legal moves: {' '.join(legal)}\n")
            continue
        game.push(san_of_packed(game.pos, m))
        if reply():
            return EXIT_OK


def _move_prefix(pos: Position) -> str:
    n = pos.fullmove_number
    return f"{n}." if pos.turn == WHITE else f"{n}..."


def cmd_play(args, out: IO[str], inp: IO[str]) -> int:
    doc = _load(args.oracle)
    human = _color(args.human_color)
    budget = _budget(args.mate_nodes, None, True)
    return play_loop(doc, human, RuleProfile(repetition=args.repetition), inp, out, budget)


# ---------------------------------------------------------------------------
# parser


def _budget_flags(p: argparse.ArgumentParser, nodes: int = DEFAULT_MAX_NODES,
                  seconds: Optional[float] = DEFAULT_MAX_SECONDS) -> None:
    p.add_argument("--mate-nodes", type=int, default=nodes,
                   help="node budget per query (0 = unlimited)")
    p.add_argument("--mate-time", type=float, default=seconds,
                   help="seconds per query (0 = unlimited; ignored with --deterministic)")
    p.add_argument("--deterministic", action="store_true",
                   help="node budgets only and no timings in the output")


def _position_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--fen", help="FEN-5 start position (default: initial position)")
    p.add_argument("--moves", help="SAN moves to play from the start position first")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gardner", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("perft", help="count leaf nodes of the legal move tree")
    _position_flags(p)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--split", action="store_true", help="print per-move counts")

    p = sub.add_parser("fen", help="print the FEN-5 of a position")
    p.add_argument("fen", nargs="?")
    p.add_argument("--moves")
    p.add_argument("--board", action="store_true", help="also draw the board")

    p = sub.add_parser("moves", help="list legal moves in SAN")
    p.add_argument("fen", nargs="?")
    p.add_argument("--moves")

    p = sub.add_parser("solve", help="decide a bounded forced mate")
    p.add_argument("fen", nargs="?")
    p.add_argument("--moves")
    p.add_argument("--attacker", help="white or black (default: side to move)")
    p.add_argument("--mate-in", type=int, required=True)
    p.add_argument("--no-tt", action="store_true", help="disable the transposition table")
    _budget_flags(p)

    p = sub.add_parser("verify", help="check oracle documents")
    p.add_argument("paths", nargs="*", help=".gdo files or bundled names")
    p.add_argument("--bundled", action="store_true",
                   help="verify the whole bundle and the joint 1.b4 game")
    p.add_argument("--level", type=int, default=1, help="0 legality .. 3 draw leaves")
    p.add_argument("--horizon", type=int, default=DEFAULT_HORIZON, help="non-loss plies")
    p.add_argument("--repetition", type=int, default=3, help="repetition draw threshold")
    p.add_argument("--threads", type=int, default=None,
                   help="worker processes (capped by GARDNER_THREADS)")
    p.add_argument("--format", choices=("text", "jsonl"), default="text")
    p.add_argument("--verbose", action="store_true", help="also list passing records")
    p.add_argument("-o", "--output")
    _budget_flags(p)

    p = sub.add_parser("build", help="build an oracle from a position")
    _position_flags(p)
    p.add_argument("--side", help="oracle side (default: side to move)")
    p.add_argument("--guide", help="file of '<FEN-5> <SAN>' forced own moves")
    p.add_argument("--max-depth", type=int, default=6, help="plies")
    p.add_argument("--mate-in", type=int, default=20, help="mate bound for proofs")
    p.add_argument("--draw-rule", choices=(REPETITION, SAFE_HORIZON), default=REPETITION)
    p.add_argument("--horizon", type=int, default=8, help="plies for the safe draw rule")
    p.add_argument("--threshold", type=int, default=500,
                   help="evaluation at which a mate proof is tried first")
    p.add_argument("--name")
    p.add_argument("-o", "--output")
    p.add_argument("--log", help="JSON-lines build log")
    _budget_flags(p, nodes=100_000, seconds=None)

    p = sub.add_parser("play", help="play against an oracle in the terminal")
    p.add_argument("--oracle", required=True, help=".gdo file or bundled name")
    p.add_argument("--human-color", default="white")
    p.add_argument("--repetition", type=int, default=3)
    p.add_argument("--mate-nodes", type=int, default=50_000)

    p = sub.add_parser("export-pgn", help="export an oracle as PGN")
    p.add_argument("input")
    p.add_argument("--event")
    p.add_argument("-o", "--output")

    sub.add_parser("bundle", help="list the bundled oracle documents")
    return parser


def main(argv: Optional[Sequence[str]] = None, stdin: Optional[IO[str]] = None,
         stdout: Optional[IO[str]] = None) -> int:
    out = stdout or sys.stdout
    inp = stdin or sys.stdin
    args = build_parser().parse_args(argv)
    handlers = {
        "perft": cmd_perft, "fen": cmd_fen, "moves": cmd_moves, "solve": cmd_solve,
        "verify": cmd_verify, "build": cmd_build, "export-pgn": cmd_export_pgn,
        "bundle": cmd_bundle,
    }
    try:
        if args.command == "play":
            return cmd_play(args, out, inp)
        return handlers[args.command](args, out)
    except InputError as exc:
        sys.stderr.write(f"gardner: {exc}\n")
        return EXIT_INPUT
    except BrokenPipeError:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
