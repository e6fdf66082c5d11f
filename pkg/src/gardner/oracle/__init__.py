"""Draw-oracle proof trees: model, ``.gdo`` format, PGN export and bundled data."""

from .bundle import BUNDLE_DIR, BundleEntry, load_bundle, load_bundled, manifest
from .gdo import (
    DanglingReference, IllegalMoveInLine, OracleFormatError, OracleSyntaxError,
    format_claim, load_oracle, parse_claim, parse_oracle, print_oracle,
)
from .model import (
    ROOT_ID, Branch, Claim, ClaimKind, Leaf, Node, OpponentNode, OracleDocument, OurMove,
    UnknownVariationId, collect_ids, count_nodes, leaves, node_at, resolve_variation, walk,
)
from .pgn import export_pgn

__all__ = [
    "BUNDLE_DIR", "BundleEntry", "load_bundle", "load_bundled", "manifest",
    "DanglingReference", "IllegalMoveInLine", "OracleFormatError", "OracleSyntaxError",
    "format_claim", "load_oracle", "parse_claim", "parse_oracle", "print_oracle",
    "ROOT_ID", "Branch", "Claim", "ClaimKind", "Leaf", "Node", "OpponentNode",
    "OracleDocument", "OurMove", "UnknownVariationId", "collect_ids", "count_nodes",
    "leaves", "node_at", "resolve_variation", "walk", "export_pgn",
]
