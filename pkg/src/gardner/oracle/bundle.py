"""Access to the oracle documents shipped with the package."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

from .gdo import load_oracle
from .model import OracleDocument

BUNDLE_DIR = Path(__file__).resolve().parent / "data"
MANIFEST = BUNDLE_DIR / "manifest.json"


@dataclass(frozen=True)
class BundleEntry:
    file: str
    side: str
    opening: str
    status: str          # "complete" or "partial"
    repetition: int = 3  # repetition threshold the draw leaves are checked under
    notes: str = ""

    @property
    def path(self) -> Path:
        return BUNDLE_DIR / self.file

    @property
    def complete(self) -> bool:
        return self.status == "complete"


def manifest(path: Optional[Path] = None) -> List[BundleEntry]:
    with open(path or MANIFEST, encoding="utf-8") as fh:
        raw = json.load(fh)
    entries = [BundleEntry(**item) for item in raw["documents"]]
    for e in entries:
        if e.status not in ("complete", "partial"):
            raise ValueError(f"{e.file}: status must be complete or partial")
    return entries


def load_bundled(name: str) -> OracleDocument:
    """Load a bundled document by file name, with or without ``.gdo``."""
    if not name.endswith(".gdo"):
        name += ".gdo"
    return load_oracle(BUNDLE_DIR / name)


def load_bundle() -> List[Tuple[BundleEntry, OracleDocument]]:
    return [(e, load_oracle(e.path)) for e in manifest()]
