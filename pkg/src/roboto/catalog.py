"""File-backed catalog of strategy documents.

Layout: one directory with ``strategies/*.roboto`` holding the original
text byte-for-byte plus an ``index.json``.  Entry ids are derived from
the content hash of the canonical formatted text, so re-ingesting the
same strategy is idempotent.  The four built-in strategies are seeded on
first use and are read-only.
"""

from __future__ import annotations

import json
import re
import threading
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path

from .errors import BuiltinReadOnly, NotFound, ParseFailed, ValidationFailed
from .formatter import content_hash
from .nodes import StrategyDoc
from .parser import parse_document
from .validator import validate

ID_LENGTH = 12

BUILTIN_FILES = (
    "renameVariable.roboto",
    "towerOfHanoi.roboto",
    "testDrivenDevelopment.roboto",
    "debug.roboto",
)


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    name: str
    path: str
    summary: str | None
    strategyNames: list[str]
    contentHash: str
    builtin: bool = False


def _summary(doc: StrategyDoc) -> str | None:
    comment = doc.strategies[0].leading_comment
    if not comment:
        return None
    first_paragraph = comment.split("\n\n")[0]
    return " ".join(line.strip() for line in first_paragraph.split("\n") if line.strip())


def builtin_corpus_text(filename: str) -> str:
    return resources.files("roboto.corpus").joinpath(filename).read_text(encoding="utf-8")


class Catalog:
    """Strategy storage. Reads are lock-free; writes are serialized per instance."""

    def __init__(self, root: Path | str, seed_builtins: bool = True):
        self.root = Path(root)
        self.strategies_dir = self.root / "strategies"
        self.index_path = self.root / "index.json"
        self._lock = threading.Lock()
        self._entries: dict[str, CatalogEntry] = {}
        self.strategies_dir.mkdir(parents=True, exist_ok=True)
        if self.index_path.exists():
            self._load_index()
        if seed_builtins:
            self._seed_builtins()

    def _load_index(self) -> None:
        data = json.loads(self.index_path.read_text(encoding="utf-8"))
        for raw in data["entries"]:
            entry = CatalogEntry(**raw)
            self._entries[entry.id] = entry

    def _write_index(self) -> None:
        data = {"entries": [asdict(e) for e in self._list_sorted()]}
        tmp = self.index_path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        tmp.replace(self.index_path)

    def _seed_builtins(self) -> None:
        for filename in BUILTIN_FILES:
            text = builtin_corpus_text(filename)
            doc = parse_document(text, filename)
            entry_id = content_hash(doc)[:ID_LENGTH]
            if entry_id in self._entries:
                continue
            self._store(text, doc, entry_id, builtin=True, filename=filename)

    def _store(
        self,
        text: str,
        doc: StrategyDoc,
        entry_id: str,
        builtin: bool = False,
        filename: str | None = None,
    ) -> CatalogEntry:
        name = doc.strategies[0].name
        if filename is None:
            filename = f"{_safe_name(name)}-{entry_id}.roboto"
        path = self.strategies_dir / filename
        with self._lock:
            path.write_text(text, encoding="utf-8")
            entry = CatalogEntry(
                id=entry_id,
                name=name,
                path=str(Path("strategies") / filename),
                summary=_summary(doc),
                strategyNames=doc.names(),
                contentHash=content_hash(doc),
                builtin=builtin,
            )
            self._entries[entry_id] = entry
            self._write_index()
        return entry

    def ingest(self, text: str) -> CatalogEntry:
        """Persist a strategy file. Identical text maps to the same id."""
        try:
            doc = parse_document(text, "<ingest>")
        except ParseFailed:
            raise
        errors = [d for d in validate(doc) if d.severity == "error"]
        if errors:
            raise ValidationFailed(errors)
        entry_id = content_hash(doc)[:ID_LENGTH]
        existing = self._entries.get(entry_id)
        if existing is not None:
            return existing
        return self._store(text, doc, entry_id)

    def _list_sorted(self) -> list[CatalogEntry]:
        return sorted(self._entries.values(), key=lambda e: (e.name, e.id))

    def list(self) -> list[CatalogEntry]:
        return self._list_sorted()

    def get(self, entry_id: str) -> tuple[CatalogEntry, str]:
        entry = self._entries.get(entry_id)
        if entry is None:
            raise NotFound(f"no catalog entry {entry_id!r}")
        text = (self.root / entry.path).read_text(encoding="utf-8")
        return entry, text

    def document(self, entry_id: str) -> StrategyDoc:
        entry, text = self.get(entry_id)
        return parse_document(text, entry.path)

    def remove(self, entry_id: str) -> None:
        entry = self._entries.get(entry_id)
        if entry is None:
            raise NotFound(f"no catalog entry {entry_id!r}")
        if entry.builtin:
            raise BuiltinReadOnly(f"built-in strategy {entry.name!r} cannot be removed")
        with self._lock:
            (self.root / entry.path).unlink(missing_ok=True)
            del self._entries[entry_id]
            self._write_index()


def _safe_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_-]", "_", name)
