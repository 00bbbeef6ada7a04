"""File-backed scenario archive with a rebuildable query index.

One XML file per scenario under the archive root, plus a ``.index`` JSON
cache. Every write goes through a temp file and an atomic rename, so a crash
never leaves a half-written document behind. The index is derivable state:
``rebuild_index`` recomputes it from the files and must always agree with the
incrementally maintained copy.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

from .documents import (
    DRAFT,
    VALIDATED,
    ScenarioDocument,
    document_from_xml,
    document_to_xml,
    validate_document,
)
from .errors import (
    IdConflictError,
    InvariantViolationError,
    NotFoundError,
    StorageError,
)
from .ontology import Ontology
from .sheet import (
    CodedEntry,
    ParameterId,
    SCENARIO_ID_RE,
    default_schema,
)

INDEX_FILE = ".index"
INDEX_VERSION = 1
ONTOLOGY_FILE = "ontology.xml"  # the archive's vocabulary, not a scenario


def now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass(frozen=True)
class DocumentSummary:
    id: str
    title: str
    status: str
    modified: str | None
    system: str
    stars: tuple[str, ...] = ()  # starred (key concept) instance ids


class Archive:
    """Scenario store bound to one directory and one ontology."""

    def __init__(self, root: str | Path, ontology: Ontology):
        self.root = Path(root)
        if not self.root.is_dir():
            raise StorageError(f"archive directory does not exist: {self.root}")
        self.ontology = ontology
        self.schema = default_schema(ontology)
        index_path = self.root / INDEX_FILE
        if index_path.exists():
            try:
                self._index = json.loads(index_path.read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError):
                self._index = self._compute_index()
                self._write_index()
        else:
            self._index = self._compute_index()
            self._write_index()

    @classmethod
    def create(cls, root: str | Path, ontology: Ontology) -> "Archive":
        path = Path(root)
        path.mkdir(parents=True, exist_ok=True)
        return cls(path, ontology)

    # -- paths -------------------------------------------------------------

    def _file_for(self, scenario_id: str) -> Path:
        return self.root / f"{scenario_id}.xml"

    # -- core operations -----------------------------------------------------

    def save(self, doc: ScenarioDocument, *, overwrite: bool = True) -> ScenarioDocument:
        """Persist a document; returns it with timestamps stamped if absent."""
        if not SCENARIO_ID_RE.match(doc.id) or f"{doc.id}.xml" == ONTOLOGY_FILE:
            raise StorageError(f"scenario id '{doc.id}' is not storable")
        path = self._file_for(doc.id)
        if path.exists() and not overwrite:
            raise IdConflictError(f"scenario '{doc.id}' already exists")
        stamp = now_iso()
        meta = doc.meta
        if meta.created is None:
            meta = replace(meta, created=stamp)
        if meta.modified is None:
            meta = replace(meta, modified=stamp)
        doc = replace(doc, meta=meta)
        self._enforce_status(doc)
        self._atomic_write(path, document_to_xml(doc))
        self._index["documents"][doc.id] = self._document_entry(doc)
        self._rebuild_postings()
        self._write_index()
        return doc

    def load(self, scenario_id: str) -> ScenarioDocument:
        path = self._file_for(scenario_id)
        if not path.exists():
            raise NotFoundError(f"scenario '{scenario_id}' not found")
        doc = document_from_xml(path.read_text(encoding="utf-8"))
        if doc.id != scenario_id:
            raise StorageError(
                f"file {path.name} declares id '{doc.id}', expected '{scenario_id}'"
            )
        self._enforce_status(doc)
        return doc

    def delete(self, scenario_id: str) -> None:
        path = self._file_for(scenario_id)
        if not path.exists():
            raise NotFoundError(f"scenario '{scenario_id}' not found")
        path.unlink()
        self._index["documents"].pop(scenario_id, None)
        self._rebuild_postings()
        self._write_index()

    def exists(self, scenario_id: str) -> bool:
        return self._file_for(scenario_id).exists()

    def ids(self) -> list[str]:
        return sorted(self._index["documents"])

    def list_documents(self) -> list[DocumentSummary]:
        out = []
        for sid in self.ids():
            entry = self._index["documents"][sid]
            out.append(
                DocumentSummary(
                    id=sid,
                    title=entry.get("title", ""),
                    status=entry.get("status", DRAFT),
                    modified=entry.get("modified"),
                    system=entry.get("system", ""),
                    stars=tuple(entry.get("stars", [])),
                )
            )
        return out

    def validate(self, doc: ScenarioDocument):
        return validate_document(doc, self.schema, self.ontology)

    def _enforce_status(self, doc: ScenarioDocument) -> None:
        # validated documents must stay free of errors, in and out of storage
        if doc.meta.status != VALIDATED:
            return
        report = self.validate(doc)
        if not report.ok:
            raise InvariantViolationError(
                f"scenario '{doc.id}' is marked validated but has"
                f" {len(report.errors)} error(s)",
                details=[str(f) for f in report.errors],
            )

    # -- index ----------------------------------------------------------------

    def index_snapshot(self) -> dict:
        return json.loads(json.dumps(self._index))

    def rebuild_index(self) -> dict:
        self._index = self._compute_index()
        self._write_index()
        return self.index_snapshot()

    def _compute_index(self) -> dict:
        index = {
            "version": INDEX_VERSION,
            "ontology_version": self.ontology.version,
            "documents": {},
            "postings": {},
        }
        for path in sorted(self.root.glob("*.xml")):
            if path.name == ONTOLOGY_FILE:
                continue
            try:
                doc = document_from_xml(path.read_text(encoding="utf-8"))
            except Exception as exc:
                raise StorageError(f"cannot index {path.name}: {exc}") from None
            index["documents"][doc.id] = self._document_entry(doc)
        index["postings"] = self._compute_postings(index["documents"])
        return index

    def _document_entry(self, doc: ScenarioDocument) -> dict:
        trains = sorted(
            sel.numeric_qualifier
            for sel in doc.sheet.selections.get(ParameterId.ACTORS, [])
            if not isinstance(sel, CodedEntry) and sel.numeric_qualifier is not None
        )
        postings = sorted(
            {
                key
                for pid, sels in doc.sheet.selections.items()
                for key in (_posting_keys(pid, sel) for sel in sels)
            }
        )
        stars = sorted(
            {
                sel.instance
                for sels in doc.sheet.selections.values()
                for sel in sels
                if not isinstance(sel, CodedEntry) and sel.key_concept
            }
        )
        return {
            "title": doc.sheet.title,
            "status": doc.meta.status,
            "modified": doc.meta.modified,
            "file": f"{doc.id}.xml",
            "system": doc.sheet.transport_system,
            "has_net": doc.net is not None,
            "has_critical": doc.critical_predicate is not None,
            "trains": trains,
            "stars": stars,
            "postings": postings,
        }

    def _compute_postings(self, documents: dict) -> dict:
        postings: dict[str, list[str]] = {}
        for sid in sorted(documents):
            for key in documents[sid].get("postings", []):
                postings.setdefault(key, []).append(sid)
        return postings

    def _rebuild_postings(self) -> None:
        self._index["postings"] = self._compute_postings(self._index["documents"])

    def _write_index(self) -> None:
        payload = json.dumps(self._index, indent=1, sort_keys=True)
        self._atomic_write(self.root / INDEX_FILE, payload)

    def _atomic_write(self, path: Path, text: str) -> None:
        fd, tmp = tempfile.mkstemp(dir=self.root, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(text)
            os.replace(tmp, path)
        except OSError as exc:
            try:
                os.unlink(tmp)
            except OSError:
                pass
            raise StorageError(f"cannot write {path.name}: {exc}") from None


def _posting_keys(pid: ParameterId, sel) -> str:
    if isinstance(sel, CodedEntry):
        return f"{pid.value}|code:{sel.code.casefold()}"
    return f"{pid.value}|id:{sel.instance}"
