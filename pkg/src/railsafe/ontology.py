"""Two-layer safety ontology: generic concepts, rail-domain specializations and
leaf instances.

The ontology is the controlled vocabulary for every scenario sheet value. It is
a DAG of concepts (multiple parents allowed) split over two layers:

* ``generic``  -- general safety notions (feared event, accident cause, ...)
* ``domain``   -- rail-transport specializations, anchored under the generic
  layer unless explicitly marked as extra roots

plus flat instances attached to concepts. An ``Ontology`` is immutable after a
successful load; "editing" is load-new-version-and-swap.
"""

from __future__ import annotations

import io
import re
import xml.etree.ElementTree as ET
from collections import deque
from xml.parsers import expat
from dataclasses import dataclass, replace
from pathlib import Path
from typing import IO, Iterable

from .errors import OntologyConsistencyError, OntologyParseError, UnknownConceptError
from .findings import ValidationReport

GENERIC = "generic"
DOMAIN = "domain"
LAYERS = (GENERIC, DOMAIN)

CONCEPT_ID_RE = re.compile(r"^[a-z0-9][a-z0-9-]*$")


@dataclass(frozen=True)
class Concept:
    id: str
    label: str
    layer: str = DOMAIN
    alt_labels: tuple[str, ...] = ()
    definition: str = ""
    parents: tuple[str, ...] = ()
    root: bool = False  # explicit opt-out of generic-layer anchoring

    def labels(self) -> tuple[str, ...]:
        return (self.label,) + self.alt_labels


@dataclass(frozen=True)
class Instance:
    id: str
    label: str
    concept: str
    note: str = ""


@dataclass(frozen=True)
class Ontology:
    concepts: dict[str, Concept]
    instances: dict[str, Instance]
    version: str = "unversioned"

    def __post_init__(self):
        by_concept: dict[str, list[Instance]] = {}
        children: dict[str, list[str]] = {}
        for inst in self.instances.values():
            by_concept.setdefault(inst.concept, []).append(inst)
        for c in self.concepts.values():
            for p in c.parents:
                children.setdefault(p, []).append(c.id)
        for lst in by_concept.values():
            lst.sort(key=lambda i: i.id)
        for lst in children.values():
            lst.sort()
        object.__setattr__(self, "_instances_by_concept", by_concept)
        object.__setattr__(self, "_children", children)

    # --- lookups -------------------------------------------------------------

    def concept(self, cid: str) -> Concept:
        try:
            return self.concepts[cid]
        except KeyError:
            raise UnknownConceptError(f"unknown concept '{cid}'") from None

    def instance(self, iid: str) -> Instance:
        return self.instances[iid]

    def children(self, cid: str) -> list[str]:
        self.concept(cid)
        return list(self._children.get(cid, []))

    def find_concepts_by_label(self, text: str) -> list[Concept]:
        """Case-insensitive match over label and alt_labels, sorted by id."""
        needle = text.casefold()
        hits = [c for c in self.concepts.values()
                if any(lbl.casefold() == needle for lbl in c.labels())]
        return sorted(hits, key=lambda c: c.id)

    def find_instances_by_label(self, text: str) -> list[Instance]:
        needle = text.casefold()
        hits = [i for i in self.instances.values() if i.label.casefold() == needle]
        return sorted(hits, key=lambda i: i.id)

    # --- reasoning -----------------------------------------------------------

    def is_subconcept(self, a: str, b: str) -> bool:
        """True iff ``b`` is reachable from ``a`` over parent links (reflexive)."""
        self.concept(a)
        self.concept(b)
        if a == b:
            return True
        seen = {a}
        queue = deque([a])
        while queue:
            for parent in self.concepts[queue.popleft()].parents:
                if parent == b:
                    return True
                if parent not in seen:
                    seen.add(parent)
                    queue.append(parent)
        return False

    def ancestors(self, cid: str) -> set[str]:
        """All strict ancestors of ``cid`` (cycle-safe)."""
        self.concept(cid)
        seen: set[str] = set()
        queue = deque(self.concepts[cid].parents)
        while queue:
            p = queue.popleft()
            if p in seen or p not in self.concepts:
                continue
            seen.add(p)
            queue.extend(self.concepts[p].parents)
        return seen

    def descendants(self, cid: str) -> list[str]:
        """Every concept strictly below ``cid``, sorted by id."""
        self.concept(cid)
        return sorted(x for x in self.concepts if x != cid and self.is_subconcept(x, cid))

    def instances_of(self, cid: str, transitive: bool) -> list[Instance]:
        """Instances attached to ``cid`` (and its descendants if transitive)."""
        self.concept(cid)
        concepts = [cid] + (self.descendants(cid) if transitive else [])
        out: list[Instance] = []
        for c in concepts:
            out.extend(self._instances_by_concept.get(c, []))
        return sorted(out, key=lambda i: i.id)

    def concept_tree(self) -> list["TreeNode"]:
        """Forest view of the DAG: a concept with k parents appears k times."""
        roots = sorted(c.id for c in self.concepts.values() if not c.parents)
        return [self._node(r) for r in roots]

    def _node(self, cid: str) -> "TreeNode":
        return TreeNode(
            concept=self.concepts[cid],
            children=[self._node(k) for k in self._children.get(cid, [])],
            instances=list(self._instances_by_concept.get(cid, [])),
        )

    # --- evolution -----------------------------------------------------------

    def with_instances(self, extra: Iterable[Instance]) -> "Ontology":
        """New ontology version with ``extra`` instances added (existing ids kept).

        This is how coded entries get registered as vocabulary on first use.
        """
        merged = dict(self.instances)
        changed = False
        for inst in extra:
            if inst.id not in merged:
                self.concept(inst.concept)
                merged[inst.id] = inst
                changed = True
        if not changed:
            return self
        return replace(self, instances=merged)


@dataclass(frozen=True)
class TreeNode:
    concept: Concept
    children: list["TreeNode"]
    instances: list[Instance]

    def to_json(self) -> dict:
        return {
            "id": self.concept.id,
            "label": self.concept.label,
            "layer": self.concept.layer,
            "instances": [
                {"id": i.id, "label": i.label, "note": i.note} for i in self.instances
            ],
            "children": [c.to_json() for c in self.children],
        }


# --- consistency validation ---------------------------------------------------

def validate_ontology(o: Ontology) -> ValidationReport:
    """Check every type invariant, collecting all violations."""
    report = ValidationReport()
    for cid, c in o.concepts.items():
        if not CONCEPT_ID_RE.match(cid):
            report.error(cid, f"concept id '{cid}' is not kebab-case ASCII")
        if not c.label:
            report.error(cid, "concept has an empty label")
        if c.layer not in LAYERS:
            report.error(cid, f"unknown layer '{c.layer}' (expected generic or domain)")
        for p in c.parents:
            if p not in o.concepts:
                report.error(cid, f"parent '{p}' is not a declared concept")
            elif c.layer == GENERIC and o.concepts[p].layer == DOMAIN:
                report.error(cid, f"generic concept has domain-layer parent '{p}'")

    for cycle in _cycles(o.concepts):
        names = ", ".join(sorted(cycle))
        report.error(names, f"parent relation contains a cycle through {{{names}}}")

    # anchoring check only makes sense on an acyclic, dangling-free hierarchy
    if report.ok:
        for cid, c in o.concepts.items():
            if c.layer != DOMAIN:
                continue
            anchored = any(o.concepts[a].layer == GENERIC for a in o.ancestors(cid))
            if not anchored and not c.root:
                report.error(
                    cid,
                    "domain concept has no generic-layer ancestor and no root marker",
                )
            elif c.root:
                report.warning(cid, "domain concept opts out of generic anchoring (root marker)")

    for iid, inst in o.instances.items():
        if not iid:
            report.error(iid, "instance with empty id")
        if not inst.label:
            report.error(iid, "instance has an empty label")
        if inst.concept not in o.concepts:
            report.error(iid, f"instance concept '{inst.concept}' is not declared")
        if iid in o.concepts:
            report.warning(iid, "instance id shadows a concept id")
    return report


def _cycles(concepts: dict[str, Concept]) -> list[set[str]]:
    """Strongly connected components with more than one node, plus self-loops."""
    index: dict[str, int] = {}
    lowlink: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    counter = [0]
    sccs: list[set[str]] = []

    def edges(v: str) -> list[str]:
        return [p for p in concepts[v].parents if p in concepts]

    def strongconnect(v: str) -> None:
        work = [(v, iter(edges(v)))]
        index[v] = lowlink[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on_stack.add(v)
        while work:
            node, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = lowlink[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(edges(w))))
                    advanced = True
                    break
                if w in on_stack:
                    lowlink[node] = min(lowlink[node], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[node])
            if lowlink[node] == index[node]:
                component: set[str] = set()
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    component.add(w)
                    if w == node:
                        break
                if len(component) > 1 or node in edges(node):
                    sccs.append(component)

    for v in concepts:
        if v not in index:
            strongconnect(v)
    return sccs


# --- document format ------------------------------------------------------------
#
# UTF-8 XML, one <ontology version=""> root. Element and attribute names are
# fixed (see docs/formats.md); unknown names are errors in strict mode,
# warnings otherwise.

_CONCEPT_ATTRS = {"id", "label", "layer", "root"}
_INSTANCE_ATTRS = {"id", "label", "concept"}


def parse_ontology(text: str, strict: bool = True) -> tuple[Ontology, ValidationReport]:
    """Parse XML text into an Ontology plus the full validation report.

    Raises OntologyParseError on malformed XML. Consistency problems are
    returned in the report, one finding per violation.
    """
    root, lines = _parse_xml(text)
    report = ValidationReport()
    if root.tag != "ontology":
        raise OntologyParseError(f"expected <ontology> root element, got <{root.tag}>")
    version = root.get("version", "unversioned")
    _check_attrs(root, {"version"}, report, strict, lines)

    concepts: dict[str, Concept] = {}
    instances: dict[str, Instance] = {}
    for el in root:
        where = _where(el, lines)
        if el.tag == "concept":
            _check_attrs(el, _CONCEPT_ATTRS, report, strict, lines)
            cid = el.get("id", "")
            parents: list[str] = []
            alt_labels: list[str] = []
            definition = ""
            for sub in el:
                if sub.tag == "parent":
                    ref = sub.get("ref", "")
                    if not ref:
                        report.error(where, f"<parent> under '{cid}' lacks a ref attribute")
                    parents.append(ref)
                elif sub.tag == "alt-label":
                    alt_labels.append((sub.text or "").strip())
                elif sub.tag == "definition":
                    definition = (sub.text or "").strip()
                else:
                    _unknown(f"element <{sub.tag}> under concept '{cid}'",
                             _where(sub, lines), report, strict)
            if cid in concepts:
                report.error(cid, f"duplicate concept id '{cid}'")
                continue
            concepts[cid] = Concept(
                id=cid,
                label=el.get("label", ""),
                layer=el.get("layer", DOMAIN),
                alt_labels=tuple(alt_labels),
                definition=definition,
                parents=tuple(parents),
                root=el.get("root", "").lower() in ("true", "1", "yes"),
            )
        elif el.tag == "instance":
            _check_attrs(el, _INSTANCE_ATTRS, report, strict, lines)
            iid = el.get("id", "")
            note = ""
            for sub in el:
                if sub.tag == "note":
                    note = (sub.text or "").strip()
                else:
                    _unknown(f"element <{sub.tag}> under instance '{iid}'",
                             _where(sub, lines), report, strict)
            if iid in instances:
                report.error(iid, f"duplicate instance id '{iid}'")
                continue
            instances[iid] = Instance(
                id=iid, label=el.get("label", ""), concept=el.get("concept", ""), note=note
            )
        else:
            _unknown(f"element <{el.tag}> under <ontology>", where, report, strict)

    ontology = Ontology(concepts=concepts, instances=instances, version=version)
    report.extend(validate_ontology(ontology))
    return ontology, report


def load_ontology(source: str | Path | IO[str], strict: bool = True) -> Ontology:
    """Load and fully validate an ontology document.

    ``source`` is a file path or a readable text stream. Raises
    OntologyParseError for malformed XML and OntologyConsistencyError listing
    every consistency violation.
    """
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source.read()
    ontology, report = parse_ontology(text, strict=strict)
    if not report.ok:
        raise OntologyConsistencyError(
            f"ontology has {len(report.errors)} consistency error(s)",
            details=[str(f) for f in report.errors],
        )
    return ontology


def serialize_ontology(o: Ontology) -> str:
    """Canonical XML rendering: concepts then instances, each sorted by id."""
    out = io.StringIO()
    out.write('<?xml version="1.0" encoding="UTF-8"?>\n')
    out.write(f'<ontology version="{_esc(o.version)}">\n')
    for c in sorted(o.concepts.values(), key=lambda c: c.id):
        attrs = f'id="{_esc(c.id)}" label="{_esc(c.label)}" layer="{c.layer}"'
        if c.root:
            attrs += ' root="true"'
        body = []
        for p in c.parents:
            body.append(f'    <parent ref="{_esc(p)}"/>\n')
        for a in c.alt_labels:
            body.append(f"    <alt-label>{_esc(a)}</alt-label>\n")
        if c.definition:
            body.append(f"    <definition>{_esc(c.definition)}</definition>\n")
        if body:
            out.write(f"  <concept {attrs}>\n{''.join(body)}  </concept>\n")
        else:
            out.write(f"  <concept {attrs}/>\n")
    for i in sorted(o.instances.values(), key=lambda i: i.id):
        attrs = f'id="{_esc(i.id)}" label="{_esc(i.label)}" concept="{_esc(i.concept)}"'
        if i.note:
            out.write(f"  <instance {attrs}>\n    <note>{_esc(i.note)}</note>\n  </instance>\n")
        else:
            out.write(f"  <instance {attrs}/>\n")
    out.write("</ontology>\n")
    return out.getvalue()


# --- XML helpers ---------------------------------------------------------------

def _esc(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def _parse_xml(text: str) -> tuple[ET.Element, dict[int, int]]:
    """Parse XML and attach a source line number to every element.

    ElementTree's C parser hides the expat handle, so line numbers come from a
    second expat pass: start-tag events arrive in document order, which is
    exactly the order ``root.iter()`` walks the finished tree.
    """
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        line, col = exc.position if exc.position else (None, None)
        raise OntologyParseError(str(exc), line, col) from exc

    start_lines: list[int] = []
    scanner = expat.ParserCreate()
    scanner.StartElementHandler = lambda *_: start_lines.append(
        scanner.CurrentLineNumber
    )
    scanner.Parse(text, True)
    return root, {
        id(elem): line for elem, line in zip(root.iter(), start_lines)
    }


def _where(el: ET.Element, lines: dict[int, int]) -> str:
    line = lines.get(id(el))
    return f"line {line}" if line else el.tag


def _check_attrs(el: ET.Element, allowed: set[str], report: ValidationReport,
                 strict: bool, lines: dict[int, int]) -> None:
    for name in el.attrib:
        if name not in allowed:
            _unknown(f"attribute '{name}' on <{el.tag}>", _where(el, lines), report, strict)


def _unknown(what: str, where: str, report: ValidationReport, strict: bool) -> None:
    msg = f"unknown {what}"
    if strict:
        report.error(where, msg)
    else:
        report.warning(where, msg)
