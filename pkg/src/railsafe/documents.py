"""Scenario documents: sheet, optional dynamic model, sequencing tables, metadata.

A document is the unit of storage and exchange. Its XML form is canonical:
reading a written document yields an equal in-memory value, so the archive can
rely on structural equality for its round-trip guarantees.

Labels and situation texts live in XML attributes and are therefore
single-line by design; titles, narratives and code descriptions are element
text and may span lines.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field, replace
from typing import IO

from .errors import DocumentParseError
from .findings import ValidationReport
from .ontology import Ontology, _esc
from .petri import (
    Arc,
    Marking,
    PetriNet,
    Place,
    Predicate,
    SequencingRow,
    SequencingTable,
    Transition,
    parse_predicate,
    replay,
    validate_net,
)
from .sheet import (
    AttributeSchema,
    CodedEntry,
    ParameterId,
    PARAMETER_ORDER,
    ScenarioSheet,
    ValueSelection,
    validate_sheet,
)

DRAFT = "draft"
VALIDATED = "validated"
STATUSES = (DRAFT, VALIDATED)


@dataclass(frozen=True)
class DocumentMeta:
    author: str = ""
    created: str | None = None  # ISO-8601; filled at first save when absent
    modified: str | None = None
    status: str = DRAFT
    ontology_version: str = ""


@dataclass(frozen=True)
class ScenarioDocument:
    sheet: ScenarioSheet
    net: PetriNet | None = None
    initial_marking: Marking | None = None
    critical_predicate: Predicate | None = None
    tables: tuple[SequencingTable, ...] = ()
    meta: DocumentMeta = field(default_factory=DocumentMeta)

    @property
    def id(self) -> str:
        return self.sheet.scenario_id

    def with_meta(self, **changes) -> "ScenarioDocument":
        return replace(self, meta=replace(self.meta, **changes))


# --- validation --------------------------------------------------------------------

def validate_document(
    doc: ScenarioDocument,
    schema: list[AttributeSchema],
    ontology: Ontology,
) -> ValidationReport:
    """Sheet, net, marking, predicate and table checks in one report."""
    report = validate_sheet(doc.sheet, schema, ontology)
    if doc.meta.status not in STATUSES:
        report.error("meta", f"unknown status '{doc.meta.status}'")

    if doc.net is None:
        if doc.tables:
            report.error("tables", "sequencing tables present but the document has no net")
        if doc.initial_marking is not None:
            report.error("net", "initial marking present but the document has no net")
        return report

    net_report = validate_net(doc.net)
    report.extend(net_report)
    if not net_report.ok:
        return report  # structural errors make the dynamic checks meaningless

    place_ids = set(doc.net.place_ids())
    if doc.initial_marking is None:
        report.warning("net", "net has no initial marking; simulation requires one")
    else:
        for p, _ in doc.initial_marking.entries:
            if p not in place_ids:
                report.error("marking", f"initial marking references undeclared place '{p}'")
    if doc.critical_predicate is not None:
        for p in sorted(doc.critical_predicate.places() - place_ids):
            report.error("critical", f"predicate references undeclared place '{p}'")

    for n, table in enumerate(doc.tables):
        where = f"table[{n}]"
        if table.critical and doc.critical_predicate is None:
            report.error(where, "table is marked critical but the document has no predicate")
        try:
            markings = replay(doc.net, table.initial, table.chronology())
        except Exception as exc:
            report.error(where, f"chronology does not replay: {exc}")
            continue
        for i, (row, m) in enumerate(zip(table.rows, markings)):
            if row.marking != m:
                report.error(
                    where,
                    f"row {i} records {row.marking.describe()} but replay"
                    f" gives {m.describe()}",
                )
                break
        else:
            if (
                table.critical
                and doc.critical_predicate is not None
                and not doc.critical_predicate.evaluate(table.final)
            ):
                report.error(
                    where, "final marking does not satisfy the critical predicate"
                )
    return report


# --- XML writing -------------------------------------------------------------------

def document_to_xml(doc: ScenarioDocument) -> str:
    out = [f'<scenario id="{_esc(doc.id)}">']
    m = doc.meta
    out.append("  <meta>")
    if m.author:
        out.append(f"    <author>{_esc(m.author)}</author>")
    if m.created:
        out.append(f"    <created>{_esc(m.created)}</created>")
    if m.modified:
        out.append(f"    <modified>{_esc(m.modified)}</modified>")
    out.append(f"    <status>{_esc(m.status)}</status>")
    if m.ontology_version:
        out.append(
            f"    <ontology-version>{_esc(m.ontology_version)}</ontology-version>"
        )
    out.append("  </meta>")

    s = doc.sheet
    system = f' system="{_esc(s.transport_system)}"' if s.transport_system else ""
    out.append(f"  <sheet{system}>")
    out.append(f"    <title>{_esc(s.title)}</title>")
    if s.narrative:
        out.append(f"    <narrative>{_esc(s.narrative)}</narrative>")
    for pid in PARAMETER_ORDER:
        selections = s.selections.get(pid)
        if not selections:
            continue
        out.append(f'    <parameter id="{pid.value}">')
        for sel in selections:
            if isinstance(sel, CodedEntry):
                out.append(
                    f'      <code id="{_esc(sel.code)}">{_esc(sel.description)}</code>'
                )
            else:
                attrs = f' instance="{_esc(sel.instance)}"'
                if sel.key_concept:
                    attrs += ' key-concept="true"'
                if sel.numeric_qualifier is not None:
                    attrs += f' count="{sel.numeric_qualifier}"'
                out.append(f"      <value{attrs}/>")
        out.append("    </parameter>")
    out.append("  </sheet>")

    if doc.net is not None:
        out.append("  <net>")
        for p in doc.net.places:
            out.append(
                f'    <place id="{_esc(p.id)}" aspect="{p.aspect}" label="{_esc(p.label)}"/>'
            )
        for t in doc.net.transitions:
            guard = f' guard="{_esc(t.guard_note)}"' if t.guard_note else ""
            out.append(
                f'    <transition id="{_esc(t.id)}" aspect="{t.aspect}"'
                f' label="{_esc(t.label)}"{guard}/>'
            )
        for a in doc.net.arcs:
            out.append(
                f'    <arc source="{_esc(a.source)}" target="{_esc(a.target)}"'
                f' weight="{a.weight}"/>'
            )
        if doc.initial_marking is not None:
            out.append("    <marking>")
            out.extend(_token_lines(doc.initial_marking, "      "))
            out.append("    </marking>")
        if doc.critical_predicate is not None:
            out.append(f"    <critical>{_esc(doc.critical_predicate.text())}</critical>")
        out.append("  </net>")

    if doc.tables:
        out.append("  <tables>")
        for table in doc.tables:
            flag = "true" if table.critical else "false"
            out.append(f'    <table critical="{flag}">')
            out.append("      <initial>")
            out.extend(_token_lines(table.initial, "        "))
            out.append("      </initial>")
            for row in table.rows:
                out.append(
                    f'      <row transition="{_esc(row.transition)}"'
                    f' situation="{_esc(row.situation_label)}">'
                )
                out.extend(_token_lines(row.marking, "        "))
                out.append("      </row>")
            out.append("    </table>")
        out.append("  </tables>")

    out.append("</scenario>")
    return "\n".join(out) + "\n"


def _token_lines(m: Marking, indent: str) -> list[str]:
    return [
        f'{indent}<token place="{_esc(p)}" count="{c}"/>' for p, c in m.entries
    ]


# --- XML reading -------------------------------------------------------------------

def document_from_xml(source: str) -> ScenarioDocument:
    """Parse a scenario document; raises DocumentParseError on any defect."""
    try:
        root = ET.fromstring(source)
    except ET.ParseError as exc:
        raise DocumentParseError(f"malformed XML: {exc}") from None
    if root.tag != "scenario":
        raise DocumentParseError(f"expected <scenario> root, found <{root.tag}>")
    scenario_id = _require(root, "id")

    meta = DocumentMeta()
    sheet: ScenarioSheet | None = None
    net: PetriNet | None = None
    initial: Marking | None = None
    predicate: Predicate | None = None
    tables: list[SequencingTable] = []
    for child in root:
        if child.tag == "meta":
            meta = _read_meta(child)
        elif child.tag == "sheet":
            sheet = _read_sheet(child, scenario_id)
        elif child.tag == "net":
            net, initial, predicate = _read_net(child)
        elif child.tag == "tables":
            tables = [_read_table(t) for t in _children(child, "table")]
        else:
            raise DocumentParseError(f"unknown element <{child.tag}> in <scenario>")
    if sheet is None:
        raise DocumentParseError("document has no <sheet>")
    return ScenarioDocument(
        sheet=sheet,
        net=net,
        initial_marking=initial,
        critical_predicate=predicate,
        tables=tuple(tables),
        meta=meta,
    )


def _require(elem: ET.Element, attr: str) -> str:
    value = elem.get(attr)
    if value is None:
        raise DocumentParseError(f"<{elem.tag}> is missing required attribute '{attr}'")
    return value


def _int_attr(elem: ET.Element, attr: str) -> int:
    raw = _require(elem, attr)
    try:
        return int(raw)
    except ValueError:
        raise DocumentParseError(
            f"<{elem.tag}> attribute '{attr}' must be an integer, got {raw!r}"
        ) from None


def _children(elem: ET.Element, *allowed: str) -> list[ET.Element]:
    for child in elem:
        if child.tag not in allowed:
            raise DocumentParseError(f"unknown element <{child.tag}> in <{elem.tag}>")
    return list(elem)


def _read_meta(elem: ET.Element) -> DocumentMeta:
    fields: dict[str, str] = {}
    for child in _children(
        elem, "author", "created", "modified", "status", "ontology-version"
    ):
        fields[child.tag] = child.text or ""
    return DocumentMeta(
        author=fields.get("author", ""),
        created=fields.get("created"),
        modified=fields.get("modified"),
        status=fields.get("status", DRAFT),
        ontology_version=fields.get("ontology-version", ""),
    )


def _read_sheet(elem: ET.Element, scenario_id: str) -> ScenarioSheet:
    title = ""
    narrative = ""
    selections: dict[ParameterId, list] = {}
    for child in _children(elem, "title", "narrative", "parameter"):
        if child.tag == "title":
            title = child.text or ""
        elif child.tag == "narrative":
            narrative = child.text or ""
        else:
            raw = _require(child, "id")
            try:
                pid = ParameterId.coerce(raw)
            except Exception:
                raise DocumentParseError(f"unknown parameter id '{raw}'") from None
            if pid in selections:
                raise DocumentParseError(f"parameter '{raw}' appears twice")
            selections[pid] = [_read_selection(v) for v in _children(child, "value", "code")]
    return ScenarioSheet(
        scenario_id=scenario_id,
        title=title,
        selections=selections,
        narrative=narrative,
        transport_system=elem.get("system", ""),
    )


def _read_selection(elem: ET.Element):
    if elem.tag == "code":
        return CodedEntry(code=_require(elem, "id"), description=elem.text or "")
    count = elem.get("count")
    return ValueSelection(
        instance=_require(elem, "instance"),
        key_concept=elem.get("key-concept", "false") == "true",
        numeric_qualifier=int(count) if count is not None else None,
    )


def _read_net(elem: ET.Element) -> tuple[PetriNet, Marking | None, Predicate | None]:
    places: list[Place] = []
    transitions: list[Transition] = []
    arcs: list[Arc] = []
    initial: Marking | None = None
    predicate: Predicate | None = None
    for child in _children(
        elem, "place", "transition", "arc", "marking", "critical"
    ):
        if child.tag == "place":
            places.append(
                Place(
                    id=_require(child, "id"),
                    label=child.get("label", ""),
                    aspect=child.get("aspect", "external"),
                )
            )
        elif child.tag == "transition":
            transitions.append(
                Transition(
                    id=_require(child, "id"),
                    label=child.get("label", ""),
                    aspect=child.get("aspect", "external"),
                    guard_note=child.get("guard", ""),
                )
            )
        elif child.tag == "arc":
            arcs.append(
                Arc(
                    source=_require(child, "source"),
                    target=_require(child, "target"),
                    weight=_int_attr(child, "weight"),
                )
            )
        elif child.tag == "marking":
            initial = _read_marking(child)
        else:
            try:
                predicate = parse_predicate(child.text or "")
            except Exception as exc:
                raise DocumentParseError(f"bad critical predicate: {exc}") from None
    net = PetriNet(
        places=tuple(places), transitions=tuple(transitions), arcs=tuple(arcs)
    )
    return net, initial, predicate


def _read_marking(elem: ET.Element) -> Marking:
    tokens: dict[str, int] = {}
    for tok in _children(elem, "token"):
        place = _require(tok, "place")
        if place in tokens:
            raise DocumentParseError(f"place '{place}' appears twice in one marking")
        tokens[place] = _int_attr(tok, "count")
    try:
        return Marking.of(tokens)
    except ValueError as exc:
        raise DocumentParseError(str(exc)) from None


def _read_table(elem: ET.Element) -> SequencingTable:
    critical = elem.get("critical", "false") == "true"
    initial: Marking | None = None
    rows: list[SequencingRow] = []
    for child in _children(elem, "initial", "row"):
        if child.tag == "initial":
            initial = _read_marking(child)
        else:
            rows.append(
                SequencingRow(
                    transition=_require(child, "transition"),
                    marking=_read_marking(child),
                    situation_label=child.get("situation", ""),
                )
            )
    if initial is None:
        raise DocumentParseError("<table> has no <initial> marking")
    return SequencingTable(initial=initial, rows=tuple(rows), critical=critical)


# --- JSON mapping (HTTP layer) -------------------------------------------------------

def document_to_json(doc: ScenarioDocument) -> dict:
    data: dict = {
        "id": doc.id,
        "meta": {
            "author": doc.meta.author,
            "created": doc.meta.created,
            "modified": doc.meta.modified,
            "status": doc.meta.status,
            "ontology_version": doc.meta.ontology_version,
        },
        "sheet": {
            "title": doc.sheet.title,
            "narrative": doc.sheet.narrative,
            "system": doc.sheet.transport_system,
            "parameters": {
                pid.value: [_selection_to_json(s) for s in sels]
                for pid, sels in sorted(
                    doc.sheet.selections.items(), key=lambda kv: PARAMETER_ORDER.index(kv[0])
                )
            },
        },
        "net": None,
        "tables": [_table_to_json(t) for t in doc.tables],
    }
    if doc.net is not None:
        data["net"] = {
            "places": [
                {"id": p.id, "label": p.label, "aspect": p.aspect} for p in doc.net.places
            ],
            "transitions": [
                {"id": t.id, "label": t.label, "aspect": t.aspect, "guard": t.guard_note}
                for t in doc.net.transitions
            ],
            "arcs": [
                {"source": a.source, "target": a.target, "weight": a.weight}
                for a in doc.net.arcs
            ],
            "initial": dict(doc.initial_marking.entries) if doc.initial_marking else None,
            "critical": doc.critical_predicate.text() if doc.critical_predicate else None,
        }
    return data


def _selection_to_json(sel) -> dict:
    if isinstance(sel, CodedEntry):
        return {"code": sel.code, "description": sel.description}
    out: dict = {"instance": sel.instance, "key_concept": sel.key_concept}
    if sel.numeric_qualifier is not None:
        out["count"] = sel.numeric_qualifier
    return out


def _table_to_json(table: SequencingTable) -> dict:
    return {
        "critical": table.critical,
        "initial": dict(table.initial.entries),
        "rows": [
            {
                "transition": r.transition,
                "situation": r.situation_label,
                "marking": dict(r.marking.entries),
            }
            for r in table.rows
        ],
    }


def document_from_json(data: dict) -> ScenarioDocument:
    try:
        return _document_from_json(data)
    except DocumentParseError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise DocumentParseError(f"bad document payload: {exc}") from None


def _document_from_json(data: dict) -> ScenarioDocument:
    meta_data = data.get("meta") or {}
    meta = DocumentMeta(
        author=meta_data.get("author", ""),
        created=meta_data.get("created"),
        modified=meta_data.get("modified"),
        status=meta_data.get("status", DRAFT),
        ontology_version=meta_data.get("ontology_version", ""),
    )
    sheet_data = data["sheet"]
    selections: dict[ParameterId, list] = {}
    for raw_pid, sels in (sheet_data.get("parameters") or {}).items():
        pid = ParameterId.coerce(raw_pid)
        selections[pid] = [_selection_from_json(s) for s in sels]
    sheet = ScenarioSheet(
        scenario_id=data["id"],
        title=sheet_data.get("title", ""),
        selections=selections,
        narrative=sheet_data.get("narrative", ""),
        transport_system=sheet_data.get("system", ""),
    )
    net = None
    initial = None
    predicate = None
    net_data = data.get("net")
    if net_data is not None:
        net = PetriNet(
            places=tuple(
                Place(id=p["id"], label=p.get("label", ""), aspect=p.get("aspect", "external"))
                for p in net_data.get("places", [])
            ),
            transitions=tuple(
                Transition(
                    id=t["id"],
                    label=t.get("label", ""),
                    aspect=t.get("aspect", "external"),
                    guard_note=t.get("guard", ""),
                )
                for t in net_data.get("transitions", [])
            ),
            arcs=tuple(
                Arc(source=a["source"], target=a["target"], weight=a.get("weight", 1))
                for a in net_data.get("arcs", [])
            ),
        )
        if net_data.get("initial") is not None:
            initial = Marking.of(net_data["initial"])
        if net_data.get("critical"):
            predicate = parse_predicate(net_data["critical"])
    tables = tuple(_table_from_json(t) for t in data.get("tables", []))
    return ScenarioDocument(
        sheet=sheet,
        net=net,
        initial_marking=initial,
        critical_predicate=predicate,
        tables=tables,
        meta=meta,
    )


def _selection_from_json(data: dict):
    if "code" in data:
        return CodedEntry(code=data["code"], description=data.get("description", ""))
    return ValueSelection(
        instance=data["instance"],
        key_concept=bool(data.get("key_concept", False)),
        numeric_qualifier=data.get("count"),
    )


def _table_from_json(data: dict) -> SequencingTable:
    return SequencingTable(
        initial=Marking.of(data["initial"]),
        rows=tuple(
            SequencingRow(
                transition=r["transition"],
                marking=Marking.of(r["marking"]),
                situation_label=r.get("situation", ""),
            )
            for r in data.get("rows", [])
        ),
        critical=bool(data.get("critical", False)),
    )
