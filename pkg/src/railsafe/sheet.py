"""Static description of an accident scenario: the 8-parameter fact sheet.

A sheet records, per parameter, which vocabulary instances the expert selected,
which of them are key concepts, a numeric qualifier for actor counts, and
free-form coded entries for failure/mitigation codes. Validation checks every
value against the ontology anchors of the active schema.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import MissingAnchorError, SchemaMismatchError
from .findings import ValidationReport
from .ontology import Ontology

CODE_RE = re.compile(r"^[A-Z]{2}[0-9]+$")
SCENARIO_ID_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_-]*$")

SINGLE = "single"
MULTIPLE = "multiple"


class ParameterId(Enum):
    """The eight scenario parameters, in fact-sheet row order."""

    GEOGRAPHICAL_PRINCIPLE = "geographical-principle"
    RISKS = "risks"
    RISK_LINKED_FUNCTIONS = "risk-linked-functions"
    GEOGRAPHICAL_AREAS = "geographical-areas"
    ACTORS = "actors"
    INCIDENTAL_FUNCTIONS = "incidental-functions"
    SUMMARIZED_FAILURES = "summarized-failures"
    INTERIM_SOLUTIONS = "interim-solutions"

    @classmethod
    def coerce(cls, value: "ParameterId | str") -> "ParameterId":
        if isinstance(value, cls):
            return value
        try:
            return cls(value)
        except ValueError:
            raise ValueError(f"unknown parameter '{value}'") from None


PARAMETER_ORDER: tuple[ParameterId, ...] = tuple(ParameterId)

# parameter -> ontology concept anchoring its legal values
ANCHOR_CONCEPTS: dict[ParameterId, str] = {
    ParameterId.GEOGRAPHICAL_PRINCIPLE: "geographical-principle",
    ParameterId.RISKS: "risk",
    ParameterId.RISK_LINKED_FUNCTIONS: "risk-linked-function",
    ParameterId.GEOGRAPHICAL_AREAS: "geographical-area",
    ParameterId.ACTORS: "actor",
    ParameterId.INCIDENTAL_FUNCTIONS: "incidental-function",
    ParameterId.SUMMARIZED_FAILURES: "summarized-failure",
    ParameterId.INTERIM_SOLUTIONS: "interim-solution",
}

# parameters whose source-table rows carry key-concept stars
STARRED_PARAMETERS = frozenset(
    [
        ParameterId.GEOGRAPHICAL_PRINCIPLE,
        ParameterId.RISKS,
        ParameterId.RISK_LINKED_FUNCTIONS,
        ParameterId.GEOGRAPHICAL_AREAS,
        ParameterId.ACTORS,
        ParameterId.INCIDENTAL_FUNCTIONS,
    ]
)


@dataclass(frozen=True)
class AttributeSchema:
    parameter: ParameterId
    concept: str
    cardinality: str = MULTIPLE
    allows_numeric: bool = False
    allows_coded_entry: bool = False


@dataclass(frozen=True)
class ValueSelection:
    """One chosen vocabulary instance, optionally starred and/or counted."""

    instance: str
    key_concept: bool = False
    numeric_qualifier: int | None = None


@dataclass(frozen=True)
class CodedEntry:
    """Open-ended failure/mitigation code, e.g. OO26 or OS15."""

    code: str
    description: str


Selection = ValueSelection | CodedEntry


@dataclass(frozen=True)
class ScenarioSheet:
    scenario_id: str
    title: str
    selections: dict[ParameterId, list[Selection]] = field(default_factory=dict)
    narrative: str = ""
    transport_system: str = ""

    def values_for(self, parameter: ParameterId) -> list[Selection]:
        return list(self.selections.get(parameter, []))


def default_schema(o: Ontology) -> list[AttributeSchema]:
    """The standard 8-parameter schema bound to the seed anchor concepts."""
    missing = [cid for cid in ANCHOR_CONCEPTS.values() if cid not in o.concepts]
    if missing:
        raise MissingAnchorError(
            f"ontology lacks anchor concept(s): {', '.join(sorted(missing))}",
            details=sorted(missing),
        )
    schemas = []
    for param in PARAMETER_ORDER:
        schemas.append(
            AttributeSchema(
                parameter=param,
                concept=ANCHOR_CONCEPTS[param],
                cardinality=SINGLE if param is ParameterId.GEOGRAPHICAL_PRINCIPLE else MULTIPLE,
                allows_numeric=param is ParameterId.ACTORS,
                allows_coded_entry=param
                in (ParameterId.SUMMARIZED_FAILURES, ParameterId.INTERIM_SOLUTIONS),
            )
        )
    return schemas


def validate_sheet(
    sheet: ScenarioSheet, schema: list[AttributeSchema], o: Ontology
) -> ValidationReport:
    """Check a sheet against the schema and ontology. Never raises: malformed
    input turns into error findings."""
    report = ValidationReport()
    if not SCENARIO_ID_RE.match(sheet.scenario_id or ""):
        report.error("scenario-id", f"scenario id '{sheet.scenario_id}' is not a safe identifier")
    if not sheet.narrative.strip():
        report.warning("narrative", "sheet has no narrative text")

    by_param = {s.parameter: s for s in schema}
    for param in sheet.selections:
        if param not in by_param:
            report.error(str(param), f"selection under a parameter outside the schema: {param}")

    for spec in schema:
        param = spec.parameter
        where = param.value
        picks = sheet.selections.get(param, [])
        if not picks:
            report.error(where, "parameter has no selected value")
            continue
        if spec.cardinality == SINGLE and len(picks) > 1:
            report.error(where, f"single-valued parameter carries {len(picks)} selections")
        legal = {i.id for i in o.instances_of(spec.concept, transitive=True)}
        starred = False
        for sel in picks:
            if isinstance(sel, CodedEntry):
                if not spec.allows_coded_entry:
                    report.error(where, f"coded entry '{sel.code}' on a parameter without code support")
                if not CODE_RE.match(sel.code or ""):
                    report.error(where, f"code '{sel.code}' does not match the LLnn code shape")
                if not (sel.description or "").strip():
                    report.error(where, f"code '{sel.code}' has an empty description")
                continue
            starred = starred or sel.key_concept
            if sel.instance not in o.instances:
                report.error(where, f"unknown instance id '{sel.instance}'")
            elif sel.instance not in legal:
                report.error(
                    where,
                    f"'{sel.instance}' is not in the vocabulary of anchor '{spec.concept}'",
                )
            if sel.numeric_qualifier is not None:
                if not spec.allows_numeric:
                    report.error(where, f"'{sel.instance}' carries a numeric qualifier but the parameter allows none")
                elif sel.numeric_qualifier < 0:
                    report.error(where, f"numeric qualifier on '{sel.instance}' is negative")
        if param in STARRED_PARAMETERS and not starred:
            report.warning(where, "no key concept starred on this parameter")
    return report


def key_concepts(sheet: ScenarioSheet) -> list[tuple[ParameterId, ValueSelection]]:
    """All starred selections, in parameter order then selection order."""
    out = []
    for param in PARAMETER_ORDER:
        for sel in sheet.selections.get(param, []):
            if isinstance(sel, ValueSelection) and sel.key_concept:
                out.append((param, sel))
    return out


# --- sheet comparison ---------------------------------------------------------

def _key(sel: Selection) -> tuple[str, str]:
    if isinstance(sel, CodedEntry):
        return ("code", sel.code)
    return ("instance", sel.instance)


@dataclass(frozen=True)
class ParameterDiff:
    added: tuple[Selection, ...] = ()
    removed: tuple[Selection, ...] = ()
    changed: tuple[tuple[Selection, Selection], ...] = ()  # (old, new) pairs

    @property
    def empty(self) -> bool:
        return not (self.added or self.removed or self.changed)


@dataclass(frozen=True)
class SheetDiff:
    parameters: dict[ParameterId, ParameterDiff]

    @property
    def empty(self) -> bool:
        return all(d.empty for d in self.parameters.values())


def diff_sheets(
    a: ScenarioSheet,
    b: ScenarioSheet,
    schema: list[AttributeSchema] | None = None,
    o: Ontology | None = None,
) -> SheetDiff:
    """Per-parameter selection difference between two sheets.

    With ``schema`` and ``o`` given, both sheets must validate without errors
    against them, otherwise SchemaMismatchError is raised.
    """
    if schema is not None and o is not None:
        for name, sheet in (("first", a), ("second", b)):
            rep = validate_sheet(sheet, schema, o)
            if not rep.ok:
                raise SchemaMismatchError(
                    f"{name} sheet does not validate against the schema",
                    details=[str(f) for f in rep.errors],
                )
    diffs: dict[ParameterId, ParameterDiff] = {}
    for param in PARAMETER_ORDER:
        left = {_key(s): s for s in a.selections.get(param, [])}
        right = {_key(s): s for s in b.selections.get(param, [])}
        added = tuple(right[k] for k in right if k not in left)
        removed = tuple(left[k] for k in left if k not in right)
        changed = tuple(
            (left[k], right[k]) for k in left if k in right and left[k] != right[k]
        )
        diffs[param] = ParameterDiff(added=added, removed=removed, changed=changed)
    return SheetDiff(parameters=diffs)


def apply_diff(a: ScenarioSheet, diff: SheetDiff) -> ScenarioSheet:
    """Patch ``a`` with ``diff``; reconstructs the target's selection sets."""
    selections: dict[ParameterId, list[Selection]] = {}
    for param in PARAMETER_ORDER:
        picks = list(a.selections.get(param, []))
        d = diff.parameters.get(param, ParameterDiff())
        removed_keys = {_key(s) for s in d.removed}
        replaced = {_key(old): new for old, new in d.changed}
        out: list[Selection] = []
        for sel in picks:
            k = _key(sel)
            if k in removed_keys:
                continue
            out.append(replaced.get(k, sel))
        out.extend(d.added)
        if out:
            selections[param] = out
    return ScenarioSheet(
        scenario_id=a.scenario_id,
        title=a.title,
        selections=selections,
        narrative=a.narrative,
        transport_system=a.transport_system,
    )
