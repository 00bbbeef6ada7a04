"""Packaged starter vocabulary and built-in demonstration scenarios.

The demo documents are constructed in code (single source of truth) rather
than shipped as XML, so they can never drift from the current document model;
``export`` produces their XML form on demand.
"""

from __future__ import annotations

import io
from importlib import resources
from pathlib import Path

from .documents import DocumentMeta, ScenarioDocument, VALIDATED
from .ontology import Ontology, load_ontology
from .petri import (
    Arc,
    ExplorationBounds,
    Marking,
    PetriNet,
    Place,
    Transition,
    find_critical,
    parse_predicate,
)
from .sheet import CodedEntry, ParameterId, ScenarioSheet, ValueSelection

SEED_ONTOLOGY_RESOURCE = "seed-ontology.xml"


def seed_ontology_text() -> str:
    return (
        resources.files("railsafe").joinpath("data").joinpath(SEED_ONTOLOGY_RESOURCE)
    ).read_text(encoding="utf-8")


def load_seed_ontology() -> Ontology:
    return load_ontology(io.StringIO(seed_ontology_text()))


def resolve_ontology(archive_root: str | Path | None, explicit: str | Path | None = None) -> Ontology:
    """Ontology lookup: explicit path, then ``<archive>/ontology.xml``, then the seed."""
    if explicit:
        return load_ontology(Path(explicit))
    if archive_root is not None:
        local = Path(archive_root) / "ontology.xml"
        if local.exists():
            return load_ontology(local)
    return load_seed_ontology()


# --- demo sheets ---------------------------------------------------------------------

def _collision_sheet(scenario_id: str, title: str) -> ScenarioSheet:
    return ScenarioSheet(
        scenario_id=scenario_id,
        title=title,
        transport_system="VAL",
        narrative=(
            "Two trains are injected into the same moving-canton track section "
            "from opposite ends. The travel-direction management loses the "
            "orientation of one element, so the protection of routes no longer "
            "separates the trains and they can meet inside a segment."
        ),
        selections={
            ParameterId.GEOGRAPHICAL_PRINCIPLE: [
                ValueSelection("moving-canton", key_concept=True)
            ],
            ParameterId.RISKS: [ValueSelection("collision", key_concept=True)],
            ParameterId.RISK_LINKED_FUNCTIONS: [
                ValueSelection("automatic-driving-management", key_concept=True),
                ValueSelection("travel-direction-management", key_concept=True),
                ValueSelection("routes-protection", key_concept=True),
            ],
            ParameterId.GEOGRAPHICAL_AREAS: [
                ValueSelection("terminus", key_concept=True),
                ValueSelection("injection-zone", key_concept=True),
            ],
            ParameterId.ACTORS: [
                ValueSelection("number-of-trains", key_concept=True, numeric_qualifier=2)
            ],
            ParameterId.INCIDENTAL_FUNCTIONS: [
                ValueSelection("pa-without-redundancy", key_concept=True),
                ValueSelection("route-management", key_concept=True),
            ],
            ParameterId.SUMMARIZED_FAILURES: [
                CodedEntry("OO26", "Element and target in opposite direction")
            ],
            ParameterId.INTERIM_SOLUTIONS: [
                CodedEntry("OS15", "Compare the meaning of the element target meaning")
            ],
        },
    )


def exemplar_document() -> ScenarioDocument:
    """Reference scenario: head-on collision risk at a terminus, sheet only."""
    return ScenarioDocument(
        sheet=_collision_sheet(
            "exemplar-collision", "Head-on collision at terminus injection"
        ),
        meta=DocumentMeta(author="railsafe", status=VALIDATED, ontology_version="seed-1"),
    )


def collision_net() -> tuple[PetriNet, Marking]:
    """Three track segments between two injection approaches, one train each side."""
    places = (
        Place("east-approach", "East injection approach", "external"),
        Place("seg1", "Track segment 1", "external"),
        Place("seg2", "Track segment 2", "external"),
        Place("seg3", "Track segment 3", "external"),
        Place("west-approach", "West injection approach", "external"),
    )
    transitions = (
        Transition("enter-e", "East train injected into segment 1", "interface"),
        Transition("move-e-12", "East train advances to segment 2", "external"),
        Transition("move-e-23", "East train advances to segment 3", "external"),
        Transition("exit-e", "East train leaves the section", "interface"),
        Transition("enter-w", "West train injected into segment 3", "interface"),
        Transition("move-w-32", "West train advances to segment 2", "external"),
        Transition("move-w-21", "West train advances to segment 1", "external"),
        Transition("exit-w", "West train leaves the section", "interface"),
    )
    arcs = (
        Arc("east-approach", "enter-e"),
        Arc("enter-e", "seg1"),
        Arc("seg1", "move-e-12"),
        Arc("move-e-12", "seg2"),
        Arc("seg2", "move-e-23"),
        Arc("move-e-23", "seg3"),
        Arc("seg3", "exit-e"),
        Arc("west-approach", "enter-w"),
        Arc("enter-w", "seg3"),
        Arc("seg3", "move-w-32"),
        Arc("move-w-32", "seg2"),
        Arc("seg2", "move-w-21"),
        Arc("move-w-21", "seg1"),
        Arc("seg1", "exit-w"),
    )
    return (
        PetriNet(places=places, transitions=transitions, arcs=arcs),
        Marking.of({"east-approach": 1, "west-approach": 1}),
    )


def demo_collision_document() -> ScenarioDocument:
    """The exemplar sheet extended with its dynamic model and critical tables."""
    net, m0 = collision_net()
    predicate = parse_predicate("seg1 >= 2 or seg2 >= 2 or seg3 >= 2")
    tables = find_critical(net, m0, predicate, ExplorationBounds())
    return ScenarioDocument(
        sheet=_collision_sheet("demo-collision", "Two-train collision inside a segment"),
        net=net,
        initial_marking=m0,
        critical_predicate=predicate,
        tables=tuple(tables[:1]),
        meta=DocumentMeta(author="railsafe", status=VALIDATED, ontology_version="seed-1"),
    )


def door_closing_net() -> tuple[PetriNet, Marking]:
    """Door-closing cycle with a passenger crossing the doorway."""
    places = (
        Place("dwell", "Train dwelling at platform", "external"),
        Place("door-open", "Doors open", "interface"),
        Place("passenger-waiting", "Passenger waiting on platform", "external"),
        Place("passenger-crossing", "Passenger in the doorway", "external"),
        Place("closing", "Closure ordered", "internal"),
        Place("closed", "Doors closed", "interface"),
        Place("crushed", "Passenger caught by the doors", "external"),
    )
    transitions = (
        Transition("open", "Doors open for exchange", "interface"),
        Transition("board", "Passenger steps into the doorway", "external"),
        Transition("clear", "Passenger clears the doorway", "external"),
        Transition("close-cmd", "Automation orders door closure", "internal"),
        Transition("complete-close", "Doors close on an empty doorway", "interface"),
        Transition("crush", "Doors close on the crossing passenger", "external"),
    )
    arcs = (
        Arc("dwell", "open"),
        Arc("open", "door-open"),
        Arc("door-open", "board"),
        Arc("passenger-waiting", "board"),
        Arc("board", "door-open"),
        Arc("board", "passenger-crossing"),
        Arc("passenger-crossing", "clear"),
        Arc("door-open", "close-cmd"),
        Arc("close-cmd", "closing"),
        Arc("closing", "complete-close"),
        Arc("complete-close", "closed"),
        Arc("closing", "crush"),
        Arc("passenger-crossing", "crush"),
        Arc("crush", "crushed"),
        Arc("crush", "closed"),
    )
    return (
        PetriNet(places=places, transitions=transitions, arcs=arcs),
        Marking.of({"dwell": 1, "passenger-waiting": 1}),
    )


def demo_door_closing_document() -> ScenarioDocument:
    net, m0 = door_closing_net()
    predicate = parse_predicate("crushed >= 1")
    tables = find_critical(net, m0, predicate, ExplorationBounds())
    sheet = ScenarioSheet(
        scenario_id="demo-door-closing",
        title="Door closes on a crossing passenger",
        transport_system="POMA",
        narrative=(
            "During the platform exchange a passenger is still crossing the "
            "doorway when the automation orders closure. The door-closing time "
            "leaves no margin and the passenger is caught."
        ),
        selections={
            ParameterId.GEOGRAPHICAL_PRINCIPLE: [
                ValueSelection("fixed-canton", key_concept=True)
            ],
            ParameterId.RISKS: [
                ValueSelection("individual-dragging", key_concept=True)
            ],
            ParameterId.RISK_LINKED_FUNCTIONS: [
                ValueSelection("door-closing-time", key_concept=True),
                ValueSelection("alarm-management"),
            ],
            ParameterId.GEOGRAPHICAL_AREAS: [ValueSelection("way", key_concept=True)],
            ParameterId.ACTORS: [
                ValueSelection("number-of-trains", key_concept=True, numeric_qualifier=1),
                ValueSelection("mobile-operator"),
            ],
            ParameterId.INCIDENTAL_FUNCTIONS: [
                ValueSelection("instructions", key_concept=True)
            ],
            ParameterId.SUMMARIZED_FAILURES: [
                ValueSelection("communication-transmission")
            ],
            ParameterId.INTERIM_SOLUTIONS: [
                ValueSelection("interim-solution-codes")
            ],
        },
    )
    return ScenarioDocument(
        sheet=sheet,
        net=net,
        initial_marking=m0,
        critical_predicate=predicate,
        tables=tuple(tables[:1]),
        meta=DocumentMeta(author="railsafe", status=VALIDATED, ontology_version="seed-1"),
    )


DEMO_BUILDERS = {
    "exemplar": exemplar_document,
    "demo-collision": demo_collision_document,
    "demo-door-closing": demo_door_closing_document,
}


def demo_document(alias: str) -> ScenarioDocument:
    try:
        return DEMO_BUILDERS[alias]()
    except KeyError:
        raise KeyError(f"unknown demo alias '{alias}'") from None
