"""Knowledge base for railway accident scenarios.

Core pieces: a two-layer concept vocabulary (`ontology`), attribute-value
scenario sheets (`sheet`), place/transition nets with bounded exploration and
sequencing tables (`petri`), XML documents and the file archive (`documents`,
`store`), a retrieval language (`query`), and packaged starter data (`seed`).
The HTTP service, the CLI and the report renderer live in `service`, `cli`
and `report`; import those directly when needed.
"""

__version__ = "0.1.0"

from .errors import RailsafeError
from .findings import ERROR, Finding, ValidationReport, WARNING
from .ontology import (
    Concept,
    Instance,
    Ontology,
    load_ontology,
    parse_ontology,
    serialize_ontology,
    validate_ontology,
)
from .sheet import (
    AttributeSchema,
    CodedEntry,
    ParameterId,
    ScenarioSheet,
    ValueSelection,
    apply_diff,
    default_schema,
    diff_sheets,
    key_concepts,
    validate_sheet,
)
from .petri import (
    Arc,
    ExplorationBounds,
    Marking,
    PetriNet,
    Place,
    SequencingTable,
    Transition,
    enabled,
    find_critical,
    fire,
    parse_predicate,
    reachability,
    simulate,
    validate_net,
)
from .documents import (
    DocumentMeta,
    ScenarioDocument,
    document_from_json,
    document_from_xml,
    document_to_json,
    document_to_xml,
    validate_document,
)
from .store import Archive
from .query import evaluate, explain, match_document, parse_query, print_query
from .seed import (
    demo_document,
    exemplar_document,
    load_seed_ontology,
    resolve_ontology,
)

__all__ = [
    "__version__",
    "RailsafeError",
    "ERROR",
    "WARNING",
    "Finding",
    "ValidationReport",
    "Concept",
    "Instance",
    "Ontology",
    "load_ontology",
    "parse_ontology",
    "serialize_ontology",
    "validate_ontology",
    "AttributeSchema",
    "CodedEntry",
    "ParameterId",
    "ScenarioSheet",
    "ValueSelection",
    "apply_diff",
    "default_schema",
    "diff_sheets",
    "key_concepts",
    "validate_sheet",
    "Arc",
    "ExplorationBounds",
    "Marking",
    "PetriNet",
    "Place",
    "SequencingTable",
    "Transition",
    "enabled",
    "find_critical",
    "fire",
    "parse_predicate",
    "reachability",
    "simulate",
    "validate_net",
    "DocumentMeta",
    "ScenarioDocument",
    "document_from_json",
    "document_from_xml",
    "document_to_json",
    "document_to_xml",
    "validate_document",
    "Archive",
    "evaluate",
    "explain",
    "match_document",
    "parse_query",
    "print_query",
    "demo_document",
    "exemplar_document",
    "load_seed_ontology",
    "resolve_ontology",
]
