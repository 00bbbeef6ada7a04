"""Boolean retrieval language over the scenario archive.

Grammar (EBNF):

    query   := expr? ;
    expr    := and_expr ( "or" and_expr )* ;
    and_expr:= not_expr ( "and" not_expr )* ;
    not_expr:= "not" not_expr | "(" expr ")" | atom ;
    atom    := parameter ( "has" | "isa" ) string
             | "actors.trains" cmp integer
             | "has" "critical"
             | "status" "is" identifier
             | "system" "is" string ;
    cmp     := ">=" | "<=" | ">" | "<" | "=" ;

``has`` is literal: the quoted token must equal a selected instance id
(case-sensitive), an instance label (case-insensitive) or a coded entry
(case-insensitive). ``isa`` is vocabulary-aware: the token names a concept (or
an instance) and matches every selection whose registered value falls under it
by subsumption. An empty query matches every document.

Evaluation runs off the archive's postings index by default; a scan-based
per-document matcher backs filtering outside an archive and lets the two modes
be cross-checked.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .documents import ScenarioDocument
from .errors import QuerySyntaxError, UnknownConceptError, UnknownParameterError
from .ontology import Ontology
from .sheet import CodedEntry, ParameterId, ValueSelection
from .store import Archive

# --- AST ---------------------------------------------------------------------------

class Node:
    """Base query node."""


@dataclass(frozen=True)
class HasTerm(Node):
    parameter: ParameterId
    token: str


@dataclass(frozen=True)
class IsaTerm(Node):
    parameter: ParameterId
    token: str


@dataclass(frozen=True)
class TrainsTerm(Node):
    op: str  # ">=", "<=", ">", "<", "="
    value: int


@dataclass(frozen=True)
class CriticalTerm(Node):
    pass


@dataclass(frozen=True)
class StatusTerm(Node):
    status: str


@dataclass(frozen=True)
class SystemTerm(Node):
    system: str


@dataclass(frozen=True)
class NotNode(Node):
    item: Node


@dataclass(frozen=True)
class AndNode(Node):
    items: tuple[Node, ...]


@dataclass(frozen=True)
class OrNode(Node):
    items: tuple[Node, ...]


# --- printing ----------------------------------------------------------------------

def print_query(node: Node | None) -> str:
    """Canonical text for a query; ``parse_query`` inverts it."""
    if node is None:
        return ""
    return _print(node, 0)


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _print(node: Node, parent_level: int) -> str:
    if isinstance(node, HasTerm):
        return f"{node.parameter.value} has {_quote(node.token)}"
    if isinstance(node, IsaTerm):
        return f"{node.parameter.value} isa {_quote(node.token)}"
    if isinstance(node, TrainsTerm):
        return f"actors.trains {node.op} {node.value}"
    if isinstance(node, CriticalTerm):
        return "has critical"
    if isinstance(node, StatusTerm):
        return f"status is {node.status}"
    if isinstance(node, SystemTerm):
        return f"system is {_quote(node.system)}"
    if isinstance(node, NotNode):
        text, level = f"not {_print(node.item, 3)}", 3
    elif isinstance(node, AndNode):
        text, level = " and ".join(_print(i, 2) for i in node.items), 2
    else:
        assert isinstance(node, OrNode)
        text, level = " or ".join(_print(i, 1) for i in node.items), 1
    return f"({text})" if level < parent_level else text


# --- tokenizer ---------------------------------------------------------------------

_TOKEN = re.compile(
    r"""(?P<ws>\s+)
      | (?P<lpar>\()
      | (?P<rpar>\))
      | (?P<string>"(?:[^"\\\n]|\\.)*")
      | (?P<cmp>>=|<=|!=|>|<|=)
      | (?P<int>\d+)
      | (?P<word>[A-Za-z][A-Za-z0-9_.-]*)
    """,
    re.VERBOSE,
)

_PARAMETER_WORDS = {p.value for p in ParameterId}


@dataclass(frozen=True)
class _Token:
    kind: str  # lpar rpar string cmp int word end
    value: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise QuerySyntaxError(
                f"unexpected character {text[pos]!r}", line, pos - line_start + 1
            )
        kind = m.lastgroup
        value = m.group(kind)
        if kind == "ws":
            line += value.count("\n")
            if "\n" in value:
                line_start = m.start() + value.rfind("\n") + 1
        else:
            tokens.append(_Token(kind, value, line, m.start() - line_start + 1))
        pos = m.end()
    tokens.append(_Token("end", "", line, len(text) - line_start + 1))
    return tokens


def _unquote(raw: str) -> str:
    body = raw[1:-1]
    return re.sub(r"\\(.)", r"\1", body)


# --- parser ------------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, expected: tuple[str, ...]) -> QuerySyntaxError:
        tok = self.peek()
        found = tok.value or "end of input"
        return QuerySyntaxError(f"unexpected {found!r}", tok.line, tok.column, expected)

    def expect(self, kind: str, description: str) -> _Token:
        if self.peek().kind != kind:
            raise self.fail((description,))
        return self.advance()

    def expect_word(self, *words: str) -> _Token:
        tok = self.peek()
        if tok.kind != "word" or tok.value not in words:
            raise self.fail(tuple(f"'{w}'" for w in words))
        return self.advance()

    def parse(self) -> Node | None:
        if self.peek().kind == "end":
            return None
        node = self.parse_or()
        if self.peek().kind != "end":
            raise self.fail(("'and'", "'or'", "end of query"))
        return node

    def parse_or(self) -> Node:
        items = [self.parse_and()]
        while self.peek().kind == "word" and self.peek().value == "or":
            self.advance()
            items.append(self.parse_and())
        return items[0] if len(items) == 1 else OrNode(tuple(items))

    def parse_and(self) -> Node:
        items = [self.parse_not()]
        while self.peek().kind == "word" and self.peek().value == "and":
            self.advance()
            items.append(self.parse_not())
        return items[0] if len(items) == 1 else AndNode(tuple(items))

    def parse_not(self) -> Node:
        tok = self.peek()
        if tok.kind == "word" and tok.value == "not":
            self.advance()
            return NotNode(self.parse_not())
        if tok.kind == "lpar":
            self.advance()
            inner = self.parse_or()
            self.expect("rpar", "')'")
            return inner
        return self.parse_atom()

    def parse_atom(self) -> Node:
        tok = self.peek()
        if tok.kind != "word":
            raise self.fail(("a parameter name", "'has'", "'status'", "'system'", "'('", "'not'"))
        word = tok.value
        if word == "has":
            self.advance()
            self.expect_word("critical")
            return CriticalTerm()
        if word == "status":
            self.advance()
            self.expect_word("is")
            ident = self.expect("word", "a status identifier")
            return StatusTerm(status=ident.value)
        if word == "system":
            self.advance()
            self.expect_word("is")
            text = self.expect("string", "a quoted string")
            return SystemTerm(system=_unquote(text.value))
        if word == "actors.trains":
            self.advance()
            op = self.expect("cmp", "a comparison operator")
            num = self.expect("int", "an integer")
            return TrainsTerm(op=op.value, value=int(num.value))
        if word in _PARAMETER_WORDS:
            self.advance()
            verb = self.expect_word("has", "isa")
            text = self.expect("string", "a quoted string")
            param = ParameterId(word)
            if verb.value == "has":
                return HasTerm(parameter=param, token=_unquote(text.value))
            return IsaTerm(parameter=param, token=_unquote(text.value))
        raise UnknownParameterError(
            f"'{word}' is not a parameter name (line {tok.line}, column {tok.column})",
            tok.line,
            tok.column,
        )


def parse_query(text: str) -> Node | None:
    """Parse a query; ``None`` means the match-everything empty query."""
    return _Parser(text).parse()


# --- vocabulary resolution -----------------------------------------------------------

def _isa_instance_ids(ontology: Ontology, token: str) -> set[str]:
    """Instance ids covered by an ``isa`` token.

    Resolution order: concept id, concept label, instance id, instance label.
    """
    concepts = []
    if token in ontology.concepts:
        concepts = [token]
    else:
        concepts = [c.id for c in ontology.find_concepts_by_label(token)]
    if concepts:
        ids: set[str] = set()
        for cid in concepts:
            ids.update(i.id for i in ontology.instances_of(cid, transitive=True))
        return ids
    if token in ontology.instances:
        return {token}
    by_label = ontology.find_instances_by_label(token)
    if by_label:
        return {i.id for i in by_label}
    raise UnknownConceptError(f"'{token}' names no concept or instance in the vocabulary")


def _has_candidates(ontology: Ontology, token: str) -> set[str]:
    """Instance ids a literal ``has`` token can denote (besides a coded entry)."""
    ids = {i.id for i in ontology.find_instances_by_label(token)}
    if token in ontology.instances:
        ids.add(token)
    return ids


def _cmp(op: str, left: int, right: int) -> bool:
    if op == "!=":
        return left != right
    if op == ">=":
        return left >= right
    if op == "<=":
        return left <= right
    if op == ">":
        return left > right
    if op == "<":
        return left < right
    return left == right


# --- per-document matcher ------------------------------------------------------------

def match_document(doc: ScenarioDocument, node: Node | None, ontology: Ontology) -> bool:
    if node is None:
        return True
    if isinstance(node, NotNode):
        return not match_document(doc, node.item, ontology)
    if isinstance(node, AndNode):
        return all(match_document(doc, i, ontology) for i in node.items)
    if isinstance(node, OrNode):
        return any(match_document(doc, i, ontology) for i in node.items)
    if isinstance(node, CriticalTerm):
        return doc.critical_predicate is not None
    if isinstance(node, StatusTerm):
        return doc.meta.status == node.status
    if isinstance(node, SystemTerm):
        return doc.sheet.transport_system.casefold() == node.system.casefold()
    if isinstance(node, TrainsTerm):
        return any(
            sel.numeric_qualifier is not None and _cmp(node.op, sel.numeric_qualifier, node.value)
            for sel in doc.sheet.selections.get(ParameterId.ACTORS, [])
            if isinstance(sel, ValueSelection)
        )
    if isinstance(node, HasTerm):
        ids = _has_candidates(ontology, node.token)
        folded = node.token.casefold()
        for sel in doc.sheet.selections.get(node.parameter, []):
            if isinstance(sel, CodedEntry):
                if sel.code.casefold() == folded:
                    return True
            elif sel.instance in ids:
                return True
        return False
    assert isinstance(node, IsaTerm)
    ids = _isa_instance_ids(ontology, node.token)
    folded_ids = {i.casefold() for i in ids}
    for sel in doc.sheet.selections.get(node.parameter, []):
        if isinstance(sel, CodedEntry):
            if sel.code.casefold() in folded_ids:
                return True
        elif sel.instance in ids:
            return True
    return False


# --- archive evaluation ----------------------------------------------------------------

@dataclass(frozen=True)
class QueryResult:
    ids: list[str]
    used_index: bool
    considered: int  # documents inspected (universe size for index evaluation)


def evaluate(archive: Archive, query: str | Node | None, *, use_index: bool = True) -> QueryResult:
    """Run a query against an archive; results are sorted scenario ids."""
    node = parse_query(query) if isinstance(query, str) else query
    if not use_index:
        hits = [
            sid for sid in archive.ids() if match_document(archive.load(sid), node, archive.ontology)
        ]
        return QueryResult(ids=hits, used_index=False, considered=len(archive.ids()))
    index = archive.index_snapshot()
    universe = set(index["documents"])
    hits = _eval_index(node, index, universe, archive.ontology)
    return QueryResult(ids=sorted(hits), used_index=True, considered=len(universe))


def _eval_index(node: Node | None, index: dict, universe: set[str], ontology: Ontology) -> set[str]:
    if node is None:
        return set(universe)
    if isinstance(node, NotNode):
        return universe - _eval_index(node.item, index, universe, ontology)
    if isinstance(node, AndNode):
        out = set(universe)
        for item in node.items:
            out &= _eval_index(item, index, universe, ontology)
        return out
    if isinstance(node, OrNode):
        out: set[str] = set()
        for item in node.items:
            out |= _eval_index(item, index, universe, ontology)
        return out
    documents = index["documents"]
    if isinstance(node, CriticalTerm):
        return {sid for sid in universe if documents[sid].get("has_critical")}
    if isinstance(node, StatusTerm):
        return {sid for sid in universe if documents[sid].get("status") == node.status}
    if isinstance(node, SystemTerm):
        folded = node.system.casefold()
        return {
            sid for sid in universe if documents[sid].get("system", "").casefold() == folded
        }
    if isinstance(node, TrainsTerm):
        return {
            sid
            for sid in universe
            if any(_cmp(node.op, n, node.value) for n in documents[sid].get("trains", []))
        }
    postings = index["postings"]
    if isinstance(node, HasTerm):
        keys = {f"{node.parameter.value}|id:{iid}" for iid in _has_candidates(ontology, node.token)}
        keys.add(f"{node.parameter.value}|code:{node.token.casefold()}")
    else:
        assert isinstance(node, IsaTerm)
        keys = set()
        for iid in _isa_instance_ids(ontology, node.token):
            keys.add(f"{node.parameter.value}|id:{iid}")
            keys.add(f"{node.parameter.value}|code:{iid.casefold()}")
    out: set[str] = set()
    for key in keys:
        out.update(postings.get(key, []))
    return out & universe


# --- explanation -----------------------------------------------------------------------

def explain(node: Node | None, ontology: Ontology | None = None) -> str:
    """Indented tree describing how a query will be interpreted."""
    if node is None:
        return "match all documents"
    lines: list[str] = []
    _explain(node, ontology, 0, lines)
    return "\n".join(lines)


def _explain(node: Node, ontology: Ontology | None, depth: int, lines: list[str]) -> None:
    pad = "  " * depth
    if isinstance(node, NotNode):
        lines.append(f"{pad}not")
        _explain(node.item, ontology, depth + 1, lines)
    elif isinstance(node, (AndNode, OrNode)):
        lines.append(f"{pad}{'and' if isinstance(node, AndNode) else 'or'}")
        for item in node.items:
            _explain(item, ontology, depth + 1, lines)
    elif isinstance(node, IsaTerm):
        note = ""
        if ontology is not None:
            try:
                ids = _isa_instance_ids(ontology, node.token)
                note = f"  [{len(ids)} vocabulary value(s)]"
            except UnknownConceptError:
                note = "  [unknown in vocabulary]"
        lines.append(f"{pad}{_print(node, 0)}{note}")
    else:
        lines.append(f"{pad}{_print(node, 0)}")
