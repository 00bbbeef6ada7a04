"""Place/transition nets for the dynamic description of a scenario.

Nets carry a three-aspect tagging discipline: every place and transition is
``external`` (the surroundings: trains moving, passengers), ``internal`` (the
automation: autopilots, alarms) or ``interface`` (the information exchange
between the two). The engine simulates firing, explores bounded reachability
and derives sequencing tables: initial marking, chronology of fired
transitions, terminal critical situation.

All exploration is bounded and deterministic: FIFO breadth-first discovery,
transitions expanded in id order, explicit truncation flags when a bound cuts
the search.
"""

from __future__ import annotations

import heapq
import io
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from .errors import (
    InvalidBoundError,
    NetStructureError,
    NotEnabledError,
    PredicateSyntaxError,
    UnknownPlaceError,
    UnknownTransitionError,
)
from .findings import ValidationReport

EXTERNAL = "external"
INTERNAL = "internal"
INTERFACE = "interface"
ASPECTS = (EXTERNAL, INTERNAL, INTERFACE)


@dataclass(frozen=True)
class Place:
    id: str
    label: str = ""
    aspect: str = EXTERNAL


@dataclass(frozen=True)
class Transition:
    id: str
    label: str = ""
    aspect: str = EXTERNAL
    guard_note: str = ""  # documentation only, never evaluated


@dataclass(frozen=True)
class Arc:
    source: str
    target: str
    weight: int = 1


@dataclass(frozen=True)
class PetriNet:
    places: tuple[Place, ...] = ()
    transitions: tuple[Transition, ...] = ()
    arcs: tuple[Arc, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "places", tuple(sorted(self.places, key=lambda p: p.id)))
        object.__setattr__(
            self, "transitions", tuple(sorted(self.transitions, key=lambda t: t.id))
        )
        object.__setattr__(
            self, "arcs", tuple(sorted(self.arcs, key=lambda a: (a.source, a.target)))
        )

    def place_ids(self) -> list[str]:
        return [p.id for p in self.places]

    def transition_ids(self) -> list[str]:
        return [t.id for t in self.transitions]


@dataclass(frozen=True, order=True)
class Marking:
    """Token counts per place; places absent from ``entries`` hold zero."""

    entries: tuple[tuple[str, int], ...] = ()

    @classmethod
    def of(cls, tokens: Mapping[str, int] | None = None, **more: int) -> "Marking":
        merged = dict(tokens or {})
        merged.update(more)
        for place, count in merged.items():
            if count < 0:
                raise ValueError(f"negative token count {count} on place '{place}'")
        return cls(entries=tuple(sorted((p, c) for p, c in merged.items() if c > 0)))

    def count(self, place: str) -> int:
        for p, c in self.entries:
            if p == place:
                return c
        return 0

    def tokens(self) -> dict[str, int]:
        return dict(self.entries)

    def describe(self) -> str:
        if not self.entries:
            return "(empty)"
        return " ".join(f"{p}={c}" for p, c in self.entries)


# --- structural validation -----------------------------------------------------

def validate_net(net: PetriNet) -> ValidationReport:
    """Findings for structural defects (errors) and modeling smells (warnings)."""
    report = ValidationReport()
    place_ids: set[str] = set()
    trans_ids: set[str] = set()
    for p in net.places:
        if p.id in place_ids:
            report.error(p.id, f"duplicate place id '{p.id}'")
        place_ids.add(p.id)
        if p.aspect not in ASPECTS:
            report.error(p.id, f"unknown aspect '{p.aspect}'")
    for t in net.transitions:
        if t.id in trans_ids:
            report.error(t.id, f"duplicate transition id '{t.id}'")
        if t.id in place_ids:
            report.error(t.id, f"id '{t.id}' used by both a place and a transition")
        trans_ids.add(t.id)
        if t.aspect not in ASPECTS:
            report.error(t.id, f"unknown aspect '{t.aspect}'")

    seen_pairs: set[tuple[str, str]] = set()
    touched: set[str] = set()
    for a in net.arcs:
        where = f"{a.source}->{a.target}"
        if (a.source, a.target) in seen_pairs:
            report.error(where, "duplicate arc")
        seen_pairs.add((a.source, a.target))
        if a.weight < 1:
            report.error(where, f"arc weight {a.weight} below 1")
        src_place = a.source in place_ids
        src_trans = a.source in trans_ids
        tgt_place = a.target in place_ids
        tgt_trans = a.target in trans_ids
        if not (src_place or src_trans):
            report.error(where, f"arc source '{a.source}' is not a declared node")
            continue
        if not (tgt_place or tgt_trans):
            report.error(where, f"arc target '{a.target}' is not a declared node")
            continue
        if (src_place and tgt_place) or (src_trans and tgt_trans):
            report.error(where, "arc must connect a place with a transition")
        touched.add(a.source)
        touched.add(a.target)

    for node_id in sorted((place_ids | trans_ids) - touched):
        report.warning(node_id, "node has no arcs (isolated)")
    aspects = {p.aspect for p in net.places} | {t.aspect for t in net.transitions}
    if net.places and INTERFACE not in aspects:
        report.warning(
            "net", "no interface-aspect element; the three-aspect discipline expects one"
        )
    return report


def _structure(net: PetriNet) -> tuple[dict[str, dict[str, int]], dict[str, dict[str, int]]]:
    """Pre/Post weight maps per transition; raises on structural errors."""
    report = validate_net(net)
    if not report.ok:
        raise NetStructureError(
            f"net has {len(report.errors)} structural error(s)",
            details=[str(f) for f in report.errors],
        )
    place_ids = set(net.place_ids())
    pre: dict[str, dict[str, int]] = {t.id: {} for t in net.transitions}
    post: dict[str, dict[str, int]] = {t.id: {} for t in net.transitions}
    for a in net.arcs:
        if a.source in place_ids:
            pre[a.target][a.source] = a.weight
        else:
            post[a.source][a.target] = a.weight
    return pre, post


def _check_marking(net: PetriNet, m: Marking) -> None:
    unknown = [p for p, _ in m.entries if p not in set(net.place_ids())]
    if unknown:
        raise UnknownPlaceError(
            f"marking references undeclared place(s): {', '.join(sorted(unknown))}"
        )


# --- firing rule -----------------------------------------------------------------

def enabled(net: PetriNet, m: Marking) -> list[str]:
    """Transition ids firable at ``m``, sorted by id."""
    pre, _ = _structure(net)
    _check_marking(net, m)
    return _enabled(pre, m.tokens())


def _enabled(pre: dict[str, dict[str, int]], tokens: dict[str, int]) -> list[str]:
    out = []
    for tid in sorted(pre):
        if all(tokens.get(p, 0) >= w for p, w in pre[tid].items()):
            out.append(tid)
    return out


def fire(net: PetriNet, m: Marking, tid: str) -> Marking:
    """Fire ``tid``: consume Pre tokens, produce Post tokens."""
    pre, post = _structure(net)
    _check_marking(net, m)
    if tid not in pre:
        raise UnknownTransitionError(f"unknown transition '{tid}'")
    tokens = m.tokens()
    if not all(tokens.get(p, 0) >= w for p, w in pre[tid].items()):
        raise NotEnabledError(f"transition '{tid}' is not enabled at {m.describe()}")
    return Marking.of(_fire(pre, post, tokens, tid))


def _fire(pre, post, tokens: dict[str, int], tid: str) -> dict[str, int]:
    out = dict(tokens)
    for p, w in pre[tid].items():
        out[p] = out.get(p, 0) - w
    for p, w in post[tid].items():
        out[p] = out.get(p, 0) + w
    return out


# --- bounded reachability ---------------------------------------------------------

DEFAULT_MAX_MARKINGS = 10_000
DEFAULT_TOKEN_CAP = 16
DEFAULT_MAX_DEPTH = 256


@dataclass(frozen=True)
class ExplorationBounds:
    max_markings: int = DEFAULT_MAX_MARKINGS
    max_tokens_per_place: int = DEFAULT_TOKEN_CAP
    max_depth: int = DEFAULT_MAX_DEPTH

    def check(self) -> None:
        for name, value in (
            ("max_markings", self.max_markings),
            ("max_tokens_per_place", self.max_tokens_per_place),
            ("max_depth", self.max_depth),
        ):
            if value < 1:
                raise InvalidBoundError(f"{name} must be positive, got {value}")


@dataclass
class ReachabilityGraph:
    initial: Marking
    markings: list[Marking]  # discovery (breadth-first) order
    edges: list[tuple[Marking, str, Marking]]
    depths: dict[Marking, int]
    truncated: bool = False
    reasons: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.markings)


def reachability(
    net: PetriNet,
    m0: Marking,
    bounds: ExplorationBounds = ExplorationBounds(),
    should_stop: Callable[[], bool] | None = None,
) -> ReachabilityGraph:
    """Breadth-first state space within the given bounds.

    Discovery is deterministic: FIFO over markings, transitions fired in id
    order. A successor beyond the token cap is dropped (flagged); once the
    marking cap is reached no new marking (nor its edge) is added; markings at
    the depth bound are not expanded. ``should_stop`` is polled once per
    expansion step and aborts with a ``cancelled`` flag.
    """
    bounds.check()
    pre, post = _structure(net)
    _check_marking(net, m0)

    start = Marking.of(m0.tokens())
    depths: dict[Marking, int] = {start: 0}
    order: list[Marking] = [start]
    edges: list[tuple[Marking, str, Marking]] = []
    reasons: set[str] = set()
    queue: deque[Marking] = deque([start])

    while queue:
        if should_stop is not None and should_stop():
            reasons.add("cancelled")
            break
        m = queue.popleft()
        tokens = m.tokens()
        firable = _enabled(pre, tokens)
        if depths[m] >= bounds.max_depth:
            if firable:
                reasons.add("max-depth")
            continue
        for tid in firable:
            succ_tokens = _fire(pre, post, tokens, tid)
            if any(c > bounds.max_tokens_per_place for c in succ_tokens.values()):
                reasons.add("token-cap")
                continue
            succ = Marking.of(succ_tokens)
            if succ in depths:
                edges.append((m, tid, succ))
                continue
            if len(order) >= bounds.max_markings:
                reasons.add("max-markings")
                continue
            depths[succ] = depths[m] + 1
            order.append(succ)
            edges.append((m, tid, succ))
            queue.append(succ)

    return ReachabilityGraph(
        initial=start,
        markings=order,
        edges=edges,
        depths=depths,
        truncated=bool(reasons),
        reasons=tuple(sorted(reasons)),
    )


# --- critical-situation predicates ---------------------------------------------

class Predicate:
    """Base for critical-situation conditions over a marking."""

    def evaluate(self, m: Marking) -> bool:
        raise NotImplementedError

    def places(self) -> set[str]:
        raise NotImplementedError

    def text(self) -> str:
        return _print_pred(self, 0)


@dataclass(frozen=True)
class PlaceCondition(Predicate):
    place: str
    op: str  # ">=", "<=" or "="
    value: int

    def evaluate(self, m: Marking) -> bool:
        c = m.count(self.place)
        if self.op == ">=":
            return c >= self.value
        if self.op == "<=":
            return c <= self.value
        return c == self.value

    def places(self) -> set[str]:
        return {self.place}


@dataclass(frozen=True)
class AndPred(Predicate):
    items: tuple[Predicate, ...]

    def evaluate(self, m: Marking) -> bool:
        return all(i.evaluate(m) for i in self.items)

    def places(self) -> set[str]:
        return set().union(*(i.places() for i in self.items))


@dataclass(frozen=True)
class OrPred(Predicate):
    items: tuple[Predicate, ...]

    def evaluate(self, m: Marking) -> bool:
        return any(i.evaluate(m) for i in self.items)

    def places(self) -> set[str]:
        return set().union(*(i.places() for i in self.items))


@dataclass(frozen=True)
class NotPred(Predicate):
    item: Predicate

    def evaluate(self, m: Marking) -> bool:
        return not self.item.evaluate(m)

    def places(self) -> set[str]:
        return self.item.places()


def _print_pred(p: Predicate, parent_level: int) -> str:
    # precedence levels: or=1, and=2, not=3, atom=4
    if isinstance(p, PlaceCondition):
        return f"{p.place} {p.op} {p.value}"
    if isinstance(p, NotPred):
        inner = _print_pred(p.item, 3)
        text, level = f"not {inner}", 3
    elif isinstance(p, AndPred):
        text, level = " and ".join(_print_pred(i, 2) for i in p.items), 2
    else:
        assert isinstance(p, OrPred)
        text, level = " or ".join(_print_pred(i, 1) for i in p.items), 1
    if level < parent_level:
        return f"({text})"
    return text


_PRED_TOKEN = re.compile(
    r"\s*(?:(?P<lpar>\()|(?P<rpar>\))|(?P<op>>=|<=|=)|(?P<int>\d+)|(?P<word>[A-Za-z_][A-Za-z0-9_-]*))"
)


def parse_predicate(text: str) -> Predicate:
    """Parse the textual predicate form: ``seg1 >= 2 and not (seg2 = 0)``."""
    tokens: list[tuple[str, str, int]] = []
    pos = 0
    while pos < len(text):
        m = _PRED_TOKEN.match(text, pos)
        if not m:
            rest = text[pos:]
            if rest.strip():
                at = pos + len(rest) - len(rest.lstrip())
                raise PredicateSyntaxError(f"unexpected character {text[at]!r}", at)
            break
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    idx = [0]

    def peek():
        return tokens[idx[0]]

    def take(kind: str) -> tuple[str, str, int]:
        k, v, p = tokens[idx[0]]
        if k != kind:
            raise PredicateSyntaxError(f"expected {kind}, found {v or 'end of input'!r}", p)
        idx[0] += 1
        return k, v, p

    def parse_or() -> Predicate:
        items = [parse_and()]
        while peek()[0] == "word" and peek()[1] == "or":
            idx[0] += 1
            items.append(parse_and())
        return items[0] if len(items) == 1 else OrPred(tuple(items))

    def parse_and() -> Predicate:
        items = [parse_not()]
        while peek()[0] == "word" and peek()[1] == "and":
            idx[0] += 1
            items.append(parse_not())
        return items[0] if len(items) == 1 else AndPred(tuple(items))

    def parse_not() -> Predicate:
        kind, value, _ = peek()
        if kind == "word" and value == "not":
            idx[0] += 1
            return NotPred(parse_not())
        if kind == "lpar":
            idx[0] += 1
            inner = parse_or()
            take("rpar")
            return inner
        return parse_atom()

    def parse_atom() -> Predicate:
        kind, place, p = peek()
        if kind != "word" or place in ("and", "or", "not"):
            raise PredicateSyntaxError(f"expected a place id, found {place or 'end of input'!r}", p)
        idx[0] += 1
        _, op, _ = take("op")
        _, num, _ = take("int")
        return PlaceCondition(place=place, op=op, value=int(num))

    result = parse_or()
    k, v, p = peek()
    if k != "end":
        raise PredicateSyntaxError(f"trailing input {v!r}", p)
    return result


# --- sequencing tables ------------------------------------------------------------

@dataclass(frozen=True)
class SequencingRow:
    transition: str
    marking: Marking
    situation_label: str


@dataclass(frozen=True)
class SequencingTable:
    initial: Marking
    rows: tuple[SequencingRow, ...]
    critical: bool = False

    @property
    def final(self) -> Marking:
        return self.rows[-1].marking if self.rows else self.initial

    def chronology(self) -> tuple[str, ...]:
        return tuple(r.transition for r in self.rows)


def replay(net: PetriNet, initial: Marking, chronology: Iterable[str]) -> list[Marking]:
    """Re-fire a chronology from an initial marking; returns marking after each step."""
    out = []
    m = initial
    for tid in chronology:
        m = fire(net, m, tid)
        out.append(m)
    return out


@dataclass
class SimulationResult:
    tables: list[SequencingTable]
    graph: ReachabilityGraph


def simulate(
    net: PetriNet,
    m0: Marking,
    pred: Predicate,
    bounds: ExplorationBounds = ExplorationBounds(),
    all_paths: bool = False,
    max_tables: int | None = None,
    should_stop: Callable[[], bool] | None = None,
) -> SimulationResult:
    """Sequencing tables for the critical situations reachable from ``m0``.

    Default mode: one table per distinct critical marking, carrying the
    shortest chronology (ties broken by lexicographic transition-id sequence).
    ``all_paths`` enumerates every chronology within the depth bound instead,
    capped at ``max_tables`` (defaults to the marking bound). Tables are sorted
    by chronology length then lexicographically. The underlying reachability
    graph rides along for exploration statistics.
    """
    bounds.check()
    unknown = sorted(pred.places() - set(net.place_ids()))
    if unknown:
        raise UnknownPlaceError(
            f"predicate references undeclared place(s): {', '.join(unknown)}"
        )
    graph = reachability(net, m0, bounds, should_stop=should_stop)
    labels = {t.id: t.label or t.id for t in net.transitions}
    adjacency: dict[Marking, list[tuple[str, Marking]]] = {}
    for src, tid, dst in graph.edges:
        adjacency.setdefault(src, []).append((tid, dst))
    for lst in adjacency.values():
        lst.sort()

    if all_paths:
        cap = max_tables if max_tables is not None else bounds.max_markings
        tables = _enumerate_paths(graph, adjacency, pred, labels, bounds.max_depth, cap)
        return SimulationResult(tables=tables, graph=graph)

    # Dijkstra-style sweep keyed by (length, chronology): the first time a
    # marking is settled, its path is the shortest and lexicographically least.
    best: dict[Marking, tuple[str, ...]] = {}
    heap: list[tuple[int, tuple[str, ...], Marking]] = [(0, (), graph.initial)]
    while heap:
        length, path, m = heapq.heappop(heap)
        if m in best:
            continue
        best[m] = path
        for tid, succ in adjacency.get(m, []):
            if succ not in best:
                heapq.heappush(heap, (length + 1, path + (tid,), succ))

    tables = []
    for m in graph.markings:
        if not pred.evaluate(m):
            continue
        path = best[m]
        tables.append(_table(net, graph.initial, path, labels, critical=True))
    tables.sort(key=lambda t: (len(t.rows), t.chronology()))
    return SimulationResult(tables=tables, graph=graph)


def find_critical(
    net: PetriNet,
    m0: Marking,
    pred: Predicate,
    bounds: ExplorationBounds = ExplorationBounds(),
    all_paths: bool = False,
    max_tables: int | None = None,
    should_stop: Callable[[], bool] | None = None,
) -> list[SequencingTable]:
    """``simulate`` without the graph: just the sequencing tables."""
    return simulate(
        net, m0, pred, bounds,
        all_paths=all_paths, max_tables=max_tables, should_stop=should_stop,
    ).tables


def _table(
    net: PetriNet,
    initial: Marking,
    chronology: tuple[str, ...],
    labels: dict[str, str],
    critical: bool,
) -> SequencingTable:
    rows = tuple(
        SequencingRow(transition=tid, marking=m, situation_label=labels[tid])
        for tid, m in zip(chronology, replay(net, initial, chronology))
    )
    return SequencingTable(initial=initial, rows=rows, critical=critical)


def _enumerate_paths(
    graph: ReachabilityGraph,
    adjacency: dict[Marking, list[tuple[str, Marking]]],
    pred: Predicate,
    labels: dict[str, str],
    max_depth: int,
    cap: int,
) -> list[SequencingTable]:
    # ordered enumeration (length, then lexicographic) so the cap is principled
    heap: list[tuple[int, tuple[str, ...], Marking]] = [(0, (), graph.initial)]
    tables: list[SequencingTable] = []
    markings_on_path: dict[tuple[str, ...], list[Marking]] = {(): []}
    while heap and len(tables) < cap:
        length, path, m = heapq.heappop(heap)
        if pred.evaluate(m):
            rows = tuple(
                SequencingRow(transition=tid, marking=mk, situation_label=labels[tid])
                for tid, mk in zip(path, markings_on_path[path])
            )
            tables.append(SequencingTable(initial=graph.initial, rows=rows, critical=True))
        if length < max_depth:
            for tid, succ in adjacency.get(m, []):
                new_path = path + (tid,)
                markings_on_path[new_path] = markings_on_path[path] + [succ]
                heapq.heappush(heap, (length + 1, new_path, succ))
        del markings_on_path[path]
    return tables


# --- desk exports -----------------------------------------------------------------

def export_net_text(net: PetriNet) -> str:
    """Line-oriented net listing: place / trans / arc records."""
    out = io.StringIO()
    for p in net.places:
        out.write(f'place {p.id} {p.aspect} "{p.label}"\n')
    for t in net.transitions:
        guard = f' guard="{t.guard_note}"' if t.guard_note else ""
        out.write(f'trans {t.id} {t.aspect} "{t.label}"{guard}\n')
    for a in net.arcs:
        out.write(f"arc {a.source} {a.target} {a.weight}\n")
    return out.getvalue()


def export_dot(graph: ReachabilityGraph) -> str:
    """Reachability graph in DOT form for external visualization."""
    names = {m: f"m{i}" for i, m in enumerate(graph.markings)}
    out = io.StringIO()
    out.write("digraph reachability {\n  rankdir=LR;\n  node [shape=box];\n")
    for m, name in names.items():
        style = ', style="bold"' if m == graph.initial else ""
        out.write(f'  {name} [label="{m.describe()}"{style}];\n')
    for src, tid, dst in graph.edges:
        out.write(f'  {names[src]} -> {names[dst]} [label="{tid}"];\n')
    if graph.truncated:
        out.write(f'  truncated [shape=note, label="truncated: {", ".join(graph.reasons)}"];\n')
    out.write("}\n")
    return out.getvalue()
