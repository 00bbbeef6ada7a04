"""Desk reports: sequencing tables as CSV plus rendered marking-evolution figures.

The CSV is long-format (one row per step and occupied place) so it loads
directly into spreadsheet pivots; each table additionally gets a step-plot PNG
of token counts over the chronology, and the whole run gets a
markings-per-depth figure of the explored state space.
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")  # file rendering only, no display server
import matplotlib.pyplot as plt

from .documents import ScenarioDocument
from .errors import RailsafeError
from .petri import ExplorationBounds, ReachabilityGraph, SequencingTable, simulate


@dataclass(frozen=True)
class ReportPaths:
    csv: Path
    figures: tuple[Path, ...]


def write_report(
    doc: ScenarioDocument,
    out_dir: str | Path,
    bounds: ExplorationBounds = ExplorationBounds(),
) -> ReportPaths:
    """Render a scenario's sequencing tables to ``<id>-tables.csv`` + PNGs.

    Stored tables are reported as-is; when the document stores none but has a
    net, marking and predicate, the tables are computed first.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tables = list(doc.tables)
    graph: ReachabilityGraph | None = None
    if doc.net is not None and doc.initial_marking is not None and doc.critical_predicate is not None:
        result = simulate(doc.net, doc.initial_marking, doc.critical_predicate, bounds)
        graph = result.graph
        if not tables:
            tables = result.tables
    if not tables:
        raise RailsafeError(
            f"scenario '{doc.id}' has neither stored tables nor a simulatable net"
        )

    csv_path = out / f"{doc.id}-tables.csv"
    _write_csv(csv_path, tables)
    figures = []
    for n, table in enumerate(tables):
        fig_path = out / f"{doc.id}-table-{n}.png"
        _plot_table(fig_path, doc.id, n, table)
        figures.append(fig_path)
    if graph is not None:
        depth_path = out / f"{doc.id}-reachability.png"
        _plot_depths(depth_path, doc.id, graph)
        figures.append(depth_path)
    return ReportPaths(csv=csv_path, figures=tuple(figures))


def _write_csv(path: Path, tables: list[SequencingTable]) -> None:
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["table", "critical", "step", "transition", "situation", "place", "tokens"]
        )
        for n, table in enumerate(tables):
            flag = "yes" if table.critical else "no"
            for place, count in table.initial.entries:
                writer.writerow([n, flag, 0, "", "initial marking", place, count])
            for step, row in enumerate(table.rows, start=1):
                for place, count in row.marking.entries:
                    writer.writerow(
                        [n, flag, step, row.transition, row.situation_label, place, count]
                    )


def _plot_table(path: Path, doc_id: str, n: int, table: SequencingTable) -> None:
    steps = [table.initial] + [r.marking for r in table.rows]
    places = sorted({p for m in steps for p, _ in m.entries})
    xs = range(len(steps))
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for place in places:
        ax.step(xs, [m.count(place) for m in steps], where="post", label=place)
    ax.set_xticks(list(xs))
    ax.set_xticklabels(
        ["start"] + [r.transition for r in table.rows], rotation=30, ha="right", fontsize=8
    )
    ax.set_xlabel("fired transition")
    ax.set_ylabel("tokens")
    ax.yaxis.get_major_locator().set_params(integer=True)
    kind = "critical" if table.critical else "plain"
    ax.set_title(f"{doc_id} table {n} ({kind}): marking evolution")
    ax.legend(loc="upper left", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _plot_depths(path: Path, doc_id: str, graph: ReachabilityGraph) -> None:
    per_depth = Counter(graph.depths.values())
    depths = sorted(per_depth)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.bar(depths, [per_depth[d] for d in depths], color="#47648a")
    ax.set_xlabel("distance from initial marking (firings)")
    ax.set_ylabel("markings")
    suffix = " (truncated)" if graph.truncated else ""
    ax.set_title(f"{doc_id}: explored state space{suffix}")
    ax.xaxis.get_major_locator().set_params(integer=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
