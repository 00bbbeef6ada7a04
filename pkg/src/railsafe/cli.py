"""Command-line interface: archive management, validation, simulation, retrieval.

Exit codes: 0 success, 1 operation error (message on stderr), 2 usage error.
Machine-readable output sits behind ``--json``; the human text may change
freely between releases.
"""

from __future__ import annotations

import json
import sys
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path

import click

from .documents import ScenarioDocument, document_from_xml, document_to_xml, validate_document
from .errors import RailsafeError
from .ontology import Ontology, parse_ontology, validate_ontology
from .petri import (
    ExplorationBounds,
    SequencingTable,
    export_dot,
    export_net_text,
    parse_predicate,
    reachability,
    simulate as run_simulation,
)
from .query import evaluate, explain, parse_query, print_query
from .seed import DEMO_BUILDERS, demo_document, resolve_ontology, seed_ontology_text
from .sheet import default_schema
from .store import Archive

DEFAULT_ARCHIVE = "archive"


@dataclass
class CliState:
    archive_path: Path
    ontology_path: Path | None

    def ontology(self) -> Ontology:
        return resolve_ontology(self.archive_path, self.ontology_path)

    def archive(self) -> Archive:
        return Archive(self.archive_path, self.ontology())


def _fail(exc: Exception) -> "click.ClickException":
    err = click.ClickException(str(exc))
    err.exit_code = 1
    return err


@click.group()
@click.option(
    "--archive",
    "-a",
    "archive_path",
    envvar="RAILSAFE_ARCHIVE",
    default=DEFAULT_ARCHIVE,
    show_default=True,
    help="Archive directory (env: RAILSAFE_ARCHIVE).",
)
@click.option(
    "--ontology",
    "ontology_path",
    envvar="RAILSAFE_ONTOLOGY",
    default=None,
    help="Ontology XML file overriding the archive's own (env: RAILSAFE_ONTOLOGY).",
)
@click.pass_context
def main(ctx: click.Context, archive_path: str, ontology_path: str | None):
    """Knowledge base for railway accident scenarios."""
    ctx.obj = CliState(
        archive_path=Path(archive_path),
        ontology_path=Path(ontology_path) if ontology_path else None,
    )


@main.command()
@click.option("--force", is_flag=True, help="Reinstall the starter ontology over an existing one.")
@click.pass_obj
def init(state: CliState, force: bool):
    """Create the archive directory and install the starter ontology."""
    try:
        state.archive_path.mkdir(parents=True, exist_ok=True)
        installed = False
        if state.ontology_path is None:
            target = state.archive_path / "ontology.xml"
            if force or not target.exists():
                target.write_text(seed_ontology_text(), encoding="utf-8")
                installed = True
        archive = state.archive()
    except (RailsafeError, OSError) as exc:
        raise _fail(exc)
    note = " (starter ontology installed)" if installed else ""
    click.echo(f"archive ready at {state.archive_path}{note}: {len(archive.ids())} document(s)")


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--json", "as_json", is_flag=True, help="Emit the findings as JSON.")
@click.pass_obj
def validate(state: CliState, file: Path, as_json: bool):
    """Validate an ontology or scenario XML file; exit 1 when errors are found."""
    text = file.read_text(encoding="utf-8")
    # the root element decides the document kind
    try:
        root_is_ontology = ET.fromstring(text).tag == "ontology"
    except ET.ParseError:
        root_is_ontology = False  # scenario branch reports the parse failure
    try:
        if root_is_ontology:
            onto, report = parse_ontology(text, strict=False)
            if report.ok:
                report.extend(validate_ontology(onto))
        else:
            doc = document_from_xml(text)
            onto = state.ontology()
            report = validate_document(doc, default_schema(onto), onto)
    except RailsafeError as exc:
        raise _fail(exc)
    if as_json:
        click.echo(json.dumps({"ok": report.ok, "findings": report.to_json()}, indent=2))
    else:
        click.echo(str(report))
    if not report.ok:
        sys.exit(1)


@main.command(name="import")
@click.argument("sources", nargs=-1, required=True)
@click.option("--force", is_flag=True, help="Overwrite documents that already exist.")
@click.option("--json", "as_json", is_flag=True, help="Emit the imported ids as JSON.")
@click.pass_obj
def import_cmd(state: CliState, sources: tuple[str, ...], force: bool, as_json: bool):
    """Import scenario files (or built-in demos: exemplar, demo-collision, ...)."""
    try:
        archive = state.archive()
        imported = []
        for source in sources:
            path = Path(source)
            if path.is_file():
                doc = document_from_xml(path.read_text(encoding="utf-8"))
            elif source in DEMO_BUILDERS:
                doc = demo_document(source)
            else:
                raise RailsafeError(
                    f"'{source}' is neither a file nor a built-in demo"
                    f" ({', '.join(sorted(DEMO_BUILDERS))})"
                )
            archive.save(doc, overwrite=force or not archive.exists(doc.id))
            imported.append(doc.id)
    except RailsafeError as exc:
        raise _fail(exc)
    if as_json:
        click.echo(json.dumps({"imported": imported}))
    else:
        for sid in imported:
            click.echo(f"imported {sid}")


@main.command()
@click.argument("scenario_id")
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["xml", "net", "dot"]),
    default="xml",
    show_default=True,
    help="xml: full document; net: line-oriented net listing; dot: reachability graph.",
)
@click.option("--out", "-o", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.pass_obj
def export(state: CliState, scenario_id: str, fmt: str, out: Path | None):
    """Export a stored scenario."""
    try:
        doc = state.archive().load(scenario_id)
        if fmt == "xml":
            text = document_to_xml(doc)
        else:
            if doc.net is None:
                raise RailsafeError(f"scenario '{scenario_id}' has no net")
            if fmt == "net":
                text = export_net_text(doc.net)
            else:
                if doc.initial_marking is None:
                    raise RailsafeError(f"scenario '{scenario_id}' has no initial marking")
                text = export_dot(reachability(doc.net, doc.initial_marking))
    except RailsafeError as exc:
        raise _fail(exc)
    if out is None:
        click.echo(text, nl=False)
    else:
        out.write_text(text, encoding="utf-8")
        click.echo(f"wrote {out}")


@main.command()
@click.argument("text", default="")
@click.option("--json", "as_json", is_flag=True, help="Emit ids and count as JSON.")
@click.option("--scan", is_flag=True, help="Force a full scan instead of the index.")
@click.option("--explain", "show_explain", is_flag=True, help="Show how the query is interpreted.")
@click.pass_obj
def query(state: CliState, text: str, as_json: bool, scan: bool, show_explain: bool):
    """Run a retrieval query; prints matching scenario ids, one per line."""
    try:
        archive = state.archive()
        node = parse_query(text)
        if show_explain:
            click.echo(explain(node, archive.ontology))
            click.echo(f"canonical: {print_query(node) or '(match all)'}")
        result = evaluate(archive, node, use_index=not scan)
    except RailsafeError as exc:
        raise _fail(exc)
    if as_json:
        click.echo(
            json.dumps(
                {"ids": result.ids, "count": len(result.ids), "used_index": result.used_index}
            )
        )
    else:
        for sid in result.ids:
            click.echo(sid)


def _resolve_document(state: CliState, ref: str) -> ScenarioDocument:
    try:
        archive = state.archive()
        if archive.exists(ref):
            return archive.load(ref)
    except RailsafeError:
        pass  # no archive yet: files and demo aliases still work
    path = Path(ref)
    if path.is_file():
        return document_from_xml(path.read_text(encoding="utf-8"))
    if ref in DEMO_BUILDERS:
        return demo_document(ref)
    raise RailsafeError(f"'{ref}' is not a stored scenario, a file, or a built-in demo")


def _format_table(n: int, table: SequencingTable) -> str:
    kind = "critical" if table.critical else "plain"
    lines = [f"table {n} ({kind})"]
    width = max(
        [len("initial")] + [len(f"{i}. {r.transition}") for i, r in enumerate(table.rows, 1)]
    )
    lines.append(f"  {'initial'.ljust(width)} | {table.initial.describe()}")
    for i, row in enumerate(table.rows, 1):
        head = f"{i}. {row.transition}".ljust(width)
        note = f"   ({row.situation_label})" if row.situation_label else ""
        lines.append(f"  {head} | {row.marking.describe()}{note}")
    return "\n".join(lines)


@main.command()
@click.argument("ref")
@click.option("--pred", default=None, help="Critical predicate text, e.g. 'seg3 >= 2'.")
@click.option("--bound", type=int, default=None, help="Marking-count exploration bound.")
@click.option("--max-tokens", type=int, default=None, help="Per-place token cap.")
@click.option("--max-depth", type=int, default=None, help="Chronology depth bound.")
@click.option("--all-paths", is_flag=True, help="Every chronology, not one per critical marking.")
@click.option("--json", "as_json", is_flag=True, help="Emit tables as JSON.")
@click.pass_obj
def simulate(
    state: CliState,
    ref: str,
    pred: str | None,
    bound: int | None,
    max_tokens: int | None,
    max_depth: int | None,
    all_paths: bool,
    as_json: bool,
):
    """Derive sequencing tables for a scenario (stored id, file, or demo alias)."""
    try:
        doc = _resolve_document(state, ref)
        if doc.net is None:
            raise RailsafeError(f"scenario '{doc.id}' has no net to simulate")
        if doc.initial_marking is None:
            raise RailsafeError(f"scenario '{doc.id}' has no initial marking")
        bounds = ExplorationBounds()
        if bound is not None:
            bounds = ExplorationBounds(
                max_markings=bound,
                max_tokens_per_place=bounds.max_tokens_per_place,
                max_depth=bounds.max_depth,
            )
        if max_tokens is not None:
            bounds = ExplorationBounds(bounds.max_markings, max_tokens, bounds.max_depth)
        if max_depth is not None:
            bounds = ExplorationBounds(bounds.max_markings, bounds.max_tokens_per_place, max_depth)
        explicit_bounds = bound is not None or max_tokens is not None or max_depth is not None
        recompute = pred is not None or all_paths or explicit_bounds or not doc.tables
        if recompute:
            if pred is not None:
                predicate = parse_predicate(pred)
            elif doc.critical_predicate is not None:
                predicate = doc.critical_predicate
            else:
                raise RailsafeError(
                    f"scenario '{doc.id}' stores no critical predicate; pass --pred"
                )
            result = run_simulation(
                doc.net, doc.initial_marking, predicate, bounds, all_paths=all_paths
            )
            tables = result.tables
            truncated, reasons = result.graph.truncated, list(result.graph.reasons)
        else:
            tables, truncated, reasons = list(doc.tables), False, []
    except RailsafeError as exc:
        raise _fail(exc)

    if as_json:
        payload = {
            "id": doc.id,
            "truncated": truncated,
            "reasons": reasons,
            "tables": [
                {
                    "critical": t.critical,
                    "initial": dict(t.initial.entries),
                    "rows": [
                        {
                            "transition": r.transition,
                            "situation": r.situation_label,
                            "marking": dict(r.marking.entries),
                        }
                        for r in t.rows
                    ],
                }
                for t in tables
            ],
        }
        click.echo(json.dumps(payload, indent=2))
        return
    if not tables:
        click.echo("no critical situation reachable within the bounds")
    for n, table in enumerate(tables):
        click.echo(_format_table(n, table))
    if truncated:
        click.echo(f"note: exploration truncated ({', '.join(reasons)})")


@main.command()
@click.option("--json", "as_json", is_flag=True, help="Emit the forest as JSON.")
@click.pass_obj
def tree(state: CliState, as_json: bool):
    """Print the concept forest with its instances."""
    try:
        onto = state.ontology()
    except RailsafeError as exc:
        raise _fail(exc)
    forest = onto.concept_tree()
    if as_json:
        click.echo(json.dumps([n.to_json() for n in forest], indent=2))
        return

    def walk(node, depth):
        c = node.concept
        click.echo(f"{'  ' * depth}- {c.id} ({c.label}) [{c.layer}]")
        for inst in node.instances:
            click.echo(f"{'  ' * (depth + 1)}* {inst.id}: {inst.label}")
        for child in node.children:
            walk(child, depth + 1)

    for root in forest:
        walk(root, 0)


@main.command()
@click.argument("scenario_id")
@click.option(
    "--out", "-o", "out_dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=Path("reports"),
    show_default=True,
)
@click.option("--bound", type=int, default=None, help="Marking-count exploration bound.")
@click.pass_obj
def report(state: CliState, scenario_id: str, out_dir: Path, bound: int | None):
    """Write a scenario's sequencing tables as CSV plus rendered figures."""
    from .report import write_report  # matplotlib import deferred to first use

    try:
        doc = _resolve_document(state, scenario_id)
        bounds = ExplorationBounds(max_markings=bound) if bound else ExplorationBounds()
        paths = write_report(doc, out_dir, bounds)
    except RailsafeError as exc:
        raise _fail(exc)
    click.echo(str(paths.csv))
    for fig in paths.figures:
        click.echo(str(fig))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--cors", "cors_origins", multiple=True, help="Allowed CORS origin (repeatable).")
@click.option("--token", default=None, help="Require this static bearer token.")
@click.option("--budget", type=float, default=10.0, show_default=True,
              help="Per-simulation time budget in seconds.")
@click.pass_obj
def serve(state: CliState, host: str, port: int, cors_origins: tuple[str, ...],
          token: str | None, budget: float):
    """Run the HTTP API."""
    from .service import ApiConfig, serve as run_server

    try:
        config = ApiConfig(
            archive_path=state.archive_path,
            ontology_path=state.ontology_path,
            host=host,
            port=port,
            cors_origins=cors_origins,
            token=token,
            simulate_budget_seconds=budget,
        )
        config.check()
    except (RailsafeError, ValueError) as exc:
        raise _fail(exc)
    run_server(config)


if __name__ == "__main__":
    main()
