"""HTTP facade over the archive, the vocabulary and the simulation engine.

A deliberately thin shell: every endpoint is one call into the core modules
plus JSON mapping, so API behaviour and library behaviour cannot diverge.
Errors use one payload shape everywhere: ``{code, message, details[]}`` with
stable machine codes.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import __version__
from .documents import document_from_json, document_to_json
from .errors import RailsafeError
from .ontology import Ontology
from .petri import ExplorationBounds, simulate as run_simulation, parse_predicate
from .query import evaluate, explain, parse_query
from .seed import resolve_ontology
from .store import Archive, now_iso

# HTTP status per machine code; anything unlisted is a 400 bad request.
_STATUS_FOR_CODE = {
    "not-found": 404,
    "id-conflict": 409,
    "no-net": 409,  # the resource exists but lacks the part the call needs
    "no-marking": 409,
    "no-predicate": 409,
    "unauthorized": 401,
    "invariant-violation": 422,
    "net-structure": 422,
    "storage-error": 500,
}


@dataclass(frozen=True)
class ApiConfig:
    archive_path: Path
    ontology_path: Path | None = None
    host: str = "127.0.0.1"
    port: int = 8000
    bounds: ExplorationBounds = field(default_factory=ExplorationBounds)
    cors_origins: tuple[str, ...] = ()
    token: str | None = None  # optional static bearer token
    simulate_budget_seconds: float = 10.0

    def check(self) -> None:
        if not 1 <= self.port <= 65535:
            raise ValueError(f"port {self.port} outside [1, 65535]")
        if not Path(self.archive_path).is_dir():
            raise ValueError(f"archive directory does not exist: {self.archive_path}")
        if self.ontology_path is not None and not Path(self.ontology_path).is_file():
            raise ValueError(f"ontology file does not exist: {self.ontology_path}")
        self.bounds.check()


def _error_response(code: str, message: str, details: list[str] | None = None) -> JSONResponse:
    status = _STATUS_FOR_CODE.get(code, 400)
    return JSONResponse(
        status_code=status,
        content={"code": code, "message": message, "details": details or []},
    )


def create_app(config: ApiConfig) -> FastAPI:
    config.check()
    ontology = resolve_ontology(config.archive_path, config.ontology_path)
    archive = Archive(config.archive_path, ontology)
    app = FastAPI(title="railsafe", version=__version__)
    app.state.archive = archive
    app.state.config = config
    write_lock = threading.Lock()

    if config.cors_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(config.cors_origins),
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.middleware("http")
    async def _auth(request: Request, call_next):
        if config.token and request.url.path != "/health" and request.method != "OPTIONS":
            header = request.headers.get("authorization", "")
            if header != f"Bearer {config.token}":
                return _error_response("unauthorized", "missing or invalid bearer token")
        return await call_next(request)

    @app.exception_handler(RailsafeError)
    async def _domain_error(_request: Request, exc: RailsafeError):
        return _error_response(exc.code, str(exc), exc.details)

    # -- health and vocabulary ------------------------------------------------

    @app.get("/health")
    def health():
        return {
            "status": "ok",
            "version": __version__,
            "documents": len(archive.ids()),
            "ontology_version": archive.ontology.version,
        }

    @app.get("/ontology/tree")
    def ontology_tree():
        return {
            "version": archive.ontology.version,
            "tree": [node.to_json() for node in archive.ontology.concept_tree()],
        }

    @app.get("/ontology/concepts/{concept_id}/instances")
    def concept_instances(concept_id: str, transitive: bool = True):
        instances = archive.ontology.instances_of(concept_id, transitive=transitive)
        return {
            "concept": concept_id,
            "transitive": transitive,
            "instances": [
                {"id": i.id, "label": i.label, "concept": i.concept, "note": i.note}
                for i in instances
            ],
        }

    # -- scenarios ---------------------------------------------------------------

    @app.get("/scenarios")
    def list_scenarios(status: str | None = None, q: str | None = None):
        rows = archive.list_documents()
        if status:
            rows = [r for r in rows if r.status == status]
        if q:
            needle = q.casefold()
            rows = [
                r for r in rows
                if needle in r.id.casefold() or needle in r.title.casefold()
            ]
        return {
            "scenarios": [
                {
                    "id": r.id,
                    "title": r.title,
                    "status": r.status,
                    "modified": r.modified,
                    "system": r.system,
                    "stars": list(r.stars),
                }
                for r in rows
            ]
        }

    @app.post("/scenarios", status_code=201)
    def create_scenario(payload: dict, response: Response):
        doc = document_from_json(payload)
        with write_lock:
            saved = archive.save(doc, overwrite=False)
        response.headers["Location"] = f"/scenarios/{saved.id}"
        return {"id": saved.id}

    @app.get("/scenarios/{scenario_id}")
    def get_scenario(scenario_id: str):
        return document_to_json(archive.load(scenario_id))

    @app.put("/scenarios/{scenario_id}")
    def put_scenario(scenario_id: str, payload: dict):
        doc = document_from_json(payload)
        if doc.id != scenario_id:
            return _error_response(
                "id-mismatch",
                f"body declares id '{doc.id}' but the path addresses '{scenario_id}'",
            )
        doc = doc.with_meta(modified=now_iso())
        with write_lock:
            archive.save(doc, overwrite=True)
        return {"id": scenario_id}

    @app.post("/scenarios/{scenario_id}/validate")
    def validate_scenario(scenario_id: str):
        report = archive.validate(archive.load(scenario_id))
        return {
            "id": scenario_id,
            "ok": report.ok,
            "errors": len(report.errors),
            "warnings": len(report.warnings),
            "findings": report.to_json(),
        }

    @app.post("/scenarios/{scenario_id}/simulate")
    def simulate_scenario(scenario_id: str, payload: dict | None = None):
        payload = payload or {}
        doc = archive.load(scenario_id)
        if doc.net is None:
            return _error_response("no-net", f"scenario '{scenario_id}' has no net to simulate")
        if doc.initial_marking is None:
            return _error_response(
                "no-marking", f"scenario '{scenario_id}' has no initial marking"
            )
        if payload.get("predicate"):
            predicate = parse_predicate(payload["predicate"])
        elif doc.critical_predicate is not None:
            predicate = doc.critical_predicate
        else:
            return _error_response(
                "no-predicate",
                f"scenario '{scenario_id}' stores no critical predicate; supply one",
            )
        bounds = _bounds_from(payload.get("bounds"), config.bounds)
        deadline = time.monotonic() + config.simulate_budget_seconds
        result = run_simulation(
            doc.net,
            doc.initial_marking,
            predicate,
            bounds,
            all_paths=bool(payload.get("all_paths", False)),
            should_stop=lambda: time.monotonic() > deadline,
        )
        reasons = [
            "time-budget" if r == "cancelled" else r for r in result.graph.reasons
        ]
        return {
            "id": scenario_id,
            "predicate": predicate.text(),
            "truncated": result.graph.truncated,
            "reasons": reasons,
            "markings_explored": len(result.graph.markings),
            "edges_explored": len(result.graph.edges),
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
                for t in result.tables
            ],
        }

    # -- retrieval ------------------------------------------------------------------

    @app.post("/query")
    def query_endpoint(payload: dict):
        unknown = sorted(set(payload) - {"text", "projection"})
        if unknown:
            return _error_response(
                "bad-request",
                f"unknown body key(s): {', '.join(unknown)}; "
                "expected 'text' and optional 'projection'",
            )
        text = payload.get("text", "")
        projection = payload.get("projection") or ["id", "title", "status"]
        allowed = {"id", "title", "status", "system", "modified", "stars"}
        bad = [f for f in projection if f not in allowed]
        if bad:
            return _error_response(
                "bad-projection",
                f"unknown projection field(s): {', '.join(bad)}",
                details=sorted(allowed),
            )
        node = parse_query(text)
        result = evaluate(archive, node)
        summaries = {r.id: r for r in archive.list_documents()}
        hits = []
        for sid in result.ids:
            row = summaries[sid]
            values = {
                "id": row.id,
                "title": row.title,
                "status": row.status,
                "system": row.system,
                "modified": row.modified,
                "stars": list(row.stars),
            }
            hits.append({k: values[k] for k in projection})
        return {
            "count": len(result.ids),
            "ids": result.ids,
            "hits": hits,
            "used_index": result.used_index,
            "explain": explain(node, archive.ontology),
        }

    return app


def _bounds_from(data: dict | None, defaults: ExplorationBounds) -> ExplorationBounds:
    if not data:
        return defaults
    return replace(
        defaults,
        **{
            key: int(data[key])
            for key in ("max_markings", "max_tokens_per_place", "max_depth")
            if key in data
        },
    )


def serve(config: ApiConfig) -> None:
    """Run the API under uvicorn until interrupted."""
    import uvicorn

    uvicorn.run(create_app(config), host=config.host, port=config.port)
