"""Command-line interface, exercised through click's test runner."""

import json

import pytest
from click.testing import CliRunner

from railsafe.cli import main
from railsafe.documents import document_to_xml
from railsafe.seed import exemplar_document
from railsafe.store import Archive
from railsafe.seed import load_seed_ontology


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def initialized(tmp_path, runner):
    """An archive created via `railsafe init`, plus the common argv prefix."""
    root = tmp_path / "archive"
    prefix = ["--archive", str(root)]
    result = runner.invoke(main, prefix + ["init"])
    assert result.exit_code == 0, result.output
    return root, prefix


class TestInit:
    def test_creates_archive_and_installs_vocabulary(self, tmp_path, runner):
        root = tmp_path / "kb"
        result = runner.invoke(main, ["--archive", str(root), "init"])
        assert result.exit_code == 0, result.output
        assert "(starter ontology installed)" in result.output
        assert "0 document(s)" in result.output
        assert (root / "ontology.xml").exists()
        assert (root / ".index").exists()

    def test_idempotent_without_force(self, initialized, runner):
        root, prefix = initialized
        marker = "<!-- locally edited -->\n"
        vocab = root / "ontology.xml"
        vocab.write_text(vocab.read_text(encoding="utf-8") + marker, encoding="utf-8")
        result = runner.invoke(main, prefix + ["init"])
        assert result.exit_code == 0
        assert "starter ontology installed" not in result.output
        assert marker in vocab.read_text(encoding="utf-8")
        forced = runner.invoke(main, prefix + ["init", "--force"])
        assert "starter ontology installed" in forced.output
        assert marker not in vocab.read_text(encoding="utf-8")

    def test_respects_env_variable(self, tmp_path, runner, monkeypatch):
        root = tmp_path / "from-env"
        monkeypatch.setenv("RAILSAFE_ARCHIVE", str(root))
        result = runner.invoke(main, ["init"])
        assert result.exit_code == 0, result.output
        assert root.is_dir()


class TestImport:
    def test_demo_aliases(self, initialized, runner):
        root, prefix = initialized
        result = runner.invoke(main, prefix + ["import", "exemplar", "demo-collision"])
        assert result.exit_code == 0, result.output
        assert result.output.splitlines() == [
            "imported exemplar-collision",
            "imported demo-collision",
        ]
        assert (root / "exemplar-collision.xml").exists()

    def test_file_import(self, initialized, runner, tmp_path):
        _, prefix = initialized
        source = tmp_path / "scenario.xml"
        source.write_text(document_to_xml(exemplar_document()), encoding="utf-8")
        result = runner.invoke(main, prefix + ["import", str(source), "--json"])
        assert result.exit_code == 0, result.output
        assert json.loads(result.output) == {"imported": ["exemplar-collision"]}

    def test_unknown_source(self, initialized, runner):
        _, prefix = initialized
        result = runner.invoke(main, prefix + ["import", "demo-unicorns"])
        assert result.exit_code == 1
        assert "neither a file nor a built-in demo" in result.output

    def test_reimport_needs_force(self, initialized, runner):
        _, prefix = initialized
        first = runner.invoke(main, prefix + ["import", "exemplar"])
        assert first.exit_code == 0
        again = runner.invoke(main, prefix + ["import", "exemplar"])
        assert again.exit_code == 1
        assert "already exists" in again.output
        forced = runner.invoke(main, prefix + ["import", "exemplar", "--force"])
        assert forced.exit_code == 0, forced.output
        assert "imported exemplar-collision" in forced.output


class TestValidate:
    def test_ontology_file(self, initialized, runner):
        root, prefix = initialized
        result = runner.invoke(main, prefix + ["validate", str(root / "ontology.xml")])
        assert result.exit_code == 0, result.output
        assert "0 errors, 0 warnings" in result.output

    def test_scenario_file_clean(self, initialized, runner, tmp_path):
        _, prefix = initialized
        source = tmp_path / "scenario.xml"
        source.write_text(document_to_xml(exemplar_document()), encoding="utf-8")
        result = runner.invoke(main, prefix + ["validate", str(source), "--json"])
        assert result.exit_code == 0, result.output
        assert json.loads(result.output) == {"ok": True, "findings": []}

    def test_scenario_with_errors_exits_one(self, initialized, runner, tmp_path):
        _, prefix = initialized
        text = document_to_xml(exemplar_document()).replace(
            'instance="collision"', 'instance="made-up-risk"'
        )
        source = tmp_path / "broken.xml"
        source.write_text(text, encoding="utf-8")
        result = runner.invoke(main, prefix + ["validate", str(source), "--json"])
        assert result.exit_code == 1
        payload = json.loads(result.output)
        assert payload["ok"] is False
        assert any("made-up-risk" in f["message"] for f in payload["findings"])

    def test_missing_file_is_usage_error(self, initialized, runner):
        _, prefix = initialized
        result = runner.invoke(main, prefix + ["validate", "nowhere.xml"])
        assert result.exit_code == 2


class TestQuery:
    def test_prints_matching_ids(self, initialized, runner):
        _, prefix = initialized
        runner.invoke(main, prefix + ["import", "exemplar", "demo-collision"])
        result = runner.invoke(main, prefix + ["query", 'risks isa "collision"'])
        assert result.exit_code == 0, result.output
        assert result.output.splitlines() == ["demo-collision", "exemplar-collision"]

    def test_json_and_scan_modes_agree(self, initialized, runner):
        _, prefix = initialized
        runner.invoke(main, prefix + ["import", "exemplar", "demo-door-closing"])
        indexed = runner.invoke(main, prefix + ["query", "has critical", "--json"])
        scanned = runner.invoke(main, prefix + ["query", "has critical", "--json", "--scan"])
        indexed_payload = json.loads(indexed.output)
        scanned_payload = json.loads(scanned.output)
        assert indexed_payload["ids"] == scanned_payload["ids"] == ["demo-door-closing"]
        assert indexed_payload["used_index"] is True
        assert scanned_payload["used_index"] is False

    def test_explain(self, initialized, runner):
        _, prefix = initialized
        result = runner.invoke(
            main, prefix + ["query", 'risks isa "risk" and has critical', "--explain"]
        )
        assert result.exit_code == 0
        assert "[8 vocabulary value(s)]" in result.output
        assert 'canonical: risks isa "risk" and has critical' in result.output

    def test_empty_query_lists_everything(self, initialized, runner):
        _, prefix = initialized
        runner.invoke(main, prefix + ["import", "exemplar"])
        result = runner.invoke(main, prefix + ["query"])
        assert result.output.splitlines() == ["exemplar-collision"]

    def test_syntax_error_exits_one(self, initialized, runner):
        _, prefix = initialized
        result = runner.invoke(main, prefix + ["query", "risks has collision"])
        assert result.exit_code == 1
        assert "line 1, column 11" in result.output


class TestSimulate:
    def test_demo_alias_prints_critical_table(self, initialized, runner):
        _, prefix = initialized
        result = runner.invoke(main, prefix + ["simulate", "demo-collision"])
        assert result.exit_code == 0, result.output
        assert "table 0 (critical)" in result.output
        assert "initial" in result.output and "east-approach=1 west-approach=1" in result.output

    def test_predicate_override(self, initialized, runner):
        _, prefix = initialized
        result = runner.invoke(
            main, prefix + ["simulate", "demo-collision", "--pred", "seg3 >= 2"]
        )
        assert result.exit_code == 0, result.output
        assert "table 0 (critical)" in result.output
        assert "seg3=2" in result.output

    def test_stored_tables_shown_without_recompute(self, initialized, runner):
        _, prefix = initialized
        runner.invoke(main, prefix + ["import", "demo-collision"])
        result = runner.invoke(main, prefix + ["simulate", "demo-collision", "--json"])
        payload = json.loads(result.output)
        assert payload["id"] == "demo-collision"
        assert len(payload["tables"]) == 1  # exactly the stored table
        assert payload["truncated"] is False

    def test_bound_flags_reach_the_engine(self, initialized, runner):
        _, prefix = initialized
        result = runner.invoke(
            main,
            prefix
            + ["simulate", "demo-collision", "--pred", "seg1 >= 2", "--max-depth", "1"],
        )
        assert result.exit_code == 0, result.output
        assert "no critical situation reachable within the bounds" in result.output
        assert "note: exploration truncated (max-depth)" in result.output

    def test_explicit_bounds_force_recompute(self, initialized, runner):
        _, prefix = initialized
        runner.invoke(main, prefix + ["import", "demo-collision"])
        # The stored table needs four steps, so a depth bound of 2 must win
        # over the stored result rather than being silently ignored.
        result = runner.invoke(
            main, prefix + ["simulate", "demo-collision", "--max-depth", "2"]
        )
        assert result.exit_code == 0, result.output
        assert "no critical situation reachable within the bounds" in result.output

    def test_nonpositive_bound_rejected(self, initialized, runner):
        _, prefix = initialized
        result = runner.invoke(
            main, prefix + ["simulate", "demo-collision", "--max-depth", "0"]
        )
        assert result.exit_code == 1
        assert "max_depth must be positive" in result.output

    def test_json_shape(self, initialized, runner):
        _, prefix = initialized
        result = runner.invoke(
            main, prefix + ["simulate", "demo-collision", "--json", "--all-paths"]
        )
        payload = json.loads(result.output)
        assert payload["tables"]
        row = payload["tables"][0]["rows"][0]
        assert set(row) == {"transition", "situation", "marking"}

    def test_sheet_only_document_fails(self, initialized, runner):
        _, prefix = initialized
        result = runner.invoke(main, prefix + ["simulate", "exemplar"])
        assert result.exit_code == 1
        assert "has no net to simulate" in result.output

    def test_unknown_reference(self, initialized, runner):
        _, prefix = initialized
        result = runner.invoke(main, prefix + ["simulate", "mystery"])
        assert result.exit_code == 1
        assert "not a stored scenario, a file, or a built-in demo" in result.output

    def test_file_reference(self, initialized, runner, tmp_path):
        _, prefix = initialized
        from railsafe.seed import demo_collision_document

        source = tmp_path / "net.xml"
        source.write_text(document_to_xml(demo_collision_document()), encoding="utf-8")
        result = runner.invoke(main, prefix + ["simulate", str(source)])
        assert result.exit_code == 0, result.output
        assert "table 0 (critical)" in result.output


class TestExport:
    def test_xml_round_trip(self, initialized, runner):
        _, prefix = initialized
        runner.invoke(main, prefix + ["import", "exemplar"])
        result = runner.invoke(main, prefix + ["export", "exemplar-collision"])
        assert result.exit_code == 0
        assert result.output.startswith('<scenario id="exemplar-collision">')

    def test_net_listing(self, initialized, runner):
        _, prefix = initialized
        runner.invoke(main, prefix + ["import", "demo-collision"])
        result = runner.invoke(
            main, prefix + ["export", "demo-collision", "--format", "net"]
        )
        assert "place seg1 external" in result.output
        assert "trans enter-e interface" in result.output
        assert "arc east-approach enter-e 1" in result.output

    def test_dot_output_to_file(self, initialized, runner, tmp_path):
        _, prefix = initialized
        runner.invoke(main, prefix + ["import", "demo-collision"])
        target = tmp_path / "graph.dot"
        result = runner.invoke(
            main,
            prefix + ["export", "demo-collision", "--format", "dot", "-o", str(target)],
        )
        assert result.exit_code == 0
        assert f"wrote {target}" in result.output
        assert target.read_text(encoding="utf-8").startswith("digraph reachability")

    def test_net_export_without_net_fails(self, initialized, runner):
        _, prefix = initialized
        runner.invoke(main, prefix + ["import", "exemplar"])
        result = runner.invoke(
            main, prefix + ["export", "exemplar-collision", "--format", "net"]
        )
        assert result.exit_code == 1
        assert "has no net" in result.output

    def test_missing_scenario(self, initialized, runner):
        _, prefix = initialized
        result = runner.invoke(main, prefix + ["export", "ghost"])
        assert result.exit_code == 1
        assert "not found" in result.output


class TestTree:
    def test_text_forest(self, initialized, runner):
        _, prefix = initialized
        result = runner.invoke(main, prefix + ["tree"])
        assert result.exit_code == 0
        assert "- security-context (Security context) [generic]" in result.output
        assert "* collision: Collision" in result.output
        # domain anchors sit under their generic parents
        assert "  - risk (Risk) [domain]" in result.output

    def test_json_forest(self, initialized, runner):
        _, prefix = initialized
        result = runner.invoke(main, prefix + ["tree", "--json"])
        forest = json.loads(result.output)
        assert isinstance(forest, list) and forest
        assert set(forest[0]) == {"id", "label", "layer", "instances", "children"}

    def test_explicit_ontology_flag(self, tmp_path, runner):
        from railsafe.seed import seed_ontology_text

        vocab = tmp_path / "vocab.xml"
        vocab.write_text(seed_ontology_text(), encoding="utf-8")
        result = runner.invoke(main, ["--ontology", str(vocab), "tree"])
        assert result.exit_code == 0, result.output
        assert "security-context" in result.output


class TestServe:
    def test_config_errors_exit_one(self, tmp_path, runner):
        result = runner.invoke(
            main, ["--archive", str(tmp_path / "missing"), "serve", "--port", "8000"]
        )
        assert result.exit_code == 1
        assert "archive directory does not exist" in result.output

    def test_bad_port(self, initialized, runner):
        _, prefix = initialized
        result = runner.invoke(main, prefix + ["serve", "--port", "0"])
        assert result.exit_code == 1
        assert "outside [1, 65535]" in result.output


def test_missing_archive_fails_cleanly(tmp_path, runner):
    result = runner.invoke(
        main, ["--archive", str(tmp_path / "void"), "query", "has critical"]
    )
    assert result.exit_code == 1
    assert "does not exist" in result.output
