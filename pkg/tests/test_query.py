"""Query language: grammar, canonical printing, semantics, index/scan agreement."""

import random

import pytest

from railsafe.errors import (
    QuerySyntaxError,
    UnknownConceptError,
    UnknownParameterError,
)
from railsafe.query import (
    AndNode,
    CriticalTerm,
    HasTerm,
    IsaTerm,
    NotNode,
    OrNode,
    StatusTerm,
    SystemTerm,
    TrainsTerm,
    evaluate,
    explain,
    match_document,
    parse_query,
    print_query,
)
from railsafe.seed import demo_collision_document, demo_door_closing_document, exemplar_document
from railsafe.sheet import ParameterId

from gen import random_document, random_query_ast
from oracles import naive_query_match


class TestGrammar:
    def test_empty_query_is_none(self):
        assert parse_query("") is None
        assert parse_query("   \n  ") is None

    def test_atoms(self):
        assert parse_query('risks has "collision"') == HasTerm(
            parameter=ParameterId.RISKS, token="collision"
        )
        assert parse_query('risks isa "collision"') == IsaTerm(
            parameter=ParameterId.RISKS, token="collision"
        )
        assert parse_query("actors.trains >= 2") == TrainsTerm(op=">=", value=2)
        assert parse_query("has critical") == CriticalTerm()
        assert parse_query("status is validated") == StatusTerm(status="validated")
        assert parse_query('system is "VAL"') == SystemTerm(system="VAL")

    def test_every_comparison_operator(self):
        for op in (">=", "<=", ">", "<", "="):
            assert parse_query(f"actors.trains {op} 1") == TrainsTerm(op=op, value=1)

    def test_boolean_structure_and_precedence(self):
        node = parse_query('has critical or status is draft and actors.trains >= 2')
        assert isinstance(node, OrNode)
        assert isinstance(node.items[1], AndNode)

        node = parse_query('(has critical or status is draft) and actors.trains >= 2')
        assert isinstance(node, AndNode)
        assert isinstance(node.items[0], OrNode)

        node = parse_query("not not has critical")
        assert node == NotNode(NotNode(CriticalTerm()))

    def test_string_escapes(self):
        node = parse_query('risks has "say \\"hi\\" \\\\ done"')
        assert node.token == 'say "hi" \\ done'

    def test_unknown_parameter_with_position(self):
        with pytest.raises(UnknownParameterError) as err:
            parse_query('hazards has "fire"')
        assert "'hazards' is not a parameter name" in str(err.value)
        assert (err.value.line, err.value.column) == (1, 1)

    @pytest.mark.parametrize(
        "text, expected_hint",
        [
            ('risks has', "a quoted string"),
            ('risks "collision"', "'has', 'isa'"),
            ("actors.trains >=", "an integer"),
            ("actors.trains 2", "a comparison operator"),
            ("has crit", "'critical'"),
            ("status is", "a status identifier"),
            ('system is VAL', "a quoted string"),
            ('(has critical', "')'"),
            ('has critical or', "a parameter name"),
            ('has critical status is draft', "'and', 'or', end of query"),
        ],
    )
    def test_syntax_errors_carry_expectations(self, text, expected_hint):
        with pytest.raises(QuerySyntaxError) as err:
            parse_query(text)
        assert expected_hint in str(err.value)

    def test_error_position_tracks_lines(self):
        with pytest.raises(QuerySyntaxError) as err:
            parse_query('has critical\nand status is\n%')
        assert (err.value.line, err.value.column) == (3, 1)
        assert "unexpected character '%'" in str(err.value)

    def test_unterminated_string(self):
        with pytest.raises(QuerySyntaxError):
            parse_query('risks has "collision')


class TestPrinting:
    def test_none_prints_empty(self):
        assert print_query(None) == ""

    def test_quoting(self):
        assert print_query(HasTerm(ParameterId.RISKS, 'a "b" \\ c')) == (
            'risks has "a \\"b\\" \\\\ c"'
        )

    def test_parens_only_when_needed(self):
        text = print_query(
            AndNode(
                (
                    OrNode((CriticalTerm(), StatusTerm("draft"))),
                    NotNode(TrainsTerm(">=", 2)),
                )
            )
        )
        assert text == "(has critical or status is draft) and not actors.trains >= 2"

    def test_print_parse_identity_random(self, seed_ontology):
        rng = random.Random(808)
        for _ in range(200):
            ast = random_query_ast(rng, seed_ontology)
            assert parse_query(print_query(ast)) == ast

    def test_de_morgan_equivalence(self, seed_ontology):
        rng = random.Random(809)
        docs = [random_document(rng, seed_ontology, f"d{n}") for n in range(30)]
        for _ in range(50):
            a = random_query_ast(rng, seed_ontology, depth=2)
            b = random_query_ast(rng, seed_ontology, depth=2)
            neg_and = NotNode(AndNode((a, b)))
            split_or = OrNode((NotNode(a), NotNode(b)))
            neg_or = NotNode(OrNode((a, b)))
            split_and = AndNode((NotNode(a), NotNode(b)))
            for doc in docs:
                assert match_document(doc, neg_and, seed_ontology) == match_document(
                    doc, split_or, seed_ontology
                )
                assert match_document(doc, neg_or, seed_ontology) == match_document(
                    doc, split_and, seed_ontology
                )


class TestSemantics:
    def test_has_is_literal(self, seed_ontology):
        doc = exemplar_document()
        assert match_document(doc, parse_query('risks has "collision"'), seed_ontology)
        # label match is case-insensitive
        assert match_document(doc, parse_query('risks has "Collision"'), seed_ontology)
        # id match is case-sensitive, so a wrong-case non-label token misses
        assert not match_document(
            doc, parse_query('actors has "Number-Of-Trains"'), seed_ontology
        )
        # has does not expand the hierarchy
        assert not match_document(doc, parse_query('risks has "risk"'), seed_ontology)

    def test_isa_expands_subsumption(self, seed_ontology):
        doc = exemplar_document()
        assert match_document(doc, parse_query('risks isa "risk"'), seed_ontology)
        assert match_document(doc, parse_query('risks isa "collision"'), seed_ontology)
        # concept label, case-insensitive, French alternate
        assert match_document(doc, parse_query('risks isa "Risque"'), seed_ontology)
        assert not match_document(doc, parse_query('risks isa "derailment"'), seed_ontology)

    def test_isa_unknown_token_raises(self, seed_ontology):
        doc = exemplar_document()
        with pytest.raises(UnknownConceptError, match="names no concept or instance"):
            match_document(doc, parse_query('risks isa "made-up-thing"'), seed_ontology)

    def test_codes_match_case_insensitively(self, seed_ontology):
        doc = exemplar_document()
        assert match_document(
            doc, parse_query('summarized-failures has "oo26"'), seed_ontology
        )
        assert match_document(
            doc, parse_query('interim-solutions has "OS15"'), seed_ontology
        )
        assert not match_document(
            doc, parse_query('summarized-failures has "os15"'), seed_ontology
        )

    def test_isa_reaches_registered_codes(self, seed_ontology):
        # oo26 is a registered instance under summarized-failure
        doc = exemplar_document()
        assert match_document(
            doc, parse_query('summarized-failures isa "summarized-failure"'), seed_ontology
        )

    def test_trains_comparisons(self, seed_ontology):
        doc = exemplar_document()  # number-of-trains count=2
        assert match_document(doc, parse_query("actors.trains >= 2"), seed_ontology)
        assert match_document(doc, parse_query("actors.trains = 2"), seed_ontology)
        assert not match_document(doc, parse_query("actors.trains > 2"), seed_ontology)
        single = demo_door_closing_document()  # one train
        assert match_document(single, parse_query("actors.trains < 2"), seed_ontology)
        assert match_document(single, parse_query("actors.trains != 2"), seed_ontology)
        assert not match_document(doc, parse_query("actors.trains != 2"), seed_ontology)
        roundtrip = parse_query("actors.trains != 2")
        assert parse_query(print_query(roundtrip)) == roundtrip

    def test_status_system_critical(self, seed_ontology):
        sheet_only = exemplar_document()
        with_net = demo_collision_document()
        assert match_document(with_net, parse_query("has critical"), seed_ontology)
        assert not match_document(sheet_only, parse_query("has critical"), seed_ontology)
        assert match_document(sheet_only, parse_query("status is validated"), seed_ontology)
        assert not match_document(sheet_only, parse_query("status is draft"), seed_ontology)
        assert match_document(sheet_only, parse_query('system is "val"'), seed_ontology)
        assert not match_document(sheet_only, parse_query('system is "POMA"'), seed_ontology)

    def test_empty_query_matches_all(self, seed_ontology):
        assert match_document(exemplar_document(), None, seed_ontology)


class TestArchiveEvaluation:
    @pytest.fixture
    def loaded(self, archive):
        archive.save(exemplar_document())
        archive.save(demo_collision_document())
        archive.save(demo_door_closing_document())
        return archive

    def test_index_path(self, loaded):
        result = evaluate(loaded, 'risks isa "collision" and has critical')
        assert result.ids == ["demo-collision"]
        assert result.used_index and result.considered == 3

    def test_scan_path(self, loaded):
        result = evaluate(loaded, 'risks isa "collision" and has critical', use_index=False)
        assert result.ids == ["demo-collision"]
        assert not result.used_index

    def test_empty_query_returns_everything(self, loaded):
        assert evaluate(loaded, "").ids == [
            "demo-collision",
            "demo-door-closing",
            "exemplar-collision",
        ]

    def test_not_is_evaluated_against_the_universe(self, loaded):
        result = evaluate(loaded, 'not risks has "collision"')
        assert result.ids == ["demo-door-closing"]

    def test_accepts_pre_parsed_nodes(self, loaded):
        node = parse_query("actors.trains >= 2")
        assert evaluate(loaded, node).ids == ["demo-collision", "exemplar-collision"]

    def test_index_agrees_with_scan_on_random_queries(self, archive, seed_ontology):
        rng = random.Random(673)
        for n in range(50):
            archive.save(random_document(rng, seed_ontology, f"doc-{n:02}"))
        for _ in range(60):
            ast = random_query_ast(rng, seed_ontology)
            indexed = evaluate(archive, ast)
            scanned = evaluate(archive, ast, use_index=False)
            assert indexed.ids == scanned.ids, print_query(ast)

    def test_scan_agrees_with_naive_oracle(self, archive, seed_ontology):
        rng = random.Random(674)
        docs = [random_document(rng, seed_ontology, f"doc-{n:02}") for n in range(30)]
        for doc in docs:
            archive.save(doc)
        by_id = {d.id: d for d in docs}
        for _ in range(40):
            ast = random_query_ast(rng, seed_ontology)
            expected = sorted(
                sid for sid, doc in by_id.items()
                if naive_query_match(doc, ast, seed_ontology)
            )
            assert evaluate(archive, ast).ids == expected, print_query(ast)


class TestExplain:
    def test_match_all(self):
        assert explain(None) == "match all documents"

    def test_tree_shape_and_isa_counts(self, seed_ontology):
        node = parse_query('risks isa "risk" and not has critical')
        text = explain(node, seed_ontology)
        lines = text.splitlines()
        assert lines[0] == "and"
        assert lines[1] == '  risks isa "risk"  [8 vocabulary value(s)]'
        assert lines[2] == "  not"
        assert lines[3] == "    has critical"

    def test_unknown_isa_is_flagged_not_raised(self, seed_ontology):
        node = parse_query('risks isa "made-up"')
        assert "[unknown in vocabulary]" in explain(node, seed_ontology)

    def test_without_ontology_no_notes(self):
        node = parse_query('risks isa "risk"')
        assert explain(node) == 'risks isa "risk"'
