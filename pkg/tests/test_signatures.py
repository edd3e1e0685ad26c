"""Signature classification: pattern matching, report-level counting, co-occurrence."""
import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import corpus_of, entry, failing_case, make_report, passing_case
from repairlab.errors import ConfigError
from repairlab.reports import ReportStatus
from repairlab.signatures import (
    SAMPLE_TEXTS,
    SIGNATURE_ORDER,
    FailureSignature,
    RuleTable,
    SignatureRule,
    classify_entry,
    classify_report,
    default_rules,
    mean_cooccurrence,
    signature_histogram,
)

S = FailureSignature


class TestClassifyEntry:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ("Could not extract code from LLM response", {S.NON_EXECUTABLE_OUTPUT}),
            ("Target page, context or browser has been closed", {S.CLOSED_CONTEXT}),
            ("page.goto: Timeout 60000ms exceeded.", {S.NAVIGATION_ENV_TIMEOUT}),
            ("unrelated info line", set()),
        ],
    )
    def test_known_patterns(self, text, expected):
        assert set(classify_entry(entry(text))) == expected

    def test_case_insensitive(self):
        assert S.NAVIGATION_ENV_TIMEOUT in classify_entry(entry("CONNECT ECONNRESET 1.2.3.4"))

    def test_deterministic(self):
        e = entry("page.goto: Timeout 60000ms exceeded and browser has been closed")
        assert classify_entry(e) == classify_entry(e)
        assert classify_entry(e) == {S.NAVIGATION_ENV_TIMEOUT, S.CLOSED_CONTEXT}

    def test_sample_texts_classify_exactly(self):
        # Every canonical sample must map to exactly its own signature, with
        # hallucination samples also carrying the method-contract label.
        for signature, texts in SAMPLE_TEXTS.items():
            expected = {signature}
            if signature is S.HALLUCINATED_API:
                expected.add(S.METHOD_CONTRACT_MISMATCH)
            for text in texts:
                assert set(classify_entry(entry(text))) == expected, text


class TestClassifyReport:
    def test_no_artifact_without_entries_still_labeled(self):
        report = make_report(status=ReportStatus.NO_ARTIFACT, results=(), entries=())
        assert classify_report(report) == {S.NON_EXECUTABLE_OUTPUT}

    def test_union_of_entries(self):
        report = make_report(
            entries=[
                entry("page.goto: Timeout 60000ms exceeded"),
                entry("browser has been closed"),
            ],
            results=[failing_case()],
        )
        assert classify_report(report) == {S.NAVIGATION_ENV_TIMEOUT, S.CLOSED_CONTEXT}

    def test_completed_without_errors_is_unlabeled(self):
        report = make_report(status=ReportStatus.COMPLETED, results=[passing_case()])
        assert classify_report(report) == frozenset()

    @given(st.permutations(["page.goto: Timeout 60000ms exceeded", "browser has been closed", "noise"]))
    def test_entry_order_irrelevant(self, texts):
        report = make_report(entries=[entry(t) for t in texts], results=[failing_case()])
        assert classify_report(report) == {S.NAVIGATION_ENV_TIMEOUT, S.CLOSED_CONTEXT}


class TestHistogram:
    def test_counts_reports_not_entries(self):
        report = make_report(
            entries=[entry("ECONNRESET")] * 3,
            results=[failing_case()],
        )
        histogram = signature_histogram(corpus_of(report))
        assert histogram[S.NAVIGATION_ENV_TIMEOUT] == 1

    def test_empty_corpus_all_zero(self):
        histogram = signature_histogram(corpus_of())
        assert set(histogram) == set(SIGNATURE_ORDER)
        assert all(v == 0 for v in histogram.values())


class TestCooccurrence:
    def test_two_signatures_single_report(self):
        report = make_report(
            entries=[entry("ECONNRESET"), entry("browser has been closed")],
            results=[failing_case()],
        )
        assert mean_cooccurrence(corpus_of(report)) == Fraction(2)

    def test_no_signatures_gives_zero(self):
        report = make_report(entries=[entry("nothing to see")], results=[failing_case()])
        assert mean_cooccurrence(corpus_of(report)) == 0

    def test_denominator_modes(self):
        labeled = make_report(
            report_id="a", sequence_index=0, entries=[entry("ECONNRESET")], results=[failing_case()]
        )
        unlabeled = make_report(
            report_id="b", sequence_index=1, entries=[entry("quiet")], results=[failing_case()]
        )
        corpus = corpus_of(labeled, unlabeled)
        assert mean_cooccurrence(corpus, denominator="signature_bearing") == Fraction(1)
        assert mean_cooccurrence(corpus, denominator="all") == Fraction(1, 2)

    def test_unknown_denominator_rejected(self):
        with pytest.raises(ConfigError):
            mean_cooccurrence(corpus_of(), denominator="whatever")


class TestRuleTable:
    def test_monotone_in_rules(self):
        # Adding a pattern for another signature never removes a label.
        base = default_rules()
        text = "page.goto: Timeout 60000ms exceeded"
        before = base.classify_text(text)
        extended_rules = [
            SignatureRule(r.signature, r.patterns + ("timeout 60000ms",), r.priority)
            if r.signature is S.SELECTOR_READINESS
            else r
            for r in base.rules
        ]
        after = RuleTable(extended_rules).classify_text(text)
        assert before <= after
        assert S.SELECTOR_READINESS in after

    def test_table_requires_all_signatures(self):
        with pytest.raises(ConfigError):
            RuleTable([SignatureRule(S.CLOSED_CONTEXT, ("closed",))])

    def test_from_json_round_trip(self, tmp_path):
        payload = [
            {"signature": s.value, "patterns": [f"marker-{s.value.lower()}"]} for s in SIGNATURE_ORDER
        ]
        path = tmp_path / "rules.json"
        path.write_text(json.dumps(payload))
        table = RuleTable.from_file(path)
        assert table.classify_text("marker-closed_context") == {S.CLOSED_CONTEXT}

    def test_bad_regex_rejected(self):
        payload = [{"signature": s.value, "patterns": ["ok"]} for s in SIGNATURE_ORDER]
        payload[0]["patterns"] = ["("]
        with pytest.raises(ConfigError):
            RuleTable.from_json(json.dumps(payload))

    def test_absent_identifier_override(self):
        table = default_rules().with_absent_identifiers(["openMagicPanel"])
        labels = table.classify_text("TypeError: page.openMagicPanel is not a function")
        assert labels == {S.HALLUCINATED_API, S.METHOD_CONTRACT_MISMATCH}
        assert S.HALLUCINATED_API not in table.classify_text("applyQuickFilter is not a function")
