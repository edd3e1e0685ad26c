"""Multi-label failure-signature classification over raw error text.

Eight signature classes cover the recurring failure modes of an autonomous
test-repair pipeline, from hallucinated page-object calls down to runs that
never produced an executable artifact.  Classification is rule-based: a
signature applies to an error entry when any of its case-insensitive regex
patterns matches.  Signatures are not mutually exclusive; one entry can carry
several labels and one report usually accumulates labels from several entries.

The default rule table ships as ``data/default_rules.json`` and can be
replaced wholesale (``RuleTable.from_file``) so corpora with different error
phrasing can be classified without code changes.

Two classes overlap by design: a fabricated page-object call produces an
ordinary method-contract error text, and only knowledge of which identifiers
exist distinguishes hallucination from drift.  The rule table therefore keeps
HALLUCINATED_API patterns as an identifier list (``known_absent``), and
``RuleTable.with_absent_identifiers`` lets callers supply their own.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from importlib import resources
from typing import Iterable, Mapping

from .errors import ConfigError
from .reports import Corpus, ErrorEntry, ExecutionReport, ReportStatus


class FailureSignature(Enum):
    METHOD_CONTRACT_MISMATCH = "METHOD_CONTRACT_MISMATCH"
    NAVIGATION_ENV_TIMEOUT = "NAVIGATION_ENV_TIMEOUT"
    SELECTOR_READINESS = "SELECTOR_READINESS"
    ASSERTION_MISMATCH = "ASSERTION_MISMATCH"
    NON_EXECUTABLE_OUTPUT = "NON_EXECUTABLE_OUTPUT"
    VISIBILITY_ASSERTION = "VISIBILITY_ASSERTION"
    CLOSED_CONTEXT = "CLOSED_CONTEXT"
    HALLUCINATED_API = "HALLUCINATED_API"


SIGNATURE_ORDER: tuple[FailureSignature, ...] = tuple(FailureSignature)


@dataclass(frozen=True)
class SignatureRule:
    """Patterns for one signature; ``priority`` is documentation only."""

    signature: FailureSignature
    patterns: tuple[str, ...]
    priority: int = 0

    def __post_init__(self):
        if not self.patterns:
            raise ConfigError(f"rule for {self.signature.value} has no patterns")
        if any(not p for p in self.patterns):
            raise ConfigError(f"rule for {self.signature.value} has an empty pattern")


class RuleTable:
    """Immutable compiled rule set; classify operations are pure."""

    def __init__(self, rules: Iterable[SignatureRule]):
        rules = tuple(rules)
        by_signature: dict[FailureSignature, SignatureRule] = {}
        for rule in rules:
            if rule.signature in by_signature:
                raise ConfigError(f"duplicate rule for {rule.signature.value}")
            by_signature[rule.signature] = rule
        missing = [s.value for s in FailureSignature if s not in by_signature]
        if missing:
            raise ConfigError(f"rule table lacks signatures: {missing}")
        self._rules = rules
        self._compiled = [
            (rule.signature, re.compile("|".join(f"(?:{p})" for p in rule.patterns), re.IGNORECASE | re.DOTALL))
            for rule in rules
        ]
        self._cache: dict[str, frozenset[FailureSignature]] = {}

    @property
    def rules(self) -> tuple[SignatureRule, ...]:
        return self._rules

    @classmethod
    def from_json(cls, text: str) -> "RuleTable":
        raw = json.loads(text)
        if not isinstance(raw, list):
            raise ConfigError("rule table must be a JSON array")
        rules = []
        for i, item in enumerate(raw):
            if not isinstance(item, dict) or "signature" not in item or "patterns" not in item:
                raise ConfigError(f"rule #{i} must be an object with 'signature' and 'patterns'")
            try:
                signature = FailureSignature(item["signature"])
            except ValueError:
                raise ConfigError(f"rule #{i}: unknown signature {item['signature']!r}") from None
            patterns = item["patterns"]
            if not isinstance(patterns, list) or not all(isinstance(p, str) for p in patterns):
                raise ConfigError(f"rule #{i}: patterns must be a list of strings")
            for p in patterns:
                try:
                    re.compile(p)
                except re.error as exc:
                    raise ConfigError(f"rule #{i}: bad pattern {p!r}: {exc}") from None
            rules.append(SignatureRule(signature=signature, patterns=tuple(patterns), priority=int(item.get("priority", 0))))
        return cls(rules)

    @classmethod
    def from_file(cls, path) -> "RuleTable":
        with open(path, encoding="utf-8") as handle:
            return cls.from_json(handle.read())

    @classmethod
    def default(cls) -> "RuleTable":
        text = resources.files("repairlab.data").joinpath("default_rules.json").read_text(encoding="utf-8")
        return cls.from_json(text)

    def with_absent_identifiers(self, identifiers: Iterable[str]) -> "RuleTable":
        """Return a table whose HALLUCINATED_API patterns are these identifiers.

        Each identifier is matched literally; supply the symbols known to be
        absent from the codebase under test.
        """
        escaped = tuple(re.escape(name) for name in identifiers)
        if not escaped:
            raise ConfigError("empty identifier list")
        rules = [
            SignatureRule(FailureSignature.HALLUCINATED_API, escaped, rule.priority)
            if rule.signature is FailureSignature.HALLUCINATED_API
            else rule
            for rule in self._rules
        ]
        return RuleTable(rules)

    def classify_text(self, text: str) -> frozenset[FailureSignature]:
        cached = self._cache.get(text)
        if cached is None:
            cached = frozenset(sig for sig, pattern in self._compiled if pattern.search(text))
            if len(self._cache) < 65536:
                self._cache[text] = cached
        return cached


_DEFAULT: RuleTable | None = None


def default_rules() -> RuleTable:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = RuleTable.default()
    return _DEFAULT


def classify_entry(entry: ErrorEntry, rules: RuleTable | None = None) -> frozenset[FailureSignature]:
    """All signatures whose patterns match the entry text; empty when none do."""
    return (rules or default_rules()).classify_text(entry.raw_text)


def classify_report(report: ExecutionReport, rules: RuleTable | None = None) -> frozenset[FailureSignature]:
    """Union of entry-level signatures, plus NON_EXECUTABLE_OUTPUT for artifact-less runs.

    A NO_ARTIFACT status is itself evidence that no executable output was
    produced, so the signature applies regardless of what was logged.
    """
    table = rules or default_rules()
    labels: set[FailureSignature] = set()
    for entry in report.error_entries:
        labels |= table.classify_text(entry.raw_text)
    if report.status is ReportStatus.NO_ARTIFACT:
        labels.add(FailureSignature.NON_EXECUTABLE_OUTPUT)
    return frozenset(labels)


def signature_histogram(corpus: Corpus, rules: RuleTable | None = None) -> dict[FailureSignature, int]:
    """Number of reports (not entries) in which each signature appears."""
    counts = {signature: 0 for signature in SIGNATURE_ORDER}
    for report in corpus:
        for signature in classify_report(report, rules):
            counts[signature] += 1
    return counts


def mean_cooccurrence(
    corpus: Corpus,
    rules: RuleTable | None = None,
    denominator: str = "signature_bearing",
) -> Fraction:
    """Average number of distinct signatures per report, as an exact rational.

    ``denominator`` selects what counts as a report: ``"signature_bearing"``
    divides by reports carrying at least one signature (the default used by
    the reference corpus), ``"all"`` divides by every report in the corpus.
    An empty denominator yields 0.
    """
    if denominator not in ("signature_bearing", "all"):
        raise ConfigError(f"unknown denominator {denominator!r}")
    total = 0
    bearing = 0
    for report in corpus:
        labels = classify_report(report, rules)
        total += len(labels)
        if labels:
            bearing += 1
    divisor = bearing if denominator == "signature_bearing" else len(corpus)
    if divisor == 0:
        return Fraction(0)
    return Fraction(total, divisor)


# Canonical raw-text samples per signature.  Used by the simulator when it
# fabricates error entries and by the reference-corpus builder; every sample
# classifies to exactly the signatures listed alongside it (unit-tested).
SAMPLE_TEXTS: Mapping[FailureSignature, tuple[str, ...]] = {
    FailureSignature.METHOD_CONTRACT_MISMATCH: (
        "TypeError: page.ordersGrid.refreshRows is not a function",
        "TypeError: dashboardPage.openSummaryPanel is not a function",
        "Error: page object has no method 'expandAuditRow'",
    ),
    FailureSignature.NAVIGATION_ENV_TIMEOUT: (
        'page.goto: Timeout 60000ms exceeded. navigating to "/workspace/overview", waiting until "load"',
        'page.waitForLoadState: Timeout 60000ms exceeded. waiting until "networkidle"',
        "Error: connect ECONNRESET 10.20.4.18:443",
        "net::ERR_CONNECTION_REFUSED at https://app.internal/login",
        "authentication timeout: SSO token refresh exceeded 30000ms",
    ),
    FailureSignature.SELECTOR_READINESS: (
        "locator.click: Timeout 30000ms exceeded. waiting for locator('[data-test=refresh-button]')",
        "Error: strict mode violation: locator('button.primary') resolved to 3 elements",
        "Error: element is not attached to the DOM",
    ),
    FailureSignature.ASSERTION_MISMATCH: (
        "Error: expect(received).toBe(expected) // Object.is equality -- Expected: 5, Received: 3",
        'Error: expect(received).toEqual(expected) -- Expected: "Active", Received: "Pending"',
    ),
    FailureSignature.NON_EXECUTABLE_OUTPUT: (
        "Could not extract code from LLM response",
        "Test file path not found",
        "AttributeError: 'NoneType' object has no attribute 'strip' during code-fix handling",
    ),
    FailureSignature.VISIBILITY_ASSERTION: (
        "Error: expect(page.getByTestId('status-banner')).toBeVisible() failed -- element is hidden",
        "Error: expect(summaryPanel).toBeVisible() failed -- element is hidden",
    ),
    FailureSignature.CLOSED_CONTEXT: (
        "Target page, context or browser has been closed",
        "browserContext.newPage: Target page, context or browser has been closed",
    ),
    FailureSignature.HALLUCINATED_API: (
        "TypeError: page.filtersPanel.applyQuickFilter is not a function",
        "TypeError: navigationPane.jumpToArchivePage is not a function",
        "Error: page object has no method 'openFilterDrawer'",
    ),
}

# Signatures the HALLUCINATED_API samples additionally trigger: every sample
# phrases the fabricated call as a method-contract failure.
HALLUCINATION_IMPLIES = FailureSignature.METHOD_CONTRACT_MISMATCH
