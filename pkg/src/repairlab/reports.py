"""Execution-report data model and JSON-lines corpus ingestion.

One ``ExecutionReport`` describes one autonomous workflow run: which scenario
family it targeted, how deep the repair loop was at the time, what the test
cases did, and which raw errors were logged.  Reports are immutable after
construction and are the common currency of the analyzer and the simulator.

Serialization format: one JSON object per line.  Field order is fixed so that
``emit_report(parse_report(line)) == line`` holds byte-for-byte for records
produced by this module.  Lines starting with ``{"_meta"`` carry corpus
metadata and are skipped by :func:`load_corpus`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Iterator

from .errors import InvariantViolation, ParseError


class ReportStatus(Enum):
    COMPLETED = "COMPLETED"
    FAILED = "FAILED"
    NO_ARTIFACT = "NO_ARTIFACT"


class Verdict(Enum):
    PASS = "PASS"
    FAIL = "FAIL"


class Stage(Enum):
    """Pipeline stage that produced an error entry."""

    EXPLORER = "EXPLORER"
    PLANNER = "PLANNER"
    CODER = "CODER"
    EXECUTOR = "EXECUTOR"
    SELF_CORRECTION = "SELF_CORRECTION"


@dataclass(frozen=True)
class TestCaseResult:
    case_name: str
    verdict: Verdict
    duration_ms: int
    error_text: str | None = None

    def __post_init__(self):
        if self.duration_ms < 0:
            raise InvariantViolation("duration-nonnegative", f"duration_ms={self.duration_ms}")
        if self.verdict is Verdict.PASS and self.error_text is not None:
            raise InvariantViolation(
                "pass-has-no-error-text",
                f"case {self.case_name!r} passed but carries error_text",
            )


@dataclass(frozen=True)
class ErrorEntry:
    raw_text: str
    stage: Stage

    def __post_init__(self):
        if not self.raw_text:
            raise InvariantViolation("error-text-nonempty", "error entry with empty raw_text")


@dataclass(frozen=True)
class ExecutionReport:
    report_id: str
    sequence_index: int
    family_id: str
    retry_index: int
    status: ReportStatus
    test_results: tuple[TestCaseResult, ...]
    error_entries: tuple[ErrorEntry, ...]
    timestamp: str
    phase_label: str | None = None
    script_before: str | None = None
    script_after: str | None = None

    def __post_init__(self):
        if self.sequence_index < 0:
            raise InvariantViolation("sequence-index-nonnegative", f"sequence_index={self.sequence_index}")
        if self.retry_index < 0:
            raise InvariantViolation("retry-index-nonnegative", f"retry_index={self.retry_index}")
        if self.status is ReportStatus.NO_ARTIFACT and self.test_results:
            raise InvariantViolation(
                "no-artifact-has-no-results",
                f"report {self.report_id}: NO_ARTIFACT with {len(self.test_results)} test results",
            )
        if self.status is ReportStatus.COMPLETED:
            if not self.test_results:
                raise InvariantViolation(
                    "completed-has-results", f"report {self.report_id}: COMPLETED without test results"
                )
            for result in self.test_results:
                if result.verdict is not Verdict.PASS:
                    raise InvariantViolation(
                        "completed-all-pass",
                        f"report {self.report_id}: COMPLETED but case {result.case_name!r} failed",
                    )

    @property
    def passed_count(self) -> int:
        return sum(1 for r in self.test_results if r.verdict is Verdict.PASS)

    @property
    def failed_count(self) -> int:
        return sum(1 for r in self.test_results if r.verdict is Verdict.FAIL)


@dataclass(frozen=True)
class Corpus:
    """Ordered collection of execution reports with unique ids."""

    reports: tuple[ExecutionReport, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.reports)

    def __iter__(self) -> Iterator[ExecutionReport]:
        return iter(self.reports)

    def family_ids(self) -> list[str]:
        """Distinct family ids in first-appearance order."""
        seen: dict[str, None] = {}
        for report in self.reports:
            seen.setdefault(report.family_id, None)
        return list(seen)

    def by_family(self) -> dict[str, list[ExecutionReport]]:
        grouped: dict[str, list[ExecutionReport]] = {}
        for report in self.reports:
            grouped.setdefault(report.family_id, []).append(report)
        return grouped


_REQUIRED_KEYS = {
    "report_id",
    "sequence_index",
    "family_id",
    "retry_index",
    "status",
    "test_results",
    "error_entries",
    "timestamp",
}
_OPTIONAL_KEYS = {"phase_label", "script_before", "script_after"}
_RESULT_KEYS = {"case_name", "verdict", "duration_ms", "error_text"}
_ENTRY_KEYS = {"raw_text", "stage"}


def _expect(mapping: dict, key: str, kind: type, path: str):
    if key not in mapping:
        raise ParseError("missing required key", field_path=f"{path}{key}")
    value = mapping[key]
    if kind is int and isinstance(value, bool):
        raise ParseError("expected integer, got boolean", field_path=f"{path}{key}")
    if not isinstance(value, kind):
        raise ParseError(f"expected {kind.__name__}, got {type(value).__name__}", field_path=f"{path}{key}")
    return value


def _parse_result(raw: dict, path: str) -> TestCaseResult:
    unknown = set(raw) - _RESULT_KEYS
    if unknown:
        raise ParseError(f"unknown keys {sorted(unknown)}", field_path=path)
    verdict_text = _expect(raw, "verdict", str, path)
    try:
        verdict = Verdict(verdict_text)
    except ValueError:
        raise ParseError(f"unknown verdict {verdict_text!r}", field_path=f"{path}verdict") from None
    error_text = raw.get("error_text")
    if error_text is not None and not isinstance(error_text, str):
        raise ParseError("expected string", field_path=f"{path}error_text")
    return TestCaseResult(
        case_name=_expect(raw, "case_name", str, path),
        verdict=verdict,
        duration_ms=_expect(raw, "duration_ms", int, path),
        error_text=error_text,
    )


def _parse_entry(raw: dict, path: str) -> ErrorEntry:
    unknown = set(raw) - _ENTRY_KEYS
    if unknown:
        raise ParseError(f"unknown keys {sorted(unknown)}", field_path=path)
    stage_text = _expect(raw, "stage", str, path)
    try:
        stage = Stage(stage_text)
    except ValueError:
        raise ParseError(f"unknown stage {stage_text!r}", field_path=f"{path}stage") from None
    return ErrorEntry(raw_text=_expect(raw, "raw_text", str, path), stage=stage)


def parse_report(text: str, strict: bool = True, on_warning: Callable[[str], None] | None = None) -> ExecutionReport:
    """Parse one serialized report record.

    ``strict`` rejects unknown top-level keys; with ``strict=False`` they are
    reported through ``on_warning`` and dropped.  Malformed records raise
    :class:`ParseError` with a field path; invariant breaks raise
    :class:`InvariantViolation` naming the invariant.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", field_path="$") from None
    if not isinstance(raw, dict):
        raise ParseError("record must be a JSON object", field_path="$")

    unknown = set(raw) - _REQUIRED_KEYS - _OPTIONAL_KEYS
    if unknown:
        if strict:
            raise ParseError(f"unknown keys {sorted(unknown)}", field_path="$")
        if on_warning is not None:
            on_warning(f"ignoring unknown keys {sorted(unknown)}")

    status_text = _expect(raw, "status", str, "")
    try:
        status = ReportStatus(status_text)
    except ValueError:
        raise ParseError(f"unknown status {status_text!r}", field_path="status") from None

    raw_results = _expect(raw, "test_results", list, "")
    results = []
    for i, item in enumerate(raw_results):
        if not isinstance(item, dict):
            raise ParseError("expected object", field_path=f"test_results[{i}]")
        results.append(_parse_result(item, f"test_results[{i}]."))

    raw_entries = _expect(raw, "error_entries", list, "")
    entries = []
    for i, item in enumerate(raw_entries):
        if not isinstance(item, dict):
            raise ParseError("expected object", field_path=f"error_entries[{i}]")
        entries.append(_parse_entry(item, f"error_entries[{i}]."))

    optional: dict[str, str | None] = {}
    for key in _OPTIONAL_KEYS:
        value = raw.get(key)
        if value is not None and not isinstance(value, str):
            raise ParseError("expected string", field_path=key)
        optional[key] = value

    return ExecutionReport(
        report_id=_expect(raw, "report_id", str, ""),
        sequence_index=_expect(raw, "sequence_index", int, ""),
        family_id=_expect(raw, "family_id", str, ""),
        retry_index=_expect(raw, "retry_index", int, ""),
        status=status,
        test_results=tuple(results),
        error_entries=tuple(entries),
        timestamp=_expect(raw, "timestamp", str, ""),
        phase_label=optional["phase_label"],
        script_before=optional["script_before"],
        script_after=optional["script_after"],
    )


def emit_report(report: ExecutionReport) -> str:
    """Serialize a report to its canonical one-line JSON form.

    Field order is fixed and optional fields are omitted when absent, so
    emission is byte-stable and round-trips through :func:`parse_report`.
    """
    record: dict = {
        "report_id": report.report_id,
        "sequence_index": report.sequence_index,
        "family_id": report.family_id,
        "retry_index": report.retry_index,
        "status": report.status.value,
        "test_results": [
            {
                "case_name": r.case_name,
                "verdict": r.verdict.value,
                "duration_ms": r.duration_ms,
                **({"error_text": r.error_text} if r.error_text is not None else {}),
            }
            for r in report.test_results
        ],
        "error_entries": [{"raw_text": e.raw_text, "stage": e.stage.value} for e in report.error_entries],
    }
    if report.phase_label is not None:
        record["phase_label"] = report.phase_label
    if report.script_before is not None:
        record["script_before"] = report.script_before
    if report.script_after is not None:
        record["script_after"] = report.script_after
    record["timestamp"] = report.timestamp
    return json.dumps(record, separators=(",", ":"), ensure_ascii=False)


def load_corpus(
    source: Iterable[str],
    strict: bool = True,
    on_warning: Callable[[str], None] | None = None,
) -> Corpus:
    """Load a corpus from an iterable of serialized record lines.

    Blank lines and ``{"_meta": ...}`` header lines are skipped.  Every
    malformed record is reported (never silently dropped): the raised
    :class:`ParseError` carries the line number.  Duplicate report ids and
    out-of-order or backwards retry sequences are rejected.
    """
    reports: list[ExecutionReport] = []
    seen_ids: dict[str, int] = {}
    last_sequence: int | None = None
    last_retry: dict[str, int] = {}
    for lineno, line in enumerate(source, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith('{"_meta"'):
            continue
        try:
            report = parse_report(stripped, strict=strict, on_warning=on_warning)
        except ParseError as exc:
            raise ParseError(f"record at line {lineno}: {exc}", line=lineno) from None
        position = len(reports)
        if report.report_id in seen_ids:
            raise InvariantViolation(
                "unique-report-id",
                f"report_id {report.report_id!r} appears at positions "
                f"{seen_ids[report.report_id]} and {position}",
            )
        if last_sequence is not None and report.sequence_index <= last_sequence:
            raise InvariantViolation(
                "ordered-by-sequence-index",
                f"sequence_index {report.sequence_index} at position {position} "
                f"does not increase over {last_sequence}",
            )
        previous_retry = last_retry.get(report.family_id)
        if previous_retry is not None and report.retry_index < previous_retry:
            raise InvariantViolation(
                "retry-non-decreasing",
                f"family {report.family_id!r}: retry_index {report.retry_index} "
                f"drops below {previous_retry} at position {position}",
            )
        seen_ids[report.report_id] = position
        last_sequence = report.sequence_index
        last_retry[report.family_id] = report.retry_index
        reports.append(report)
    return Corpus(reports=tuple(reports))


def load_corpus_file(path, strict: bool = True, on_warning: Callable[[str], None] | None = None) -> Corpus:
    with open(path, encoding="utf-8") as handle:
        return load_corpus(handle, strict=strict, on_warning=on_warning)


def emit_corpus(corpus: Corpus, meta: dict | None = None) -> str:
    """Serialize a corpus to JSON-lines text, optionally with a metadata header."""
    lines = []
    if meta is not None:
        lines.append(json.dumps({"_meta": meta}, separators=(",", ":"), sort_keys=True))
    lines.extend(emit_report(r) for r in corpus.reports)
    return "\n".join(lines) + "\n"
