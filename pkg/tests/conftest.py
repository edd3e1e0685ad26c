import json
import sys
from importlib import resources
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from repairlab.reports import (
    Corpus,
    ErrorEntry,
    ExecutionReport,
    ReportStatus,
    Stage,
    TestCaseResult,
    Verdict,
)


def data_path(*parts) -> Path:
    return Path(resources.files("repairlab.data").joinpath("/".join(parts)))


@pytest.fixture(scope="session")
def reference_corpus_path() -> Path:
    return data_path("fixtures", "reference_corpus.jsonl")


@pytest.fixture(scope="session")
def reference_corpus(reference_corpus_path):
    from repairlab.reports import load_corpus_file

    return load_corpus_file(reference_corpus_path)


@pytest.fixture(scope="session")
def baseline_config():
    from repairlab.sim import load_config

    return load_config(data_path("calibration_baseline.json"))


@pytest.fixture(scope="session")
def constrained_config():
    from repairlab.sim import load_config

    return load_config(data_path("calibration_constrained.json"))


def load_schema(name: str) -> dict:
    with open(data_path("schemas", f"{name}.schema.json"), encoding="utf-8") as handle:
        return json.load(handle)


def make_report(
    report_id="r1",
    sequence_index=0,
    family_id="fam",
    retry_index=0,
    status=ReportStatus.FAILED,
    results=(),
    entries=(),
    **extra,
) -> ExecutionReport:
    return ExecutionReport(
        report_id=report_id,
        sequence_index=sequence_index,
        family_id=family_id,
        retry_index=retry_index,
        status=status,
        test_results=tuple(results),
        error_entries=tuple(entries),
        timestamp="2025-01-03T00:00:00Z",
        **extra,
    )


def passing_case(name="case", ms=100):
    return TestCaseResult(case_name=name, verdict=Verdict.PASS, duration_ms=ms)


def failing_case(name="case", ms=100, error="boom"):
    return TestCaseResult(case_name=name, verdict=Verdict.FAIL, duration_ms=ms, error_text=error)


def entry(text, stage=Stage.EXECUTOR):
    return ErrorEntry(raw_text=text, stage=stage)


def corpus_of(*reports) -> Corpus:
    return Corpus(reports=tuple(reports))


_ERROR_POOL = [
    "page.goto: Timeout 60000ms exceeded",
    "Target page, context or browser has been closed",
    "Error: expect(received).toBe(expected)",
    "Error: strict mode violation: locator('x') resolved to 2 elements",
    "quiet line with no known pattern",
]


def build_random_corpus(rng, max_reports=20) -> Corpus:
    """Random but invariant-respecting corpus for oracle cross-checks."""
    family_count = rng.randint(1, 4)
    families = [f"fam-{i}" for i in range(family_count)]
    total = rng.randint(family_count, max_reports)
    retries = {f: 0 for f in families}
    reports = []
    for index in range(total):
        family = rng.choice(families)
        if rng.random() < 0.5:
            retries[family] += rng.randint(0, 2)
        status = rng.choice(
            [ReportStatus.FAILED, ReportStatus.FAILED, ReportStatus.COMPLETED, ReportStatus.NO_ARTIFACT]
        )
        if status is ReportStatus.NO_ARTIFACT:
            results = ()
        elif status is ReportStatus.COMPLETED:
            results = tuple(
                TestCaseResult(case_name=f"case-{i}", verdict=Verdict.PASS, duration_ms=rng.randint(1, 999))
                for i in range(rng.randint(1, 3))
            )
        else:
            cases = []
            for i in range(rng.randint(1, 3)):
                if i == 0 or rng.random() < 0.5:
                    cases.append(
                        TestCaseResult(
                            case_name=f"case-{i}",
                            verdict=Verdict.FAIL,
                            duration_ms=rng.randint(1, 999),
                            error_text="boom",
                        )
                    )
                else:
                    cases.append(
                        TestCaseResult(case_name=f"case-{i}", verdict=Verdict.PASS, duration_ms=rng.randint(1, 999))
                    )
            results = tuple(cases)
        entries = tuple(
            ErrorEntry(raw_text=rng.choice(_ERROR_POOL), stage=rng.choice(list(Stage)))
            for _ in range(rng.randint(0, 2))
        )
        reports.append(
            ExecutionReport(
                report_id=f"r-{index}",
                sequence_index=index,
                family_id=family,
                retry_index=retries[family],
                status=status,
                test_results=results,
                error_entries=entries,
                timestamp="2025-01-03T00:00:00Z",
                phase_label=f"Phase {1 + index * 3 // max(total, 1)}",
            )
        )
    return Corpus(reports=tuple(reports))
