#!/usr/bin/env python3
"""Construct the calibrated reference corpus shipped with the package.

The corpus encodes 300 execution reports across 10 scenario families with
exactly the aggregate statistics the analyzer is validated against: status
totals, per-family outcome trajectories, the failure-signature histogram, the
phase breakdown, and the two embedded script revisions (one assertion
weakening, one test-case deletion).  Every target is asserted here before the
file is written, so a drifting allocation fails the build instead of shipping.

Run from the repository root:  python tools/build_reference_corpus.py
"""
from __future__ import annotations

import sys
from fractions import Fraction
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from repairlab import metrics, reports, signatures
from repairlab.metrics import ConvergenceQuality
from repairlab.reports import ErrorEntry, ExecutionReport, ReportStatus, Stage, TestCaseResult, Verdict
from repairlab.signatures import SAMPLE_TEXTS, FailureSignature
from repairlab.sim import derive_auto_annotations, synthetic_timestamp

FIXTURE_DIR = ROOT / "src" / "repairlab" / "data" / "fixtures"

F, C, X = ReportStatus.FAILED, ReportStatus.COMPLETED, ReportStatus.NO_ARTIFACT

# Per-family trajectories: (status, retry_index) in family order.  Statuses
# repeat at a retry depth when the loop re-attempted without deepening.
def runs(*blocks):
    out = []
    for status, retry, count in blocks:
        out.extend([(status, retry)] * count)
    return out


TRAJECTORIES = {
    "basic-interaction": runs((F, 0, 2), (C, 1, 9)),
    "details-refresh-early": runs((F, 0, 6)),
    "status-transitions": runs((F, 0, 10), (C, 1, 1)),
    "advanced-features": runs((F, 0, 6), (F, 1, 6), (F, 2, 6), (F, 3, 5), (F, 4, 5), (C, 5, 6)),
    "tab-refresh": runs((F, 0, 5), (F, 1, 5), (F, 2, 5), (F, 3, 5), (C, 4, 8)),
    "accessibility": runs((C, 0, 6)),
    "detail-refresh": runs((F, 0, 6), (F, 1, 6), (F, 2, 5), (F, 3, 5), (F, 4, 5), (F, 5, 5), (C, 6, 8)),
    "selection-navigation": runs((F, 0, 6), (F, 1, 6), (F, 2, 6), (F, 3, 6), (F, 4, 6), (F, 5, 6), (F, 6, 5), (C, 7, 4)),
    "tab-errors": runs((F, 0, 6)),
    "code-gen-collapse": runs(*[(X, r, 7) for r in range(11)] + [(X, r, 6) for r in range(11, 17)]),
}

# Phase layout: each phase interleaves its families round-robin.  The
# status-transitions family runs in every phase and resolves in the last one.
PHASES = [
    ("Phase 1", [("basic-interaction", 11), ("details-refresh-early", 6), ("status-transitions", 1)]),
    (
        "Phase 2",
        [
            ("advanced-features", 34),
            ("tab-refresh", 28),
            ("accessibility", 6),
            ("detail-refresh", 40),
            ("status-transitions", 6),
        ],
    ),
    ("Phase 3", [("selection-navigation", 45), ("tab-errors", 6), ("status-transitions", 3)]),
    ("Phase 4", [("code-gen-collapse", 113), ("status-transitions", 1)]),
]

CASE_NAMES = {
    "basic-interaction": ["open record from grid", "edit field and save"],
    "details-refresh-early": ["open detail pane early", "refresh early data"],
    "status-transitions": ["status change reflects in grid", "status history records transition"],
    "advanced-features": ["threshold badge shows configured limit", "bulk edit applies to selected rows"],
    "tab-refresh": ["switch tab and refresh grid", "refresh preserves filter"],
    "accessibility": ["keyboard navigation reaches toolbar", "landmarks are labeled"],
    "detail-refresh": ["open detail pane", "refresh detail data"],
    "selection-navigation": ["bulk selection toggles all rows", "execute from detail entry point"],
    "tab-errors": ["error tab renders diagnostics", "error rows expand"],
}

# Final COMPLETED suite sizes; selection-navigation converged only after its
# second case was deleted.  Sizes sum to 13 passing cases across final runs.
COMPLETED_SIZES = {
    "basic-interaction": 2,
    "advanced-features": 2,
    "tab-refresh": 2,
    "accessibility": 2,
    "detail-refresh": 2,
    "selection-navigation": 1,
    "status-transitions": 2,
}

WEAKENING_BEFORE = """import { test, expect } from '@playwright/test';

test("threshold badge shows configured limit", async ({ page }) => {
  await page.goto('/workspace/settings');
  const value = await page.locator('[data-test=threshold-badge]').count();
  expect(value).toBe(5);
});

test("bulk edit applies to selected rows", async ({ page }) => {
  await page.goto('/workspace/records');
  await page.locator('[data-test=select-all]').click();
  await expect(page.locator('[data-test=bulk-apply]')).toBeVisible();
});
"""

WEAKENING_AFTER = WEAKENING_BEFORE.replace("expect(value).toBe(5);", "expect(value).toBeTruthy();")

DELETION_BEFORE = """import { test, expect } from '@playwright/test';

test("bulk selection toggles all rows", async ({ page }) => {
  await page.goto('/workspace/records');
  await page.locator('[data-test=select-all]').click();
  await expect(page.locator('[data-test=selected-count]')).toHaveCount(1);
});

test("execute from detail entry point", async ({ page }) => {
  await page.goto('/workspace/records/42');
  await page.locator('[data-test=execute-action]').click();
  await expect(page.locator('[data-test=run-banner]')).toBeVisible();
});
"""

DELETION_AFTER = DELETION_BEFORE[: DELETION_BEFORE.index('test("execute from detail entry point"')].rstrip() + "\n"

# Failure-signature allocation over the 187 execution-bearing reports, as
# [start, start+length) windows modulo 187.  Windows overlap deliberately so
# signatures co-occur; METHOD plus NAV cover every row, and the hallucination
# window sits inside the method window (fabricated calls surface as
# method-contract errors).
SIGNATURE_WINDOWS = {
    FailureSignature.METHOD_CONTRACT_MISMATCH: (0, 132),
    FailureSignature.NAVIGATION_ENV_TIMEOUT: (132, 120),
    FailureSignature.SELECTOR_READINESS: (55, 96),
    FailureSignature.ASSERTION_MISMATCH: (109, 78),
    FailureSignature.VISIBILITY_ASSERTION: (20, 72),
    FailureSignature.CLOSED_CONTEXT: (95, 48),
}
HALLUCINATION_WINDOW = (60, 36)

EXPECTED_HISTOGRAM = {
    FailureSignature.METHOD_CONTRACT_MISMATCH: 132,
    FailureSignature.NAVIGATION_ENV_TIMEOUT: 120,
    FailureSignature.SELECTOR_READINESS: 96,
    FailureSignature.ASSERTION_MISMATCH: 78,
    FailureSignature.NON_EXECUTABLE_OUTPUT: 113,
    FailureSignature.VISIBILITY_ASSERTION: 72,
    FailureSignature.CLOSED_CONTEXT: 48,
    FailureSignature.HALLUCINATED_API: 36,
}

NO_ARTIFACT_ENTRY_SETS = [
    [("Could not extract code from LLM response", Stage.CODER)],
    [
        ("Could not extract code from LLM response", Stage.CODER),
        ("Test file path not found", Stage.EXECUTOR),
    ],
    [
        (
            "AttributeError: 'NoneType' object has no attribute 'strip' during code-fix handling",
            Stage.SELF_CORRECTION,
        )
    ],
]


def weave(queues):
    out = []
    while any(queues):
        for queue in queues:
            if queue:
                out.append(queue.pop(0))
    return out


def in_window(row, start, length, modulus=187):
    offset = (row - start) % modulus
    return offset < length


def build_corpus() -> reports.Corpus:
    family_queues = {fam: list(traj) for fam, traj in TRAJECTORIES.items()}

    skeleton = []  # (family, status, retry, phase)
    for phase_label, layout in PHASES:
        queues = []
        for family, count in layout:
            taken = family_queues[family][:count]
            family_queues[family] = family_queues[family][count:]
            queues.append([(family, status, retry, phase_label) for status, retry in taken])
        skeleton.extend(weave(queues))
    assert not any(family_queues.values()), "trajectory reports left unassigned"
    assert len(skeleton) == 300

    # Identify the special reports carrying script revisions.
    weakening_index = next(
        i for i, (fam, status, retry, _) in enumerate(skeleton)
        if fam == "advanced-features" and retry == 4 and status is F
    )
    deletion_index = next(
        i for i, (fam, status, retry, _) in enumerate(skeleton)
        if fam == "selection-navigation" and status is C
    )

    exec_indices = [i for i, item in enumerate(skeleton) if item[1] is not X]
    assert len(exec_indices) == 187
    row_of = {index: row for row, index in enumerate(exec_indices)}

    failing_indices = [i for i, item in enumerate(skeleton) if item[1] is F]
    assert len(failing_indices) == 145

    # Test-result sizing: completed runs use the family's final suite size;
    # failing runs start from 3 cases with the earliest 122 (excluding the
    # pinned weakening run, which executes its 2-case script) carrying 4.
    sizes: dict[int, int] = {}
    passes: dict[int, int] = {}
    sizes[weakening_index] = 2
    passes[weakening_index] = 1
    plain_failing = [i for i in failing_indices if i != weakening_index]
    for position, index in enumerate(plain_failing):
        sizes[index] = 4 if position < 122 else 3
        passes[index] = 1 if position < 123 else 0

    reports_out = []
    no_artifact_counter = 0
    for index, (family, status, retry, phase) in enumerate(skeleton):
        entries: list[ErrorEntry] = []
        results: list[TestCaseResult] = []
        script_before = script_after = None

        if status is X:
            for text, stage in NO_ARTIFACT_ENTRY_SETS[no_artifact_counter % len(NO_ARTIFACT_ENTRY_SETS)]:
                entries.append(ErrorEntry(raw_text=text, stage=stage))
            no_artifact_counter += 1
        else:
            row = row_of[index]
            stage = Stage.EXECUTOR if status is F else Stage.SELF_CORRECTION
            hallucinated = in_window(row, *HALLUCINATION_WINDOW)
            for signature, (start, length) in SIGNATURE_WINDOWS.items():
                if not in_window(row, start, length):
                    continue
                if signature is FailureSignature.METHOD_CONTRACT_MISMATCH and hallucinated:
                    texts = SAMPLE_TEXTS[FailureSignature.HALLUCINATED_API]
                else:
                    texts = SAMPLE_TEXTS[signature]
                entries.append(ErrorEntry(raw_text=texts[row % len(texts)], stage=stage))

            names = CASE_NAMES[family]
            if status is C:
                size = COMPLETED_SIZES[family]
                case_names = names[:size]
                results = [
                    TestCaseResult(
                        case_name=case,
                        verdict=Verdict.PASS,
                        duration_ms=900 + (index * 97 + i * 31) % 7000,
                    )
                    for i, case in enumerate(case_names)
                ]
            else:
                size = sizes[index]
                pass_count = passes[index]
                case_names = list(names[:size])
                while len(case_names) < size:
                    case_names.append(f"{family} exploratory case {len(case_names) + 1}")
                fail_count = size - pass_count
                fail_text = entries[0].raw_text if entries else "execution failed"
                for i, case in enumerate(case_names):
                    if i < fail_count:
                        results.append(
                            TestCaseResult(
                                case_name=case,
                                verdict=Verdict.FAIL,
                                duration_ms=1500 + (index * 131 + i * 53) % 42000,
                                error_text=fail_text,
                            )
                        )
                    else:
                        results.append(
                            TestCaseResult(
                                case_name=case,
                                verdict=Verdict.PASS,
                                duration_ms=700 + (index * 61 + i * 17) % 6500,
                            )
                        )

        if index == weakening_index:
            script_before, script_after = WEAKENING_BEFORE, WEAKENING_AFTER
            # The weakened threshold check now passes; the bulk-edit case is
            # still failing at this iteration.
            results = [
                TestCaseResult(
                    case_name="bulk edit applies to selected rows",
                    verdict=Verdict.FAIL,
                    duration_ms=1500 + (index * 131) % 42000,
                    error_text=entries[0].raw_text if entries else "execution failed",
                ),
                TestCaseResult(
                    case_name="threshold badge shows configured limit",
                    verdict=Verdict.PASS,
                    duration_ms=700 + (index * 61) % 6500,
                ),
            ]
        elif index == deletion_index:
            script_before, script_after = DELETION_BEFORE, DELETION_AFTER

        reports_out.append(
            ExecutionReport(
                report_id=f"rpt-{index:04d}",
                sequence_index=index,
                family_id=family,
                retry_index=retry,
                status=status,
                test_results=tuple(results),
                error_entries=tuple(entries),
                timestamp=synthetic_timestamp(index),
                phase_label=phase,
                script_before=script_before,
                script_after=script_after,
            )
        )
    return reports.Corpus(reports=tuple(reports_out))


def verify(corpus: reports.Corpus):
    overview = metrics.corpus_overview(corpus)
    assert overview["reports"] == 300, overview
    assert overview["reports_no_artifact"] == 113
    assert overview["reports_with_artifact"] == 187
    assert overview["test_executions"] == 636, overview["test_executions"]
    assert overview["tests_passed"] == 204, overview["tests_passed"]
    assert overview["tests_failed"] == 432
    assert overview["reports_completed"] == 42
    assert overview["families"] == 10
    assert overview["max_retry"] == 16

    annotations = derive_auto_annotations(corpus)
    assert annotations == {
        "advanced-features": ConvergenceQuality.ASSERTION_WEAKENED,
        "selection-navigation": ConvergenceQuality.SCOPE_REDUCED,
    }, annotations

    outcomes = metrics.derive_family_outcomes(corpus, annotations)
    expected_rows = {
        "basic-interaction": (11, 1, True, 1),
        "advanced-features": (34, 5, True, 5),
        "tab-refresh": (28, 4, True, 4),
        "accessibility": (6, 0, True, 0),
        "detail-refresh": (40, 6, True, 6),
        "selection-navigation": (45, 7, True, 7),
        "status-transitions": (11, 1, True, 1),
        "tab-errors": (6, 0, False, None),
        "details-refresh-early": (6, 0, False, None),
        "code-gen-collapse": (113, 16, False, None),
    }
    for outcome in outcomes:
        expected = expected_rows[outcome.family_id]
        actual = (outcome.report_count, outcome.max_retry, outcome.converged, outcome.iterations_to_convergence)
        assert actual == expected, (outcome.family_id, actual, expected)

    assert metrics.round1(metrics.repair_convergence(outcomes, strict=False)) == "70.0"
    assert metrics.round1(metrics.repair_convergence(outcomes, strict=True)) == "50.0"
    stats = metrics.iteration_stats(outcomes)
    assert metrics.round1(stats.mean) == "3.4"
    assert metrics.round1(stats.median) == "4.0"
    assert metrics.round1(stats.first_pass_rate) == "10.0"
    assert stats.max_converged == 7
    assert stats.max_unconverged == 16
    assert metrics.final_completed_passes(corpus) == 13

    histogram = signatures.signature_histogram(corpus)
    assert histogram == EXPECTED_HISTOGRAM, {
        k.value: (v, EXPECTED_HISTOGRAM[k]) for k, v in histogram.items() if v != EXPECTED_HISTOGRAM[k]
    }
    bearing = signatures.mean_cooccurrence(corpus, denominator="signature_bearing")
    everything = signatures.mean_cooccurrence(corpus, denominator="all")
    assert bearing == Fraction(695, 300), bearing
    assert metrics.round1(bearing) == "2.3"
    assert metrics.round1(everything) == "2.3"

    rows = metrics.phase_table(corpus)
    expected_phases = [
        ("Phase 1", 18, 2, 1, 0),
        ("Phase 2", 114, 4, 4, 0),
        ("Phase 3", 54, 2, 1, 0),
        ("Phase 4", 114, 2, 1, 113),
    ]
    actual_phases = [
        (r.phase_label, r.report_count, r.family_count, r.converged_count, r.pipeline_failure_count)
        for r in rows
    ]
    assert actual_phases == expected_phases, actual_phases

    # Round-trip byte stability.
    for report in corpus:
        line = reports.emit_report(report)
        assert reports.emit_report(reports.parse_report(line)) == line

    # Reloading validates ordering and retry monotonicity.
    reloaded = reports.load_corpus(reports.emit_corpus(corpus).splitlines())
    assert len(reloaded) == 300


def main():
    corpus = build_corpus()
    verify(corpus)
    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    (FIXTURE_DIR / "reference_corpus.jsonl").write_text(reports.emit_corpus(corpus), encoding="utf-8")
    (FIXTURE_DIR / "weakening_before.spec.ts").write_text(WEAKENING_BEFORE, encoding="utf-8")
    (FIXTURE_DIR / "weakening_after.spec.ts").write_text(WEAKENING_AFTER, encoding="utf-8")
    (FIXTURE_DIR / "deletion_before.spec.ts").write_text(DELETION_BEFORE, encoding="utf-8")
    (FIXTURE_DIR / "deletion_after.spec.ts").write_text(DELETION_AFTER, encoding="utf-8")
    print(f"wrote {FIXTURE_DIR / 'reference_corpus.jsonl'} (300 reports, all aggregate checks passed)")


if __name__ == "__main__":
    main()
