"""Convergence and outcome statistics over execution-report corpora.

All internal arithmetic uses exact rationals; rounding (half-up, one decimal)
happens only when numbers are rendered.  A scenario family counts as converged
when its *final* report in corpus order is COMPLETED -- intermediate passing
runs can be superficial, so they do not decide the outcome.  Iterations to
convergence is the retry index of the first COMPLETED report; mean/median
iteration statistics cover converged families only, which is the rule that
keeps the headline numbers honest (unconverged families would otherwise
inflate them with attempt counts that never bought anything).
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import ConfigError, ContractError
from .reports import Corpus, ReportStatus
from .signatures import FailureSignature, RuleTable, mean_cooccurrence, signature_histogram


class ConvergenceQuality(Enum):
    CLEAN = "CLEAN"
    ASSERTION_WEAKENED = "ASSERTION_WEAKENED"
    SCOPE_REDUCED = "SCOPE_REDUCED"
    NONE = "NONE"


@dataclass(frozen=True)
class ScenarioFamilyOutcome:
    family_id: str
    report_count: int
    max_retry: int
    converged: bool
    convergence_quality: ConvergenceQuality
    iterations_to_convergence: int | None

    def __post_init__(self):
        if self.converged != (self.convergence_quality is not ConvergenceQuality.NONE):
            raise ContractError(
                f"family {self.family_id}: converged={self.converged} conflicts with "
                f"quality {self.convergence_quality.value}"
            )
        if self.converged:
            if self.iterations_to_convergence is None:
                raise ContractError(f"family {self.family_id}: converged without iteration count")
            if self.iterations_to_convergence > self.max_retry:
                raise ContractError(
                    f"family {self.family_id}: iterations {self.iterations_to_convergence} "
                    f"exceed max retry {self.max_retry}"
                )


@dataclass(frozen=True)
class PhaseRow:
    phase_label: str
    report_count: int
    family_count: int
    converged_count: int
    pipeline_failure_count: int

    def __post_init__(self):
        if self.converged_count > self.family_count:
            raise ContractError(f"{self.phase_label}: converged {self.converged_count} > families {self.family_count}")
        if self.pipeline_failure_count > self.report_count:
            raise ContractError(f"{self.phase_label}: pipeline failures exceed report count")


@dataclass(frozen=True)
class IterationStats:
    mean: Fraction | None
    median: Fraction | None
    max_converged: int | None
    max_unconverged: int | None
    first_pass_rate: Fraction


@dataclass(frozen=True)
class MetricsSummary:
    rc_naive: Fraction
    rc_strict: Fraction
    first_pass_rate: Fraction
    mean_iterations: Fraction | None
    median_iterations: Fraction | None
    max_retry_converged: int | None
    max_retry_unconverged: int | None
    signature_histogram: dict[FailureSignature, int]
    cooccurrence: Fraction
    cooccurrence_all: Fraction
    phase_rows: list[PhaseRow]

    def __post_init__(self):
        if self.rc_strict > self.rc_naive:
            raise ContractError("strict convergence exceeds naive convergence")


def round1(value: Fraction) -> str:
    """Render an exact rational at one decimal place, rounding half up."""
    scaled = value * 10
    floor = scaled.numerator // scaled.denominator
    remainder = scaled - floor
    units = floor + (1 if remainder >= Fraction(1, 2) else 0)
    sign = "-" if units < 0 else ""
    units = abs(units)
    return f"{sign}{units // 10}.{units % 10}"


def derive_family_outcomes(
    corpus: Corpus,
    quality_annotations: Mapping[str, ConvergenceQuality] | None = None,
) -> list[ScenarioFamilyOutcome]:
    """One outcome per distinct family, in first-appearance order.

    ``quality_annotations`` flags families whose convergence involved
    assertion weakening or test deletion; unannotated converged families are
    CLEAN.  Annotating a family that did not converge is an error.
    """
    annotations = dict(quality_annotations or {})
    outcomes = []
    grouped = corpus.by_family()
    for family_id in corpus.family_ids():
        reports = grouped[family_id]
        converged = reports[-1].status is ReportStatus.COMPLETED
        max_retry = max(r.retry_index for r in reports)
        iterations = None
        for report in reports:
            if report.status is ReportStatus.COMPLETED:
                iterations = report.retry_index
                break
        annotation = annotations.pop(family_id, None)
        if annotation is not None and annotation is not ConvergenceQuality.NONE and not converged:
            raise ConfigError(
                f"family {family_id!r} is annotated {annotation.value} but did not converge"
            )
        if converged:
            quality = annotation or ConvergenceQuality.CLEAN
        else:
            quality = ConvergenceQuality.NONE
            iterations = None
        outcomes.append(
            ScenarioFamilyOutcome(
                family_id=family_id,
                report_count=len(reports),
                max_retry=max_retry,
                converged=converged,
                convergence_quality=quality,
                iterations_to_convergence=iterations,
            )
        )
    unknown = [f for f in annotations if f not in grouped]
    if unknown:
        raise ConfigError(f"annotations reference unknown families: {sorted(unknown)}")
    return outcomes


def repair_convergence(outcomes: Sequence[ScenarioFamilyOutcome], strict: bool = False) -> Fraction:
    """Percentage of families that converged; strict mode counts CLEAN only."""
    if not outcomes:
        raise ContractError("repair convergence is undefined for zero families")
    if strict:
        converged = sum(1 for o in outcomes if o.convergence_quality is ConvergenceQuality.CLEAN)
    else:
        converged = sum(1 for o in outcomes if o.converged)
    return Fraction(converged, len(outcomes)) * 100


def _median(values: Sequence[int]) -> Fraction:
    ordered = sorted(values)
    mid = len(ordered) // 2
    if len(ordered) % 2 == 1:
        return Fraction(ordered[mid])
    return Fraction(ordered[mid - 1] + ordered[mid], 2)


def iteration_stats(outcomes: Sequence[ScenarioFamilyOutcome]) -> IterationStats:
    if not outcomes:
        raise ContractError("iteration statistics are undefined for zero families")
    converged = [o for o in outcomes if o.converged]
    unconverged = [o for o in outcomes if not o.converged]
    iterations = [o.iterations_to_convergence for o in converged]
    first_pass = sum(1 for o in converged if o.iterations_to_convergence == 0)
    return IterationStats(
        mean=Fraction(sum(iterations), len(iterations)) if iterations else None,
        median=_median(iterations) if iterations else None,
        max_converged=max((o.max_retry for o in converged), default=None),
        max_unconverged=max((o.max_retry for o in unconverged), default=None),
        first_pass_rate=Fraction(first_pass, len(outcomes)) * 100,
    )


def phase_table(corpus: Corpus) -> list[PhaseRow]:
    """Per-phase report/family/convergence/pipeline-failure counts.

    Every report must carry a phase label.  A family is attributed to the
    phase containing its final report -- the phase in which its outcome was
    decided -- so families sum to the corpus total even when their runs span
    phases.
    """
    unlabeled = [r.report_id for r in corpus if r.phase_label is None]
    if unlabeled:
        raise ConfigError(
            f"{len(unlabeled)} report(s) lack phase_label (first: {unlabeled[0]}); "
            "label the corpus or pass --phase-boundaries to assign phases by position"
        )
    order: list[str] = []
    report_counts: dict[str, int] = {}
    failure_counts: dict[str, int] = {}
    for report in corpus:
        label = report.phase_label
        if label not in report_counts:
            order.append(label)
            report_counts[label] = 0
            failure_counts[label] = 0
        report_counts[label] += 1
        if report.status is ReportStatus.NO_ARTIFACT:
            failure_counts[label] += 1

    family_counts = {label: 0 for label in order}
    converged_counts = {label: 0 for label in order}
    for family_id, reports in corpus.by_family().items():
        final = reports[-1]
        family_counts[final.phase_label] += 1
        if final.status is ReportStatus.COMPLETED:
            converged_counts[final.phase_label] += 1

    return [
        PhaseRow(
            phase_label=label,
            report_count=report_counts[label],
            family_count=family_counts[label],
            converged_count=converged_counts[label],
            pipeline_failure_count=failure_counts[label],
        )
        for label in order
    ]


def corpus_overview(corpus: Corpus) -> dict:
    """Aggregate corpus totals: report statuses, test-case verdicts, depth."""
    no_artifact = sum(1 for r in corpus if r.status is ReportStatus.NO_ARTIFACT)
    completed = sum(1 for r in corpus if r.status is ReportStatus.COMPLETED)
    executions = sum(len(r.test_results) for r in corpus)
    passed = sum(r.passed_count for r in corpus)
    return {
        "reports": len(corpus),
        "reports_with_artifact": len(corpus) - no_artifact,
        "reports_no_artifact": no_artifact,
        "test_executions": executions,
        "tests_passed": passed,
        "tests_failed": executions - passed,
        "reports_completed": completed,
        "families": len(corpus.family_ids()),
        "max_retry": max((r.retry_index for r in corpus), default=0),
    }


def final_completed_passes(corpus: Corpus) -> int:
    """Total passing cases across converged families' final COMPLETED runs."""
    total = 0
    for reports in corpus.by_family().values():
        final = reports[-1]
        if final.status is ReportStatus.COMPLETED:
            total += final.passed_count
    return total


def summarize(
    corpus: Corpus,
    quality_annotations: Mapping[str, ConvergenceQuality] | None = None,
    rules: RuleTable | None = None,
    with_phases: bool = True,
) -> MetricsSummary:
    outcomes = derive_family_outcomes(corpus, quality_annotations)
    stats = iteration_stats(outcomes)
    return MetricsSummary(
        rc_naive=repair_convergence(outcomes, strict=False),
        rc_strict=repair_convergence(outcomes, strict=True),
        first_pass_rate=stats.first_pass_rate,
        mean_iterations=stats.mean,
        median_iterations=stats.median,
        max_retry_converged=stats.max_converged,
        max_retry_unconverged=stats.max_unconverged,
        signature_histogram=signature_histogram(corpus, rules),
        cooccurrence=mean_cooccurrence(corpus, rules, denominator="signature_bearing"),
        cooccurrence_all=mean_cooccurrence(corpus, rules, denominator="all"),
        phase_rows=phase_table(corpus) if with_phases else [],
    )
