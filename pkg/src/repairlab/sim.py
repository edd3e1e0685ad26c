"""Stochastic simulator of the five-agent repair pipeline under guardrails.

The generative model reproduces the observed failure dynamics with three
mechanisms on top of per-report noise sampling:

* **persistent family defects** -- each scenario family starts with a defect
  set that keeps failing runs until a repair roll succeeds; repair success
  decays with consecutive failed attempts on the same defect (lateral
  variation without progress);
* **a code-generation regime switch** -- from a configured report index the
  pipeline enters an absorbing state in which fresh code generation and
  repair handling fail to produce an executable artifact with high
  probability, yielding long NO_ARTIFACT sequences;
* **workaround convergence** -- a stuck assertion-class defect may be
  "resolved" by weakening the assertion, a stuck case of any other class by
  deleting it.  Both yield superficially COMPLETED runs; the semantic gate
  plus reviewer oracle can block them.

Runs are strictly sequential and deterministic given the seed (splitmix64
stream; the generator id is stamped into corpus metadata).  Every emitted
report satisfies the report-model invariants, and traces respect the pipeline
topology: Explorer -> Planner -> Coder -> Executor -> Self-Correction, with
the Self-Correction -> Executor repair loop and Executor -> Explorer
re-entry.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from .assertions import diff_scripts, quality_evidence
from .envfilter import FailureOrigin, SkipList
from .errors import ConfigError
from .gates import check_code, check_exec_input, check_plan, extract_code
from .gates import PlannerMode, PlannerOutput
from .metrics import ConvergenceQuality
from .reports import (
    Corpus,
    ErrorEntry,
    ExecutionReport,
    ReportStatus,
    Stage,
    TestCaseResult,
    Verdict,
)
from .retry import (
    AttemptOutcome,
    EscalationTrigger,
    RetryStatus,
    escalation_record,
    new_state,
    record_attempt,
)
from .rng import GENERATOR_ID, SplitMix64, derive_run_seeds
from .signatures import SAMPLE_TEXTS, FailureSignature

ENV_SIGNATURES = frozenset(
    {FailureSignature.NAVIGATION_ENV_TIMEOUT, FailureSignature.CLOSED_CONTEXT}
)
ASSERTION_CLASS = frozenset(
    {FailureSignature.ASSERTION_MISMATCH, FailureSignature.VISIBILITY_ASSERTION}
)

_EPOCH_DAY = 20090  # 2025-01-03, day number since 1970-01-01
_REPORT_SPACING_S = 36288  # 300 reports over a 126-day window


class ReviewerOracle(Enum):
    APPROVE_ALL = "APPROVE_ALL"
    REJECT_WEAKENING = "REJECT_WEAKENING"
    REJECT_ALL = "REJECT_ALL"


@dataclass(frozen=True)
class GuardrailPolicy:
    selector_grounding: bool = False
    code_gate: bool = False
    plan_gate: bool = False
    exec_gate: bool = False
    env_skip: bool = False
    semantic_gate: bool = False
    bounded_retries: bool = False
    retry_budget: int = 16
    stagnation_window: int | None = None
    env_skip_threshold: int = 1
    reviewer_oracle: ReviewerOracle = ReviewerOracle.APPROVE_ALL

    def __post_init__(self):
        if self.retry_budget < 1:
            raise ConfigError(f"retry_budget must be >= 1, got {self.retry_budget}")
        if self.stagnation_window is not None and self.stagnation_window < 1:
            raise ConfigError(f"stagnation_window must be >= 1, got {self.stagnation_window}")
        if self.env_skip_threshold < 1:
            raise ConfigError(f"env_skip_threshold must be >= 1, got {self.env_skip_threshold}")

    @classmethod
    def baseline(cls) -> "GuardrailPolicy":
        """Everything off, deep retry budget: the unconstrained legacy loop."""
        return cls()

    @classmethod
    def constrained(cls) -> "GuardrailPolicy":
        """All gates on, bounded retries, stagnation detection, strict review."""
        return cls(
            selector_grounding=True,
            code_gate=True,
            plan_gate=True,
            exec_gate=True,
            env_skip=True,
            semantic_gate=True,
            bounded_retries=True,
            retry_budget=7,
            stagnation_window=3,
            reviewer_oracle=ReviewerOracle.REJECT_WEAKENING,
        )


@dataclass(frozen=True)
class FamilySpec:
    family_id: str
    initial_defects: tuple[FailureSignature, ...]
    repairable: bool = True

    def __post_init__(self):
        if not self.family_id:
            raise ConfigError("family_id must be non-empty")
        if FailureSignature.NON_EXECUTABLE_OUTPUT in self.initial_defects:
            raise ConfigError(
                f"family {self.family_id}: NON_EXECUTABLE_OUTPUT is produced by the "
                "code-generation model, not carried as a suite defect"
            )


@dataclass(frozen=True)
class RegimeSwitch:
    at_report: int
    non_executable_probability: float

    def __post_init__(self):
        if self.at_report < 0:
            raise ConfigError(f"at_report must be >= 0, got {self.at_report}")
        if not 0.0 <= self.non_executable_probability <= 1.0:
            raise ConfigError("non_executable_probability must be in [0, 1]")


@dataclass(frozen=True)
class RepairModel:
    success_default: float = 0.5
    success_by_signature: tuple[tuple[FailureSignature, float], ...] = ()
    decay: float = 1.0
    workaround_after: int = 3
    weaken_probability: float = 0.0
    delete_probability: float = 0.0

    def __post_init__(self):
        for name, value in (
            ("success_default", self.success_default),
            ("decay", self.decay),
            ("weaken_probability", self.weaken_probability),
            ("delete_probability", self.delete_probability),
        ):
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"repair.{name} must be in [0, 1], got {value}")
        for signature, value in self.success_by_signature:
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"repair success for {signature.value} must be in [0, 1]")
        if self.workaround_after < 1:
            raise ConfigError("workaround_after must be >= 1")

    def success_for(self, signature: FailureSignature) -> float:
        for candidate, value in self.success_by_signature:
            if candidate is signature:
                return value
        return self.success_default


@dataclass(frozen=True)
class PhaseRange:
    label: str
    start: int
    end: int  # exclusive

    def __post_init__(self):
        if self.end <= self.start or self.start < 0:
            raise ConfigError(f"phase {self.label!r}: bad range [{self.start}, {self.end})")


@dataclass(frozen=True)
class SimConfig:
    seed: int
    families: tuple[FamilySpec, ...]
    signature_probabilities: tuple[tuple[FailureSignature, float], ...] = ()
    regime_switch: RegimeSwitch | None = None
    policy: GuardrailPolicy = field(default_factory=GuardrailPolicy)
    report_budget: int = 300
    no_code_probability: float = 0.0
    repair: RepairModel = field(default_factory=RepairModel)
    phases: tuple[PhaseRange, ...] = ()

    def __post_init__(self):
        if self.report_budget < 1:
            raise ConfigError(f"report_budget must be >= 1, got {self.report_budget}")
        if not self.families:
            raise ConfigError("at least one family is required")
        seen = set()
        for spec in self.families:
            if spec.family_id in seen:
                raise ConfigError(f"duplicate family_id {spec.family_id!r}")
            seen.add(spec.family_id)
        for signature, value in self.signature_probabilities:
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"probability for {signature.value} must be in [0, 1]")
        if not 0.0 <= self.no_code_probability <= 1.0:
            raise ConfigError("no_code_probability must be in [0, 1]")

    def noise_for(self, signature: FailureSignature) -> float:
        for candidate, value in self.signature_probabilities:
            if candidate is signature:
                return value
        return 0.0

    def phase_for(self, index: int) -> str | None:
        for phase in self.phases:
            if phase.start <= index < phase.end:
                return phase.label
        return None


# -- config (de)serialization -------------------------------------------------


def config_from_dict(raw: dict) -> SimConfig:
    try:
        families = tuple(
            FamilySpec(
                family_id=item["family_id"],
                initial_defects=tuple(FailureSignature(d) for d in item.get("initial_defects", [])),
                repairable=bool(item.get("repairable", True)),
            )
            for item in raw["families"]
        )
        policy_raw = raw.get("policy", {})
        policy = GuardrailPolicy(
            selector_grounding=bool(policy_raw.get("selector_grounding", False)),
            code_gate=bool(policy_raw.get("code_gate", False)),
            plan_gate=bool(policy_raw.get("plan_gate", False)),
            exec_gate=bool(policy_raw.get("exec_gate", False)),
            env_skip=bool(policy_raw.get("env_skip", False)),
            semantic_gate=bool(policy_raw.get("semantic_gate", False)),
            bounded_retries=bool(policy_raw.get("bounded_retries", False)),
            retry_budget=int(policy_raw.get("retry_budget", 16)),
            stagnation_window=(
                int(policy_raw["stagnation_window"])
                if policy_raw.get("stagnation_window") is not None
                else None
            ),
            env_skip_threshold=int(policy_raw.get("env_skip_threshold", 1)),
            reviewer_oracle=ReviewerOracle(policy_raw.get("reviewer_oracle", "APPROVE_ALL")),
        )
        regime = None
        if raw.get("regime_switch") is not None:
            regime = RegimeSwitch(
                at_report=int(raw["regime_switch"]["at_report"]),
                non_executable_probability=float(raw["regime_switch"]["non_executable_probability"]),
            )
        repair_raw = raw.get("repair", {})
        repair = RepairModel(
            success_default=float(repair_raw.get("success_default", 0.5)),
            success_by_signature=tuple(
                (FailureSignature(k), float(v))
                for k, v in repair_raw.get("success_by_signature", {}).items()
            ),
            decay=float(repair_raw.get("decay", 1.0)),
            workaround_after=int(repair_raw.get("workaround_after", 3)),
            weaken_probability=float(repair_raw.get("weaken_probability", 0.0)),
            delete_probability=float(repair_raw.get("delete_probability", 0.0)),
        )
        phases = tuple(
            PhaseRange(label=item["label"], start=int(item["start"]), end=int(item["end"]))
            for item in raw.get("phases", [])
        )
        return SimConfig(
            seed=int(raw["seed"]),
            families=families,
            signature_probabilities=tuple(
                (FailureSignature(k), float(v))
                for k, v in raw.get("signature_probabilities", {}).items()
            ),
            regime_switch=regime,
            policy=policy,
            report_budget=int(raw.get("report_budget", 300)),
            no_code_probability=float(raw.get("no_code_probability", 0.0)),
            repair=repair,
            phases=phases,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad simulation config: {exc}") from None


def config_to_dict(config: SimConfig) -> dict:
    return {
        "seed": config.seed,
        "report_budget": config.report_budget,
        "families": [
            {
                "family_id": spec.family_id,
                "initial_defects": [d.value for d in spec.initial_defects],
                "repairable": spec.repairable,
            }
            for spec in config.families
        ],
        "signature_probabilities": {s.value: p for s, p in config.signature_probabilities},
        "regime_switch": (
            {
                "at_report": config.regime_switch.at_report,
                "non_executable_probability": config.regime_switch.non_executable_probability,
            }
            if config.regime_switch
            else None
        ),
        "no_code_probability": config.no_code_probability,
        "repair": {
            "success_default": config.repair.success_default,
            "success_by_signature": {s.value: p for s, p in config.repair.success_by_signature},
            "decay": config.repair.decay,
            "workaround_after": config.repair.workaround_after,
            "weaken_probability": config.repair.weaken_probability,
            "delete_probability": config.repair.delete_probability,
        },
        "phases": [{"label": p.label, "start": p.start, "end": p.end} for p in config.phases],
        "policy": {
            "selector_grounding": config.policy.selector_grounding,
            "code_gate": config.policy.code_gate,
            "plan_gate": config.policy.plan_gate,
            "exec_gate": config.policy.exec_gate,
            "env_skip": config.policy.env_skip,
            "semantic_gate": config.policy.semantic_gate,
            "bounded_retries": config.policy.bounded_retries,
            "retry_budget": config.policy.retry_budget,
            "stagnation_window": config.policy.stagnation_window,
            "env_skip_threshold": config.policy.env_skip_threshold,
            "reviewer_oracle": config.policy.reviewer_oracle.value,
        },
    }


def config_hash(config: SimConfig) -> str:
    canonical = json.dumps(config_to_dict(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def load_config(path) -> SimConfig:
    with open(path, encoding="utf-8") as handle:
        try:
            raw = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path}: invalid JSON: {exc.msg}") from None
    return config_from_dict(raw)


# -- traces and summaries ------------------------------------------------------


@dataclass(frozen=True)
class TraceRun:
    report_index: int | None
    stages: tuple[Stage, ...]
    events: tuple[str, ...]


@dataclass
class SimTrace:
    family_id: str
    runs: list[TraceRun] = field(default_factory=list)


class FamilyStatus(Enum):
    ACTIVE = "ACTIVE"
    CONVERGED = "CONVERGED"
    ESCALATED = "ESCALATED"
    SKIPPED = "SKIPPED"


@dataclass
class FamilySummary:
    family_id: str
    status: FamilyStatus
    attempts: int
    converged_retry: int | None
    quality: ConvergenceQuality
    weakened: bool
    deleted: bool
    escalation_trigger: str | None


@dataclass
class SimResult:
    corpus: Corpus
    traces: list[SimTrace]
    summaries: list[FamilySummary]
    escalations: list[dict]
    meta: dict

    def quality_annotations(self) -> dict[str, ConvergenceQuality]:
        return {
            s.family_id: s.quality
            for s in self.summaries
            if s.quality in (ConvergenceQuality.ASSERTION_WEAKENED, ConvergenceQuality.SCOPE_REDUCED)
        }


# -- family runtime state -------------------------------------------------------

_SCRIPT_HEADER = "import { test, expect } from '@playwright/test';\n"


def _render_script(family_id: str, cases: list[tuple[str, str]]) -> str:
    blocks = [_SCRIPT_HEADER]
    for case_name, assertion in cases:
        blocks.append(
            f'\ntest("{case_name}", async ({{ page }}) => {{\n'
            f"  const value = await page.locator('[data-test={family_id}-widget]').count();\n"
            f"  {assertion}\n"
            f"}});\n"
        )
    return "".join(blocks)


_NO_CODE_RESPONSE = (
    "The scenario was reviewed and a repair direction was described, "
    "but no fenced code block was produced in this round."
)


class _FamilyState:
    def __init__(self, spec: FamilySpec, policy: GuardrailPolicy):
        self.spec = spec
        self.status = FamilyStatus.ACTIVE
        self.defects: list[FailureSignature] = list(spec.initial_defects)
        self.failed_repairs: dict[FailureSignature, int] = {}
        self.attempts = 0
        self.streak_no_artifact = 0
        self.has_artifact = False
        self.last_execution_failed = False
        self.converged_retry: int | None = None
        self.quality = ConvergenceQuality.NONE
        self.weakened = False
        self.deleted = False
        self.escalation_trigger: str | None = None
        self.env_failures = 0
        case_count = max(2, min(3, 1 + len(spec.initial_defects)))
        self.cases: list[tuple[str, str]] = [
            (f"{spec.family_id} case {i + 1}", "expect(value).toBe(5);") for i in range(case_count)
        ]
        self.pending_scripts: tuple[str, str] | None = None
        self.budget = policy.retry_budget
        slug = "".join(c if c.isalnum() or c in "-_" else "-" for c in spec.family_id)
        self.script_path = f"tests/generated/{slug}.spec.ts"
        self.code_response = (
            f"```typescript\n// file: {self.script_path}\n"
            f"{_render_script(spec.family_id, self.cases)}```\n"
        )
        self.plan = PlannerOutput(
            mode=PlannerMode.GENERATE_NEW,
            target_page_objects=(f"{spec.family_id}-page",),
            scenario_spec=f"exercise {spec.family_id} end to end",
            feature_id=spec.family_id,
        )
        # Rule 2 state machine drives terminal decisions under bounded
        # retries; the unconstrained loop keeps its own counters only.
        if policy.bounded_retries:
            window = policy.stagnation_window or policy.retry_budget + 1
            self.retry_state = new_state(spec.family_id, policy.retry_budget, window)
        else:
            self.retry_state = None

    @property
    def retry_index(self) -> int:
        # Reports are emitted after the attempt counter advances, so the
        # depth of the current run is attempts - 1; it plateaus at the budget
        # when the unbounded legacy loop keeps re-attempting past it.
        if self.status is FamilyStatus.CONVERGED and self.converged_retry is not None:
            return self.converged_retry
        return min(max(self.attempts - 1, 0), self.budget)


# -- the simulator ---------------------------------------------------------------


def synthetic_timestamp(index: int) -> str:
    """Deterministic ISO-8601 timestamp for report ``index`` (no wall clock)."""
    total = _EPOCH_DAY * 86400 + index * _REPORT_SPACING_S
    days, rest = divmod(total, 86400)
    hours, rest = divmod(rest, 3600)
    minutes, seconds = divmod(rest, 60)
    # civil date from day number (Howard Hinnant's algorithm)
    era = (days + 719468) // 146097
    doe = days + 719468 - era * 146097
    yoe = (doe - doe // 1460 + doe // 36524 - doe // 146096) // 365
    year = yoe + era * 400
    doy = doe - (365 * yoe + yoe // 4 - yoe // 100)
    mp = (5 * doy + 2) // 153
    day = doy - (153 * mp + 2) // 5 + 1
    month = mp + 3 if mp < 10 else mp - 9
    if month <= 2:
        year += 1
    return f"{year:04d}-{month:02d}-{day:02d}T{hours:02d}:{minutes:02d}:{seconds:02d}Z"


class _Simulation:
    def __init__(self, config: SimConfig):
        self.config = config
        self.policy = config.policy
        self.rng = SplitMix64(config.seed)
        self.families = [_FamilyState(spec, config.policy) for spec in config.families]
        self.traces = {f.spec.family_id: SimTrace(f.spec.family_id) for f in self.families}
        self.reports: list[ExecutionReport] = []
        self.skip_list = SkipList()
        self.escalations: list[dict] = []
        self.noise_signatures = [
            (sig, prob)
            for sig, prob in config.signature_probabilities
            if sig is not FailureSignature.NON_EXECUTABLE_OUTPUT and prob > 0.0
        ]
        self.next_rotation = 0

    # -- scheduling ------------------------------------------------------------

    def _pick(self) -> _FamilyState | None:
        active = [f for f in self.families if f.status is FamilyStatus.ACTIVE]
        pool = active or [f for f in self.families if f.status is FamilyStatus.CONVERGED]
        if not pool:
            return None
        chosen = pool[self.next_rotation % len(pool)]
        self.next_rotation += 1
        return chosen

    # -- probability helpers ----------------------------------------------------

    def _artifact_loss_probability(self) -> float:
        regime = self.config.regime_switch
        if regime is not None and len(self.reports) >= regime.at_report:
            return regime.non_executable_probability
        return self.config.no_code_probability

    # -- report assembly ---------------------------------------------------------

    def _emit(
        self,
        family: _FamilyState,
        status: ReportStatus,
        results: list[TestCaseResult],
        entries: list[ErrorEntry],
    ) -> ExecutionReport:
        index = len(self.reports)
        scripts = family.pending_scripts
        family.pending_scripts = None
        report = ExecutionReport(
            report_id=f"sim-{index:04d}",
            sequence_index=index,
            family_id=family.spec.family_id,
            retry_index=family.retry_index,
            status=status,
            test_results=tuple(results),
            error_entries=tuple(entries),
            timestamp=synthetic_timestamp(index),
            phase_label=self.config.phase_for(index),
            script_before=scripts[0] if scripts else None,
            script_after=scripts[1] if scripts else None,
        )
        self.reports.append(report)
        return report

    def _sample_text(self, signature: FailureSignature) -> str:
        return self.rng.choice(SAMPLE_TEXTS[signature])

    def _noise_entries(self, stage: Stage) -> list[ErrorEntry]:
        entries = []
        for signature, probability in self.noise_signatures:
            if self.rng.chance(probability):
                entries.append(ErrorEntry(raw_text=self._sample_text(signature), stage=stage))
        return entries

    # -- outcome bookkeeping -----------------------------------------------------

    def _classify_failure(self, family: _FamilyState, environmental: bool) -> AttemptOutcome:
        """Map a failed execution to an attempt outcome.

        Environment failures become FAIL_ENVIRONMENT (escalate-and-isolate)
        only once the skip list actually triggers, so the configured skip
        threshold is honored under both policies.
        """
        if not environmental or not self.policy.env_skip:
            return AttemptOutcome.FAIL_TEST_LOGIC
        family.env_failures += 1
        skipped = self.skip_list.record_failure(
            family.spec.family_id,
            FailureOrigin.ENVIRONMENT,
            threshold=self.policy.env_skip_threshold,
            reason="environment failure during simulated execution",
        )
        return AttemptOutcome.FAIL_ENVIRONMENT if skipped else AttemptOutcome.FAIL_TEST_LOGIC

    def _record_outcome(self, family: _FamilyState, outcome: AttemptOutcome):
        family.attempts += 1
        if outcome is AttemptOutcome.NO_ARTIFACT:
            family.streak_no_artifact += 1
            family.has_artifact = False
            family.last_execution_failed = False
        else:
            family.streak_no_artifact = 0
            family.has_artifact = True
            family.last_execution_failed = outcome is not AttemptOutcome.PASS

        if family.retry_state is not None:
            family.retry_state = record_attempt(family.retry_state, outcome)
            state = family.retry_state
            if state.status is RetryStatus.CONVERGED:
                self._mark_converged(family, state.iterations_to_convergence)
            elif state.status is RetryStatus.ESCALATED:
                family.escalation_trigger = state.escalation_trigger.value
                if state.escalation_trigger is EscalationTrigger.ENVIRONMENT:
                    family.status = FamilyStatus.SKIPPED
                else:
                    family.status = FamilyStatus.ESCALATED
                self.escalations.append(escalation_record(state))
            return

        # Unconstrained legacy loop: passes converge, everything else keeps
        # cycling; once the artifact lineage is lost the family regenerates.
        if outcome is AttemptOutcome.PASS:
            self._mark_converged(family, min(family.attempts - 1, family.budget))
        elif outcome is AttemptOutcome.FAIL_ENVIRONMENT:
            family.status = FamilyStatus.SKIPPED
            family.escalation_trigger = "environment"

    def _mark_converged(self, family: _FamilyState, retry_index: int | None):
        family.status = FamilyStatus.CONVERGED
        family.converged_retry = retry_index
        if family.quality is ConvergenceQuality.NONE:
            family.quality = ConvergenceQuality.CLEAN

    # -- run shapes ---------------------------------------------------------------

    def _execute_suite(self, family: _FamilyState, stages: list[Stage], events: list[str]):
        stages.append(Stage.EXECUTOR)
        defects = list(family.defects)
        if defects:
            events.append("execution failed: " + ",".join(d.value for d in defects))
            entries = [
                ErrorEntry(raw_text=self._sample_text(signature), stage=Stage.EXECUTOR)
                for signature in defects
            ]
            entries.extend(self._noise_entries(Stage.EXECUTOR))
            failing = max(1, min(len(family.cases), len(defects)))
            results = []
            for i, (case_name, _) in enumerate(family.cases):
                if i < failing:
                    results.append(
                        TestCaseResult(
                            case_name=case_name,
                            verdict=Verdict.FAIL,
                            duration_ms=self.rng.randint(800, 45000),
                            error_text=entries[min(i, len(entries) - 1)].raw_text,
                        )
                    )
                else:
                    results.append(
                        TestCaseResult(
                            case_name=case_name,
                            verdict=Verdict.PASS,
                            duration_ms=self.rng.randint(200, 9000),
                        )
                    )
            environmental = all(d in ENV_SIGNATURES for d in defects)
            self._record_outcome(family, self._classify_failure(family, environmental))
            self._emit(family, ReportStatus.FAILED, results, entries)
        else:
            events.append("execution passed")
            entries = self._noise_entries(Stage.SELF_CORRECTION)
            results = [
                TestCaseResult(case_name=case_name, verdict=Verdict.PASS, duration_ms=self.rng.randint(200, 9000))
                for case_name, _ in family.cases
            ]
            self._record_outcome(family, AttemptOutcome.PASS)
            self._emit(family, ReportStatus.COMPLETED, results, entries)

    def _fresh_run(self, family: _FamilyState):
        stages: list[Stage] = [Stage.EXPLORER, Stage.PLANNER]
        events: list[str] = ["feature selected"]
        if self.policy.plan_gate:
            plan_violation = check_plan(family.plan)
            events.append("plan gate passed" if plan_violation is None else plan_violation.reason)
        else:
            events.append("plan produced")
        stages.append(Stage.CODER)
        lost = self.rng.chance(self._artifact_loss_probability())
        coder_output = extract_code(_NO_CODE_RESPONSE if lost else family.code_response)
        violation = check_code(coder_output)
        if violation is not None:
            events.append("coder produced no extractable artifact")
            entries = [ErrorEntry(raw_text=violation.reason, stage=Stage.CODER)]
            if self.policy.code_gate:
                events.append("code gate blocked handoff before execution")
            else:
                stages.append(Stage.EXECUTOR)
                events.append("executor invoked without artifact")
                entries.append(ErrorEntry(raw_text="Test file path not found", stage=Stage.EXECUTOR))
            self._record_outcome(family, AttemptOutcome.NO_ARTIFACT)
            self._emit(family, ReportStatus.NO_ARTIFACT, [], entries)
        else:
            events.append("code generated")
            if self.policy.selector_grounding:
                before = len(family.defects)
                family.defects = [
                    d for d in family.defects if d is not FailureSignature.HALLUCINATED_API
                ]
                if len(family.defects) != before:
                    events.append("selector grounding removed hallucinated selectors")
            self._execute_suite(family, stages, events)
        self.traces[family.spec.family_id].runs.append(
            TraceRun(report_index=len(self.reports) - 1, stages=tuple(stages), events=tuple(events))
        )

    def _attempt_workaround(self, family: _FamilyState, events: list[str]) -> bool:
        """Try to resolve the last remaining stuck defect by weakening/deletion."""
        if not family.spec.repairable or len(family.defects) != 1:
            return False
        defect = family.defects[0]
        if family.failed_repairs.get(defect, 0) < self.config.repair.workaround_after:
            return False
        weakening = defect in ASSERTION_CLASS
        propensity = (
            self.config.repair.weaken_probability if weakening else self.config.repair.delete_probability
        )
        if len(family.cases) < 2 and not weakening:
            return False
        if not self.rng.chance(propensity):
            return False

        before_script = _render_script(family.spec.family_id, family.cases)
        if weakening:
            new_cases = [
                (name, "expect(value).toBeTruthy();") if i == 0 else (name, assertion)
                for i, (name, assertion) in enumerate(family.cases)
            ]
            label = "assertion weakening"
            quality = ConvergenceQuality.ASSERTION_WEAKENED
        else:
            new_cases = family.cases[:-1]
            label = "test-case deletion"
            quality = ConvergenceQuality.SCOPE_REDUCED
        after_script = _render_script(family.spec.family_id, new_cases)

        if self.policy.semantic_gate:
            events.append(f"semantic gate flagged {label} for review")
            if self.policy.reviewer_oracle is not ReviewerOracle.APPROVE_ALL:
                events.append("reviewer rejected the modification")
                return False
            events.append("reviewer approved the modification")
        family.cases = new_cases
        family.defects = []
        family.quality = quality
        family.weakened = family.weakened or weakening
        family.deleted = family.deleted or not weakening
        family.pending_scripts = (before_script, after_script)
        events.append(f"{label} applied")
        return True

    def _repair_run(self, family: _FamilyState):
        stages: list[Stage] = [Stage.SELF_CORRECTION]
        events: list[str] = ["self-correction invoked"]
        corrupted = self.rng.chance(self._artifact_loss_probability())
        repair_context = None if corrupted else '{"failed_cases": "recorded"}'
        violation = check_exec_input(family.script_path, repair_context, expecting_repair=True)
        if violation is not None:
            events.append("repair state corrupted")
            entries = [
                ErrorEntry(
                    raw_text="AttributeError: 'NoneType' object has no attribute 'strip' during code-fix handling",
                    stage=Stage.SELF_CORRECTION,
                )
            ]
            if self.policy.exec_gate:
                events.append("exec gate blocked corrupted repair handoff")
            else:
                stages.append(Stage.EXECUTOR)
                events.append("executor invoked with corrupted repair context")
                entries.append(ErrorEntry(raw_text="Test file path not found", stage=Stage.EXECUTOR))
            self._record_outcome(family, AttemptOutcome.NO_ARTIFACT)
            self._emit(family, ReportStatus.NO_ARTIFACT, [], entries)
        else:
            if family.spec.repairable:
                for defect in list(family.defects):
                    failed = family.failed_repairs.get(defect, 0)
                    probability = self.config.repair.success_for(defect) * (
                        self.config.repair.decay**failed
                    )
                    if self.rng.chance(probability):
                        family.defects.remove(defect)
                        family.failed_repairs.pop(defect, None)
                        events.append(f"repaired {defect.value}")
                    else:
                        family.failed_repairs[defect] = failed + 1
            else:
                for defect in family.defects:
                    family.failed_repairs[defect] = family.failed_repairs.get(defect, 0) + 1
            if family.defects:
                self._attempt_workaround(family, events)
            self._execute_suite(family, stages, events)
        self.traces[family.spec.family_id].runs.append(
            TraceRun(report_index=len(self.reports) - 1, stages=tuple(stages), events=tuple(events))
        )

    def _reuse_run(self, family: _FamilyState):
        stages = [Stage.EXPLORER, Stage.PLANNER, Stage.CODER, Stage.EXECUTOR]
        events = ["feature re-selected", "plan reused existing spec", "existing artifact reused"]
        entries = self._noise_entries(Stage.SELF_CORRECTION)
        results = [
            TestCaseResult(case_name=case_name, verdict=Verdict.PASS, duration_ms=self.rng.randint(200, 9000))
            for case_name, _ in family.cases
        ]
        events.append("re-execution passed")
        self._emit(family, ReportStatus.COMPLETED, results, entries)
        self.traces[family.spec.family_id].runs.append(
            TraceRun(report_index=len(self.reports) - 1, stages=tuple(stages), events=tuple(events))
        )

    def run(self) -> SimResult:
        while len(self.reports) < self.config.report_budget:
            family = self._pick()
            if family is None:
                break
            if family.status is FamilyStatus.CONVERGED:
                self._reuse_run(family)
            elif family.has_artifact and family.last_execution_failed:
                self._repair_run(family)
            else:
                self._fresh_run(family)
        summaries = [
            FamilySummary(
                family_id=f.spec.family_id,
                status=f.status,
                attempts=f.attempts,
                converged_retry=f.converged_retry,
                quality=f.quality if f.status is FamilyStatus.CONVERGED else ConvergenceQuality.NONE,
                weakened=f.weakened,
                deleted=f.deleted,
                escalation_trigger=f.escalation_trigger,
            )
            for f in self.families
        ]
        meta = {
            "seed": self.config.seed,
            "generator": GENERATOR_ID,
            "config_hash": config_hash(self.config),
            "reports": len(self.reports),
        }
        return SimResult(
            corpus=Corpus(reports=tuple(self.reports)),
            traces=[self.traces[f.spec.family_id] for f in self.families],
            summaries=summaries,
            escalations=self.escalations,
            meta=meta,
        )


def run_simulation(config: SimConfig) -> SimResult:
    """Run one simulation; deterministic for a given config and seed."""
    return _Simulation(config).run()


# -- policy comparison ------------------------------------------------------------


@dataclass(frozen=True)
class PolicyAggregate:
    label: str
    runs: int
    rc_naive_mean: Fraction
    rc_strict_mean: Fraction
    no_artifact_share_mean: Fraction
    mean_iterations_mean: Fraction | None
    escalations_mean: Fraction


def _run_metrics(result: SimResult) -> tuple[Fraction, Fraction, Fraction, Fraction | None, int]:
    summaries = result.summaries
    total = len(summaries)
    converged = [s for s in summaries if s.status is FamilyStatus.CONVERGED]
    clean = [s for s in converged if s.quality is ConvergenceQuality.CLEAN]
    rc_naive = Fraction(len(converged), total) * 100
    rc_strict = Fraction(len(clean), total) * 100
    na = sum(1 for r in result.corpus if r.status is ReportStatus.NO_ARTIFACT)
    na_share = Fraction(na, len(result.corpus)) if len(result.corpus) else Fraction(0)
    iterations = [s.converged_retry for s in converged if s.converged_retry is not None]
    mean_iterations = Fraction(sum(iterations), len(iterations)) if iterations else None
    escalations = sum(1 for s in summaries if s.status is FamilyStatus.ESCALATED)
    return rc_naive, rc_strict, na_share, mean_iterations, escalations


def compare_policies(config_a: SimConfig, config_b: SimConfig, runs: int = 1) -> dict:
    """Monte Carlo comparison of two policies over identical family specs.

    Seeds derive deterministically from each config's base seed; the configs
    must differ only in policy.
    """
    if runs < 1:
        raise ConfigError(f"runs must be >= 1, got {runs}")
    strip = lambda c: {k: v for k, v in config_to_dict(c).items() if k != "policy"}
    if strip(config_a) != strip(config_b):
        raise ConfigError("policy comparison requires configs that differ only in policy")

    def aggregate(config: SimConfig, label: str) -> PolicyAggregate:
        totals = [Fraction(0), Fraction(0), Fraction(0), Fraction(0)]
        iteration_values: list[Fraction] = []
        for seed in derive_run_seeds(config.seed, runs):
            result = run_simulation(
                SimConfig(
                    seed=seed,
                    families=config.families,
                    signature_probabilities=config.signature_probabilities,
                    regime_switch=config.regime_switch,
                    policy=config.policy,
                    report_budget=config.report_budget,
                    no_code_probability=config.no_code_probability,
                    repair=config.repair,
                    phases=config.phases,
                )
            )
            rc_naive, rc_strict, na_share, mean_iterations, escalations = _run_metrics(result)
            totals[0] += rc_naive
            totals[1] += rc_strict
            totals[2] += na_share
            totals[3] += escalations
            if mean_iterations is not None:
                iteration_values.append(mean_iterations)
        return PolicyAggregate(
            label=label,
            runs=runs,
            rc_naive_mean=totals[0] / runs,
            rc_strict_mean=totals[1] / runs,
            no_artifact_share_mean=totals[2] / runs * 100,
            mean_iterations_mean=(
                sum(iteration_values, Fraction(0)) / len(iteration_values) if iteration_values else None
            ),
            escalations_mean=totals[3] / runs,
        )

    return {"a": aggregate(config_a, "a"), "b": aggregate(config_b, "b")}


def derive_auto_annotations(corpus: Corpus) -> dict[str, ConvergenceQuality]:
    """Infer weakened/scope-reduced convergence from embedded script pairs.

    Reports carrying both a before and an after script are diffed; evidence of
    weakening or deletion annotates the family, provided the family actually
    converged (script evidence on a never-converged family is ignored --
    the workaround did not buy a final pass).
    """
    last_status: dict[str, ReportStatus] = {}
    for report in corpus:
        last_status[report.family_id] = report.status
    annotations: dict[str, ConvergenceQuality] = {}
    for report in corpus:
        if report.script_before is None or report.script_after is None:
            continue
        if last_status.get(report.family_id) is not ReportStatus.COMPLETED:
            continue
        evidence = quality_evidence(diff_scripts(report.script_before, report.script_after))
        if evidence is None:
            continue
        quality = ConvergenceQuality(evidence)
        current = annotations.get(report.family_id)
        # Deletion evidence outranks weakening evidence.
        if current is ConvergenceQuality.SCOPE_REDUCED:
            continue
        annotations[report.family_id] = quality
    return annotations
