"""Toolkit for analyzing, simulating, and guarding autonomous test-repair loops."""

from .reports import (
    Corpus,
    ErrorEntry,
    ExecutionReport,
    ReportStatus,
    Stage,
    TestCaseResult,
    Verdict,
    emit_corpus,
    emit_report,
    load_corpus,
    load_corpus_file,
    parse_report,
)
from .signatures import (
    FailureSignature,
    RuleTable,
    classify_entry,
    classify_report,
    mean_cooccurrence,
    signature_histogram,
)
from .metrics import (
    ConvergenceQuality,
    MetricsSummary,
    PhaseRow,
    ScenarioFamilyOutcome,
    derive_family_outcomes,
    iteration_stats,
    phase_table,
    repair_convergence,
    summarize,
)
from .assertions import (
    AssertionAst,
    DiffVerdict,
    GateDecision,
    MatcherRank,
    MatcherTable,
    SuiteDiff,
    compare_assertions,
    diff_scripts,
    diff_suites,
    gate_verdict,
    parse_test_script,
)
from .selectors import (
    DomSnapshot,
    SelectorExpr,
    VerificationResult,
    VerificationStatus,
    batch_verify,
    parse_selector,
    verify_selector,
)
from .gates import (
    CoderOutput,
    GateViolation,
    PlannerMode,
    PlannerOutput,
    check_code,
    check_exec_input,
    check_plan,
    extract_code,
)
from .envfilter import FailureOrigin, SkipList, classify_origin
from .retry import AttemptOutcome, RetryState, RetryStatus, new_state, record_attempt
from .discovery import Feature, FeatureTracker, discovery_accounting, jaccard, tokenize
from .sim import (
    FamilySpec,
    GuardrailPolicy,
    ReviewerOracle,
    SimConfig,
    SimResult,
    compare_policies,
    run_simulation,
)

__version__ = "0.1.0"
