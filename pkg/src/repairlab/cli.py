"""Command-line entry point: analyze, simulate, gate, diff-assertions, classify, dedup.

Exit codes are stable across releases and are a function of the computed
verdict only:

    0  success / allow
    2  ambiguous verification (selector matched multiple elements)
    3  review required (weakening, deletion, or unverifiable selector)
    4  gate violation
    5  input or parse error
    6  internal invariant failure
"""
from __future__ import annotations

import argparse
import json
import sys
from enum import IntEnum
from fractions import Fraction
from pathlib import Path

from . import assertions, discovery, envfilter, gates, metrics, reports, selectors, sim
from .errors import ConfigError, ContractError, InvariantViolation, ParseError, RepairLabError
from .metrics import ConvergenceQuality, round1
from .reports import Corpus, ExecutionReport
from .signatures import SIGNATURE_ORDER, RuleTable, classify_entry, classify_report


class ExitCode(IntEnum):
    OK = 0
    AMBIGUOUS = 2
    REVIEW_REQUIRED = 3
    GATE_VIOLATION = 4
    INPUT_ERROR = 5
    INTERNAL_ERROR = 6


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _percent(count: int, total: int) -> str:
    if total == 0:
        return "0.0%"
    return round1(Fraction(count, total) * 100) + "%"


def _emit_json(payload: dict):
    print(json.dumps(payload, indent=2, sort_keys=False))


# -- analyze -------------------------------------------------------------------


def _relabel_phases(corpus: Corpus, boundaries: list[int]) -> Corpus:
    """Assign Phase 1..n labels by report position at the given boundaries."""
    cuts = sorted(boundaries)
    relabeled = []
    for position, report in enumerate(corpus):
        phase = 1 + sum(1 for cut in cuts if position >= cut)
        relabeled.append(
            ExecutionReport(
                report_id=report.report_id,
                sequence_index=report.sequence_index,
                family_id=report.family_id,
                retry_index=report.retry_index,
                status=report.status,
                test_results=report.test_results,
                error_entries=report.error_entries,
                timestamp=report.timestamp,
                phase_label=f"Phase {phase}",
                script_before=report.script_before,
                script_after=report.script_after,
            )
        )
    return Corpus(reports=tuple(relabeled))


def _load_annotations(path) -> dict[str, ConvergenceQuality]:
    with open(path, encoding="utf-8") as handle:
        raw = json.load(handle)
    if not isinstance(raw, dict):
        raise ConfigError("annotations file must map family_id to convergence quality")
    out = {}
    for family, quality in raw.items():
        try:
            out[family] = ConvergenceQuality(quality)
        except ValueError:
            raise ConfigError(f"annotation for {family!r}: unknown quality {quality!r}") from None
    return out


def _analyze_payload(corpus: Corpus, rules: RuleTable, annotations, with_phases: bool) -> dict:
    summary = metrics.summarize(corpus, annotations, rules, with_phases=with_phases)
    overview = metrics.corpus_overview(corpus)
    outcomes = metrics.derive_family_outcomes(corpus, annotations)
    return {
        "overview": overview,
        "convergence": {
            "families": len(outcomes),
            "converged_naive": sum(1 for o in outcomes if o.converged),
            "converged_strict": sum(
                1 for o in outcomes if o.convergence_quality is ConvergenceQuality.CLEAN
            ),
            "rc_naive": round1(summary.rc_naive),
            "rc_strict": round1(summary.rc_strict),
            "first_pass_rate": round1(summary.first_pass_rate),
            "mean_iterations": round1(summary.mean_iterations) if summary.mean_iterations is not None else None,
            "median_iterations": (
                round1(summary.median_iterations) if summary.median_iterations is not None else None
            ),
            "max_retry_converged": summary.max_retry_converged,
            "max_retry_unconverged": summary.max_retry_unconverged,
            "final_completed_passes": metrics.final_completed_passes(corpus),
        },
        "families": [
            {
                "family_id": o.family_id,
                "reports": o.report_count,
                "max_retry": o.max_retry,
                "converged": o.converged,
                "quality": o.convergence_quality.value,
                "iterations_to_convergence": o.iterations_to_convergence,
            }
            for o in outcomes
        ],
        "signatures": {
            "histogram": {s.value: summary.signature_histogram[s] for s in SIGNATURE_ORDER},
            "cooccurrence_signature_bearing": round1(summary.cooccurrence),
            "cooccurrence_all_reports": round1(summary.cooccurrence_all),
        },
        "phases": [
            {
                "label": row.phase_label,
                "reports": row.report_count,
                "families": row.family_count,
                "converged": row.converged_count,
                "pipeline_failures": row.pipeline_failure_count,
            }
            for row in summary.phase_rows
        ],
    }


def _print_analysis(payload: dict, strict_headline: bool, quiet: bool):
    ov = payload["overview"]
    print("Corpus overview")
    print(f"  reports analyzed                   {ov['reports']}")
    print(
        f"  reports with executable artifact   {ov['reports_with_artifact']} "
        f"({_percent(ov['reports_with_artifact'], ov['reports'])})"
    )
    print(
        f"  reports with no artifact           {ov['reports_no_artifact']} "
        f"({_percent(ov['reports_no_artifact'], ov['reports'])})"
    )
    print(f"  test-case executions               {ov['test_executions']}")
    print(
        f"  test cases passed                  {ov['tests_passed']} "
        f"({_percent(ov['tests_passed'], ov['test_executions'])})"
    )
    print(
        f"  test cases failed                  {ov['tests_failed']} "
        f"({_percent(ov['tests_failed'], ov['test_executions'])})"
    )
    print(
        f"  reports reaching COMPLETED         {ov['reports_completed']} "
        f"({_percent(ov['reports_completed'], ov['reports'])})"
    )
    print(f"  scenario families                  {ov['families']}")
    print(f"  max retry depth observed           {ov['max_retry']}")
    print()

    conv = payload["convergence"]
    headline = conv["rc_strict"] if strict_headline else conv["rc_naive"]
    print("Repair convergence")
    print(f"  scenario families                  {conv['families']}")
    print(f"  converged (naive)                  {conv['converged_naive']} ({conv['rc_naive']}%)")
    print(f"  converged (strict)                 {conv['converged_strict']} ({conv['rc_strict']}%)")
    print(f"  headline convergence rate          {headline}%" + ("  [strict]" if strict_headline else ""))
    print(f"  first-pass success rate            {conv['first_pass_rate']}%")
    print(f"  mean iterations to convergence     {conv['mean_iterations']}")
    print(f"  median iterations to convergence   {conv['median_iterations']}")
    print(f"  max retries (converged family)     {conv['max_retry_converged']}")
    print(f"  max retries (unconverged family)   {conv['max_retry_unconverged']}")
    print(f"  tests passing in final runs        {conv['final_completed_passes']}")
    print()

    if not quiet:
        print("Scenario families")
        width = max(len(f["family_id"]) for f in payload["families"])
        print(f"  {'family':<{width}}  reports  max-retry  converged  quality")
        for fam in payload["families"]:
            print(
                f"  {fam['family_id']:<{width}}  {fam['reports']:>7}  {fam['max_retry']:>9}  "
                f"{'yes' if fam['converged'] else 'no':>9}  {fam['quality']}"
            )
        print()

    sig = payload["signatures"]
    total = ov["reports"]
    print("Failure signatures (reports, not mutually exclusive)")
    for name, count in sig["histogram"].items():
        print(f"  {name:<26} {count:>4} ({_percent(count, total)})")
    print(f"  mean signatures per signature-bearing report  {sig['cooccurrence_signature_bearing']}")
    print(f"  mean signatures per report                    {sig['cooccurrence_all_reports']}")
    print()

    if payload["phases"]:
        print("Phases")
        print("  label        reports  families  converged  pipeline-failures")
        totals = [0, 0, 0, 0]
        for row in payload["phases"]:
            print(
                f"  {row['label']:<11}  {row['reports']:>7}  {row['families']:>8}  "
                f"{row['converged']:>9}  {row['pipeline_failures']:>17}"
            )
            totals[0] += row["reports"]
            totals[1] += row["families"]
            totals[2] += row["converged"]
            totals[3] += row["pipeline_failures"]
        print(f"  {'total':<11}  {totals[0]:>7}  {totals[1]:>8}  {totals[2]:>9}  {totals[3]:>17}")


def _write_csv(payload: dict, directory: str):
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)

    def write(name: str, header: list[str], rows: list[list]):
        with open(out / name, "w", encoding="utf-8") as handle:
            handle.write(",".join(header) + "\n")
            for row in rows:
                handle.write(",".join(str(v) for v in row) + "\n")

    write("overview.csv", ["metric", "value"], [[k, v] for k, v in payload["overview"].items()])
    write("convergence.csv", ["metric", "value"], [[k, v] for k, v in payload["convergence"].items()])
    write(
        "families.csv",
        ["family_id", "reports", "max_retry", "converged", "quality", "iterations"],
        [
            [f["family_id"], f["reports"], f["max_retry"], f["converged"], f["quality"], f["iterations_to_convergence"]]
            for f in payload["families"]
        ],
    )
    write(
        "signatures.csv",
        ["signature", "reports"],
        [[name, count] for name, count in payload["signatures"]["histogram"].items()],
    )
    write(
        "phases.csv",
        ["label", "reports", "families", "converged", "pipeline_failures"],
        [
            [row["label"], row["reports"], row["families"], row["converged"], row["pipeline_failures"]]
            for row in payload["phases"]
        ],
    )


def cmd_analyze(args) -> ExitCode:
    corpus = reports.load_corpus_file(
        args.corpus,
        strict=not args.lenient,
        on_warning=None if args.quiet else lambda msg: print(f"warning: {msg}", file=sys.stderr),
    )
    if args.phase_boundaries:
        boundaries = [int(b) for b in args.phase_boundaries.split(",") if b.strip()]
        corpus = _relabel_phases(corpus, boundaries)
    rules = RuleTable.from_file(args.rules) if args.rules else None
    annotations = sim.derive_auto_annotations(corpus)
    if args.annotations:
        annotations.update(_load_annotations(args.annotations))
    with_phases = all(r.phase_label is not None for r in corpus)
    payload = _analyze_payload(corpus, rules, annotations, with_phases)
    if args.csv:
        _write_csv(payload, args.csv)
    if args.json:
        _emit_json(payload)
    else:
        _print_analysis(payload, strict_headline=args.strict, quiet=args.quiet)
    return ExitCode.OK


# -- simulate ------------------------------------------------------------------


def cmd_simulate(args) -> ExitCode:
    config = sim.load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.retry_budget is not None or args.stagnation_window is not None:
        raw_policy = sim.config_to_dict(config)["policy"]
        if args.retry_budget is not None:
            raw_policy["retry_budget"] = args.retry_budget
        if args.stagnation_window is not None:
            raw_policy["stagnation_window"] = args.stagnation_window
        overrides["policy"] = raw_policy
    if overrides:
        raw = sim.config_to_dict(config)
        raw.update(overrides)
        config = sim.config_from_dict(raw)

    if args.compare:
        other = sim.load_config(args.compare)
        comparison = sim.compare_policies(config, other, runs=max(1, args.runs))
        payload = {
            side: {
                "runs": agg.runs,
                "rc_naive_mean": round1(agg.rc_naive_mean),
                "rc_strict_mean": round1(agg.rc_strict_mean),
                "no_artifact_share_mean": round1(agg.no_artifact_share_mean),
                "mean_iterations_mean": (
                    round1(agg.mean_iterations_mean) if agg.mean_iterations_mean is not None else None
                ),
                "escalations_mean": round1(agg.escalations_mean),
            }
            for side, agg in comparison.items()
        }
        if args.json:
            _emit_json(payload)
        else:
            print("Policy comparison (means over seeded runs)")
            print("  metric                      config-a     config-b")
            rows = [
                ("naive convergence %", "rc_naive_mean"),
                ("strict convergence %", "rc_strict_mean"),
                ("no-artifact share %", "no_artifact_share_mean"),
                ("mean iterations", "mean_iterations_mean"),
                ("escalations per run", "escalations_mean"),
            ]
            for label, key in rows:
                print(f"  {label:<26}  {str(payload['a'][key]):>9}    {str(payload['b'][key]):>9}")
        return ExitCode.OK

    if args.runs > 1:
        aggregate = sim.compare_policies(config, config, runs=args.runs)["a"]
        payload = {
            "runs": aggregate.runs,
            "rc_naive_mean": round1(aggregate.rc_naive_mean),
            "rc_strict_mean": round1(aggregate.rc_strict_mean),
            "no_artifact_share_mean": round1(aggregate.no_artifact_share_mean),
            "escalations_mean": round1(aggregate.escalations_mean),
        }
        if args.json:
            _emit_json(payload)
        else:
            for key, value in payload.items():
                print(f"  {key:<24} {value}")
        return ExitCode.OK

    result = sim.run_simulation(config)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(reports.emit_corpus(result.corpus, meta=result.meta))
    if args.review_queue:
        with open(args.review_queue, "a", encoding="utf-8") as handle:
            for record in result.escalations:
                handle.write(json.dumps(record, separators=(",", ":")) + "\n")
    summary_payload = {
        "meta": result.meta,
        "families": [
            {
                "family_id": s.family_id,
                "status": s.status.value,
                "attempts": s.attempts,
                "converged_retry": s.converged_retry,
                "quality": s.quality.value,
                "escalation_trigger": s.escalation_trigger,
            }
            for s in result.summaries
        ],
    }
    if args.json:
        _emit_json(summary_payload)
    elif not args.quiet:
        print(f"simulated {result.meta['reports']} reports (seed {result.meta['seed']}, "
              f"generator {result.meta['generator']}, config {result.meta['config_hash']})")
        for fam in summary_payload["families"]:
            print(
                f"  {fam['family_id']:<24} {fam['status']:<10} attempts={fam['attempts']:<3} "
                f"quality={fam['quality']}"
            )
    return ExitCode.OK


# -- gate ----------------------------------------------------------------------


def cmd_gate(args) -> ExitCode:
    modes = [bool(args.selector), bool(args.plan), bool(args.coder_response), bool(args.exec)]
    if sum(modes) != 1:
        raise _UsageError("gate requires exactly one of --selector, --plan, --coder-response, --exec")

    if args.selector:
        if not args.dom:
            raise _UsageError("--selector requires --dom <snapshot.json>")
        expr = selectors.parse_selector(args.selector)
        snapshot = selectors.load_snapshot(args.dom)
        result = selectors.verify_selector(expr, snapshot)
        payload = {
            "selector": str(expr),
            "status": result.status.value,
            "matches": result.count,
            "paths": [list(path) for path in result.matched_paths],
        }
        if args.json:
            _emit_json(payload)
        else:
            print(f"{result.status.value} ({result.count} match(es))")
        return {
            selectors.VerificationStatus.VERIFIED_UNIQUE: ExitCode.OK,
            selectors.VerificationStatus.VERIFIED_MULTIPLE: ExitCode.AMBIGUOUS,
            selectors.VerificationStatus.NOT_FOUND: ExitCode.REVIEW_REQUIRED,
        }[result.status]

    if args.plan:
        with open(args.plan, encoding="utf-8") as handle:
            raw = json.load(handle)
        try:
            plan = gates.PlannerOutput(
                mode=gates.PlannerMode(raw["mode"]),
                target_page_objects=tuple(raw.get("target_page_objects", [])),
                scenario_spec=raw.get("scenario_spec", ""),
                feature_id=raw.get("feature_id", ""),
            )
        except (KeyError, ValueError) as exc:
            raise ParseError(f"bad plan file: {exc}", field_path="$") from None
        known = frozenset(raw.get("known_specs", [])) if "known_specs" in raw else None
        violation = gates.check_plan(plan, known)
    elif args.coder_response:
        with open(args.coder_response, encoding="utf-8") as handle:
            response = handle.read()
        violation = gates.check_code(gates.extract_code(response))
    else:
        path, _, context_file = args.exec.partition(",")
        context = None
        if context_file:
            with open(context_file, encoding="utf-8") as handle:
                context = handle.read()
        violation = gates.check_exec_input(path or None, context, expecting_repair=args.expect_repair)

    if violation is None:
        if args.json:
            _emit_json({"ok": True})
        elif not args.quiet:
            print("ok")
        return ExitCode.OK
    payload = gates.violation_to_dict(violation)
    if args.json:
        _emit_json({"ok": False, "violation": payload})
    else:
        print(f"{payload['gate']}: {payload['reason']}" + (" (fatal)" if payload["fatal"] else ""))
    return ExitCode.GATE_VIOLATION


# -- diff-assertions -------------------------------------------------------------


def cmd_diff_assertions(args) -> ExitCode:
    table = assertions.MatcherTable.from_file(args.matchers) if args.matchers else None
    with open(args.before, encoding="utf-8") as handle:
        before = handle.read()
    with open(args.after, encoding="utf-8") as handle:
        after = handle.read()
    diff = assertions.diff_scripts(before, after, table)
    verdict = assertions.gate_verdict(diff)
    if args.json:
        _emit_json(assertions.diff_to_dict(diff))
    else:
        for name in diff.removed_cases:
            print(f"removed case: {name}")
        for name in diff.added_cases:
            print(f"added case: {name}")
        for change in diff.changes:
            before_text = f"{change.before.matcher}" if change.before else "(absent)"
            after_text = f"{change.after.matcher}" if change.after else "(absent)"
            print(f"{change.verdict.value}: {change.case_name}: {before_text} -> {after_text}")
        if diff.scope_reduction:
            print("SCOPE_REDUCTION")
        print(verdict.value)
    return ExitCode.OK if verdict is assertions.GateDecision.ALLOW else ExitCode.REVIEW_REQUIRED


# -- classify ---------------------------------------------------------------------


def cmd_classify(args) -> ExitCode:
    text = sys.stdin.read()
    if not text.strip():
        raise ParseError("no input on stdin", field_path="stdin")
    rules = RuleTable.from_file(args.rules) if args.rules else None

    if args.origin:
        entry = reports.ErrorEntry(raw_text=text, stage=reports.Stage.EXECUTOR)
        origin = envfilter.classify_origin(entry)
        if args.json:
            _emit_json({"origin": origin.value})
        else:
            print(origin.value)
        return ExitCode.OK

    if args.report:
        report = reports.parse_report(text.strip())
        labels = sorted(classify_report(report, rules), key=lambda s: s.value)
    else:
        entry = reports.ErrorEntry(raw_text=text, stage=reports.Stage.EXECUTOR)
        labels = sorted(classify_entry(entry, rules), key=lambda s: s.value)
    if args.json:
        _emit_json({"signatures": [s.value for s in labels]})
    else:
        for signature in labels:
            print(signature.value)
    return ExitCode.OK


# -- dedup ------------------------------------------------------------------------


def cmd_dedup(args) -> ExitCode:
    with open(args.features, encoding="utf-8") as handle:
        raw = json.load(handle)
    if not isinstance(raw, list):
        raise ParseError("feature file must be a JSON array", field_path="$")
    threshold = Fraction(args.threshold).limit_denominator(1000)
    tracker = discovery.FeatureTracker()
    decisions = []
    for i, item in enumerate(raw):
        try:
            feature = discovery.Feature.from_name(
                feature_id=item["feature_id"],
                name=item["name"],
                screen_id=item.get("screen_id", ""),
                source=discovery.FeatureSource(item.get("source", "DOCUMENTATION")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad feature entry: {exc}", field_path=f"$[{i}]") from None
        result = tracker.try_add(feature, threshold)
        decisions.append((feature, result))
    payload = {
        "threshold": float(threshold),
        "accepted": [f.feature_id for f in tracker.accepted],
        "duplicates": [
            {
                "feature_id": feature.feature_id,
                "duplicate_of": result.matched_feature_id,
                "similarity": float(result.similarity),
            }
            for feature, result in decisions
            if not result.accepted
        ],
    }
    if args.json:
        _emit_json(payload)
    else:
        print(f"accepted {len(payload['accepted'])} of {len(raw)} features at threshold {float(threshold)}")
        for dup in payload["duplicates"]:
            print(f"  duplicate: {dup['feature_id']} -> {dup['duplicate_of']} ({dup['similarity']:.2f})")
    return ExitCode.OK


# -- dispatch -----------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="repairlab", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command")

    def common(p):
        p.add_argument("--json", action="store_true", help="machine-parseable JSON output")
        p.add_argument("--quiet", action="store_true", help="suppress non-essential output")

    p = sub.add_parser("analyze", help="compute corpus statistics and tables")
    p.add_argument("corpus", help="JSON-lines corpus file")
    p.add_argument("--strict", action="store_true", help="use strict convergence as the headline rate")
    p.add_argument("--rules", help="signature rule table JSON file")
    p.add_argument("--annotations", help="family convergence-quality annotations JSON file")
    p.add_argument("--csv", metavar="DIR", help="also write CSV tables to DIR")
    p.add_argument("--lenient", action="store_true", help="warn on unknown record keys instead of failing")
    p.add_argument("--phase-boundaries", help="comma-separated report positions starting new phases")
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="run the pipeline simulator")
    p.add_argument("--config", required=True, help="simulation config JSON file")
    p.add_argument("--out", help="write the simulated corpus to this JSON-lines file")
    p.add_argument("--runs", type=int, default=1, help="number of seeded runs to aggregate")
    p.add_argument("--compare", help="second config; compare policies over the same families")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--retry-budget", type=int, help="override the policy retry budget")
    p.add_argument("--stagnation-window", type=int, help="override the policy stagnation window")
    p.add_argument("--review-queue", help="append escalation records to this JSON-lines file")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gate", help="handoff and selector gates")
    p.add_argument("--selector", help="selector expression to verify")
    p.add_argument("--dom", help="DOM snapshot JSON file (with --selector)")
    p.add_argument("--plan", help="planner output JSON file")
    p.add_argument("--coder-response", help="raw coder response text file")
    p.add_argument("--exec", help="executor input: PATH or PATH,CONTEXT_FILE")
    p.add_argument("--expect-repair", action="store_true", help="executor input belongs to a repair iteration")
    common(p)
    p.set_defaults(func=cmd_gate)

    p = sub.add_parser("diff-assertions", help="diff two test scripts for semantic drift")
    p.add_argument("before", help="earlier script")
    p.add_argument("after", help="revised script")
    p.add_argument("--matchers", help="matcher rank table JSON file")
    common(p)
    p.set_defaults(func=cmd_diff_assertions)

    p = sub.add_parser("classify", help="classify log text from stdin")
    p.add_argument("--origin", action="store_true", help="print failure origin instead of signatures")
    p.add_argument("--report", action="store_true", help="treat stdin as a serialized report record")
    p.add_argument("--rules", help="signature rule table JSON file")
    common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("dedup", help="deduplicate a discovered-feature list")
    p.add_argument("features", help="feature list JSON file")
    p.add_argument("--threshold", type=float, default=0.6, help="similarity threshold (default 0.6)")
    common(p)
    p.set_defaults(func=cmd_dedup)

    return parser


def dispatch(argv: list[str]) -> ExitCode:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return ExitCode.INPUT_ERROR
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return ExitCode.INPUT_ERROR
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ExitCode.INPUT_ERROR
    except (ParseError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ExitCode.INPUT_ERROR
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ExitCode.INPUT_ERROR
    except (InvariantViolation, ContractError) as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return ExitCode.INTERNAL_ERROR
    except RepairLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ExitCode.INTERNAL_ERROR


def main() -> int:
    return int(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    sys.exit(main())
