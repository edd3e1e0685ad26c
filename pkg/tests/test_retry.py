"""Retry state machine: transitions, escalation triggers, termination."""
import itertools
import json

import pytest

from repairlab.errors import ConfigError, ContractError
from repairlab.retry import (
    AttemptOutcome,
    EscalationTrigger,
    RetryStatus,
    ReviewQueue,
    escalation_record,
    new_state,
    record_attempt,
)

O = AttemptOutcome


def drive(state, outcomes):
    for outcome in outcomes:
        state = record_attempt(state, outcome)
    return state


class TestNewState:
    def test_defaults(self):
        state = new_state("fam")
        assert state.budget == 7
        assert state.stagnation_window == 3
        assert state.status is RetryStatus.ACTIVE

    def test_deep_budget_accepted(self):
        assert new_state("fam", budget=16).budget == 16

    def test_zero_budget_rejected(self):
        with pytest.raises(ConfigError):
            new_state("fam", budget=0)

    def test_zero_window_rejected(self):
        with pytest.raises(ConfigError):
            new_state("fam", stagnation_window=0)


class TestRecordAttempt:
    def test_six_failures_then_pass_converges(self):
        state = drive(new_state("fam", budget=7), [O.FAIL_TEST_LOGIC] * 6 + [O.PASS])
        assert state.status is RetryStatus.CONVERGED
        assert state.attempts == 7
        assert state.iterations_to_convergence == 6

    def test_stagnation_escalates_below_budget(self):
        state = drive(new_state("fam", budget=16, stagnation_window=3), [O.NO_ARTIFACT] * 3)
        assert state.status is RetryStatus.ESCALATED
        assert state.escalation_trigger is EscalationTrigger.STAGNATION
        assert state.attempts == 3

    def test_first_attempt_pass_is_iteration_zero(self):
        state = record_attempt(new_state("fam"), O.PASS)
        assert state.status is RetryStatus.CONVERGED
        assert state.attempts == 1
        assert state.iterations_to_convergence == 0

    def test_budget_exhaustion_escalates(self):
        state = drive(new_state("fam", budget=4), [O.FAIL_TEST_LOGIC] * 4)
        assert state.status is RetryStatus.ESCALATED
        assert state.escalation_trigger is EscalationTrigger.BUDGET_EXHAUSTED

    def test_environment_escalates_immediately(self):
        state = record_attempt(new_state("fam"), O.FAIL_ENVIRONMENT)
        assert state.status is RetryStatus.ESCALATED
        assert state.escalation_trigger is EscalationTrigger.ENVIRONMENT
        assert state.attempts == 1

    def test_non_artifact_streak_resets_on_other_failure(self):
        state = drive(
            new_state("fam", budget=10, stagnation_window=3),
            [O.NO_ARTIFACT, O.NO_ARTIFACT, O.FAIL_TEST_LOGIC, O.NO_ARTIFACT, O.NO_ARTIFACT],
        )
        assert state.status is RetryStatus.ACTIVE
        assert state.consecutive_no_artifact == 2

    def test_transition_on_converged_state_rejected(self):
        state = record_attempt(new_state("fam"), O.PASS)
        with pytest.raises(ContractError):
            record_attempt(state, O.FAIL_TEST_LOGIC)

    def test_transition_on_escalated_state_rejected(self):
        state = record_attempt(new_state("fam"), O.FAIL_ENVIRONMENT)
        with pytest.raises(ContractError):
            record_attempt(state, O.PASS)


class TestTermination:
    def test_exhaustive_enumeration_budgets_up_to_five(self):
        # every outcome sequence leaves ACTIVE within budget transitions
        for budget in range(1, 6):
            for window in range(1, budget + 1):
                for sequence in itertools.product(list(O), repeat=budget):
                    state = new_state("fam", budget=budget, stagnation_window=window)
                    transitions = 0
                    for outcome in sequence:
                        if state.status is not RetryStatus.ACTIVE:
                            break
                        state = record_attempt(state, outcome)
                        transitions += 1
                    assert state.status is not RetryStatus.ACTIVE
                    assert transitions <= budget

    def test_no_artifact_streak_never_exceeds_window(self):
        for sequence in itertools.product(list(O), repeat=5):
            state = new_state("fam", budget=5, stagnation_window=2)
            for outcome in sequence:
                if state.status is not RetryStatus.ACTIVE:
                    break
                state = record_attempt(state, outcome)
                assert state.consecutive_no_artifact <= 2


class TestEscalationRecord:
    def test_triggers_serialize(self):
        stagnated = drive(new_state("f1", budget=9, stagnation_window=2), [O.NO_ARTIFACT] * 2)
        assert escalation_record(stagnated)["trigger"] == "stagnation"
        exhausted = drive(new_state("f2", budget=2), [O.FAIL_TEST_LOGIC] * 2)
        assert escalation_record(exhausted)["trigger"] == "budget_exhausted"
        environment = record_attempt(new_state("f3"), O.FAIL_ENVIRONMENT)
        assert escalation_record(environment)["trigger"] == "environment"

    def test_record_on_active_state_rejected(self):
        with pytest.raises(ContractError):
            escalation_record(new_state("fam"))

    def test_record_on_converged_state_rejected(self):
        with pytest.raises(ContractError):
            escalation_record(record_attempt(new_state("fam"), O.PASS))


class TestReviewQueue:
    def test_append_writes_json_lines(self, tmp_path):
        path = tmp_path / "queue.jsonl"
        queue = ReviewQueue(path)
        state = record_attempt(new_state("fam"), O.FAIL_ENVIRONMENT)
        queue.append(state)
        lines = path.read_text().splitlines()
        assert len(lines) == 1
        record = json.loads(lines[0])
        assert record == {"family_id": "fam", "attempts": 1, "trigger": "environment"}

    def test_duplicate_append_rejected(self, tmp_path):
        path = tmp_path / "queue.jsonl"
        queue = ReviewQueue(path)
        state = record_attempt(new_state("fam"), O.FAIL_ENVIRONMENT)
        queue.append(state)
        with pytest.raises(ContractError):
            queue.append(state)

    def test_guard_survives_reload(self, tmp_path):
        path = tmp_path / "queue.jsonl"
        state = record_attempt(new_state("fam"), O.FAIL_ENVIRONMENT)
        ReviewQueue(path).append(state)
        with pytest.raises(ContractError):
            ReviewQueue(path).append(state)
