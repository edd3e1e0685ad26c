"""Bounded repair iteration with stagnation detection and explicit escalation.

An unbounded self-correction loop can burn arbitrary resources on a scenario
that will never pass -- most damagingly when the pipeline keeps "retrying"
without ever producing an executable artifact.  The retry state machine here
terminates every trajectory: a pass converges, exhausting the budget
escalates, a run of consecutive no-artifact attempts escalates early, and an
environment-caused failure escalates immediately (environment problems belong
to the skip list, not the repair loop).

States are immutable; :func:`record_attempt` returns the successor state, so
exhaustive enumeration of outcome sequences is cheap.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum

from .errors import ConfigError, ContractError

DEFAULT_BUDGET = 7
DEFAULT_STAGNATION_WINDOW = 3


class AttemptOutcome(Enum):
    PASS = "PASS"
    FAIL_TEST_LOGIC = "FAIL_TEST_LOGIC"
    FAIL_ENVIRONMENT = "FAIL_ENVIRONMENT"
    NO_ARTIFACT = "NO_ARTIFACT"


class RetryStatus(Enum):
    ACTIVE = "ACTIVE"
    CONVERGED = "CONVERGED"
    ESCALATED = "ESCALATED"


class EscalationTrigger(Enum):
    BUDGET_EXHAUSTED = "budget_exhausted"
    STAGNATION = "stagnation"
    ENVIRONMENT = "environment"


@dataclass(frozen=True)
class RetryState:
    family_id: str
    budget: int
    stagnation_window: int
    attempts: int = 0
    consecutive_no_artifact: int = 0
    status: RetryStatus = RetryStatus.ACTIVE
    escalation_trigger: EscalationTrigger | None = None

    def __post_init__(self):
        if self.attempts > self.budget:
            raise ContractError(f"attempts {self.attempts} exceed budget {self.budget}")
        if self.consecutive_no_artifact > self.attempts:
            raise ContractError("no-artifact streak exceeds attempt count")

    @property
    def iterations_to_convergence(self) -> int | None:
        """Retry index of the passing attempt (0-based); None unless converged."""
        if self.status is not RetryStatus.CONVERGED:
            return None
        return self.attempts - 1


def new_state(
    family_id: str,
    budget: int = DEFAULT_BUDGET,
    stagnation_window: int = DEFAULT_STAGNATION_WINDOW,
) -> RetryState:
    if budget < 1:
        raise ConfigError(f"retry budget must be >= 1, got {budget}")
    if stagnation_window < 1:
        raise ConfigError(f"stagnation window must be >= 1, got {stagnation_window}")
    return RetryState(family_id=family_id, budget=budget, stagnation_window=stagnation_window)


def record_attempt(state: RetryState, outcome: AttemptOutcome) -> RetryState:
    """Advance the state machine by one attempt outcome.

    PASS converges.  FAIL_ENVIRONMENT escalates without consuming further
    repair effort.  NO_ARTIFACT extends the stagnation streak and escalates
    when it reaches the window; other failures reset the streak.  Reaching the
    budget without a pass escalates.
    """
    if state.status is not RetryStatus.ACTIVE:
        raise ContractError(f"family {state.family_id}: transition on {state.status.value} state")
    attempts = state.attempts + 1

    if outcome is AttemptOutcome.PASS:
        return replace(state, attempts=attempts, consecutive_no_artifact=0, status=RetryStatus.CONVERGED)

    if outcome is AttemptOutcome.FAIL_ENVIRONMENT:
        return replace(
            state,
            attempts=attempts,
            consecutive_no_artifact=0,
            status=RetryStatus.ESCALATED,
            escalation_trigger=EscalationTrigger.ENVIRONMENT,
        )

    streak = state.consecutive_no_artifact + 1 if outcome is AttemptOutcome.NO_ARTIFACT else 0
    if streak >= state.stagnation_window:
        return replace(
            state,
            attempts=attempts,
            consecutive_no_artifact=streak,
            status=RetryStatus.ESCALATED,
            escalation_trigger=EscalationTrigger.STAGNATION,
        )
    if attempts >= state.budget:
        return replace(
            state,
            attempts=attempts,
            consecutive_no_artifact=streak,
            status=RetryStatus.ESCALATED,
            escalation_trigger=EscalationTrigger.BUDGET_EXHAUSTED,
        )
    return replace(state, attempts=attempts, consecutive_no_artifact=streak)


def escalation_record(state: RetryState) -> dict:
    """Serialize an escalated state for the review queue."""
    if state.status is not RetryStatus.ESCALATED:
        raise ContractError(f"family {state.family_id}: escalation record on {state.status.value} state")
    return {
        "family_id": state.family_id,
        "attempts": state.attempts,
        "trigger": state.escalation_trigger.value,
    }


class ReviewQueue:
    """Append-only JSON-lines review queue with an idempotence guard.

    Exactly one record per escalated state: re-appending the same
    (family, attempts) pair raises instead of duplicating.
    """

    def __init__(self, path):
        self._path = path
        self._seen: set[tuple[str, int]] = set()
        try:
            with open(path, encoding="utf-8") as handle:
                for line in handle:
                    line = line.strip()
                    if line:
                        record = json.loads(line)
                        self._seen.add((record["family_id"], record["attempts"]))
        except FileNotFoundError:
            pass

    def append(self, state: RetryState) -> dict:
        record = escalation_record(state)
        key = (record["family_id"], record["attempts"])
        if key in self._seen:
            raise ContractError(f"escalation for {key} already recorded")
        with open(self._path, "a", encoding="utf-8") as handle:
            handle.write(json.dumps(record, separators=(",", ":")) + "\n")
        self._seen.add(key)
        return record
