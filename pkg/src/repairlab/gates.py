"""Structural validation at agent handoff points.

A multi-agent pipeline fails catastrophically when one stage silently emits
output the next stage cannot consume: plans without coding targets, responses
without extractable code, executor invocations without a test path.  Each gate
here is a total function -- arbitrary input yields either ok (None) or a
:class:`GateViolation` value, never an exception -- so violations can be
counted, classified as stagnation signals, and routed to escalation instead of
crashing the loop.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Collection


class PlannerMode(Enum):
    GENERATE_NEW = "generate_new"
    USE_EXISTING = "use_existing"


class GateKind(Enum):
    PLAN_GATE = "PLAN_GATE"
    CODE_GATE = "CODE_GATE"
    EXEC_GATE = "EXEC_GATE"


@dataclass(frozen=True)
class PlannerOutput:
    mode: PlannerMode
    target_page_objects: tuple[str, ...]
    scenario_spec: str
    feature_id: str


@dataclass(frozen=True)
class CoderOutput:
    raw_response: str
    extracted_code: str | None = None
    target_path: str | None = None
    warnings: tuple[str, ...] = field(default=())


@dataclass(frozen=True)
class GateViolation:
    gate: GateKind
    reason: str
    fatal: bool = False

    def __post_init__(self):
        if not self.reason:
            raise ValueError("violation reason must be non-empty")


NO_CODE_REASON = "Could not extract code from LLM response"
NO_PATH_REASON = "Test file path not found"

_FENCE = re.compile(r"```[ \t]*([A-Za-z0-9_+-]*)[ \t]*\n(.*?)```", re.DOTALL)
_PATH_DECL = re.compile(r"^\s*(?://|#)?\s*file:\s*(\S+)\s*$", re.IGNORECASE | re.MULTILINE)


def check_plan(plan: PlannerOutput, known_specs: Collection[str] | None = None) -> GateViolation | None:
    """Validate a planner handoff.

    ``known_specs`` is the registry of existing spec-file ids; when provided,
    a use_existing plan must reference one of them (the reference travels in
    ``scenario_spec``).  Without a registry only non-blankness is checked.
    """
    if not plan.feature_id.strip():
        return GateViolation(GateKind.PLAN_GATE, "plan carries no feature id", fatal=True)
    if not [p for p in plan.target_page_objects if p.strip()]:
        return GateViolation(GateKind.PLAN_GATE, "plan names no target page objects")
    if plan.mode is PlannerMode.GENERATE_NEW:
        if not plan.scenario_spec.strip():
            return GateViolation(GateKind.PLAN_GATE, "generate_new plan has an empty scenario spec")
    else:
        reference = plan.scenario_spec.strip()
        if not reference:
            return GateViolation(GateKind.PLAN_GATE, "use_existing plan references no spec file")
        if known_specs is not None and reference not in known_specs:
            return GateViolation(
                GateKind.PLAN_GATE, f"use_existing plan references unknown spec {reference!r}"
            )
    return None


def extract_code(response: str) -> CoderOutput:
    """Pull the first fenced code block and any declared file path.

    Absence of a block is represented, not raised; :func:`check_code` turns it
    into a violation.  With several blocks the first wins and a warning is
    recorded.  The file path is taken from a ``file: <path>`` declaration line
    (optionally comment-prefixed), searched inside the chosen block first and
    then in the surrounding prose.
    """
    warnings: list[str] = []
    blocks = list(_FENCE.finditer(response))
    code: str | None = None
    if blocks:
        code = blocks[0].group(2)
        if len(blocks) > 1:
            warnings.append(f"response contains {len(blocks)} fenced blocks; using the first")
        if not code.strip():
            code = None
            warnings.append("first fenced block is empty")

    target_path: str | None = None
    if code is not None:
        inner = _PATH_DECL.search(code)
        if inner:
            target_path = inner.group(1)
    if target_path is None:
        outer = _PATH_DECL.search(response)
        if outer:
            target_path = outer.group(1)

    return CoderOutput(
        raw_response=response,
        extracted_code=code,
        target_path=target_path,
        warnings=tuple(warnings),
    )


def _writable_path_shape(path: str) -> bool:
    if not path or path != path.strip():
        return False
    if any(ch in path for ch in ("\0", "\n", " ")):
        return False
    if path.endswith("/") or path.endswith("."):
        return False
    final = path.rsplit("/", 1)[-1]
    return "." in final


def check_code(out: CoderOutput) -> GateViolation | None:
    """Validate a coder handoff after :func:`extract_code` has been applied."""
    if out.extracted_code is None:
        return GateViolation(GateKind.CODE_GATE, NO_CODE_REASON, fatal=True)
    if out.target_path is None or not _writable_path_shape(out.target_path):
        return GateViolation(GateKind.CODE_GATE, NO_PATH_REASON)
    return None


def check_exec_input(
    path: str | None,
    repair_context: str | None = None,
    expecting_repair: bool = False,
) -> GateViolation | None:
    """Validate an executor handoff: test path present, repair context when due."""
    if path is None or not path.strip():
        return GateViolation(GateKind.EXEC_GATE, "executor input carries no test path", fatal=True)
    if expecting_repair and (repair_context is None or not repair_context.strip()):
        return GateViolation(
            GateKind.EXEC_GATE, "repair iteration without repair context", fatal=True
        )
    return None


def violation_to_dict(violation: GateViolation) -> dict:
    return {"gate": violation.gate.value, "reason": violation.reason, "fatal": violation.fatal}
