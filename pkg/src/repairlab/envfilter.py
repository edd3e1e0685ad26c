"""Environment-versus-test-logic triage and the feature skip list.

Infrastructure failures (dead connections, expired sessions, closed browser
contexts) are not repairable by rewriting test code; feeding them to the
repair loop burns retries on problems outside its reach.  The origin
classifier separates those from genuine test-logic failures, and the skip list
isolates features whose environment keeps failing.  UNKNOWN origins never add
skip entries -- only confidently environmental evidence does.

The skip list grows monotonically within a run; removal is an explicit,
operator-driven action, never automatic.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from typing import Callable

from .errors import ConfigError
from .reports import ErrorEntry


class FailureOrigin(Enum):
    ENVIRONMENT = "ENVIRONMENT"
    TEST_LOGIC = "TEST_LOGIC"
    UNKNOWN = "UNKNOWN"


# Environment patterns deliberately mirror the navigation/closed-context
# signature patterns so that ENVIRONMENT-classified text never maps to a
# test-logic signature (cross-checked in the test suite).
ENVIRONMENT_PATTERNS: tuple[str, ...] = (
    r"connection[ _]refused",
    r"econnreset",
    r"net::err",
    r"authentication timeout",
    r"session expired",
    r"page\.goto[^\n]*timeout \d+ms exceeded",
    r"timeout \d+ms exceeded[^\n]*goto",
    r"waitforloadstate[^\n]*timeout \d+ms exceeded",
    r'waiting until "networkidle"',
    r"(page|context|browser) has been closed",
)

TEST_LOGIC_PATTERNS: tuple[str, ...] = (
    r"expect\(received\)",
    r"assertion mismatch",
    r"tobevisible",
    r"element is hidden",
    r"waiting for selector",
    r"waiting for locator",
    r"element is not attached",
    r"strict mode violation",
    r"locator\.\w+: timeout \d+ms exceeded",
    r"is not a function",
    r"has no method",
    r"property '[^']+' does not exist",
)


class OriginClassifier:
    """Pattern-table classifier; ENVIRONMENT takes precedence on overlap."""

    def __init__(
        self,
        environment_patterns: tuple[str, ...] = ENVIRONMENT_PATTERNS,
        test_logic_patterns: tuple[str, ...] = TEST_LOGIC_PATTERNS,
    ):
        self._environment = re.compile(
            "|".join(f"(?:{p})" for p in environment_patterns), re.IGNORECASE | re.DOTALL
        )
        self._test_logic = re.compile(
            "|".join(f"(?:{p})" for p in test_logic_patterns), re.IGNORECASE | re.DOTALL
        )

    def classify(self, text: str) -> FailureOrigin:
        if self._environment.search(text):
            return FailureOrigin.ENVIRONMENT
        if self._test_logic.search(text):
            return FailureOrigin.TEST_LOGIC
        return FailureOrigin.UNKNOWN


_DEFAULT_CLASSIFIER: OriginClassifier | None = None


def classify_origin(entry: ErrorEntry, classifier: OriginClassifier | None = None) -> FailureOrigin:
    global _DEFAULT_CLASSIFIER
    if classifier is None:
        if _DEFAULT_CLASSIFIER is None:
            _DEFAULT_CLASSIFIER = OriginClassifier()
        classifier = _DEFAULT_CLASSIFIER
    return classifier.classify(entry.raw_text)


@dataclass(frozen=True)
class SkipEntry:
    feature_id: str
    reason: str
    first_seen: str
    hit_count: int

    def __post_init__(self):
        if self.hit_count < 1:
            raise ConfigError(f"skip entry for {self.feature_id!r} with hit_count < 1")


class SkipList:
    """Single-writer registry of environment-blocked features.

    Environment failures increment a per-feature counter; a feature enters the
    list once the counter reaches the threshold.  When constructed with a
    ``path``, every mutation is written through to that file.
    """

    def __init__(self, path=None, clock: Callable[[], str] | None = None):
        self._entries: dict[str, SkipEntry] = {}
        self._pending: dict[str, int] = {}
        self._path = path
        self._clock = clock or (lambda: "1970-01-01T00:00:00Z")
        if path is not None:
            try:
                with open(path, encoding="utf-8") as handle:
                    raw = json.load(handle)
            except FileNotFoundError:
                raw = []
            except json.JSONDecodeError as exc:
                raise ConfigError(f"skip-list file {path}: invalid JSON: {exc.msg}") from None
            for item in raw:
                entry = SkipEntry(
                    feature_id=item["feature_id"],
                    reason=item["reason"],
                    first_seen=item["first_seen"],
                    hit_count=int(item["hit_count"]),
                )
                self._entries[entry.feature_id] = entry

    def record_failure(
        self, feature_id: str, origin: FailureOrigin, threshold: int = 1, reason: str = ""
    ) -> bool:
        """Record one failure; returns True when the feature is now skipped."""
        if threshold < 1:
            raise ConfigError(f"skip threshold must be >= 1, got {threshold}")
        if origin is not FailureOrigin.ENVIRONMENT:
            return self.is_skipped(feature_id)
        existing = self._entries.get(feature_id)
        if existing is not None:
            self._entries[feature_id] = SkipEntry(
                feature_id=feature_id,
                reason=existing.reason,
                first_seen=existing.first_seen,
                hit_count=existing.hit_count + 1,
            )
            self._persist()
            return True
        count = self._pending.get(feature_id, 0) + 1
        if count >= threshold:
            self._pending.pop(feature_id, None)
            self._entries[feature_id] = SkipEntry(
                feature_id=feature_id,
                reason=reason or "environment failure threshold reached",
                first_seen=self._clock(),
                hit_count=count,
            )
            self._persist()
            return True
        self._pending[feature_id] = count
        return False

    def is_skipped(self, feature_id: str) -> bool:
        return feature_id in self._entries

    def entries(self) -> list[SkipEntry]:
        return sorted(self._entries.values(), key=lambda e: e.feature_id)

    def remove(self, feature_id: str) -> bool:
        """Explicit operator-mediated expiry; returns True when removed."""
        removed = self._entries.pop(feature_id, None) is not None
        if removed:
            self._persist()
        return removed

    def _persist(self):
        if self._path is None:
            return
        payload = [
            {
                "feature_id": e.feature_id,
                "reason": e.reason,
                "first_seen": e.first_seen,
                "hit_count": e.hit_count,
            }
            for e in self.entries()
        ]
        with open(self._path, "w", encoding="utf-8") as handle:
            json.dump(payload, handle, indent=2)
            handle.write("\n")


def update_skip_list(
    skip_list: SkipList, feature_id: str, origin: FailureOrigin, threshold: int = 1
) -> SkipList:
    """Functional-style wrapper over :meth:`SkipList.record_failure`."""
    skip_list.record_failure(feature_id, origin, threshold)
    return skip_list


def is_skipped(skip_list: SkipList, feature_id: str) -> bool:
    return skip_list.is_skipped(feature_id)
