"""Feature-discovery bookkeeping: deduplication, tracking, call accounting.

Autonomous discovery keeps proposing the same feature under different names
("Refresh data table" vs "Table data refresh").  The tracker deduplicates
incrementally with Jaccard similarity over normalized name tokens: a candidate
whose similarity to any accepted feature reaches the threshold (inclusive,
default 0.6) is recorded as a duplicate of the earliest best match instead of
being accepted.

``discovery_accounting`` models the LLM-call cost of multi-round discovery so
simulations can budget it; rounds are capped (default 3 per screen).
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence

from .errors import ConfigError

DEFAULT_THRESHOLD = Fraction(3, 5)
DEFAULT_ROUND_CAP = 3

_CAMEL = re.compile(r"(?<=[a-z0-9])(?=[A-Z])")
_NON_WORD = re.compile(r"[^A-Za-z0-9]+")


def tokenize(name: str) -> frozenset[str]:
    """Lowercase tokens split on whitespace, punctuation, and camel-case."""
    spaced = _CAMEL.sub(" ", name)
    return frozenset(token.lower() for token in _NON_WORD.split(spaced) if token)


class FeatureSource(Enum):
    DOCUMENTATION = "DOCUMENTATION"
    RUNTIME_DOM = "RUNTIME_DOM"


@dataclass(frozen=True)
class Feature:
    feature_id: str
    name_tokens: frozenset[str]
    screen_id: str
    source: FeatureSource = FeatureSource.DOCUMENTATION

    def __post_init__(self):
        if not self.name_tokens:
            raise ConfigError(f"feature {self.feature_id!r} has no name tokens")

    @classmethod
    def from_name(
        cls, feature_id: str, name: str, screen_id: str, source: FeatureSource = FeatureSource.DOCUMENTATION
    ) -> "Feature":
        return cls(feature_id=feature_id, name_tokens=tokenize(name), screen_id=screen_id, source=source)


def jaccard(a: frozenset[str], b: frozenset[str]) -> Fraction:
    """|a∩b| / |a∪b| as an exact rational; empty sets are an error."""
    if not a or not b:
        raise ConfigError("jaccard similarity is undefined for empty token sets")
    union = len(a | b)
    return Fraction(len(a & b), union)


@dataclass(frozen=True)
class RejectedDuplicate:
    candidate: Feature
    matched_feature_id: str
    similarity: Fraction


@dataclass(frozen=True)
class TryAddResult:
    accepted: bool
    matched_feature_id: str | None = None
    similarity: Fraction | None = None


@dataclass
class FeatureTracker:
    """Incremental dedup state: accepted features plus rejected duplicates."""

    accepted: list[Feature] = field(default_factory=list)
    rejected_duplicates: list[RejectedDuplicate] = field(default_factory=list)

    def try_add(self, candidate: Feature, threshold: Fraction = DEFAULT_THRESHOLD) -> TryAddResult:
        """Accept the candidate or record it as a duplicate.

        Duplicate iff the maximum similarity against any accepted feature
        reaches the threshold (inclusive); ties resolve to the earliest
        accepted feature.
        """
        if not (0 < threshold <= 1):
            raise ConfigError(f"threshold must be in (0, 1], got {threshold}")
        best: Feature | None = None
        best_similarity = Fraction(0)
        for feature in self.accepted:
            similarity = jaccard(candidate.name_tokens, feature.name_tokens)
            if similarity > best_similarity:
                best = feature
                best_similarity = similarity
        if best is not None and best_similarity >= threshold:
            self.rejected_duplicates.append(
                RejectedDuplicate(candidate=candidate, matched_feature_id=best.feature_id, similarity=best_similarity)
            )
            return TryAddResult(accepted=False, matched_feature_id=best.feature_id, similarity=best_similarity)
        self.accepted.append(candidate)
        return TryAddResult(accepted=True, similarity=best_similarity if best is not None else None)


def try_add(tracker: FeatureTracker, candidate: Feature, threshold: Fraction = DEFAULT_THRESHOLD) -> TryAddResult:
    return tracker.try_add(candidate, threshold)


def discovery_accounting(
    rounds_per_screen: int | Sequence[int],
    screens: int,
    calls_per_round: int = 1,
    aggregate_calls: int = 0,
    round_cap: int = DEFAULT_ROUND_CAP,
) -> dict:
    """Total LLM calls for a discovery sweep.

    ``rounds_per_screen`` is either one round count applied to every screen or
    a per-screen sequence; each round costs ``calls_per_round`` calls and
    ``aggregate_calls`` covers cross-screen synthesis.  Rounds beyond the cap
    are a configuration error, not a silent clamp.
    """
    if screens < 1:
        raise ConfigError(f"screens must be >= 1, got {screens}")
    if calls_per_round < 1:
        raise ConfigError(f"calls_per_round must be >= 1, got {calls_per_round}")
    if aggregate_calls < 0:
        raise ConfigError(f"aggregate_calls must be >= 0, got {aggregate_calls}")
    if isinstance(rounds_per_screen, int):
        rounds = [rounds_per_screen] * screens
    else:
        rounds = list(rounds_per_screen)
        if len(rounds) != screens:
            raise ConfigError(f"expected {screens} round counts, got {len(rounds)}")
    for i, count in enumerate(rounds):
        if count < 1:
            raise ConfigError(f"screen {i}: rounds must be >= 1, got {count}")
        if count > round_cap:
            raise ConfigError(f"screen {i}: {count} rounds exceed the cap of {round_cap}")
    total = calls_per_round * sum(rounds) + aggregate_calls
    return {"total_calls": total, "rounds": rounds, "calls_per_round": calls_per_round}
