"""Environment-vs-test-logic triage and skip-list behavior."""
import json

import pytest

from conftest import entry
from repairlab.envfilter import (
    ENVIRONMENT_PATTERNS,
    FailureOrigin,
    SkipList,
    classify_origin,
    is_skipped,
    update_skip_list,
)
from repairlab.errors import ConfigError
from repairlab.signatures import SAMPLE_TEXTS, FailureSignature, classify_entry


class TestClassifyOrigin:
    @pytest.mark.parametrize(
        "text",
        [
            "ECONNRESET",
            "connection refused by upstream",
            "authentication timeout: token refresh failed",
            "page.goto: Timeout 60000ms exceeded",
            "Target page, context or browser has been closed",
        ],
    )
    def test_environment_patterns(self, text):
        assert classify_origin(entry(text)) is FailureOrigin.ENVIRONMENT

    @pytest.mark.parametrize(
        "text",
        [
            "Error: expect(received).toBe(expected)",
            "waiting for selector '[data-test=x]'",
            "TypeError: grid.refreshRows is not a function",
            "Error: expect(banner).toBeVisible() failed",
        ],
    )
    def test_test_logic_patterns(self, text):
        assert classify_origin(entry(text)) is FailureOrigin.TEST_LOGIC

    def test_unrecognized_is_unknown(self):
        assert classify_origin(entry("unrecognized line")) is FailureOrigin.UNKNOWN

    def test_environment_signatures_stay_in_env_classes(self):
        # Any text classified ENVIRONMENT must only carry navigation/closed
        # signature labels under the default tables.
        allowed = {FailureSignature.NAVIGATION_ENV_TIMEOUT, FailureSignature.CLOSED_CONTEXT}
        candidates = [text for texts in SAMPLE_TEXTS.values() for text in texts]
        for text in candidates:
            if classify_origin(entry(text)) is FailureOrigin.ENVIRONMENT:
                assert set(classify_entry(entry(text))) <= allowed, text

    def test_every_environment_pattern_is_a_signature_pattern(self):
        # the rule tables stay aligned: each env pattern's canonical text maps
        # to an env-class signature, never a test-logic one
        probes = {
            "connection[ _]refused": "connection refused",
            "econnreset": "ECONNRESET",
            "net::err": "net::ERR_FAILED",
            "authentication timeout": "authentication timeout",
            "session expired": "session expired",
            r"page\.goto[^\n]*timeout \d+ms exceeded": "page.goto: Timeout 60000ms exceeded",
            r"timeout \d+ms exceeded[^\n]*goto": "Timeout 60000ms exceeded on goto",
            r"waitforloadstate[^\n]*timeout \d+ms exceeded": "page.waitForLoadState: Timeout 60000ms exceeded",
            'waiting until "networkidle"': 'waiting until "networkidle"',
            "(page|context|browser) has been closed": "browser has been closed",
        }
        assert set(probes) == set(ENVIRONMENT_PATTERNS)
        allowed = {FailureSignature.NAVIGATION_ENV_TIMEOUT, FailureSignature.CLOSED_CONTEXT}
        for probe in probes.values():
            assert classify_origin(entry(probe)) is FailureOrigin.ENVIRONMENT
            assert set(classify_entry(entry(probe))) <= allowed, probe


class TestSkipList:
    def test_threshold_one_skips_immediately(self):
        skip = SkipList()
        assert skip.record_failure("grid-refresh", FailureOrigin.ENVIRONMENT, threshold=1)
        assert skip.is_skipped("grid-refresh")

    def test_threshold_two_needs_two_failures(self):
        skip = SkipList()
        assert not skip.record_failure("f", FailureOrigin.ENVIRONMENT, threshold=2)
        assert not skip.is_skipped("f")
        assert skip.record_failure("f", FailureOrigin.ENVIRONMENT, threshold=2)
        assert skip.is_skipped("f")

    def test_test_logic_never_skips(self):
        skip = SkipList()
        for _ in range(10):
            skip.record_failure("f", FailureOrigin.TEST_LOGIC, threshold=1)
        assert not skip.is_skipped("f")

    def test_unknown_never_skips(self):
        skip = SkipList()
        for _ in range(10):
            skip.record_failure("f", FailureOrigin.UNKNOWN, threshold=1)
        assert not skip.is_skipped("f")

    def test_hit_count_increments_after_entry(self):
        skip = SkipList()
        skip.record_failure("f", FailureOrigin.ENVIRONMENT, threshold=1)
        skip.record_failure("f", FailureOrigin.ENVIRONMENT, threshold=1)
        (only,) = skip.entries()
        assert only.hit_count == 2

    def test_other_features_unaffected(self):
        skip = SkipList()
        skip.record_failure("a", FailureOrigin.ENVIRONMENT, threshold=1)
        assert not skip.is_skipped("b")

    def test_monotone_growth_no_silent_removal(self):
        skip = SkipList()
        skip.record_failure("a", FailureOrigin.ENVIRONMENT, threshold=1)
        skip.record_failure("b", FailureOrigin.ENVIRONMENT, threshold=1)
        skip.record_failure("a", FailureOrigin.TEST_LOGIC, threshold=1)
        assert {e.feature_id for e in skip.entries()} == {"a", "b"}

    def test_explicit_removal(self):
        skip = SkipList()
        skip.record_failure("a", FailureOrigin.ENVIRONMENT, threshold=1)
        assert skip.remove("a")
        assert not skip.is_skipped("a")
        assert not skip.remove("a")

    def test_bad_threshold_rejected(self):
        with pytest.raises(ConfigError):
            SkipList().record_failure("f", FailureOrigin.ENVIRONMENT, threshold=0)

    def test_write_through_persistence(self, tmp_path):
        path = tmp_path / "skip.json"
        skip = SkipList(path=path, clock=lambda: "2025-06-01T00:00:00Z")
        skip.record_failure("grid", FailureOrigin.ENVIRONMENT, threshold=1, reason="goto timeout")
        stored = json.loads(path.read_text())
        assert stored[0]["feature_id"] == "grid"
        assert stored[0]["first_seen"] == "2025-06-01T00:00:00Z"

        reloaded = SkipList(path=path)
        assert reloaded.is_skipped("grid")

    def test_functional_wrappers(self):
        skip = SkipList()
        update_skip_list(skip, "f", FailureOrigin.ENVIRONMENT, threshold=1)
        assert is_skipped(skip, "f")
        assert not is_skipped(skip, "other")
