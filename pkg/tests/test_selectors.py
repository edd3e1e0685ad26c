"""Selector grammar parsing and DOM-snapshot verification."""
import random

import pytest

from repairlab.errors import ParseError
from repairlab.selectors import (
    DomElement,
    DomSnapshot,
    SelectorExpr,
    SelectorKind,
    VerificationStatus,
    batch_verify,
    parse_selector,
    snapshot_from_dict,
    verify_selector,
)


def el(tag, attrs=None, text="", children=(), visible=True):
    return DomElement(
        tag=tag,
        attributes=tuple((attrs or {}).items()),
        text=text,
        visible=visible,
        children=tuple(children),
    )


SNAPSHOT = DomSnapshot(
    root=el(
        "body",
        children=[
            el("button", {"data-test": "submit-btn"}, text="Save changes"),
            el("div", children=[
                el("button", {"aria-label": "Refresh"}, text="icon"),
                el("button", {}, text="Save changes"),
                el("span", {"id": "status"}, text="Ready"),
            ]),
        ],
    )
)


class TestParseSelector:
    def test_test_attribute(self):
        expr = parse_selector("[data-test=submit-btn]")
        assert expr.kind is SelectorKind.BY_TEST_ATTR
        assert expr.value == "submit-btn"

    def test_role_with_name(self):
        expr = parse_selector("role=button[name=Refresh]")
        assert expr.kind is SelectorKind.BY_ROLE
        assert (expr.value, expr.name) == ("button", "Refresh")

    def test_id(self):
        expr = parse_selector("#status")
        assert expr.kind is SelectorKind.BY_ID
        assert expr.value == "status"

    def test_text_exact_and_contains(self):
        assert parse_selector("text=Save").exact
        assert not parse_selector("text*=Save").exact

    @pytest.mark.parametrize("bad", ["##", "", "[data-test=]", "role=button", "text=", "~x"])
    def test_malformed_selectors_rejected(self, bad):
        with pytest.raises(ParseError) as exc:
            parse_selector(bad)
        assert "position" in str(exc.value) or "empty" in str(exc.value)

    def test_str_round_trip(self):
        for text in ["#status", "[data-test=submit-btn]", "role=button[name=Refresh]", "text=Save", "text*=Save"]:
            assert str(parse_selector(text)) == text


class TestVerifySelector:
    def test_unique_test_attribute(self):
        result = verify_selector(parse_selector("[data-test=submit-btn]"), SNAPSHOT)
        assert result.status is VerificationStatus.VERIFIED_UNIQUE
        assert result.matched_paths == ((0,),)

    def test_role_name_mismatch_not_found(self):
        result = verify_selector(parse_selector("role=button[name=Execute Now]"), SNAPSHOT)
        assert result.status is VerificationStatus.NOT_FOUND
        assert result.matched_paths == ()

    def test_aria_label_wins_over_text(self):
        result = verify_selector(parse_selector("role=button[name=Refresh]"), SNAPSHOT)
        assert result.status is VerificationStatus.VERIFIED_UNIQUE
        assert result.matched_paths == ((1, 0),)

    def test_substring_text_multiple(self):
        result = verify_selector(parse_selector("text*=Save"), SNAPSHOT)
        assert result.status is VerificationStatus.VERIFIED_MULTIPLE
        assert result.count == 2

    def test_paths_in_document_order_and_resolvable(self):
        result = verify_selector(parse_selector("text*=Save"), SNAPSHOT)
        assert result.matched_paths == ((0,), (1, 1))
        for path in result.matched_paths:
            element = SNAPSHOT.resolve(path)
            assert "Save" in element.text

    def test_id_lookup(self):
        result = verify_selector(parse_selector("#status"), SNAPSHOT)
        assert result.status is VerificationStatus.VERIFIED_UNIQUE

    def test_exact_text_excludes_partial(self):
        assert verify_selector(parse_selector("text=Save"), SNAPSHOT).status is VerificationStatus.NOT_FOUND

    def test_verification_read_only(self):
        before = SNAPSHOT.root
        verify_selector(parse_selector("text*=Save"), SNAPSHOT)
        assert SNAPSHOT.root == before


def random_snapshot(rng: random.Random) -> DomSnapshot:
    tags = ["div", "button", "span", "a", "input"]

    def build(depth: int) -> DomElement:
        attrs = {}
        if rng.random() < 0.4:
            attrs["data-test"] = f"w{rng.randint(0, 5)}"
        if rng.random() < 0.2:
            attrs["id"] = f"id{rng.randint(0, 5)}"
        if rng.random() < 0.2:
            attrs["aria-label"] = f"Label {rng.randint(0, 3)}"
        children = []
        if depth < 3:
            children = [build(depth + 1) for _ in range(rng.randint(0, 3))]
        return DomElement(
            tag=rng.choice(tags),
            attributes=tuple(attrs.items()),
            text=rng.choice(["", "Save", "Save changes", "Ready", f"t{rng.randint(0,9)}"]),
            visible=rng.random() < 0.9,
            children=tuple(children),
        )

    return DomSnapshot(root=build(0))


def random_selector(rng: random.Random) -> SelectorExpr:
    choice = rng.randint(0, 4)
    if choice == 0:
        return parse_selector(f"#id{rng.randint(0, 5)}")
    if choice == 1:
        return parse_selector(f"[data-test=w{rng.randint(0, 5)}]")
    if choice == 2:
        return parse_selector(f"role=button[name=Label {rng.randint(0, 3)}]")
    if choice == 3:
        return parse_selector("text=Save")
    return parse_selector("text*=Save")


class TestBatchVerify:
    def test_empty_batch(self):
        assert batch_verify([], SNAPSHOT) == []

    def test_single_not_found_keeps_index(self):
        exprs = [
            parse_selector("[data-test=submit-btn]"),
            parse_selector("[data-test=absent]"),
            parse_selector("#status"),
        ]
        results = batch_verify(exprs, SNAPSHOT)
        assert [r.status for r in results] == [
            VerificationStatus.VERIFIED_UNIQUE,
            VerificationStatus.NOT_FOUND,
            VerificationStatus.VERIFIED_UNIQUE,
        ]

    def test_batch_equals_elementwise_on_random_snapshots(self):
        rng = random.Random(11)
        for _ in range(50):
            snapshot = random_snapshot(rng)
            exprs = [random_selector(rng) for _ in range(rng.randint(0, 6))]
            assert batch_verify(exprs, snapshot) == [verify_selector(e, snapshot) for e in exprs]


class TestSnapshotLoading:
    def test_from_dict(self):
        snapshot = snapshot_from_dict(
            {
                "tag": "body",
                "attributes": {},
                "text": "",
                "visible": True,
                "children": [{"tag": "button", "attributes": {"data-test": "x"}, "text": "Go"}],
            }
        )
        result = verify_selector(parse_selector("[data-test=x]"), snapshot)
        assert result.status is VerificationStatus.VERIFIED_UNIQUE

    def test_missing_tag_rejected(self):
        with pytest.raises(ParseError) as exc:
            snapshot_from_dict({"attributes": {}})
        assert "tag" in str(exc.value)

    def test_unique_status_iff_single_match(self):
        rng = random.Random(3)
        for _ in range(30):
            snapshot = random_snapshot(rng)
            result = verify_selector(random_selector(rng), snapshot)
            assert (result.status is VerificationStatus.VERIFIED_UNIQUE) == (result.count == 1)
