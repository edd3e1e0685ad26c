"""Selector grounding: verify generated selectors against a DOM snapshot.

Code-generation agents routinely invent selectors from naming patterns rather
than observed page state; running those blind produces cascading timeouts.
This module parses a small selector language and checks each expression
against a JSON DOM snapshot *before* anything is executed:

    #id                      element with that id attribute
    [data-test=VALUE]        element carrying the data-test attribute
    role=ROLE[name=NAME]     role plus accessible name
    text=TEXT / text*=TEXT   exact / substring text match

Accessible name is simplified to the aria-label attribute when present, else
the element's trimmed text.  Verification is a read-only exhaustive tree walk;
matches come back as tree paths in document order.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator

from .errors import ParseError


class SelectorKind(Enum):
    BY_ID = "BY_ID"
    BY_TEST_ATTR = "BY_TEST_ATTR"
    BY_ROLE = "BY_ROLE"
    BY_TEXT = "BY_TEXT"


@dataclass(frozen=True)
class SelectorExpr:
    kind: SelectorKind
    value: str
    name: str | None = None
    exact: bool = True

    def __str__(self) -> str:
        if self.kind is SelectorKind.BY_ID:
            return f"#{self.value}"
        if self.kind is SelectorKind.BY_TEST_ATTR:
            return f"[data-test={self.value}]"
        if self.kind is SelectorKind.BY_ROLE:
            return f"role={self.value}[name={self.name}]"
        return f"text={self.value}" if self.exact else f"text*={self.value}"


@dataclass(frozen=True)
class DomElement:
    tag: str
    attributes: tuple[tuple[str, str], ...] = ()
    text: str = ""
    visible: bool = True
    children: tuple["DomElement", ...] = ()

    def attr(self, key: str) -> str | None:
        for k, v in self.attributes:
            if k == key:
                return v
        return None


@dataclass(frozen=True)
class DomSnapshot:
    root: DomElement

    def walk(self) -> Iterator[tuple[tuple[int, ...], DomElement]]:
        """Document-order traversal yielding (path, element)."""
        stack: list[tuple[tuple[int, ...], DomElement]] = [((), self.root)]
        while stack:
            path, element = stack.pop()
            yield path, element
            for i in range(len(element.children) - 1, -1, -1):
                stack.append((path + (i,), element.children[i]))

    def resolve(self, path: tuple[int, ...]) -> DomElement:
        element = self.root
        for index in path:
            element = element.children[index]
        return element


class VerificationStatus(Enum):
    VERIFIED_UNIQUE = "VERIFIED_UNIQUE"
    VERIFIED_MULTIPLE = "VERIFIED_MULTIPLE"
    NOT_FOUND = "NOT_FOUND"


@dataclass(frozen=True)
class VerificationResult:
    status: VerificationStatus
    matched_paths: tuple[tuple[int, ...], ...] = field(default=())

    @property
    def count(self) -> int:
        return len(self.matched_paths)


_IMPLICIT_ROLES = {
    "button": "button",
    "a": "link",
    "input": "textbox",
    "select": "combobox",
    "table": "table",
    "nav": "navigation",
    "img": "img",
    "h1": "heading",
    "h2": "heading",
    "h3": "heading",
    "h4": "heading",
    "h5": "heading",
    "h6": "heading",
}

_ID_RE = re.compile(r"#([A-Za-z_][\w-]*)$")
_ATTR_RE = re.compile(r"\[data-test=([^\]=]+)\]$")
_ROLE_RE = re.compile(r"role=([A-Za-z][\w-]*)\[name=([^\]]+)\]$")


def parse_selector(text: str) -> SelectorExpr:
    """Parse one selector expression; malformed input raises with a position."""
    text = text.strip()
    if not text:
        raise ParseError("empty selector", field_path="selector")
    if text.startswith("#"):
        m = _ID_RE.match(text)
        if not m:
            raise ParseError(f"bad id selector at position 1: {text!r}", field_path="selector")
        return SelectorExpr(SelectorKind.BY_ID, m.group(1))
    if text.startswith("["):
        m = _ATTR_RE.match(text)
        if not m or not m.group(1).strip():
            raise ParseError(f"bad attribute selector at position 1: {text!r}", field_path="selector")
        return SelectorExpr(SelectorKind.BY_TEST_ATTR, m.group(1).strip())
    if text.startswith("role="):
        m = _ROLE_RE.match(text)
        if not m or not m.group(2).strip():
            raise ParseError(f"bad role selector at position 5: {text!r}", field_path="selector")
        return SelectorExpr(SelectorKind.BY_ROLE, m.group(1), name=m.group(2).strip())
    if text.startswith("text*="):
        value = text[len("text*=") :]
        if not value:
            raise ParseError("empty text in selector at position 6", field_path="selector")
        return SelectorExpr(SelectorKind.BY_TEXT, value, exact=False)
    if text.startswith("text="):
        value = text[len("text=") :]
        if not value:
            raise ParseError("empty text in selector at position 5", field_path="selector")
        return SelectorExpr(SelectorKind.BY_TEXT, value, exact=True)
    raise ParseError(f"unrecognized selector syntax at position 0: {text!r}", field_path="selector")


def accessible_name(element: DomElement) -> str:
    label = element.attr("aria-label")
    if label is not None:
        return label
    return element.text.strip()


def element_role(element: DomElement) -> str | None:
    explicit = element.attr("role")
    if explicit is not None:
        return explicit
    return _IMPLICIT_ROLES.get(element.tag)


def _matches(expr: SelectorExpr, element: DomElement) -> bool:
    if expr.kind is SelectorKind.BY_ID:
        return element.attr("id") == expr.value
    if expr.kind is SelectorKind.BY_TEST_ATTR:
        return element.attr("data-test") == expr.value
    if expr.kind is SelectorKind.BY_ROLE:
        return element_role(element) == expr.value and accessible_name(element) == expr.name
    if expr.exact:
        return element.text.strip() == expr.value
    return expr.value in element.text


def verify_selector(expr: SelectorExpr, dom: DomSnapshot) -> VerificationResult:
    """Exhaustively search the snapshot; paths come back in document order."""
    paths = tuple(path for path, element in dom.walk() if _matches(expr, element))
    if not paths:
        return VerificationResult(VerificationStatus.NOT_FOUND)
    if len(paths) == 1:
        return VerificationResult(VerificationStatus.VERIFIED_UNIQUE, paths)
    return VerificationResult(VerificationStatus.VERIFIED_MULTIPLE, paths)


def batch_verify(exprs: Iterable[SelectorExpr], dom: DomSnapshot) -> list[VerificationResult]:
    """Element-wise verification, same order as the input."""
    return [verify_selector(expr, dom) for expr in exprs]


def snapshot_from_dict(raw: dict, path: str = "$") -> DomSnapshot:
    return DomSnapshot(root=_element_from_dict(raw, path))


def _element_from_dict(raw: dict, path: str) -> DomElement:
    if not isinstance(raw, dict):
        raise ParseError("element must be an object", field_path=path)
    tag = raw.get("tag")
    if not isinstance(tag, str) or not tag:
        raise ParseError("element needs a non-empty 'tag'", field_path=f"{path}.tag")
    attributes = raw.get("attributes", {})
    if not isinstance(attributes, dict):
        raise ParseError("'attributes' must be an object", field_path=f"{path}.attributes")
    children = raw.get("children", [])
    if not isinstance(children, list):
        raise ParseError("'children' must be an array", field_path=f"{path}.children")
    return DomElement(
        tag=tag,
        attributes=tuple((str(k), str(v)) for k, v in attributes.items()),
        text=str(raw.get("text", "")),
        visible=bool(raw.get("visible", True)),
        children=tuple(
            _element_from_dict(child, f"{path}.children[{i}]") for i, child in enumerate(children)
        ),
    )


def load_snapshot(path) -> DomSnapshot:
    with open(path, encoding="utf-8") as handle:
        try:
            raw = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid snapshot JSON: {exc.msg}", field_path="$") from None
    return snapshot_from_dict(raw)
