"""Assertion-strength analysis over a restricted test-script grammar.

Autonomous repair loops sometimes "fix" a failing test by swapping a strict
assertion for one that accepts almost anything, or by deleting the failing
case outright.  Both moves inflate pass rates while destroying what the test
was checking for, so script revisions are diffed here before they are allowed
through.

The parser understands just enough structure to do that job: ``test("name",
...)`` blocks and ``expect(<subject>).<matcher>(<args>)`` statements with an
optional ``.not``.  Everything else in the script is opaque and ignored.
Matchers are ranked on a strength lattice (EXACT > STRUCTURAL > EXISTENCE >
TRUTHY); moving down the lattice, or loosening arguments at the same rank, is
a weakening.  Unknown matchers are rejected at parse time rather than given a
made-up rank.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from importlib import resources

from .errors import ConfigError, ParseError


class MatcherRank(IntEnum):
    TRUTHY = 1
    EXISTENCE = 2
    STRUCTURAL = 3
    EXACT = 4


class DiffVerdict(Enum):
    NO_CHANGE = "NO_CHANGE"
    STRENGTHENED = "STRENGTHENED"
    WEAKENED = "WEAKENED"
    INCOMPARABLE = "INCOMPARABLE"


class GateDecision(Enum):
    ALLOW = "ALLOW"
    REQUIRE_REVIEW = "REQUIRE_REVIEW"


class MatcherTable:
    """Maps each known matcher to its rank and declared arity."""

    def __init__(self, entries: dict[str, tuple[MatcherRank, int]]):
        if not entries:
            raise ConfigError("matcher table is empty")
        self._entries = dict(entries)

    @classmethod
    def from_json(cls, text: str) -> "MatcherTable":
        raw = json.loads(text)
        if not isinstance(raw, dict):
            raise ConfigError("matcher table must be a JSON object")
        entries = {}
        for name, spec in raw.items():
            try:
                rank = MatcherRank[spec["rank"]]
                arity = int(spec["arity"])
            except (KeyError, TypeError, ValueError):
                raise ConfigError(f"matcher {name!r}: entry must carry 'rank' and 'arity'") from None
            entries[name] = (rank, arity)
        return cls(entries)

    @classmethod
    def from_file(cls, path) -> "MatcherTable":
        with open(path, encoding="utf-8") as handle:
            return cls.from_json(handle.read())

    @classmethod
    def default(cls) -> "MatcherTable":
        text = resources.files("repairlab.data").joinpath("matcher_ranks.json").read_text(encoding="utf-8")
        return cls.from_json(text)

    def known(self) -> list[str]:
        return sorted(self._entries)

    def __contains__(self, name: str) -> bool:
        return name in self._entries

    def rank(self, name: str) -> MatcherRank:
        return self._entries[name][0]

    def arity(self, name: str) -> int:
        return self._entries[name][1]


_DEFAULT_TABLE: MatcherTable | None = None


def default_matchers() -> MatcherTable:
    global _DEFAULT_TABLE
    if _DEFAULT_TABLE is None:
        _DEFAULT_TABLE = MatcherTable.default()
    return _DEFAULT_TABLE


@dataclass(frozen=True)
class AssertionAst:
    subject: str
    matcher: str
    arguments: tuple
    negated: bool = False

    def normalized_subject(self) -> str:
        return re.sub(r"\s+", "", self.subject)


@dataclass(frozen=True)
class TestCase:
    name: str
    assertions: tuple[AssertionAst, ...]
    line: int


@dataclass(frozen=True)
class Suite:
    cases: tuple[TestCase, ...]

    def case_names(self) -> list[str]:
        return [c.name for c in self.cases]


@dataclass(frozen=True)
class AssertionChange:
    case_name: str
    before: AssertionAst | None
    after: AssertionAst | None
    verdict: DiffVerdict


@dataclass(frozen=True)
class SuiteDiff:
    added_cases: tuple[str, ...]
    removed_cases: tuple[str, ...]
    changes: tuple[AssertionChange, ...]
    warnings: tuple[str, ...] = field(default=())

    @property
    def scope_reduction(self) -> bool:
        return bool(self.removed_cases)


# -- scanner -----------------------------------------------------------------

_IDENT = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*")
_NUMBER = re.compile(r"-?\d+(?:\.\d+)?")


class _Scanner:
    """Position-tracking scanner that skips strings and comments correctly."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def line_at(self, pos: int) -> int:
        return self.text.count("\n", 0, pos) + 1

    def skip_ws(self):
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch in " \t\r\n":
                self.pos += 1
            elif self.text.startswith("//", self.pos):
                end = self.text.find("\n", self.pos)
                self.pos = len(self.text) if end < 0 else end
            elif self.text.startswith("/*", self.pos):
                end = self.text.find("*/", self.pos + 2)
                if end < 0:
                    raise ParseError("unterminated block comment", line=self.line_at(self.pos))
                self.pos = end + 2
            else:
                return

    def read_string(self) -> str:
        quote = self.text[self.pos]
        assert quote in "'\"`"
        out = []
        i = self.pos + 1
        while i < len(self.text):
            ch = self.text[i]
            if ch == "\\" and i + 1 < len(self.text):
                escapes = {"n": "\n", "t": "\t", "\\": "\\", "'": "'", '"': '"', "`": "`"}
                out.append(escapes.get(self.text[i + 1], self.text[i + 1]))
                i += 2
                continue
            if ch == quote:
                self.pos = i + 1
                return "".join(out)
            out.append(ch)
            i += 1
        raise ParseError("unterminated string literal", line=self.line_at(self.pos))

    def balanced_span(self, open_ch: str, close_ch: str) -> tuple[int, int]:
        """Return (start, end) of the balanced region starting at self.pos.

        ``start`` is the index just after the opener, ``end`` the index of the
        closer.  Strings and comments inside the region are skipped.
        """
        assert self.text[self.pos] == open_ch
        open_line = self.line_at(self.pos)
        depth = 0
        i = self.pos
        while i < len(self.text):
            ch = self.text[i]
            if ch in "'\"`":
                saved = self.pos
                self.pos = i
                self.read_string()
                i = self.pos
                self.pos = saved
                continue
            if self.text.startswith("//", i):
                nl = self.text.find("\n", i)
                i = len(self.text) if nl < 0 else nl
                continue
            if self.text.startswith("/*", i):
                end = self.text.find("*/", i + 2)
                if end < 0:
                    raise ParseError("unterminated block comment", line=self.line_at(i))
                i = end + 2
                continue
            if ch == open_ch:
                depth += 1
            elif ch == close_ch:
                depth -= 1
                if depth == 0:
                    start = self.pos + 1
                    self.pos = i + 1
                    return start, i
            i += 1
        raise ParseError(f"unbalanced {open_ch!r}", line=open_line)


def _split_top_level(text: str) -> list[str]:
    """Split an argument list on commas not nested inside brackets or strings."""
    parts = []
    depth = 0
    current = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch in "'\"`":
            scanner = _Scanner(text)
            scanner.pos = i
            scanner.read_string()
            current.append(text[i : scanner.pos])
            i = scanner.pos
            continue
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(current).strip())
            current = []
        else:
            current.append(ch)
        i += 1
    tail = "".join(current).strip()
    if tail:
        parts.append(tail)
    return parts


def _parse_literal(token: str, line: int):
    token = token.strip()
    if not token:
        raise ParseError("empty argument", line=line)
    if token[0] in "'\"`":
        scanner = _Scanner(token)
        value = scanner.read_string()
        if scanner.pos != len(token):
            raise ParseError(f"trailing characters after string: {token!r}", line=line)
        return value
    if token == "true":
        return True
    if token == "false":
        return False
    if token == "null" or token == "undefined":
        return None
    m = _NUMBER.fullmatch(token)
    if m:
        return float(token) if "." in token else int(token)
    if token.startswith("{") and token.endswith("}"):
        inner = token[1:-1].strip()
        result = {}
        if inner:
            for pair in _split_top_level(inner):
                if ":" not in pair:
                    raise ParseError(f"bad object entry {pair!r}", line=line)
                key, _, value = pair.partition(":")
                key = key.strip().strip("'\"")
                result[key] = _parse_literal(value, line)
        return tuple(sorted(result.items()))
    if token.startswith("[") and token.endswith("]"):
        inner = token[1:-1].strip()
        return tuple(_parse_literal(p, line) for p in _split_top_level(inner)) if inner else ()
    raise ParseError(f"argument {token!r} is not a literal", line=line)


def _parse_assertion(scanner: _Scanner, table: MatcherTable) -> AssertionAst:
    # scanner.pos sits on the '(' following 'expect'
    line = scanner.line_at(scanner.pos)
    start, end = scanner.balanced_span("(", ")")
    subject = scanner.text[start:end].strip()
    if not subject:
        raise ParseError("expect() with empty subject", line=line)
    scanner.skip_ws()
    negated = False
    while True:
        if scanner.pos >= len(scanner.text) or scanner.text[scanner.pos] != ".":
            raise ParseError("expect(...) without a matcher call", line=line)
        scanner.pos += 1
        scanner.skip_ws()
        m = _IDENT.match(scanner.text, scanner.pos)
        if not m:
            raise ParseError("expected matcher name after '.'", line=scanner.line_at(scanner.pos))
        name = m.group(0)
        scanner.pos = m.end()
        scanner.skip_ws()
        if name == "not":
            if negated:
                raise ParseError("double negation", line=scanner.line_at(scanner.pos))
            negated = True
            continue
        break
    if name not in table:
        raise ParseError(
            f"unknown matcher {name!r}; known matchers: {', '.join(table.known())}",
            line=scanner.line_at(scanner.pos),
        )
    if scanner.pos >= len(scanner.text) or scanner.text[scanner.pos] != "(":
        raise ParseError(f"matcher {name} must be called with parentheses", line=scanner.line_at(scanner.pos))
    arg_line = scanner.line_at(scanner.pos)
    astart, aend = scanner.balanced_span("(", ")")
    arg_text = scanner.text[astart:aend].strip()
    arguments = tuple(_parse_literal(tok, arg_line) for tok in _split_top_level(arg_text)) if arg_text else ()
    expected = table.arity(name)
    if len(arguments) != expected:
        raise ParseError(
            f"matcher {name} takes {expected} argument(s), got {len(arguments)}", line=arg_line
        )
    return AssertionAst(subject=subject, matcher=name, arguments=arguments, negated=negated)


def _extract_assertions(body: str, base_line: int, table: MatcherTable) -> tuple[AssertionAst, ...]:
    assertions = []
    scanner = _Scanner(body)
    for match in re.finditer(r"\bexpect\s*\(", body):
        # skip occurrences inside strings/comments by re-scanning from the top
        if _inside_opaque(body, match.start()):
            continue
        scanner.pos = body.index("(", match.start())
        try:
            assertions.append(_parse_assertion(scanner, table))
        except ParseError as exc:
            line = (exc.line or 1) + base_line - 1
            raise ParseError(str(exc.args[0] if exc.args else exc), line=line) from None
    return tuple(assertions)


def _inside_opaque(text: str, pos: int) -> bool:
    """True when ``pos`` falls inside a string literal or comment."""
    i = 0
    while i < pos:
        ch = text[i]
        if ch in "'\"`":
            scanner = _Scanner(text)
            scanner.pos = i
            try:
                scanner.read_string()
            except ParseError:
                return True
            if scanner.pos > pos:
                return True
            i = scanner.pos
            continue
        if text.startswith("//", i):
            nl = text.find("\n", i)
            if nl < 0 or nl >= pos:
                return True
            i = nl
            continue
        if text.startswith("/*", i):
            end = text.find("*/", i + 2)
            if end < 0 or end + 2 > pos:
                return True
            i = end + 2
            continue
        i += 1
    return False


def _find_token(text: str, start: int, token: str) -> int:
    """Index of the next top-level occurrence of ``token`` outside strings/comments."""
    i = start
    while i < len(text):
        ch = text[i]
        if ch in "'\"`":
            scanner = _Scanner(text)
            scanner.pos = i
            scanner.read_string()
            i = scanner.pos
            continue
        if text.startswith("//", i):
            nl = text.find("\n", i)
            i = len(text) if nl < 0 else nl
            continue
        if text.startswith("/*", i):
            end = text.find("*/", i + 2)
            i = len(text) if end < 0 else end + 2
            continue
        if text.startswith(token, i):
            return i
        i += 1
    return -1


def parse_test_script(text: str, table: MatcherTable | None = None) -> Suite:
    """Parse a test script into cases and their assertions.

    Captures every ``test("name", ...)`` block in source order and every
    assertion statement inside each block; all other statements are opaque.
    """
    table = table or default_matchers()
    cases = []
    for match in re.finditer(r"\btest\s*\(", text):
        if _inside_opaque(text, match.start()):
            continue
        scanner = _Scanner(text)
        header_line = scanner.line_at(match.start())
        scanner.pos = text.index("(", match.start())
        call_start, call_end = scanner.balanced_span("(", ")")
        call = text[call_start:call_end]
        call_scanner = _Scanner(call)
        call_scanner.skip_ws()
        if call_scanner.pos >= len(call) or call[call_scanner.pos] not in "'\"`":
            raise ParseError("test() must start with a string name", line=header_line)
        name = call_scanner.read_string()
        # The body is the brace block of the test callback, which follows
        # either an arrow or the function keyword; parameter destructuring
        # braces like ({ page }) must not be mistaken for it.
        arrow = _find_token(call, call_scanner.pos, "=>")
        fn = _find_token(call, call_scanner.pos, "function")
        if arrow >= 0 and (fn < 0 or arrow < fn):
            anchor = arrow + 2
        elif fn >= 0:
            anchor = fn + len("function")
            paren = _find_token(call, anchor, "(")
            if paren >= 0:
                param_scanner = _Scanner(call)
                param_scanner.pos = paren
                _, close = param_scanner.balanced_span("(", ")")
                anchor = close + 1
        else:
            anchor = call_scanner.pos
        brace = _find_token(call, anchor, "{")
        if brace < 0:
            raise ParseError(f"test {name!r} has no body block", line=header_line)
        body_scanner = _Scanner(call)
        body_scanner.pos = brace
        try:
            body_start, body_end = body_scanner.balanced_span("{", "}")
        except ParseError as exc:
            raise ParseError(
                f"unbalanced test-block delimiters in test {name!r}",
                line=header_line + (exc.line or 1) - 1,
            ) from None
        body = call[body_start:body_end]
        body_line = header_line + call[:body_start].count("\n")
        assertions = _extract_assertions(body, body_line, table)
        cases.append(TestCase(name=name, assertions=assertions, line=header_line))
    return Suite(cases=tuple(cases))


# -- strength comparison -----------------------------------------------------

_TEXT_MATCHERS = {"toContain", "toContainText", "toHaveText"}


def _text_loosening(before: AssertionAst, after: AssertionAst) -> DiffVerdict | None:
    """Ordering rules within the STRUCTURAL text matchers.

    Full-text match is stricter than substring match with the same argument,
    and a shorter substring accepts strictly more than a longer one.
    """
    if before.matcher not in _TEXT_MATCHERS or after.matcher not in _TEXT_MATCHERS:
        return None
    b_arg, a_arg = before.arguments[0], after.arguments[0]
    if not isinstance(b_arg, str) or not isinstance(a_arg, str):
        return None
    b_full = before.matcher == "toHaveText"
    a_full = after.matcher == "toHaveText"
    if b_arg == a_arg:
        if b_full and not a_full:
            return DiffVerdict.WEAKENED
        if a_full and not b_full:
            return DiffVerdict.STRENGTHENED
        return DiffVerdict.NO_CHANGE if before.matcher == after.matcher else DiffVerdict.INCOMPARABLE
    if b_full != a_full:
        return DiffVerdict.INCOMPARABLE
    if b_full:  # both full-text with different targets
        return DiffVerdict.INCOMPARABLE
    if a_arg in b_arg:
        return DiffVerdict.WEAKENED
    if b_arg in a_arg:
        return DiffVerdict.STRENGTHENED
    return DiffVerdict.INCOMPARABLE


def _count_bound(argument) -> tuple[str, int] | None:
    """Interpret a toHaveCount argument as ("exact"|"min", n) when possible."""
    if isinstance(argument, int) and not isinstance(argument, bool):
        return ("exact", argument)
    if isinstance(argument, tuple) and len(argument) == 1:
        key, value = argument[0]
        if key in ("min", "atLeast") and isinstance(value, int):
            return ("min", value)
    return None


def _count_loosening(before: AssertionAst, after: AssertionAst) -> DiffVerdict | None:
    if before.matcher != "toHaveCount" or after.matcher != "toHaveCount":
        return None
    b, a = _count_bound(before.arguments[0]), _count_bound(after.arguments[0])
    if b is None or a is None:
        return DiffVerdict.INCOMPARABLE
    if b == a:
        return DiffVerdict.NO_CHANGE
    if b[0] == "exact" and a[0] == "min" and a[1] <= b[1]:
        return DiffVerdict.WEAKENED
    if b[0] == "min" and a[0] == "exact" and b[1] <= a[1]:
        return DiffVerdict.STRENGTHENED
    if b[0] == "min" and a[0] == "min":
        if a[1] < b[1]:
            return DiffVerdict.WEAKENED
        return DiffVerdict.STRENGTHENED
    return DiffVerdict.INCOMPARABLE


def compare_assertions(
    before: AssertionAst, after: AssertionAst, table: MatcherTable | None = None
) -> DiffVerdict:
    """Decide whether ``after`` accepts more, less, or something else than ``before``.

    WEAKENED means the revised assertion accepts a strictly larger set of
    outcomes: a drop down the matcher lattice, a documented same-rank argument
    loosening, or negating an exact-value check.  Assertions over different
    subjects are INCOMPARABLE.
    """
    table = table or default_matchers()
    if before.normalized_subject() != after.normalized_subject():
        return DiffVerdict.INCOMPARABLE
    if (
        before.matcher == after.matcher
        and before.arguments == after.arguments
        and before.negated == after.negated
    ):
        return DiffVerdict.NO_CHANGE

    b_rank, a_rank = table.rank(before.matcher), table.rank(after.matcher)
    if before.negated != after.negated:
        # Negating a singleton acceptance set (exact value) opens it up to
        # everything else; other complements are not comparable.
        if before.matcher == after.matcher and before.arguments == after.arguments and b_rank is MatcherRank.EXACT:
            return DiffVerdict.WEAKENED if after.negated else DiffVerdict.STRENGTHENED
        return DiffVerdict.INCOMPARABLE
    if before.negated:
        # Complement ordering reverses only for identical matchers; handled
        # above by equality, anything else is not ordered.
        return DiffVerdict.INCOMPARABLE

    if a_rank < b_rank:
        return DiffVerdict.WEAKENED
    if a_rank > b_rank:
        return DiffVerdict.STRENGTHENED

    verdict = _text_loosening(before, after)
    if verdict is not None:
        return verdict
    verdict = _count_loosening(before, after)
    if verdict is not None:
        return verdict
    if before.matcher == after.matcher:
        # Same matcher, changed literal: no ground truth for value changes.
        return DiffVerdict.INCOMPARABLE
    return DiffVerdict.INCOMPARABLE


# -- suite diffing -----------------------------------------------------------


def _normalize_name(name: str) -> str:
    return re.sub(r"\s+", " ", name.strip()).casefold()


def diff_suites(before: Suite, after: Suite, table: MatcherTable | None = None) -> SuiteDiff:
    """Match cases by name (exact, then normalized) and diff their assertions.

    Cases present only in ``before`` are removals (scope reduction); assertion
    lists of matched cases are compared pairwise in order, with dropped
    assertions counting as WEAKENED and added ones as STRENGTHENED.  Duplicate
    case names pair positionally, with a warning.
    """
    table = table or default_matchers()
    warnings: list[str] = []

    def index(suite: Suite) -> dict[str, list[TestCase]]:
        by_name: dict[str, list[TestCase]] = {}
        for case in suite.cases:
            by_name.setdefault(case.name, []).append(case)
        return by_name

    before_index = index(before)
    after_index = index(after)
    for name, cases in list(before_index.items()) + list(after_index.items()):
        if len(cases) > 1:
            warnings.append(f"duplicate case name {name!r}; pairing positionally")

    matched: list[tuple[TestCase, TestCase]] = []
    removed: list[str] = []
    used_after: set[int] = set()

    norm_after: dict[str, list[TestCase]] = {}
    for case in after.cases:
        norm_after.setdefault(_normalize_name(case.name), []).append(case)

    for case in before.cases:
        candidates = after_index.get(case.name)
        if not candidates:
            candidates = [c for c in norm_after.get(_normalize_name(case.name), []) if id(c) not in used_after]
            if candidates and candidates[0].name != case.name:
                warnings.append(f"case {case.name!r} matched {candidates[0].name!r} after normalization")
        partner = next((c for c in candidates or [] if id(c) not in used_after), None)
        if partner is None:
            removed.append(case.name)
        else:
            used_after.add(id(partner))
            matched.append((case, partner))
    added = [c.name for c in after.cases if id(c) not in used_after]

    changes: list[AssertionChange] = []
    for b_case, a_case in matched:
        for b_assert, a_assert in zip(b_case.assertions, a_case.assertions):
            verdict = compare_assertions(b_assert, a_assert, table)
            if verdict is not DiffVerdict.NO_CHANGE:
                changes.append(AssertionChange(b_case.name, b_assert, a_assert, verdict))
        for b_assert in b_case.assertions[len(a_case.assertions) :]:
            changes.append(AssertionChange(b_case.name, b_assert, None, DiffVerdict.WEAKENED))
        for a_assert in a_case.assertions[len(b_case.assertions) :]:
            changes.append(AssertionChange(b_case.name, None, a_assert, DiffVerdict.STRENGTHENED))

    return SuiteDiff(
        added_cases=tuple(added),
        removed_cases=tuple(removed),
        changes=tuple(changes),
        warnings=tuple(warnings),
    )


def gate_verdict(diff: SuiteDiff) -> GateDecision:
    """REQUIRE_REVIEW on any weakening or case removal; additions pass."""
    if diff.removed_cases:
        return GateDecision.REQUIRE_REVIEW
    if any(change.verdict is DiffVerdict.WEAKENED for change in diff.changes):
        return GateDecision.REQUIRE_REVIEW
    return GateDecision.ALLOW


def diff_scripts(before_text: str, after_text: str, table: MatcherTable | None = None) -> SuiteDiff:
    table = table or default_matchers()
    return diff_suites(parse_test_script(before_text, table), parse_test_script(after_text, table), table)


def diff_to_dict(diff: SuiteDiff) -> dict:
    def ast_dict(ast: AssertionAst | None):
        if ast is None:
            return None
        return {
            "subject": ast.subject,
            "matcher": ast.matcher,
            "arguments": [list(a) if isinstance(a, tuple) else a for a in ast.arguments],
            "negated": ast.negated,
        }

    return {
        "added_cases": list(diff.added_cases),
        "removed_cases": list(diff.removed_cases),
        "scope_reduction": diff.scope_reduction,
        "changes": [
            {
                "case_name": c.case_name,
                "before": ast_dict(c.before),
                "after": ast_dict(c.after),
                "verdict": c.verdict.value,
            }
            for c in diff.changes
        ],
        "warnings": list(diff.warnings),
        "verdict": gate_verdict(diff).value,
    }


def quality_evidence(diff: SuiteDiff) -> str | None:
    """Map a script diff to a convergence-quality label, if it implies one.

    Deletion outranks weakening when both are present: losing a case changes
    what the suite covers, not just how strictly it checks.
    """
    if diff.removed_cases:
        return "SCOPE_REDUCED"
    if any(change.verdict is DiffVerdict.WEAKENED for change in diff.changes):
        return "ASSERTION_WEAKENED"
    return None
