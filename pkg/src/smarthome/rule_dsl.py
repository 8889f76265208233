"""Parser and printer for the rule language.

    rule <name> priority <int> when <cond> then <action> (; <action>)* end

Conditions combine ``event.kind == <verb>``, ``event.location.kind == <kind>``
and world predicates such as ``dark(event.location)`` with and/or/not.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import Issue, RuleParseError
from .house import LocationKind
from .rules import (
    EVENT_LOCATION,
    EVENT_ORIGIN,
    PREDICATES,
    Action,
    Always,
    And,
    Condition,
    KindIs,
    LocationKindIs,
    Not,
    Or,
    Predicate,
    Rule,
    RuleSet,
)
from .scenario import EventKind

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<int>-?\d+)
  | (?P<op>==|!=|[();])
  | (?P<word>[A-Za-z_][A-Za-z0-9_.\-]*)
  | (?P<bad>.)
    """,
    re.VERBOSE,
)

_KEYWORDS = {"rule", "priority", "when", "then", "end", "and", "or", "not", "in", "true"}
_DEVICES = ("light", "tv", "all")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


class _Fail(Exception):
    def __init__(self, issue: Issue):
        self.issue = issue


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, line_start = 1, 0
    for m in _TOKEN_RE.finditer(text):
        kind = m.lastgroup
        col = m.start() - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind in ("ws", "comment"):
            continue
        elif kind == "bad":
            raise _Fail(Issue("SyntaxError", f"unexpected character {m.group()!r}", line, col))
        else:
            tokens.append(Token(kind, m.group(), line, col))
    tokens.append(Token("eof", "", line, len(text) - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, message: str, tok: Token | None = None, code: str = "SyntaxError"):
        tok = tok or self.tok
        return _Fail(Issue(code, message, tok.line, tok.column))

    def expect(self, text: str) -> Token:
        if self.tok.text != text or self.tok.kind == "string":
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def name(self, what: str) -> str:
        tok = self.tok
        if tok.kind != "word" or tok.text in _KEYWORDS:
            raise self.error(f"expected {what}, found {tok.text or 'end of input'!r}")
        return self.advance().text

    def rule(self) -> Rule:
        self.expect("rule")
        name = self.name("rule name")
        self.expect("priority")
        if self.tok.kind != "int":
            raise self.error("priority must be an integer")
        priority = int(self.advance().text)
        self.expect("when")
        cond = self.condition()
        self.expect("then")
        actions = [self.action()]
        while self.tok.text == ";":
            self.advance()
            actions.append(self.action())
        self.expect("end")
        return Rule(name, priority, cond, tuple(actions))

    def condition(self) -> Condition:
        left = self.conjunction()
        while self.tok.text == "or":
            self.advance()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self) -> Condition:
        left = self.negation()
        while self.tok.text == "and":
            self.advance()
            left = And(left, self.negation())
        return left

    def negation(self) -> Condition:
        if self.tok.text == "not":
            self.advance()
            return Not(self.negation())
        return self.atom()

    def atom(self) -> Condition:
        tok = self.tok
        if tok.text == "(":
            self.advance()
            cond = self.condition()
            self.expect(")")
            return cond
        if tok.text == "true":
            self.advance()
            return Always()
        if tok.text in ("event.kind", "event.location.kind"):
            self.advance()
            if self.tok.text not in ("==", "!="):
                raise self.error("expected == or !=")
            negate = self.advance().text == "!="
            value_tok = self.tok
            if value_tok.kind != "word":
                raise self.error("expected a value")
            # keywords are fine here: 'event.kind == end' is unambiguous
            value = self.advance().text
            if tok.text == "event.kind":
                if value not in {k.value for k in EventKind}:
                    raise self.error(f"unknown event kind {value!r}", value_tok)
                return KindIs(value, negate)
            if value not in {k.value for k in LocationKind}:
                raise self.error(f"unknown location kind {value!r}", value_tok)
            return LocationKindIs(value, negate)
        if tok.kind == "word" and tok.text not in _KEYWORDS:
            self.advance()
            if tok.text not in PREDICATES:
                raise self.error(f"unknown predicate {tok.text!r}", tok, code="UnknownPredicate")
            self.expect("(")
            loc = self.location_expr()
            self.expect(")")
            return Predicate(tok.text, loc)
        raise self.error(f"expected a condition, found {tok.text or 'end of input'!r}")

    def location_expr(self) -> str:
        return self.name("a location")

    def action(self) -> Action:
        tok = self.tok
        verb = tok.text
        if verb in ("turn_on", "turn_off"):
            self.advance()
            if self.tok.text not in _DEVICES:
                raise self.error("expected light, tv or all")
            device = self.advance().text
            if verb == "turn_on" and device == "all":
                raise self.error("turn_on needs a single device", tok)
            self.expect("in")
            return Action(verb, device=device, target=self.location_expr())
        if verb == "alert":
            self.advance()
            if self.tok.kind != "string":
                raise self.error("alert needs a quoted message")
            return Action("alert", text=_unquote(self.advance().text))
        if verb == "record":
            self.advance()
            return Action("record", text=self.name("an activity tag"))
        raise self.error(f"unknown action {verb!r}")

    def skip_rule(self) -> None:
        """Error recovery: resume at the token after the next ``end``."""
        while self.tok.kind != "eof" and self.tok.text != "end":
            self.advance()
        self.advance()


def _unquote(s: str) -> str:
    return re.sub(r"\\(.)", r"\1", s[1:-1])


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def parse_rules(text: str) -> RuleSet:
    try:
        parser = _Parser(tokenize(text))
    except _Fail as exc:
        raise RuleParseError([exc.issue]) from None
    issues: list[Issue] = []
    rules: dict[str, Rule] = {}
    while parser.tok.kind != "eof":
        start = parser.tok
        try:
            rule = parser.rule()
        except _Fail as exc:
            issues.append(exc.issue)
            parser.skip_rule()
            continue
        if rule.name in rules:
            issues.append(Issue("DuplicateRuleName", f"rule {rule.name!r} defined twice", start.line, start.column))
            continue
        rules[rule.name] = rule
    if issues:
        raise RuleParseError(issues)
    return RuleSet(tuple(rules.values()))


# -- printing ---------------------------------------------------------------


def format_condition(cond: Condition) -> str:
    if isinstance(cond, Always):
        return "true"
    if isinstance(cond, KindIs):
        return f"event.kind {'!=' if cond.negate else '=='} {cond.kind}"
    if isinstance(cond, LocationKindIs):
        return f"event.location.kind {'!=' if cond.negate else '=='} {cond.kind}"
    if isinstance(cond, Predicate):
        return f"{cond.name}({cond.location})"
    if isinstance(cond, Not):
        inner = format_condition(cond.operand)
        return f"not {inner}" if _is_atomic(cond.operand) else f"not ({inner})"
    if isinstance(cond, (And, Or)):
        op = "and" if isinstance(cond, And) else "or"
        left = _operand(cond.left, type(cond), right=False)
        right = _operand(cond.right, type(cond), right=True)
        return f"{left} {op} {right}"
    raise TypeError(f"not a condition: {cond!r}")


def _is_atomic(cond: Condition) -> bool:
    return not isinstance(cond, (And, Or))


def _operand(cond: Condition, parent: type, right: bool) -> str:
    text = format_condition(cond)
    if _is_atomic(cond):
        return text
    # both operators are left-associative and 'and' binds tighter than 'or'
    if right or (parent is And and isinstance(cond, Or)):
        return f"({text})"
    return text


def format_action(action: Action) -> str:
    if action.verb in ("turn_on", "turn_off"):
        return f"{action.verb} {action.device} in {action.target}"
    if action.verb == "alert":
        return f"alert {_quote(action.text)}"
    return f"record {action.text}"


def format_rules(rs: RuleSet) -> str:
    blocks = []
    for rule in rs:
        actions = ";\n      ".join(format_action(a) for a in rule.then)
        blocks.append(
            f"rule {rule.name} priority {rule.priority}\n"
            f"  when {format_condition(rule.when)}\n"
            f"  then {actions}\n"
            f"end\n"
        )
    return "\n".join(blocks)


__all__ = ["parse_rules", "format_rules", "format_condition", "tokenize", "EVENT_LOCATION", "EVENT_ORIGIN"]
