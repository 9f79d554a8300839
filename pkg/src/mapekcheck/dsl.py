"""Parser for the planned-architecture description language.

The language declares a named architecture made of Managing and Managed
subsystems, a nesting of abstraction instances inside them, and a Rules
block of must-use / must-not-use statements between declared instances.
`parse_pa` turns source text into an AST; `format_pa` renders an AST back
to canonical source so that parse/format round-trips are stable.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Iterator

from .kinds import AbstractionKind, COMPOSABLE_KINDS

K = AbstractionKind

#: Canonical file extension for architecture sources.
SOURCE_SUFFIX = ".remedy"


# ---------------------------------------------------------------------------
# Positions and diagnostics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Span:
    """1-based line/column range of a source construct."""

    line: int
    column: int
    end_line: int
    end_column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


class Severity(str, enum.Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    """A single analysis finding. Errors block artifact generation."""

    severity: Severity
    code: str
    span: Span
    message: str

    def __str__(self) -> str:
        return f"{self.severity.value}[{self.code}] {self.span}: {self.message}"


def has_errors(diagnostics: list[Diagnostic]) -> bool:
    return any(d.severity is Severity.ERROR for d in diagnostics)


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


class Modality(str, enum.Enum):
    MUST_USE = "must-use"
    MUST_NOT_USE = "must-not-use"


class RuleOrigin(str, enum.Enum):
    USER = "user"
    DOMAIN = "domain"
    LOOP_EXPANSION = "loop-expansion"


@dataclass
class AbstractionDecl:
    """One declared abstraction instance, possibly with nested children.

    `domain_rules_enabled` is meaningful only for Loop declarations.
    """

    id: str
    kind: AbstractionKind
    children: list["AbstractionDecl"] = field(default_factory=list)
    domain_rules_enabled: bool = False
    span: Span | None = field(default=None, compare=False)

    def walk(self) -> Iterator["AbstractionDecl"]:
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass
class CommRule:
    """A declared or derived communication rule between two instances."""

    source_kind: AbstractionKind
    source_id: str
    modality: Modality
    target_kind: AbstractionKind
    target_id: str
    origin: RuleOrigin = RuleOrigin.USER
    span: Span | None = field(default=None, compare=False)

    def pair(self) -> tuple[str, str]:
        return (self.source_id, self.target_id)

    def __str__(self) -> str:
        return (
            f"{self.source_kind.value.lower()} {self.source_id} "
            f"{self.modality.value} {self.target_kind.value.lower()} {self.target_id}"
        )


@dataclass
class PlannedArchitecture:
    """Parsed architecture: subsystem trees plus the communication rules."""

    name: str
    managing: list[AbstractionDecl] = field(default_factory=list)
    managed: list[AbstractionDecl] = field(default_factory=list)
    rules: list[CommRule] = field(default_factory=list)
    span: Span | None = field(default=None, compare=False)

    @property
    def roots(self) -> list[AbstractionDecl]:
        return [*self.managing, *self.managed]

    def iter_instances(self) -> Iterator[AbstractionDecl]:
        """All declared instances in document order (subsystems included)."""
        for root in self.roots:
            yield from root.walk()

    def instance_count(self) -> int:
        return sum(1 for _ in self.iter_instances())

    def loops(self) -> list[AbstractionDecl]:
        return [d for d in self.iter_instances() if d.kind is K.LOOP]

    def declarations_by_id(self) -> dict[str, AbstractionDecl]:
        """First declaration per identifier (duplicates are a validator error)."""
        index: dict[str, AbstractionDecl] = {}
        for decl in self.iter_instances():
            index.setdefault(decl.id, decl)
        return index

    def parent_ids(self) -> dict[str, str | None]:
        """Identifier of the declaring parent per instance; None for roots."""
        parents: dict[str, str | None] = {}

        def visit(decl: AbstractionDecl, parent: str | None) -> None:
            parents.setdefault(decl.id, parent)
            for child in decl.children:
                visit(child, decl.id)

        for root in self.roots:
            visit(root, None)
        return parents

    def enclosing_loops(self) -> dict[str, str]:
        """Map each instance id to the id of its innermost enclosing loop."""
        result: dict[str, str] = {}

        def visit(decl: AbstractionDecl, loop_id: str | None) -> None:
            inner = decl.id if decl.kind is K.LOOP else loop_id
            if inner is not None and decl.id != inner:
                result.setdefault(decl.id, inner)
            for child in decl.children:
                visit(child, inner)

        for root in self.roots:
            visit(root, None)
        return result


@dataclass
class ParseResult:
    """Outcome of `parse_pa`: an AST on success, diagnostics otherwise."""

    pa: PlannedArchitecture | None
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.pa is not None and not has_errors(self.diagnostics)


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------


class _TokType(enum.Enum):
    WORD = "word"
    LBRACE = "{"
    RBRACE = "}"
    SEMI = ";"
    EOF = "end of input"


@dataclass(frozen=True)
class _Token:
    type: _TokType
    value: str
    line: int
    column: int


class _ParseAbort(Exception):
    """Internal: carries the diagnostic that stopped the parse."""

    def __init__(self, diagnostic: Diagnostic) -> None:
        super().__init__(diagnostic.message)
        self.diagnostic = diagnostic


def _point(line: int, column: int) -> Span:
    return Span(line, column, line, column)


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            col += 1
            i += 1
        elif ch == "/" and i + 1 < n and source[i + 1] == "/":
            while i < n and source[i] != "\n":
                i += 1
        elif ch == "{":
            tokens.append(_Token(_TokType.LBRACE, "{", line, col))
            col += 1
            i += 1
        elif ch == "}":
            tokens.append(_Token(_TokType.RBRACE, "}", line, col))
            col += 1
            i += 1
        elif ch == ";":
            tokens.append(_Token(_TokType.SEMI, ";", line, col))
            col += 1
            i += 1
        elif ch.isalpha() or ch == "_":
            start_col = col
            j = i
            while j < n and (source[j].isalnum() or source[j] in "_-"):
                j += 1
            tokens.append(_Token(_TokType.WORD, source[i:j], line, start_col))
            col += j - i
            i = j
        else:
            raise _ParseAbort(
                Diagnostic(
                    Severity.ERROR,
                    "SYNTAX_ERROR",
                    _point(line, col),
                    f"unexpected character {ch!r}",
                )
            )
    tokens.append(_Token(_TokType.EOF, "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_LEAF_KEYWORDS: dict[str, AbstractionKind] = {
    "Monitor": K.MONITOR,
    "Analyzer": K.ANALYZER,
    "Planner": K.PLANNER,
    "Executor": K.EXECUTOR,
    "Sensor": K.SENSOR,
    "Effector": K.EFFECTOR,
    "MeasuredOutput": K.MEASURED_OUTPUT,
    "ReferenceInput": K.REFERENCE_INPUT,
    "Alternative": K.ALTERNATIVE,
    "Component": K.GENERIC_COMPONENT,
}

_RULE_SELECTORS: dict[str, AbstractionKind] = {
    "loop": K.LOOP,
    "monitor": K.MONITOR,
    "analyzer": K.ANALYZER,
    "planner": K.PLANNER,
    "executor": K.EXECUTOR,
    "sensor": K.SENSOR,
    "effector": K.EFFECTOR,
    "knowledge": K.KNOWLEDGE,
    "reference-input": K.REFERENCE_INPUT,
    "alternative": K.ALTERNATIVE,
    "measured-output": K.MEASURED_OUTPUT,
}

#: Words that can never be used as instance identifiers.
_RESERVED_WORDS: frozenset[str] = frozenset(
    {
        "Architecture",
        "Managing",
        "Managed",
        "LoopManager",
        "Loop",
        "Knowledge",
        "Rules",
        "withDomainRules",
        "must-use",
        "must-not-use",
        *_LEAF_KEYWORDS,
    }
)


class _Parser:
    def __init__(self, tokens: list[_Token]) -> None:
        self._tokens = tokens
        self._pos = 0

    # -- token plumbing -----------------------------------------------------

    def _current(self) -> _Token:
        return self._tokens[self._pos]

    def _advance(self) -> _Token:
        tok = self._tokens[self._pos]
        if tok.type is not _TokType.EOF:
            self._pos += 1
        return tok

    def _check_word(self, *words: str) -> bool:
        tok = self._current()
        return tok.type is _TokType.WORD and tok.value in words

    def _fail(self, tok: _Token, code: str, message: str) -> _ParseAbort:
        return _ParseAbort(
            Diagnostic(Severity.ERROR, code, _point(tok.line, tok.column), message)
        )

    def _expect(self, ttype: _TokType) -> _Token:
        tok = self._current()
        if tok.type is not ttype:
            if tok.type is _TokType.EOF and ttype is _TokType.RBRACE:
                raise self._fail(tok, "UNTERMINATED_BLOCK", "unterminated block")
            shown = tok.value if tok.type is _TokType.WORD else tok.type.value
            raise self._fail(
                tok, "SYNTAX_ERROR", f"expected {ttype.value!r}, got {shown!r}"
            )
        return self._advance()

    def _expect_word(self, word: str) -> _Token:
        tok = self._current()
        if tok.type is not _TokType.WORD or tok.value != word:
            shown = tok.value if tok.type is _TokType.WORD else tok.type.value
            raise self._fail(
                tok, "SYNTAX_ERROR", f"expected {word!r}, got {shown!r}"
            )
        return self._advance()

    def _expect_identifier(self) -> _Token:
        tok = self._current()
        if tok.type is not _TokType.WORD:
            shown = tok.type.value
            raise self._fail(tok, "SYNTAX_ERROR", f"expected identifier, got {shown!r}")
        if tok.value in _RESERVED_WORDS:
            raise self._fail(
                tok,
                "SYNTAX_ERROR",
                f"expected identifier, got reserved word {tok.value!r}",
            )
        return self._advance()

    def _skip_optional_semi(self) -> None:
        if self._current().type is _TokType.SEMI:
            self._advance()

    # -- grammar ------------------------------------------------------------

    def parse(self) -> PlannedArchitecture:
        start = self._expect_word("Architecture")
        name = self._expect_identifier()
        self._expect(_TokType.LBRACE)
        managing: list[AbstractionDecl] = []
        managed: list[AbstractionDecl] = []
        while self._current().type is not _TokType.RBRACE:
            tok = self._current()
            if tok.type is _TokType.EOF:
                raise self._fail(tok, "UNTERMINATED_BLOCK", "unterminated block")
            if self._check_word("Managing"):
                managing.append(self._parse_managing())
            elif self._check_word("Managed"):
                managed.append(self._parse_managed())
            elif tok.type is _TokType.WORD:
                raise self._fail(
                    tok,
                    "UNKNOWN_KEYWORD",
                    f"unknown keyword {tok.value!r}; expected 'Managing' or 'Managed'",
                )
            else:
                raise self._fail(
                    tok, "SYNTAX_ERROR", f"unexpected {tok.type.value!r} in architecture body"
                )
        self._expect(_TokType.RBRACE)
        self._expect_word("Rules")
        self._expect(_TokType.LBRACE)
        rules: list[CommRule] = []
        while self._current().type is not _TokType.RBRACE:
            tok = self._current()
            if tok.type is _TokType.EOF:
                raise self._fail(tok, "UNTERMINATED_BLOCK", "unterminated block")
            rules.append(self._parse_rule())
        end = self._expect(_TokType.RBRACE)
        self._skip_optional_semi()
        trailing = self._current()
        if trailing.type is not _TokType.EOF:
            shown = trailing.value if trailing.type is _TokType.WORD else trailing.type.value
            raise self._fail(
                trailing, "SYNTAX_ERROR", f"unexpected {shown!r} after architecture"
            )
        return PlannedArchitecture(
            name=name.value,
            managing=managing,
            managed=managed,
            rules=rules,
            span=Span(start.line, start.column, end.line, end.column),
        )

    def _parse_managing(self) -> AbstractionDecl:
        start = self._expect_word("Managing")
        name = self._expect_identifier()
        self._expect(_TokType.LBRACE)
        children: list[AbstractionDecl] = []
        while self._current().type is not _TokType.RBRACE:
            tok = self._current()
            if self._check_word("LoopManager"):
                children.append(self._parse_loop_manager())
            elif self._check_word("Loop"):
                children.append(self._parse_loop())
            elif tok.type is _TokType.WORD:
                raise self._fail(
                    tok,
                    "UNKNOWN_KEYWORD",
                    f"unknown keyword {tok.value!r} in Managing body",
                )
            elif tok.type is _TokType.EOF:
                raise self._fail(tok, "UNTERMINATED_BLOCK", "unterminated block")
            else:
                raise self._fail(
                    tok, "SYNTAX_ERROR", f"unexpected {tok.type.value!r} in Managing body"
                )
        end = self._expect(_TokType.RBRACE)
        self._skip_optional_semi()
        return AbstractionDecl(
            id=name.value,
            kind=K.MANAGING,
            children=children,
            span=Span(start.line, start.column, end.line, end.column),
        )

    def _parse_managed(self) -> AbstractionDecl:
        start = self._expect_word("Managed")
        name = self._expect_identifier()
        self._expect(_TokType.LBRACE)
        children: list[AbstractionDecl] = []
        allowed = ("Sensor", "Effector", "MeasuredOutput", "Component")
        while self._current().type is not _TokType.RBRACE:
            tok = self._current()
            if tok.type is _TokType.WORD and tok.value in allowed:
                children.append(self._parse_leaf(tok.value))
            elif tok.type is _TokType.WORD:
                raise self._fail(
                    tok,
                    "UNKNOWN_KEYWORD",
                    f"unknown keyword {tok.value!r} in Managed body",
                )
            elif tok.type is _TokType.EOF:
                raise self._fail(tok, "UNTERMINATED_BLOCK", "unterminated block")
            else:
                raise self._fail(
                    tok, "SYNTAX_ERROR", f"unexpected {tok.type.value!r} in Managed body"
                )
        end = self._expect(_TokType.RBRACE)
        self._skip_optional_semi()
        return AbstractionDecl(
            id=name.value,
            kind=K.MANAGED,
            children=children,
            span=Span(start.line, start.column, end.line, end.column),
        )

    def _parse_loop_manager(self) -> AbstractionDecl:
        start = self._expect_word("LoopManager")
        name = self._expect_identifier()
        self._expect(_TokType.LBRACE)
        children: list[AbstractionDecl] = []
        while self._current().type is not _TokType.RBRACE:
            tok = self._current()
            if self._check_word("Loop"):
                children.append(self._parse_loop())
            elif tok.type is _TokType.WORD:
                raise self._fail(
                    tok,
                    "UNKNOWN_KEYWORD",
                    f"unknown keyword {tok.value!r} in LoopManager body",
                )
            elif tok.type is _TokType.EOF:
                raise self._fail(tok, "UNTERMINATED_BLOCK", "unterminated block")
            else:
                raise self._fail(
                    tok, "SYNTAX_ERROR", f"unexpected {tok.type.value!r} in LoopManager body"
                )
        end = self._expect(_TokType.RBRACE)
        self._skip_optional_semi()
        return AbstractionDecl(
            id=name.value,
            kind=K.LOOP_MANAGER,
            children=children,
            span=Span(start.line, start.column, end.line, end.column),
        )

    def _parse_loop(self) -> AbstractionDecl:
        start = self._expect_word("Loop")
        name = self._expect_identifier()
        with_domain_rules = False
        if self._check_word("withDomainRules"):
            self._advance()
            with_domain_rules = True
        self._expect(_TokType.LBRACE)
        children: list[AbstractionDecl] = []
        member_keywords = ("Monitor", "Analyzer", "Planner", "Executor")
        while self._current().type is not _TokType.RBRACE:
            tok = self._current()
            if tok.type is _TokType.WORD and tok.value in member_keywords:
                children.append(self._parse_leaf(tok.value))
            elif self._check_word("Knowledge"):
                children.append(self._parse_knowledge())
            elif tok.type is _TokType.WORD:
                raise self._fail(
                    tok,
                    "UNKNOWN_KEYWORD",
                    f"unknown keyword {tok.value!r} in Loop body",
                )
            elif tok.type is _TokType.EOF:
                raise self._fail(tok, "UNTERMINATED_BLOCK", "unterminated block")
            else:
                raise self._fail(
                    tok, "SYNTAX_ERROR", f"unexpected {tok.type.value!r} in Loop body"
                )
        end = self._expect(_TokType.RBRACE)
        self._skip_optional_semi()
        return AbstractionDecl(
            id=name.value,
            kind=K.LOOP,
            children=children,
            domain_rules_enabled=with_domain_rules,
            span=Span(start.line, start.column, end.line, end.column),
        )

    def _parse_knowledge(self) -> AbstractionDecl:
        start = self._expect_word("Knowledge")
        name = self._expect_identifier()
        self._expect(_TokType.LBRACE)
        children: list[AbstractionDecl] = []
        while self._current().type is not _TokType.RBRACE:
            tok = self._current()
            if tok.type is _TokType.WORD and tok.value in ("ReferenceInput", "Alternative"):
                children.append(self._parse_leaf(tok.value))
            elif tok.type is _TokType.WORD:
                raise self._fail(
                    tok,
                    "UNKNOWN_KEYWORD",
                    f"unknown keyword {tok.value!r} in Knowledge body",
                )
            elif tok.type is _TokType.EOF:
                raise self._fail(tok, "UNTERMINATED_BLOCK", "unterminated block")
            else:
                raise self._fail(
                    tok, "SYNTAX_ERROR", f"unexpected {tok.type.value!r} in Knowledge body"
                )
        end = self._expect(_TokType.RBRACE)
        self._skip_optional_semi()
        return AbstractionDecl(
            id=name.value,
            kind=K.KNOWLEDGE,
            children=children,
            span=Span(start.line, start.column, end.line, end.column),
        )

    def _parse_leaf(self, keyword: str) -> AbstractionDecl:
        start = self._expect_word(keyword)
        name = self._expect_identifier()
        end = self._expect(_TokType.SEMI)
        return AbstractionDecl(
            id=name.value,
            kind=_LEAF_KEYWORDS[keyword],
            span=Span(start.line, start.column, end.line, end.column),
        )

    def _parse_rule(self) -> CommRule:
        tok = self._current()
        if tok.type is not _TokType.WORD or tok.value not in _RULE_SELECTORS:
            if tok.type is _TokType.WORD:
                raise self._fail(
                    tok,
                    "UNKNOWN_KEYWORD",
                    f"unknown kind selector {tok.value!r} in rule",
                )
            raise self._fail(
                tok, "SYNTAX_ERROR", f"unexpected {tok.type.value!r} in Rules body"
            )
        start = self._advance()
        source_kind = _RULE_SELECTORS[start.value]
        source_id = self._expect_identifier()
        mod_tok = self._current()
        if not self._check_word("must-use", "must-not-use"):
            shown = mod_tok.value if mod_tok.type is _TokType.WORD else mod_tok.type.value
            raise self._fail(
                mod_tok,
                "SYNTAX_ERROR",
                f"expected 'must-use' or 'must-not-use', got {shown!r}",
            )
        self._advance()
        modality = Modality(mod_tok.value)
        tgt = self._current()
        if tgt.type is _TokType.WORD and tgt.value in _RULE_SELECTORS:
            self._advance()
            target_kind = _RULE_SELECTORS[tgt.value]
            target_id = self._expect_identifier()
        else:
            # A bare identifier targets a generic component, as in
            # "effector wheels must-use servo-controller;".
            target_kind = K.GENERIC_COMPONENT
            target_id = self._expect_identifier()
        end = self._expect(_TokType.SEMI)
        return CommRule(
            source_kind=source_kind,
            source_id=source_id.value,
            modality=modality,
            target_kind=target_kind,
            target_id=target_id.value,
            origin=RuleOrigin.USER,
            span=Span(start.line, start.column, end.line, end.column),
        )


def parse_pa(source: str) -> ParseResult:
    """Parse architecture source text.

    Returns a ParseResult holding the AST on success, or one error
    diagnostic with the failing location otherwise. A missing closing
    brace anywhere is reported as an unterminated block at end of input.
    """
    try:
        tokens = _tokenize(source)
        opened = sum(1 for t in tokens if t.type is _TokType.LBRACE)
        closed = sum(1 for t in tokens if t.type is _TokType.RBRACE)
        if opened > closed:
            eof = tokens[-1]
            raise _ParseAbort(
                Diagnostic(
                    Severity.ERROR,
                    "UNTERMINATED_BLOCK",
                    _point(eof.line, eof.column),
                    "unterminated block",
                )
            )
        pa = _Parser(tokens).parse()
    except _ParseAbort as abort:
        return ParseResult(pa=None, diagnostics=[abort.diagnostic])
    return ParseResult(pa=pa, diagnostics=[])


def parse_pa_file(path: str) -> ParseResult:
    """Parse a source file (UTF-8)."""
    with open(path, "r", encoding="utf-8") as handle:
        return parse_pa(handle.read())


# ---------------------------------------------------------------------------
# Pretty printer
# ---------------------------------------------------------------------------

_DECL_KEYWORDS: dict[AbstractionKind, str] = {
    K.MANAGING: "Managing",
    K.MANAGED: "Managed",
    K.LOOP_MANAGER: "LoopManager",
    K.LOOP: "Loop",
    K.KNOWLEDGE: "Knowledge",
    K.MONITOR: "Monitor",
    K.ANALYZER: "Analyzer",
    K.PLANNER: "Planner",
    K.EXECUTOR: "Executor",
    K.SENSOR: "Sensor",
    K.EFFECTOR: "Effector",
    K.MEASURED_OUTPUT: "MeasuredOutput",
    K.REFERENCE_INPUT: "ReferenceInput",
    K.ALTERNATIVE: "Alternative",
    K.GENERIC_COMPONENT: "Component",
}

_SELECTOR_BY_KIND: dict[AbstractionKind, str] = {
    kind: word for word, kind in _RULE_SELECTORS.items()
}


def _format_decl(decl: AbstractionDecl, indent: int, out: list[str]) -> None:
    pad = "  " * indent
    keyword = _DECL_KEYWORDS[decl.kind]
    if decl.kind in COMPOSABLE_KINDS:
        flag = " withDomainRules" if decl.kind is K.LOOP and decl.domain_rules_enabled else ""
        out.append(f"{pad}{keyword} {decl.id}{flag} {{")
        for child in decl.children:
            _format_decl(child, indent + 1, out)
        out.append(f"{pad}}}")
    else:
        out.append(f"{pad}{keyword} {decl.id};")


def format_rule(rule: CommRule) -> str:
    """Render one rule statement in canonical source form."""
    if rule.target_kind is K.GENERIC_COMPONENT:
        target = rule.target_id
    else:
        target = f"{_SELECTOR_BY_KIND[rule.target_kind]} {rule.target_id}"
    source = f"{_SELECTOR_BY_KIND[rule.source_kind]} {rule.source_id}"
    return f"{source} {rule.modality.value} {target};"


def format_pa(pa: PlannedArchitecture) -> str:
    """Render an AST back to canonical source text."""
    out: list[str] = [f"Architecture {pa.name} {{"]
    for decl in pa.roots:
        _format_decl(decl, 1, out)
    out.append("} Rules {")
    for rule in pa.rules:
        out.append(f"  {format_rule(rule)}")
    out.append("};")
    return "\n".join(out) + "\n"


def strip_spans(pa: PlannedArchitecture) -> PlannedArchitecture:
    """Copy an AST with all spans cleared (spans never take part in ==)."""

    def clear(decl: AbstractionDecl) -> AbstractionDecl:
        return replace(decl, children=[clear(c) for c in decl.children], span=None)

    return PlannedArchitecture(
        name=pa.name,
        managing=[clear(d) for d in pa.managing],
        managed=[clear(d) for d in pa.managed],
        rules=[replace(r, span=None) for r in pa.rules],
        span=None,
    )
