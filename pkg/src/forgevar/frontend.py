"""Lexer and parser for the Jam-style buildfile language and the command line.

Buildfile grammar (punctuation is whitespace-delimited, ``#`` starts a
comment)::

    lib|exe|obj NAME [: SOURCES [: REQUIREMENTS]] ;
    actions TEMPLATE { raw command body }
    flags TEMPLATE VARIABLE : CONDITION : VALUES ;
    project-requirements REQUIREMENTS ;

Requirement words: ``f=v`` (simple), ``a=1,b=2:f=v`` (conditional),
``@name`` (indirect).  ``<f>v`` is accepted wherever ``f=v`` is.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import (
    BuildfileSyntaxError,
    BuildError,
    MalformedProperty,
    MalformedRequirement,
    MissingSemicolon,
    UnknownOption,
    UnknownRule,
    UnterminatedActions,
)
from .properties import FeatureRegistry, Property, PropertySet, Requirement, parse_property

WORD, COLON, SEMICOLON, LBRACE, RBRACE, BODY = "word", "colon", "semicolon", "lbrace", "rbrace", "body"
_PUNCT = {":": COLON, ";": SEMICOLON, "{": LBRACE, "}": RBRACE}

DECLARATION_RULES = ("lib", "exe", "obj")
RULES = DECLARATION_RULES + ("actions", "flags", "project-requirements")


@dataclass(frozen=True)
class Token:
    text: str
    kind: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Declaration:
    rule: str
    name: str
    sources: tuple[str, ...] = ()
    requirements: tuple[Requirement, ...] = ()
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ActionsDef:
    name: str
    body: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class FlagsDef:
    template: str
    variable: str
    condition: tuple[Property, ...] = ()
    values: tuple[str, ...] = ()
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ProjectRequirements:
    requirements: tuple[Requirement, ...]
    line: int = field(default=0, compare=False)


def tokenize(text: str) -> list[Token]:
    """Split buildfile text into tokens.

    The brace-delimited body after ``actions NAME`` is returned verbatim as
    a single ``body`` token.
    """
    tokens: list[Token] = []
    pos, line, n = 0, 1, len(text)
    # words of the statement being scanned, to spot `actions NAME {`
    statement: list[Token] = []
    while pos < n:
        ch = text[pos]
        if ch == "\n":
            line += 1
            pos += 1
            continue
        if ch.isspace():
            pos += 1
            continue
        if ch == "#":
            end = text.find("\n", pos)
            pos = n if end < 0 else end
            continue
        if (
            ch == "{"
            and len(statement) == 2
            and statement[0].text == "actions"
            and statement[1].kind == WORD
        ):
            start_line = line
            depth, i = 1, pos + 1
            while i < n and depth:
                if text[i] == "{":
                    depth += 1
                elif text[i] == "}":
                    depth -= 1
                i += 1
            if depth:
                raise UnterminatedActions(
                    f"unterminated body for actions '{statement[1].text}'", start_line
                )
            body = text[pos + 1 : i - 1]
            tokens.append(Token(body, BODY, start_line))
            line += body.count("\n")
            pos = i
            statement = []
            continue
        end = pos
        while end < n and not text[end].isspace():
            end += 1
        word = text[pos:end]
        tok = Token(word, _PUNCT.get(word, WORD), line)
        tokens.append(tok)
        statement = [] if tok.kind == SEMICOLON else statement + [tok]
        pos = end
    return tokens


def parse_property_word(word: str, registry: FeatureRegistry | None = None, line=None) -> Property:
    """Parse ``f=v`` or the alias ``<f>v``; validate when a registry is given."""
    m = re.fullmatch(r"<([^<>=\s]+)>([^<>=\s]+)", word)
    if m:
        word = f"{m.group(1)}={m.group(2)}"
    try:
        if registry is not None:
            return parse_property(registry, word)
        if word.count("=") != 1 or word.startswith("=") or word.endswith("="):
            raise MalformedProperty(f"malformed property '{word}': expected feature=value")
        return Property(*word.split("="))
    except BuildError as exc:
        if exc.line is None:
            exc.line = line
        raise


def _property_list(text, registry, line):
    if not text:
        raise MalformedRequirement("empty property list", line)
    return tuple(parse_property_word(w, registry, line) for w in text.split(","))


def parse_requirement(word: str, registry: FeatureRegistry | None = None, line=None) -> Requirement:
    if word.startswith("@"):
        if len(word) == 1 or ":" in word:
            raise MalformedRequirement(f"malformed indirect requirement '{word}'", line)
        return Requirement.indirect(word[1:])
    parts = word.split(":")
    if len(parts) == 1:
        return Requirement.simple(*_property_list(word, registry, line))
    if len(parts) == 2 and all(parts):
        return Requirement.conditional(
            _property_list(parts[0], registry, line), _property_list(parts[1], registry, line)
        )
    raise MalformedRequirement(f"malformed requirement '{word}'", line)


class _Parser:
    def __init__(self, tokens, registry):
        self.tokens = tokens
        self.registry = registry
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def last_line(self):
        return self.tokens[-1].line if self.tokens else 1

    def fields(self, rule, first):
        """Read colon-separated word lists up to the terminating semicolon."""
        fields = [[]]
        while True:
            tok = self.next()
            if tok is None:
                raise MissingSemicolon(f"'{rule}' statement is missing its terminating ';'", first.line)
            if tok.kind == SEMICOLON:
                return fields
            if tok.kind == COLON:
                fields.append([])
            elif tok.kind == WORD:
                if tok.text in RULES and fields[0]:
                    # a new statement started: the previous one lacked a ';'
                    raise MissingSemicolon(
                        f"'{rule}' statement is missing its terminating ';'", tok.line
                    )
                fields[-1].append(tok)
            else:
                raise BuildfileSyntaxError(f"unexpected '{tok.text}' in '{rule}' statement", tok.line)

    def statement(self):
        tok = self.next()
        if tok.kind != WORD:
            raise BuildfileSyntaxError(f"unexpected '{tok.text}'", tok.line)
        rule = tok.text
        if rule == "actions":
            name, body = self.next(), self.next()
            if name is None or name.kind != WORD or body is None or body.kind != BODY:
                raise BuildfileSyntaxError("expected 'actions NAME { ... }'", tok.line)
            return ActionsDef(name.text, body.text, tok.line)
        if rule in DECLARATION_RULES:
            fields = self.fields(rule, tok)
            if len(fields) > 3:
                raise BuildfileSyntaxError(f"'{rule}' takes at most three fields", tok.line)
            fields += [[]] * (3 - len(fields))
            names, sources, reqs = fields
            if len(names) != 1:
                raise BuildfileSyntaxError(f"'{rule}' expects exactly one target name", tok.line)
            return Declaration(
                rule,
                names[0].text,
                tuple(t.text for t in sources),
                tuple(parse_requirement(t.text, self.registry, t.line) for t in reqs),
                tok.line,
            )
        if rule == "flags":
            fields = self.fields(rule, tok)
            if len(fields) == 2:
                fields.insert(1, [])
            head = fields[0]
            if len(fields) != 3 or len(head) != 2:
                raise BuildfileSyntaxError(
                    "expected 'flags TEMPLATE VARIABLE : CONDITION : VALUES ;'", tok.line
                )
            condition = tuple(
                p for t in fields[1] for p in _property_list(t.text, self.registry, t.line)
            )
            return FlagsDef(head[0].text, head[1].text, condition, tuple(t.text for t in fields[2]), tok.line)
        if rule == "project-requirements":
            fields = self.fields(rule, tok)
            if len(fields) != 1:
                raise BuildfileSyntaxError("'project-requirements' takes one field", tok.line)
            return ProjectRequirements(
                tuple(parse_requirement(t.text, self.registry, t.line) for t in fields[0]), tok.line
            )
        raise UnknownRule(f"unknown rule '{rule}'", tok.line)

    def parse(self):
        statements = []
        while self.peek() is not None:
            statements.append(self.statement())
        return statements


def parse_buildfile(tokens: list[Token], registry: FeatureRegistry | None = None) -> list:
    """Parse tokens into statements; properties are validated when ``registry`` is given."""
    return _Parser(list(tokens), registry).parse()


def parse_text(text: str, registry: FeatureRegistry | None = None) -> list:
    return parse_buildfile(tokenize(text), registry)


def format_statement(stmt) -> str:
    if isinstance(stmt, ActionsDef):
        return f"actions {stmt.name} {{{stmt.body}}}"
    if isinstance(stmt, FlagsDef):
        cond = " ".join(map(str, stmt.condition))
        return f"flags {stmt.template} {stmt.variable} : {cond} : {' '.join(stmt.values)} ;".replace("  ", " ")
    if isinstance(stmt, ProjectRequirements):
        return " ".join(["project-requirements", *map(str, stmt.requirements), ";"])
    words = [stmt.rule, stmt.name]
    if stmt.sources or stmt.requirements:
        words += [":", *stmt.sources]
    if stmt.requirements:
        words += [":", *map(str, stmt.requirements)]
    return " ".join(words + [";"])


def format_statements(statements) -> str:
    """Canonical buildfile text; ``parse_text(format_statements(s)) == s``."""
    return "".join(format_statement(s) + "\n" for s in statements)


@dataclass(frozen=True)
class Options:
    jobs: int = 1
    dry_run: bool = False
    list_targets: bool = False


@dataclass(frozen=True)
class BuildRequest:
    properties: PropertySet
    targets: tuple[str, ...] = ()


def parse_command_line(registry: FeatureRegistry, argv) -> tuple[Options, list[BuildRequest]]:
    """Classify argv into options, properties, and target names.

    ``--`` starts a new, fully independent build request.
    """
    jobs, dry_run, list_targets = 1, False, False
    requests = []
    props: list[Property] = []
    targets: list[str] = []
    for arg in argv:
        if arg == "--":
            requests.append(BuildRequest(PropertySet(props), tuple(targets)))
            props, targets = [], []
        elif arg.startswith("-"):
            m = re.fullmatch(r"-j(\d+)", arg)
            if m and int(m.group(1)) >= 1:
                jobs = int(m.group(1))
            elif arg == "--dry-run":
                dry_run = True
            elif arg == "--list-targets":
                list_targets = True
            else:
                raise UnknownOption(f"unknown option '{arg}'")
        elif "=" in arg:
            props.append(parse_property(registry, arg))
        else:
            targets.append(arg)
    requests.append(BuildRequest(PropertySet(props), tuple(targets)))
    return Options(jobs, dry_run, list_targets), requests
