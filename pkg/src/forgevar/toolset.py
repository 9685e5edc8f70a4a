"""Command templates, flag rules, target naming, and toolset loading.

A toolset module describes one compiler family.  Its command templates
(``actions``) and property-to-variable mappings (``flags``) are written in
buildfile syntax; its generators are registered through the host API.
"""

from __future__ import annotations

import importlib
import pkgutil
import re
from dataclasses import dataclass
from typing import Iterable

from .errors import BuildfileSyntaxError, NoNamingRule, ReservedVariable, UnknownPlaceholder
from .frontend import ActionsDef, FlagsDef, parse_text
from .properties import FeatureRegistry, Property, PropertySet

RESERVED = ("TARGET", "SOURCES")
_PLACEHOLDER = re.compile(r"\$\(([^)]*)\)")
_VARIABLE = re.compile(r"[A-Z][A-Z0-9_]*")


@dataclass(frozen=True)
class ActionTemplate:
    name: str
    body: str


@dataclass(frozen=True)
class FlagRule:
    template: str
    variable: str
    condition: tuple[Property, ...]
    additions: tuple[str, ...]


@dataclass(frozen=True)
class NamingRule:
    target_type: str
    target_os: str
    link: str  # "*" matches any link value
    prefix: str
    suffix: str


DEFAULT_NAMING = (
    NamingRule("LIB", "linux", "shared", "lib", ".so"),
    NamingRule("LIB", "linux", "static", "lib", ".a"),
    NamingRule("LIB", "windows", "shared", "", ".dll"),
    NamingRule("LIB", "windows", "static", "", ".lib"),
    NamingRule("EXE", "linux", "*", "", ""),
    NamingRule("EXE", "windows", "*", "", ".exe"),
    NamingRule("OBJ", "linux", "*", "", ".o"),
    NamingRule("OBJ", "windows", "*", "", ".obj"),
)


def bind_variables(rules: Iterable[FlagRule], template_name: str, properties: PropertySet) -> dict[str, list[str]]:
    """Collect flag additions for ``template_name`` under ``properties``.

    Every variable mentioned by a rule for the template is present in the
    result, mapped to ``[]`` when no rule's condition holds.
    """
    bindings: dict[str, list[str]] = {}
    for rule in rules:
        if rule.template != template_name:
            continue
        values = bindings.setdefault(rule.variable, [])
        if properties.contains(rule.condition):
            values.extend(rule.additions)
    return bindings


def render_command(template: ActionTemplate, bindings, target_path: str, source_paths) -> str:
    """Substitute ``$(VAR)`` placeholders in the template body.

    Values are joined with single spaces; runs of blanks left behind by
    empty variables are collapsed, and blank lines are dropped.
    """
    sources = " ".join(source_paths)
    lines = template.body.strip("\n").splitlines()

    def substitute(lineno, line):
        def repl(m):
            name = m.group(1)
            if name == "TARGET":
                return target_path
            if name == "SOURCES":
                return sources
            if not _VARIABLE.fullmatch(name) or name not in bindings:
                raise UnknownPlaceholder(
                    f"unknown placeholder '$({name})' in template '{template.name}'", lineno
                )
            return " ".join(bindings[name])

        if "$(" in _PLACEHOLDER.sub("", line):
            raise UnknownPlaceholder(f"unterminated placeholder in template '{template.name}'", lineno)
        return " ".join(_PLACEHOLDER.sub(repl, line).split())

    rendered = [substitute(i, line) for i, line in enumerate(lines, 1)]
    return "\n".join(r for r in rendered if r)


def target_file_name(rules: Iterable[NamingRule], base_name: str, target_type: str, properties: PropertySet) -> str:
    os_name = properties.get("target-os")
    link = properties.get("link")
    for rule in rules:
        if rule.target_type != target_type or rule.target_os != os_name:
            continue
        if rule.link == "*" or rule.link == link:
            return rule.prefix + base_name + rule.suffix
    raise NoNamingRule(f"no naming rule for type {target_type} on target-os={os_name} link={link}")


class Toolkit:
    """Action templates, flag rules, and naming rules known to a build."""

    def __init__(self, naming=DEFAULT_NAMING):
        self.actions: dict[str, ActionTemplate] = {}
        self.flags: list[FlagRule] = []
        self.naming: list[NamingRule] = list(naming)

    def add_action(self, name: str, body: str):
        self.actions[name] = ActionTemplate(name, body)

    def add_flags(self, template, variable, condition, additions):
        if variable in RESERVED:
            raise ReservedVariable(f"'{variable}' is reserved and cannot be bound by flags")
        self.flags.append(FlagRule(template, variable, tuple(condition), tuple(additions)))

    def add_naming(self, rule: NamingRule):
        for i, old in enumerate(self.naming):
            if (old.target_type, old.target_os, old.link) == (rule.target_type, rule.target_os, rule.link):
                self.naming[i] = rule
                return
        self.naming.append(rule)

    def load_rules(self, text: str, registry: FeatureRegistry):
        """Load ``actions`` and ``flags`` statements written in buildfile syntax."""
        for stmt in parse_text(text, registry):
            if isinstance(stmt, ActionsDef):
                self.add_action(stmt.name, stmt.body)
            elif isinstance(stmt, FlagsDef):
                self.add_flags(stmt.template, stmt.variable, stmt.condition, stmt.values)
            else:
                raise BuildfileSyntaxError(
                    "toolset rule files may only contain 'actions' and 'flags'", stmt.line
                )

    def file_name(self, base_name, target_type, properties) -> str:
        return target_file_name(self.naming, base_name, target_type, properties)

    def command(self, template_name, properties, target_path, source_paths) -> str:
        try:
            template = self.actions[template_name]
        except KeyError:
            raise UnknownPlaceholder(f"no actions defined for template '{template_name}'") from None
        bindings = bind_variables(self.flags, template_name, properties)
        return render_command(template, bindings, target_path, source_paths)


def builtin_toolset_names() -> list[str]:
    from . import toolsets

    return sorted(m.name for m in pkgutil.iter_modules(toolsets.__path__))


def load_builtin_toolsets(env, names=None):
    """Import and register the shipped toolset modules (all by default)."""
    for name in builtin_toolset_names() if names is None else names:
        module = importlib.import_module(f"{__package__}.toolsets.{name}")
        module.register(env)
    return env
