"""Portable build features, property sets, and requirement refinement.

A *feature* is a named axis of build variation (``optimization``,
``link``, ...) with a closed value domain; a *property* assigns one value
to one feature, and a :class:`PropertySet` holds at most one value per
feature.  Requirements attached to metatargets and projects refine a
requested property set before generators see it.
"""

from __future__ import annotations

import os
import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator

from .errors import (
    DuplicateFeature,
    InvalidDefault,
    MalformedProperty,
    MissingRequiredFeature,
    NonConvergingConditionals,
    UnknownAdjuster,
    UnknownFeature,
    UnknownValue,
)

VALUE_ONLY = "value-only"
NAME_VALUE = "name-value"
HIDDEN = "hidden"
PATH_MODES = (VALUE_ONLY, NAME_VALUE, HIDDEN)

_TOKEN = re.compile(r"[^\s=]+")


def host_os() -> str:
    return "windows" if os.name == "nt" else "linux"


@dataclass(frozen=True)
class FeatureDefinition:
    """One build feature.

    An empty ``values`` tuple declares a free-form feature that accepts
    any whitespace-free string.
    """

    name: str
    values: tuple[str, ...] = ()
    default: str | None = None
    path_mode: str = NAME_VALUE
    registration_index: int = -1

    @property
    def free(self) -> bool:
        return not self.values

    def accepts(self, value: str) -> bool:
        if self.free:
            return bool(_TOKEN.fullmatch(value))
        return value in self.values


@dataclass(frozen=True, order=True)
class Property:
    feature: str
    value: str

    def __str__(self):
        return f"{self.feature}={self.value}"


class PropertySet(Mapping):
    """Immutable mapping from feature name to value.

    Equality and hashing ignore insertion order; use
    :meth:`FeatureRegistry.canonical` for the display order.
    """

    __slots__ = ("_values", "_hash")

    def __init__(self, values=()):
        if isinstance(values, Mapping):
            items = dict(values)
        else:
            items = {}
            for p in values:
                if isinstance(p, Property):
                    items[p.feature] = p.value
                else:
                    feature, value = p
                    items[feature] = value
        self._values = items
        self._hash = None

    def __getitem__(self, feature):
        return self._values[feature]

    def __iter__(self) -> Iterator[str]:
        return iter(self._values)

    def __len__(self):
        return len(self._values)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._values.items()))
        return self._hash

    def __eq__(self, other):
        if isinstance(other, PropertySet):
            return self._values == other._values
        if isinstance(other, Mapping):
            return self._values == dict(other)
        return NotImplemented

    def __repr__(self):
        inner = " ".join(f"{k}={v}" for k, v in sorted(self._values.items()))
        return f"PropertySet({inner})"

    def properties(self) -> list[Property]:
        return [Property(k, v) for k, v in self._values.items()]

    def contains(self, props: Iterable[Property]) -> bool:
        return all(self._values.get(p.feature) == p.value for p in props)

    def override(self, props: Iterable[Property]) -> PropertySet:
        values = dict(self._values)
        for p in props:
            values[p.feature] = p.value
        return PropertySet(values)


Adjuster = Callable[[PropertySet], Iterable]


@dataclass(frozen=True)
class Requirement:
    """A simple, conditional, or indirect override of request properties."""

    kind: str
    condition: tuple[Property, ...] = ()
    consequents: tuple[Property, ...] = ()
    rule_name: str | None = None

    def __post_init__(self):
        if self.kind == "simple":
            ok = not self.condition and self.consequents and self.rule_name is None
        elif self.kind == "conditional":
            ok = self.condition and self.consequents and self.rule_name is None
        elif self.kind == "indirect":
            ok = not self.condition and not self.consequents and self.rule_name
        else:
            ok = False
        if not ok:
            raise ValueError(f"malformed {self.kind} requirement")

    @classmethod
    def simple(cls, *consequents: Property) -> Requirement:
        return cls("simple", (), tuple(consequents))

    @classmethod
    def conditional(cls, condition, consequents) -> Requirement:
        return cls("conditional", tuple(condition), tuple(consequents))

    @classmethod
    def indirect(cls, rule_name: str) -> Requirement:
        return cls("indirect", rule_name=rule_name)

    def __str__(self):
        if self.kind == "indirect":
            return "@" + self.rule_name
        cons = ",".join(map(str, self.consequents))
        if self.kind == "simple":
            return cons
        return ",".join(map(str, self.condition)) + ":" + cons


class FeatureRegistry:
    """The closed vocabulary of features plus named adjuster functions."""

    def __init__(self, builtins=True):
        self._defs: dict[str, FeatureDefinition] = {}
        self.adjusters: dict[str, Adjuster] = {}
        if builtins:
            for d in builtin_features():
                self.register(d)

    def register(self, definition: FeatureDefinition) -> FeatureRegistry:
        if definition.name in self._defs:
            raise DuplicateFeature(f"feature '{definition.name}' is already registered")
        if not _TOKEN.fullmatch(definition.name):
            raise MalformedProperty(f"invalid feature name '{definition.name}'")
        if len(set(definition.values)) != len(definition.values):
            raise InvalidDefault(f"feature '{definition.name}' lists a value twice")
        if definition.path_mode not in PATH_MODES:
            raise ValueError(f"unknown path mode '{definition.path_mode}'")
        if definition.default is not None and not definition.accepts(definition.default):
            raise InvalidDefault(
                f"default '{definition.default}' is not a value of '{definition.name}'"
            )
        self._defs[definition.name] = replace(definition, registration_index=len(self._defs))
        return self

    def add_values(self, name: str, *values: str) -> FeatureRegistry:
        """Extend the domain of an existing closed feature (new toolsets use this)."""
        d = self.definition(name)
        if d.free:
            return self
        extra = tuple(v for v in values if v not in d.values)
        self._defs[name] = replace(d, values=d.values + extra)
        return self

    def register_adjuster(self, name: str, fn: Adjuster) -> FeatureRegistry:
        self.adjusters[name] = fn
        return self

    def definition(self, name: str) -> FeatureDefinition:
        try:
            return self._defs[name]
        except KeyError:
            raise UnknownFeature(f"unknown feature '{name}'") from None

    def __contains__(self, name):
        return name in self._defs

    def __iter__(self):
        return iter(self._defs.values())

    def validate_property(self, prop: Property) -> Property:
        d = self.definition(prop.feature)
        if not d.accepts(prop.value):
            if d.free:
                raise UnknownValue(f"invalid value '{prop.value}' for feature '{d.name}'")
            raise UnknownValue(
                f"'{prop.value}' is not a value of feature '{d.name}'"
                f" (expected one of: {', '.join(d.values)})"
            )
        return prop

    def validate(self, props: PropertySet) -> PropertySet:
        for p in props.properties():
            self.validate_property(p)
        return props

    def canonical(self, props: Mapping) -> list[Property]:
        """Properties ordered by feature registration index."""
        ordered = sorted(props, key=lambda f: self.definition(f).registration_index)
        return [Property(f, props[f]) for f in ordered]

    def format(self, props: Mapping) -> str:
        return " ".join(map(str, self.canonical(props)))


def builtin_features() -> list[FeatureDefinition]:
    return [
        FeatureDefinition("toolset", ("gcc", "msvc", "mockcc"), None, VALUE_ONLY),
        FeatureDefinition("variant", ("debug", "release"), "debug", VALUE_ONLY),
        FeatureDefinition("link", ("shared", "static"), "shared"),
        FeatureDefinition("optimization", ("none", "speed", "space"), "none"),
        FeatureDefinition("profiling", ("off", "on"), "off"),
        FeatureDefinition("target-os", ("linux", "windows"), host_os()),
    ]


def register_feature(registry: FeatureRegistry, definition: FeatureDefinition) -> FeatureRegistry:
    return registry.register(definition)


def parse_property(registry: FeatureRegistry, text: str) -> Property:
    """Parse and validate ``feature=value``."""
    if text.count("=") != 1:
        raise MalformedProperty(f"malformed property '{text}': expected feature=value")
    feature, value = text.split("=")
    if not _TOKEN.fullmatch(feature) or not _TOKEN.fullmatch(value):
        raise MalformedProperty(f"malformed property '{text}'")
    return registry.validate_property(Property(feature, value))


def _as_property(registry, item) -> Property:
    if isinstance(item, Property):
        return registry.validate_property(item)
    return parse_property(registry, str(item))


def refine(registry: FeatureRegistry, base: PropertySet, requirements: Iterable[Requirement]) -> PropertySet:
    """Apply requirements to ``base``.

    Simple requirements are applied first (later ones win), then
    conditionals are iterated to a fixed point, then each indirect
    adjuster runs exactly once in declaration order.  Conditionals are
    not re-run after adjusters.
    """
    requirements = list(requirements)
    current = base
    for req in requirements:
        if req.kind == "simple":
            current = current.override(req.consequents)

    conditionals = [r for r in requirements if r.kind == "conditional"]
    if conditionals:
        limit = len(conditionals) + 1
        for _ in range(limit):
            changed = False
            for req in conditionals:
                if current.contains(req.condition):
                    after = current.override(req.consequents)
                    changed = changed or after != current
                    current = after
            if not changed:
                break
        else:
            raise NonConvergingConditionals(
                f"conditional requirements did not converge after {limit} passes:"
                f" {' '.join(map(str, conditionals))}"
            )

    for req in requirements:
        if req.kind == "indirect":
            fn = registry.adjusters.get(req.rule_name)
            if fn is None:
                raise UnknownAdjuster(f"no adjuster named '{req.rule_name}'")
            adjusted = [_as_property(registry, p) for p in fn(current) or ()]
            current = current.override(adjusted)

    return registry.validate(current)


def expand_defaults(registry: FeatureRegistry, props: PropertySet) -> PropertySet:
    missing = [
        Property(d.name, d.default)
        for d in registry
        if d.default is not None and d.name not in props
    ]
    return props.override(missing) if missing else props


def property_path(registry: FeatureRegistry, props: PropertySet) -> str:
    """Relative variant directory for a default-expanded property set.

    Value-only features always contribute their value, so the common
    coordinates stay visible (``gcc/debug``); name-value features
    contribute ``name-value`` only when they differ from the default.
    """
    segments = []
    for d in registry:
        value = props.get(d.name)
        if d.path_mode == HIDDEN:
            continue
        if d.path_mode == VALUE_ONLY:
            if value is None:
                raise MissingRequiredFeature(
                    f"feature '{d.name}' has no value and no default"
                    f" (pass {d.name}=<value> on the command line)"
                )
            segments.append(value)
        elif value is not None and value != d.default:
            segments.append(f"{d.name}-{value}")
    return "/".join(segments)
