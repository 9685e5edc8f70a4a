"""Metatargets: deferred declarations evaluated once per build request.

Declaring a metatarget consults no generator.  :meth:`Project.evaluate`
refines the request with project and metatarget requirements, evaluates
referenced metatargets with the original request, and hands everything to
the dispatching function.  Results are memoized on the refined properties.
"""

from __future__ import annotations

import posixpath
from collections import Counter
from dataclasses import dataclass, field
from typing import Union

from .environment import BuildEnvironment
from .errors import BuildError, CyclicMetatargetReference, DuplicateMetatarget, InvalidPath, UnknownMetatarget
from .frontend import Declaration, ProjectRequirements
from .graph import ConcreteTarget
from .properties import PropertySet, Requirement, expand_defaults, property_path, refine

TARGET_TYPES = {"lib": "LIB", "exe": "EXE", "obj": "OBJ"}


@dataclass(frozen=True)
class FileSource:
    path: str


@dataclass(frozen=True)
class TargetRef:
    name: str


SourceRef = Union[FileSource, TargetRef]


@dataclass(frozen=True)
class Metatarget:
    name: str
    target_type: str
    sources: tuple[SourceRef, ...] = ()
    requirements: tuple[Requirement, ...] = ()


def _check_path(path, what):
    if not path or any(c.isspace() for c in path):
        raise InvalidPath(f"{what} '{path}' is empty or contains whitespace")
    if posixpath.isabs(path) or ".." in path.split("/"):
        raise InvalidPath(f"{what} '{path}' must be relative and stay inside the workspace")


@dataclass
class Project:
    env: BuildEnvironment
    requirements: list[Requirement] = field(default_factory=list)
    metatargets: dict[str, Metatarget] = field(default_factory=dict)
    # name -> number of real (non-memoized) evaluations
    evaluations: Counter = field(default_factory=Counter)
    _memo: dict = field(default_factory=dict, repr=False)

    def declare(self, decl: Declaration, known_names=()) -> Metatarget:
        """Record a declaration; bare source words naming a metatarget become references."""
        if decl.name in self.metatargets:
            raise DuplicateMetatarget(f"metatarget '{decl.name}' is already declared", decl.line)
        _check_path(decl.name, "target name")
        known = set(self.metatargets) | set(known_names)
        sources = []
        for word in decl.sources:
            if word in known:
                sources.append(TargetRef(word))
            else:
                _check_path(word, "source")
                sources.append(FileSource(word))
        mt = Metatarget(decl.name, TARGET_TYPES[decl.rule], tuple(sources), tuple(decl.requirements))
        self.metatargets[mt.name] = mt
        return mt

    def load(self, statements) -> Project:
        """Declare every metatarget and collect project requirements from parsed statements."""
        names = {s.name for s in statements if isinstance(s, Declaration)}
        for stmt in statements:
            if isinstance(stmt, Declaration):
                self.declare(stmt, names)
            elif isinstance(stmt, ProjectRequirements):
                self.requirements.extend(stmt.requirements)
        return self

    def effective_properties(self, name: str, request: PropertySet) -> PropertySet:
        mt = self._get(name)
        features = self.env.features
        props = refine(features, request, self.requirements)
        props = expand_defaults(features, refine(features, props, mt.requirements))
        # fails early when a required feature such as toolset is missing
        property_path(features, props)
        return props

    def _get(self, name):
        try:
            return self.metatargets[name]
        except KeyError:
            raise UnknownMetatarget(f"no metatarget named '{name}'") from None

    def evaluate(self, name: str, request: PropertySet, _stack=()) -> tuple[ConcreteTarget, ...]:
        """Concrete targets for ``name`` under ``request``, primary product first."""
        if name in _stack:
            chain = " -> ".join(_stack[_stack.index(name):] + (name,))
            raise CyclicMetatargetReference(f"metatarget reference cycle: {chain}")
        mt = self._get(name)
        props = self.effective_properties(name, request)
        key = (name, props)
        if key in self._memo:
            return self._memo[key]

        sources, extra = [], []
        for src in mt.sources:
            if isinstance(src, TargetRef):
                produced = self.evaluate(src.name, request, _stack + (name,))
                sources.append(produced[0].path)
                extra.extend(produced)
            else:
                sources.append(src.path)
        self.evaluations[name] += 1
        try:
            targets = self.env.generators.dispatch(self.env, mt.target_type, name, props, sources)
        except BuildError as exc:
            exc.trace.append(f"evaluating metatarget '{name}'")
            raise
        seen, result = set(), []
        for t in list(targets) + extra:
            if t.path not in seen:
                seen.add(t.path)
                result.append(t)
        self._memo[key] = tuple(result)
        return self._memo[key]
