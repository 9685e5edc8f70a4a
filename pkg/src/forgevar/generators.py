"""The generator table and the dispatching function.

Dispatch filters registered generators by target type and by required
properties, calls every survivor, and insists that exactly one of them
produces targets.
"""

from __future__ import annotations

import posixpath
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .errors import AmbiguousGenerators, BuildError, DuplicateGenerator, NoViableGenerator
from .graph import ConcreteTarget
from .properties import PropertySet, property_path

# extension -> type; the OS-specific rows follow the naming table
SOURCE_TYPES = {
    "common": {".c": "CPP", ".cc": "CPP", ".cpp": "CPP", ".cxx": "CPP", ".s": "ASM", ".S": "ASM", ".asm": "ASM"},
    "linux": {".o": "OBJ", ".so": "LIB", ".a": "LIB"},
    "windows": {".obj": "OBJ", ".dll": "LIB", ".lib": "LIB"},
}


def source_type(path: str, target_os: str | None) -> str | None:
    ext = posixpath.splitext(path)[1]
    return SOURCE_TYPES.get(target_os, {}).get(ext) or SOURCE_TYPES["common"].get(ext)


Construct = Callable[..., Optional[Sequence[ConcreteTarget]]]


@dataclass(frozen=True)
class GeneratorSpec:
    """One row of the generator table.

    ``construct(ctx, name, properties, sources)`` returns the produced
    targets, primary product first, or ``None`` to decline.
    """

    id: str
    target_type: str
    required: PropertySet
    consumes: str
    construct: Construct = field(compare=False)
    template: str | None = None
    accepts: tuple[str, ...] = ()

    @property
    def template_name(self) -> str:
        return self.template or self.id


class GeneratorRegistry:
    def __init__(self):
        self.specs: list[GeneratorSpec] = []
        self.dispatch_count = 0

    def register(self, spec: GeneratorSpec) -> GeneratorRegistry:
        if any(s.id == spec.id for s in self.specs):
            raise DuplicateGenerator(f"generator '{spec.id}' is already registered")
        self.specs.append(spec)
        return self

    def produced_types(self) -> set[str]:
        return {s.target_type for s in self.specs}

    def viable(self, target_type: str, properties: PropertySet) -> list[GeneratorSpec]:
        return [
            s for s in self.specs
            if s.target_type == target_type and properties.contains(s.required.properties())
        ]

    def dispatch(self, ctx, target_type, name, properties, sources) -> list[ConcreteTarget]:
        self.dispatch_count += 1
        candidates = self.viable(target_type, properties)
        results = []
        for spec in candidates:
            try:
                targets = spec.construct(ctx, name, properties, list(sources))
            except BuildError as exc:
                exc.trace.append(f"generating {target_type} '{name}' with {spec.id}")
                raise
            if targets:
                results.append((spec, list(targets)))
        props = ctx.features.format(properties) if ctx is not None else repr(properties)
        if not results:
            why = "no generator" if not candidates else "no generator succeeded"
            raise NoViableGenerator(
                f"{why} for type {target_type} '{name}' with properties: {props}"
                + (f" (declined: {', '.join(s.id for s in candidates)})" if candidates else "")
            )
        if len(results) > 1:
            raise AmbiguousGenerators(
                f"ambiguous generators for type {target_type} '{name}':"
                f" {', '.join(s.id for s, _ in results)}"
            )
        return results[0][1]


def register_generator(registry: GeneratorRegistry, spec: GeneratorSpec) -> GeneratorRegistry:
    return registry.register(spec)


def standard_generator(gen_id, target_type, required, consumes, accepts=(), template=None) -> GeneratorSpec:
    """A generator that renders one command producing one file.

    Sources of the consumed type (or of a type in ``accepts``) are used
    directly.  Other sources are dispatched to the consumed type, one
    target per source, when some generator produces that type; when the
    consumed type is a plain source type such sources make the generator
    decline instead.
    """
    if not isinstance(required, PropertySet):
        required = PropertySet(required)

    def construct(ctx, name, properties, sources):
        target_os = properties.get("target-os")
        inputs, extra = [], []
        recursive = consumes in ctx.generators.produced_types()
        for src in sources:
            kind = source_type(src, target_os)
            if kind == consumes or kind in accepts:
                inputs.append(src)
            elif recursive:
                stem = posixpath.splitext(src)[0]
                produced = ctx.generators.dispatch(ctx, consumes, stem, properties, [src])
                inputs.append(produced[0].path)
                extra.extend(produced)
            else:
                return None
        if not inputs:
            return None
        directory = posixpath.join(ctx.build_root, property_path(ctx.features, properties))
        base_dir, base = posixpath.split(name)
        path = posixpath.join(directory, base_dir, ctx.toolkit.file_name(base, target_type, properties))
        tmpl = template or gen_id
        command = ctx.toolkit.command(tmpl, properties, path, inputs)
        return [ConcreteTarget(path, tuple(inputs), command, tmpl)] + extra

    return GeneratorSpec(gen_id, target_type, required, consumes, construct, template, tuple(accepts))
