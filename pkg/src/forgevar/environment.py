"""The bundle of registries that generators and metatargets work against."""

from dataclasses import dataclass, field

from .generators import GeneratorRegistry
from .properties import FeatureRegistry
from .toolset import Toolkit, load_builtin_toolsets


@dataclass
class BuildEnvironment:
    features: FeatureRegistry = field(default_factory=FeatureRegistry)
    generators: GeneratorRegistry = field(default_factory=GeneratorRegistry)
    toolkit: Toolkit = field(default_factory=Toolkit)
    build_root: str = "bin"


def default_environment(toolsets=None, build_root="bin") -> BuildEnvironment:
    """A fresh environment with the shipped toolsets (or just ``toolsets``) loaded."""
    env = BuildEnvironment(build_root=build_root)
    return load_builtin_toolsets(env, toolsets)
