"""forgevar: a multivariant build tool with portable properties and generator dispatch."""

from .environment import BuildEnvironment, default_environment
from .errors import BuildError
from .frontend import BuildRequest, parse_buildfile, parse_command_line, tokenize
from .generators import GeneratorRegistry, GeneratorSpec, standard_generator
from .graph import BuildReport, ConcreteTarget, StateStore, TargetGraph, execute
from .metatargets import Metatarget, Project
from .properties import (
    FeatureDefinition,
    FeatureRegistry,
    Property,
    PropertySet,
    Requirement,
    expand_defaults,
    parse_property,
    property_path,
    refine,
)
from .toolset import Toolkit, load_builtin_toolsets

__version__ = "0.1.0"
