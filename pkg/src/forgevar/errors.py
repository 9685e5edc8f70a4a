"""Exception hierarchy shared by every forgevar module."""


class BuildError(Exception):
    """Base class for all errors reported by forgevar.

    ``line`` (and ``source``, the file name) are set for errors that
    originate in a buildfile, and
    ``trace`` accumulates the generation context (outermost last) when an
    error propagates out of a recursive dispatch.
    """

    def __init__(self, message, line=None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.source = None
        self.trace = []

    def __str__(self):
        text = self.message
        if self.source and self.line is not None:
            text = f"{self.source}:{self.line}: {text}"
        elif self.source:
            text = f"{self.source}: {text}"
        elif self.line is not None:
            text = f"line {self.line}: {text}"
        for frame in self.trace:
            text += f"\n  while {frame}"
        return text


# property model
class DuplicateFeature(BuildError):
    pass


class InvalidDefault(BuildError):
    pass


class UnknownFeature(BuildError):
    pass


class UnknownValue(BuildError):
    pass


class MalformedProperty(BuildError):
    pass


class NonConvergingConditionals(BuildError):
    pass


class UnknownAdjuster(BuildError):
    pass


class MissingRequiredFeature(BuildError):
    pass


# buildfile language and command line
class BuildfileSyntaxError(BuildError):
    pass


class UnterminatedActions(BuildfileSyntaxError):
    pass


class UnknownRule(BuildfileSyntaxError):
    pass


class MissingSemicolon(BuildfileSyntaxError):
    pass


class MalformedRequirement(BuildfileSyntaxError):
    pass


class UnknownOption(BuildError):
    pass


# metatargets
class DuplicateMetatarget(BuildError):
    pass


class UnknownMetatarget(BuildError):
    pass


class CyclicMetatargetReference(BuildError):
    pass


class InvalidPath(BuildError):
    pass


# generators
class DuplicateGenerator(BuildError):
    pass


class NoViableGenerator(BuildError):
    pass


class AmbiguousGenerators(BuildError):
    pass


# toolsets
class UnknownPlaceholder(BuildError):
    pass


class NoNamingRule(BuildError):
    pass


class ReservedVariable(BuildError):
    pass


# dependency graph
class ConflictingTarget(BuildError):
    pass


class MissingSource(BuildError):
    pass


class CyclicGraph(BuildError):
    pass


class StateStoreIO(BuildError):
    pass
