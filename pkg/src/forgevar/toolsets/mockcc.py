"""Hermetic fake compiler: commands are built-in pseudo-commands, no toolchain needed."""

from . import define_toolset


def register(env):
    return define_toolset(env, "mockcc")
