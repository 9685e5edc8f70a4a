"""Microsoft cl/link/lib."""

from . import define_toolset


def register(env):
    return define_toolset(env, "msvc")
