"""GNU-style compiler driver and binutils archiver."""

from . import define_toolset


def register(env):
    return define_toolset(env, "gcc")
