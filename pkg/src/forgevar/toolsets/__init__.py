"""Shipped toolset modules.

Every submodule exposes ``register(env)`` and is discovered by
:func:`forgevar.toolset.load_builtin_toolsets`; deleting a module removes
that toolset and nothing else.
"""

from importlib import resources

from ..generators import standard_generator


def define_toolset(env, name, rules=None):
    """Register the four standard generators for toolset ``name``.

    The action templates and flags come from ``<name>.rules`` next to this
    file unless ``rules`` text is given.
    """
    env.features.add_values("toolset", name)
    if rules is None:
        rules = resources.files(__name__).joinpath(f"{name}.rules").read_text()
    env.toolkit.load_rules(rules, env.features)
    ts = {"toolset": name}
    for spec in (
        standard_generator(f"{name}.compile", "OBJ", ts, "CPP"),
        standard_generator(f"{name}.link", "EXE", ts, "OBJ", accepts=("LIB",)),
        standard_generator(f"{name}.link.dll", "LIB", {**ts, "link": "shared"}, "OBJ", accepts=("LIB",)),
        standard_generator(f"{name}.archive", "LIB", {**ts, "link": "static"}, "OBJ", accepts=("LIB",)),
    ):
        env.generators.register(spec)
    return env
