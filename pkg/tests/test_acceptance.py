"""Acceptance criteria, one test per criterion.

Run ``pytest tests/test_acceptance.py`` to get a PASS/FAIL line per
criterion in the terminal summary.  All randomized corpora use fixed
seeds.
"""

import hashlib
import io
import random
from pathlib import Path

import pytest

import forgevar
from forgevar.cli import Driver
from forgevar.environment import BuildEnvironment, default_environment
from forgevar.errors import AmbiguousGenerators
from forgevar.generators import GeneratorSpec, standard_generator
from forgevar.graph import ConcreteTarget, StateStore, TargetGraph, execute
from forgevar.frontend import parse_text
from forgevar.properties import (
    FeatureDefinition,
    FeatureRegistry,
    Property,
    PropertySet,
    Requirement,
    expand_defaults,
    property_path,
    refine,
)
from forgevar.toolset import Toolkit

GOLDEN = Path(__file__).parent / "golden"


def _expanded(registry, **kw):
    return expand_defaults(registry, PropertySet({k.replace("_", "-"): v for k, v in kw.items()}))


# 1 ------------------------------------------------------------------------

def _paper_generator(gen_id, ttype, toolset):
    def construct(ctx, name, properties, sources):
        return [ConcreteTarget(f"out/{gen_id}/{name}", tuple(sources), gen_id, gen_id)]

    return GeneratorSpec(gen_id, ttype, PropertySet({"toolset": toolset}), "OBJ", construct)


def test_criterion_1_paper_table_dispatch():
    env = BuildEnvironment()
    for row in (("gcc.link.dll", "LIB", "gcc"), ("gcc.link", "EXE", "gcc"), ("msvc.link.dll", "LIB", "msvc")):
        env.generators.register(_paper_generator(*row))
    reg = env.features

    gcc = _expanded(reg, toolset="gcc", link="shared")
    assert [s.id for s in env.generators.viable("LIB", gcc)] == ["gcc.link.dll"]
    [t] = env.generators.dispatch(env, "LIB", "helper", gcc, ["helper.cpp"])
    assert t.template == "gcc.link.dll"

    msvc = _expanded(reg, toolset="msvc")
    [t] = env.generators.dispatch(env, "LIB", "helper", msvc, ["helper.cpp"])
    assert t.template == "msvc.link.dll"

    env.generators.register(_paper_generator("gcc.link.dll.alt", "LIB", "gcc"))
    with pytest.raises(AmbiguousGenerators):
        env.generators.dispatch(env, "LIB", "helper", gcc, ["helper.cpp"])


# 2 ------------------------------------------------------------------------

def test_criterion_2_requirements_semantics():
    reg = FeatureRegistry()
    P = Property

    simple = Requirement.simple(P("link", "static"))
    base = PropertySet({"toolset": "gcc", "link": "shared"})
    assert refine(reg, base, [simple]) == {"toolset": "gcc", "link": "static"}

    [decl] = parse_text("lib helper : helper.cpp : toolset=msvc:link=static ;", reg)
    [cond] = decl.requirements
    assert refine(reg, PropertySet({"toolset": "msvc"}), [cond]) == {"toolset": "msvc", "link": "static"}
    assert refine(reg, PropertySet({"toolset": "gcc"}), [cond]) == {"toolset": "gcc"}

    calls = []
    reg.register_adjuster("adjust", lambda ps: calls.append(ps) or [P("optimization", "space")])
    out = refine(reg, PropertySet({"toolset": "gcc"}), [Requirement.indirect("adjust")])
    assert out == {"toolset": "gcc", "optimization": "space"} and len(calls) == 1

    rng = random.Random(2)
    domains = [(d.name, d.values) for d in reg]
    for _ in range(1000):
        base = PropertySet({f: rng.choice(v) for f, v in rng.sample(domains, rng.randint(0, len(domains)))})
        reqs = []
        for _ in range(rng.randint(0, 6)):
            f, v = rng.choice(domains)
            reqs.append(Requirement.simple(P(f, rng.choice(v))))
        once = refine(reg, base, reqs)
        assert refine(reg, once, reqs) == once, (base, reqs)


# 3 ------------------------------------------------------------------------

PAPER_FLAGS = """
actions gcc.link.dll {
    g++ -shared $(OPTIONS)
}

flags gcc.link.dll OPTIONS
    : <profiling>on : -pg ;
"""


def test_criterion_3_flags_mechanism():
    reg = FeatureRegistry()
    kit = Toolkit()
    kit.load_rules(PAPER_FLAGS, reg)
    on = kit.command("gcc.link.dll", _expanded(reg, toolset="gcc", profiling="on"), "t", [])
    off = kit.command("gcc.link.dll", _expanded(reg, toolset="gcc", profiling="off"), "t", [])
    assert on == "g++ -shared -pg" and "-pg" in on.split()
    assert off == "g++ -shared" and "-pg" not in off.split()

    # flag locality over a randomized corpus of 100 templates
    rng = random.Random(3)
    domains = [(d.name, d.values) for d in reg if d.values]
    variables = ["OPTIONS", "DEFINES", "LINKFLAGS", "INCLUDES"]
    kit = Toolkit()
    for i in range(100):
        used = rng.sample(variables, rng.randint(0, 3))
        words = [f"tool{i}"] + [f"$({v})" for v in used] + ["-o", "$(TARGET)", "$(SOURCES)"]
        rng.shuffle(words)
        kit.add_action(f"t{i}", " ".join(words))
        for v in used:
            for _ in range(rng.randint(1, 3)):
                f, vals = rng.choice(domains)
                kit.add_flags(f"t{i}", v, [Property(f, rng.choice(vals))], [f"-{v[0].lower()}{rng.randint(0, 99)}"])
    requests = [
        expand_defaults(reg, PropertySet({f: rng.choice(v) for f, v in domains})) for _ in range(10)
    ]

    def render_all():
        return {(name, n): kit.command(name, ps, "out", ["a", "b"])
                for name in kit.actions for n, ps in enumerate(requests)}

    before = render_all()
    for trial in range(20):
        target = f"t{rng.randrange(100)}"
        f, vals = rng.choice(domains)
        kit.add_flags(target, rng.choice(variables), [Property(f, rng.choice(vals))], [f"-new{trial}"])
        after = render_all()
        for key, cmd in after.items():
            if key[0] != target:
                assert cmd == before[key], key
        before = after


# 4 ------------------------------------------------------------------------

def test_criterion_4_path_encoding():
    reg = FeatureRegistry()
    ps = _expanded(reg, toolset="gcc", variant="debug")
    assert "bin/" + property_path(reg, ps) == "bin/gcc/debug"
    env = default_environment(["gcc"])
    [obj] = env.generators.dispatch(env, "OBJ", "helper", _expanded(env.features, toolset="gcc", variant="debug"),
                                    ["helper.cpp"])
    assert obj.path.rsplit("/", 1)[0] == "bin/gcc/debug"

    reg.register(FeatureDefinition("inlining", ("off", "on", "full"), "off"))
    reg.register(FeatureDefinition("threading", ("single", "multi"), "single"))
    reg.register(FeatureDefinition("rtti", ("on", "off"), "on"))
    reg.register(FeatureDefinition("cxxstd", (), "17"))
    rng = random.Random(4)
    sets = set()
    while len(sets) < 500:
        values = {}
        for d in reg:
            if d.name == "toolset" or rng.random() < 0.5:
                values[d.name] = rng.choice(d.values) if d.values else rng.choice(["11", "14", "17", "20", "23", "2c"])
        ps = expand_defaults(reg, PropertySet(values))
        if any(ps[d.name] != d.default for d in reg if d.default is not None):
            sets.add(ps)
    paths = {property_path(reg, ps) for ps in sets}
    assert len(paths) == 500


# 5 ------------------------------------------------------------------------

def test_criterion_5_multivariant_build(tmp_path):
    (tmp_path / "Buildfile").write_text("lib helper : helper.cpp ;\n")
    (tmp_path / "helper.cpp").write_text("int helper;\n")
    driver = Driver(tmp_path, out=io.StringIO())
    argv = "toolset=mockcc link=shared target-os=linux -- toolset=mockcc link=static target-os=linux".split()
    assert driver.run(argv) == 0

    shared = tmp_path / "bin/mockcc/debug/libhelper.so"
    static = tmp_path / "bin/mockcc/debug/link-static/libhelper.a"
    assert shared.exists() and static.exists()
    assert driver.project.evaluations["helper"] == 2

    by_variant = {}
    for t in driver.graph:
        by_variant.setdefault("link-static" in t.path, set()).add(str(Path(t.path).parent))
    assert by_variant[False] == {"bin/mockcc/debug"}
    assert by_variant[True] == {"bin/mockcc/debug/link-static"}


# 6 ------------------------------------------------------------------------

def test_criterion_6_keep_going_summary(tmp_path):
    files = {
        "Buildfile": "lib alpha : alpha.cpp ;\nlib beta : beta.cpp ;\nlib gamma : gamma.cpp ;\nexe app : main.cpp beta ;\n",
        "alpha.cpp": "int alpha;\n",
        "beta.cpp": "@fail\nint beta;\n",
        "gamma.cpp": "int gamma;\n",
        "main.cpp": "int main;\n",
    }
    for name, text in files.items():
        (tmp_path / name).write_text(text)
    out = io.StringIO()
    driver = Driver(tmp_path, out=out)
    assert driver.run(["toolset=mockcc", "target-os=linux", "-j3"]) == 1

    assert (tmp_path / "bin/mockcc/debug/libalpha.so").exists()
    assert (tmp_path / "bin/mockcc/debug/libgamma.so").exists()
    assert not (tmp_path / "bin/mockcc/debug/libbeta.so").exists()
    summary = [l for l in out.getvalue().splitlines() if l.startswith(("FAILED:", "SKIPPED:"))]
    summary.append(out.getvalue().splitlines()[-1])
    assert "\n".join(summary) + "\n" == (GOLDEN / "keep_going_summary.txt").read_text()


# 7 ------------------------------------------------------------------------

def _random_graph(rng, versions, n_nodes, n_sources):
    targets = []
    for i in range(n_nodes):
        pool = [f"src/s{j}" for j in range(n_sources)] + [f"out/n{j}" for j in range(i)]
        deps = tuple(sorted(rng.sample(pool, rng.randint(1, min(3, len(pool))))))
        cmd = f"@concat -o out/n{i} -- {' '.join(deps)} -- -v{versions[i]}"
        targets.append(ConcreteTarget(f"out/n{i}", deps, cmd, "mock"))
    return TargetGraph(targets)


def _run(graph, root, jobs=1):
    return execute(graph, StateStore(root / ".forgevar/state"), jobs, False, root, io.StringIO())


def test_criterion_7_incrementality_oracle(tmp_path):
    rng = random.Random(7)
    mismatches = []
    partial = 0
    for g in range(200):
        root = tmp_path / f"g{g}"
        (root / "src").mkdir(parents=True)
        n_nodes, n_sources = rng.randint(1, 10), rng.randint(1, 4)
        contents = {f"src/s{j}": f"source {j} of {g}\n" for j in range(n_sources)}
        for path, text in contents.items():
            (root / path).write_text(text)
        versions = [0] * n_nodes
        graph = _random_graph(random.Random(g), versions, n_nodes, n_sources)
        first = _run(graph, root)
        assert not first.failed and len(first.built) == n_nodes

        changed_sources, changed_cmds, deleted = set(), set(), set()
        for path, text in contents.items():
            if rng.random() < 0.3:
                new = text if rng.random() < 0.25 else text + f"edit {rng.random()}\n"
                (root / path).write_text(new)
                if new != text:
                    changed_sources.add(path)
        for i in range(n_nodes):
            if rng.random() < 0.2:
                versions[i] += 1
                changed_cmds.add(f"out/n{i}")
            if rng.random() < 0.1:
                (root / f"out/n{i}").unlink()
                deleted.add(f"out/n{i}")
        graph = _random_graph(random.Random(g), versions, n_nodes, n_sources)

        # brute force: a fingerprint changes iff the command changed, a source
        # dependency's bytes changed, or a node dependency's fingerprint changed
        def fp_changed(path):
            node = graph.nodes[path]
            if path in changed_cmds:
                return True
            return any(
                fp_changed(d) if d in graph.nodes else d in changed_sources for d in node.dependencies
            )

        expected = {p for p in graph.nodes if fp_changed(p) or p in deleted}
        second = _run(graph, root)
        partial += 0 < len(expected) < n_nodes
        if set(second.built) != expected or second.up_to_date_count != n_nodes - len(expected):
            mismatches.append((g, sorted(expected), second.built))
    assert mismatches == []
    assert partial >= 50, partial


# 8 ------------------------------------------------------------------------

def _report_key(report):
    return (
        sorted(report.built),
        sorted((s.path, s.blocked_by) for s in report.skipped),
        sorted((f.path, f.exit_code) for f in report.failed),
        report.up_to_date_count,
    )


def test_criterion_8_parallel_equivalence(tmp_path):
    rng = random.Random(8)
    with_failures = with_skips = 0
    for g in range(50):
        n_nodes, n_sources = rng.randint(2, 10), rng.randint(1, 4)
        graph = _random_graph(random.Random(1000 + g), [0] * n_nodes, n_nodes, n_sources)
        contents = {
            f"src/s{j}": ("@fail 3\n" if rng.random() < 0.25 else f"ok {j}\n") for j in range(n_sources)
        }
        reports = []
        for jobs in (1, 8):
            root = tmp_path / f"g{g}-j{jobs}"
            (root / "src").mkdir(parents=True)
            for path, text in contents.items():
                (root / path).write_text(text)
            reports.append(_report_key(_run(graph, root, jobs)))
            # a second, incremental run must agree as well
            reports.append(_report_key(_run(graph, root, jobs)))
        assert reports[0] == reports[2], g
        assert reports[1] == reports[3], g
        with_failures += bool(reports[0][2])
        with_skips += bool(reports[0][1])
    # the corpus must exercise keep-going, not just clean builds
    assert with_failures >= 10 and with_skips >= 5, (with_failures, with_skips)


# 9 ------------------------------------------------------------------------

TINYCC_RULES = """
actions tinycc.compile { @concat -o $(TARGET) -- $(SOURCES) -- -tiny $(CHECKS) }
actions tinycc.link { @concat -o $(TARGET) -- $(SOURCES) -- -tiny-exe }
actions tinycc.link.dll { @concat -o $(TARGET) -- $(SOURCES) -- -tiny-shared }
actions tinycc.archive { @concat -o $(TARGET) -- $(SOURCES) -- -tiny-static }
flags tinycc.compile CHECKS : tiny-checks=on : -bounds ;
"""


def _register_tinycc(env):
    env.features.add_values("toolset", "tinycc")
    env.features.register(FeatureDefinition("tiny-checks", ("off", "on"), "off"))
    env.toolkit.load_rules(TINYCC_RULES, env.features)
    ts = {"toolset": "tinycc"}
    env.generators.register(standard_generator("tinycc.compile", "OBJ", ts, "CPP"))
    env.generators.register(standard_generator("tinycc.link", "EXE", ts, "OBJ", accepts=("LIB",)))
    env.generators.register(standard_generator("tinycc.link.dll", "LIB", {**ts, "link": "shared"}, "OBJ", accepts=("LIB",)))
    env.generators.register(standard_generator("tinycc.archive", "LIB", {**ts, "link": "static"}, "OBJ", accepts=("LIB",)))


def _core_digest():
    root = Path(forgevar.__file__).parent
    h = hashlib.sha256()
    for path in sorted(root.rglob("*")):
        if path.is_file() and path.suffix in (".py", ".rules"):
            h.update(str(path.relative_to(root)).encode() + path.read_bytes())
    return h.hexdigest()


def test_criterion_9_extensibility(tmp_path):
    core_before = _core_digest()
    buildfile = "lib helper : helper.cpp ;\nexe app : main.cpp helper ;\n"
    expected = {
        ("mockcc", "linux"): ["bin/mockcc/debug/libhelper.so", "bin/mockcc/debug/app"],
        ("mockcc", "windows"): ["bin/mockcc/debug/target-os-windows/helper.dll",
                                "bin/mockcc/debug/target-os-windows/app.exe"],
        ("tinycc", "linux"): ["bin/tinycc/debug/tiny-checks-on/libhelper.so",
                              "bin/tinycc/debug/tiny-checks-on/app"],
        ("tinycc", "windows"): ["bin/tinycc/debug/target-os-windows/tiny-checks-on/helper.dll",
                                "bin/tinycc/debug/target-os-windows/tiny-checks-on/app.exe"],
    }
    root = tmp_path / "ws"
    root.mkdir()
    (root / "Buildfile").write_text(buildfile)
    (root / "helper.cpp").write_text("int helper;\n")
    (root / "main.cpp").write_text("int main;\n")
    for (toolset, os_name), outputs in expected.items():
        env = default_environment()
        _register_tinycc(env)
        argv = [f"toolset={toolset}", f"target-os={os_name}"]
        if toolset == "tinycc":
            argv.append("tiny-checks=on")
        assert Driver(root, env=env, out=io.StringIO()).run(argv) == 0
        for out in outputs:
            assert (root / out).is_file(), out
        assert (root / "Buildfile").read_text() == buildfile

    obj = (root / "bin/tinycc/debug/tiny-checks-on/helper.o").read_text()
    assert obj.startswith("#cmd: @concat -o bin/tinycc/debug/tiny-checks-on/helper.o -- helper.cpp -- -tiny -bounds\n")
    assert _core_digest() == core_before
