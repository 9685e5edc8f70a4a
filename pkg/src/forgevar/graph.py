"""Concrete-target dependency graph, fingerprints, and the keep-going executor."""

from __future__ import annotations

import hashlib
import os
import shlex
import subprocess
import sys
import tempfile
from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConflictingTarget, CyclicGraph, MissingSource, StateStoreIO


@dataclass(frozen=True)
class ConcreteTarget:
    path: str
    dependencies: tuple[str, ...]
    command: str
    template: str = ""


class TargetGraph:
    def __init__(self, targets=()):
        self.nodes: dict[str, ConcreteTarget] = {}
        for t in targets:
            self.add(t)

    def add(self, target: ConcreteTarget) -> TargetGraph:
        old = self.nodes.get(target.path)
        if old is None:
            self.nodes[target.path] = target
        elif (old.command, old.dependencies) != (target.command, target.dependencies):
            raise ConflictingTarget(
                f"target '{target.path}' is produced by two different commands:\n"
                f"  {old.command}\n  {target.command}"
            )
        return self

    def __contains__(self, path):
        return path in self.nodes

    def __len__(self):
        return len(self.nodes)

    def __iter__(self):
        return iter(self.nodes.values())

    def dependents(self) -> dict[str, list[str]]:
        out = {p: [] for p in self.nodes}
        for t in self.nodes.values():
            for d in t.dependencies:
                if d in out:
                    out[d].append(t.path)
        return out

    def topological_order(self) -> list[str]:
        """Dependency-first order, ties broken by path; raises CyclicGraph."""
        order, state = [], {}

        def visit(path, stack):
            mark = state.get(path)
            if mark == "done":
                return
            if mark == "active":
                cycle = stack[stack.index(path):] + [path]
                raise CyclicGraph("dependency cycle: " + " -> ".join(cycle))
            state[path] = "active"
            stack.append(path)
            for dep in sorted(self.nodes[path].dependencies):
                if dep in self.nodes:
                    visit(dep, stack)
            stack.pop()
            state[path] = "done"
            order.append(path)

        for path in sorted(self.nodes):
            visit(path, [])
        return order


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def fingerprint(command: str, dependency_digests) -> str:
    """Digest over the command and the sorted (path, digest) pairs of its dependencies."""
    h = hashlib.sha256()
    h.update(command.encode())
    for path, digest in sorted(dependency_digests):
        h.update(b"\0" + path.encode() + b"\0" + digest.encode())
    return h.hexdigest()


class Fingerprinter:
    """Computes target fingerprints for one graph rooted at ``root``.

    A source file contributes its content hash; a graph node contributes
    its own fingerprint, so any change propagates to every dependent.
    """

    def __init__(self, graph: TargetGraph, root="."):
        self.graph = graph
        self.root = Path(root)
        self._cache: dict[str, str] = {}

    def digest(self, path: str) -> str:
        if path in self._cache:
            return self._cache[path]
        if path in self.graph:
            t = self.graph.nodes[path]
            value = fingerprint(t.command, [(d, self.digest(d)) for d in t.dependencies])
        else:
            try:
                value = file_digest(self.root / path)
            except OSError:
                raise MissingSource(f"source '{path}' does not exist and no target builds it") from None
        self._cache[path] = value
        return value


class StateStore:
    """Persisted fingerprints: one ``path<TAB>digest`` line per built target."""

    def __init__(self, path):
        self.path = Path(path)
        self.entries: dict[str, str] = {}
        if self.path.exists():
            self.load()

    def load(self):
        try:
            text = self.path.read_text()
        except OSError as exc:
            raise StateStoreIO(f"cannot read state file {self.path}: {exc}") from None
        entries = {}
        for n, line in enumerate(text.splitlines(), 1):
            parts = line.split("\t")
            if len(parts) != 2:
                raise StateStoreIO(f"{self.path}:{n}: malformed state line")
            entries[parts[0]] = parts[1]
        self.entries = entries

    def get(self, path):
        return self.entries.get(path)

    def set(self, path, digest):
        self.entries[path] = digest

    def drop(self, path):
        self.entries.pop(path, None)

    def save(self):
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=self.path.parent, prefix=".state-")
            with os.fdopen(fd, "w") as f:
                f.writelines(f"{p}\t{d}\n" for p, d in sorted(self.entries.items()))
            os.replace(tmp, self.path)
        except OSError as exc:
            raise StateStoreIO(f"cannot write state file {self.path}: {exc}") from None


def out_of_date(graph: TargetGraph, store: StateStore, target: ConcreteTarget, root=".", fingerprints=None) -> bool:
    fingerprints = fingerprints or Fingerprinter(graph, root)
    current = fingerprints.digest(target.path)
    if not (Path(root) / target.path).exists():
        return True
    return store.get(target.path) != current


# -- command execution -----------------------------------------------------

def _pseudo_concat(args, root: Path, command: str):
    """``@concat -o TARGET -- SOURCES... [-- OPTIONS...]``"""
    if len(args) < 3 or args[0] != "-o" or args[2] != "--":
        return 2, f"@concat: usage: @concat -o TARGET -- SOURCES [-- OPTIONS]\n"
    target, rest = args[1], args[3:]
    sources = rest[: rest.index("--")] if "--" in rest else rest
    chunks = []
    for src in sources:
        data = (root / src).read_bytes()
        first = data.split(b"\n", 1)[0].split()
        if first[:1] == [b"@fail"]:
            code = int(first[1]) if len(first) > 1 and first[1].isdigit() else 1
            return code, f"{src}:1: error: injected failure\n"
        chunks.append(data)
    out = root / target
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(b"#cmd: " + command.encode() + b"\n" + b"".join(chunks))
    return 0, ""


def run_command(command: str, root=".") -> tuple[int, str]:
    """Run one rendered command; returns (exit code, combined output).

    Commands starting with ``@`` are built-in pseudo-commands (``@concat``,
    ``@fail``); everything else goes to the system shell.
    """
    root = Path(root)
    if command.startswith("@"):
        args = shlex.split(command)
        name, args = args[0], args[1:]
        try:
            if name == "@concat":
                return _pseudo_concat(args, root, command)
            if name == "@fail":
                code = int(args[0]) if args and args[0].isdigit() else 1
                return code, "@fail: injected failure\n"
        except OSError as exc:
            return 1, f"{name}: {exc}\n"
        return 127, f"{name}: unknown pseudo-command\n"
    proc = subprocess.run(
        command, shell=True, cwd=root, stdout=subprocess.PIPE, stderr=subprocess.STDOUT, text=True
    )
    return proc.returncode, proc.stdout


@dataclass(frozen=True, order=True)
class FailedTarget:
    path: str
    exit_code: int
    output: str = field(default="", compare=False)


@dataclass(frozen=True, order=True)
class SkippedTarget:
    path: str
    blocked_by: str


@dataclass
class BuildReport:
    built: list[str] = field(default_factory=list)
    skipped: list[SkippedTarget] = field(default_factory=list)
    failed: list[FailedTarget] = field(default_factory=list)
    up_to_date_count: int = 0

    @property
    def ok(self):
        return not self.failed

    def summary_lines(self) -> list[str]:
        lines = [f"FAILED: {f.path} (exit {f.exit_code})" for f in self.failed]
        lines += [f"SKIPPED: {s.path} (blocked by {s.blocked_by})" for s in self.skipped]
        lines.append(
            f"{len(self.built)} built, {len(self.failed)} failed,"
            f" {len(self.skipped)} skipped, {self.up_to_date_count} up to date"
        )
        return lines


def execute(graph: TargetGraph, store: StateStore, jobs=1, dry_run=False, root=".", out=None) -> BuildReport:
    """Bring every target in ``graph`` up to date.

    Up to ``jobs`` commands run concurrently.  A failure skips all of the
    failed target's transitive dependents while independent targets keep
    building; fingerprints are persisted only for successful commands.
    With ``dry_run`` the commands that would run are printed and reported
    as built, and nothing is executed or persisted.
    """
    out = out or sys.stdout
    root = Path(root)
    order = graph.topological_order()
    fps = Fingerprinter(graph, root)
    for t in graph:
        for dep in t.dependencies:
            if dep not in graph:
                fps.digest(dep)

    dependents = graph.dependents()
    waiting = {p: sum(d in graph for d in set(graph.nodes[p].dependencies)) for p in order}
    rank = {p: i for i, p in enumerate(order)}
    ready = sorted((p for p in order if waiting[p] == 0), key=rank.get)
    report = BuildReport()
    blocked: set[str] = set()

    def release(path):
        for child in dependents[path]:
            waiting[child] -= 1
            if waiting[child] == 0 and child not in blocked:
                ready.append(child)
        ready.sort(key=rank.get)

    def block(path):
        stack = list(dependents[path])
        while stack:
            p = stack.pop()
            if p not in blocked:
                blocked.add(p)
                stack.extend(dependents[p])

    running = {}
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        while ready or running:
            while ready and len(running) < max(1, jobs):
                path = ready.pop(0)
                t = graph.nodes[path]
                if not out_of_date(graph, store, t, root, fps):
                    report.up_to_date_count += 1
                    release(path)
                    continue
                if dry_run:
                    print(t.command, file=out)
                    report.built.append(path)
                    release(path)
                    continue
                (root / path).parent.mkdir(parents=True, exist_ok=True)
                print(f"{t.template or 'build'} {path}", file=out)
                running[pool.submit(run_command, t.command, root)] = path
            if not running:
                continue
            done, _ = wait(running, return_when=FIRST_COMPLETED)
            for fut in sorted(done, key=lambda f: rank[running[f]]):
                path = running.pop(fut)
                try:
                    code, output = fut.result()
                except Exception as exc:  # noqa: BLE001 - report, keep going
                    code, output = 1, f"{exc}\n"
                if code == 0:
                    report.built.append(path)
                    store.set(path, fps.digest(path))
                    release(path)
                else:
                    print(f"error: {path} failed (exit {code}):", file=out)
                    print(f"  {graph.nodes[path].command}", file=out)
                    if output:
                        out.write(output if output.endswith("\n") else output + "\n")
                    report.failed.append(FailedTarget(path, code, output))
                    store.drop(path)
                    block(path)

    failed = {f.path for f in report.failed}
    ancestors_cache: dict[str, set[str]] = {}

    def failed_ancestors(path):
        if path not in ancestors_cache:
            found = set()
            for dep in graph.nodes[path].dependencies:
                if dep in graph:
                    if dep in failed:
                        found.add(dep)
                    found |= failed_ancestors(dep)
            ancestors_cache[path] = found
        return ancestors_cache[path]

    report.skipped = sorted(SkippedTarget(p, min(failed_ancestors(p))) for p in blocked)
    report.built.sort()
    report.failed.sort()
    if not dry_run:
        store.save()
    for line in report.summary_lines():
        print(line, file=out)
    return report
