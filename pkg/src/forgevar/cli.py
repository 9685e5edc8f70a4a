"""``forgevar`` command-line driver.

Usage: forgevar [options] [feature=value | target | --]...

Options: -jN (parallel jobs), --dry-run, --list-targets.  ``--`` separates
independent build requests.  Exit status: 0 success, 1 some target failed,
2 usage or description error.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path

from .environment import BuildEnvironment, default_environment
from .errors import BuildError
from .frontend import BuildRequest, parse_command_line, parse_text
from .graph import BuildReport, StateStore, TargetGraph, execute
from .metatargets import Project
from .properties import expand_defaults

BUILDFILE = "Buildfile"
STATE_FILE = Path(".forgevar") / "state"


@dataclass(frozen=True)
class InvocationConfig:
    jobs: int
    dry_run: bool
    list_targets: bool
    requests: tuple[BuildRequest, ...]
    workspace_root: Path


def build_graph(project: Project, requests) -> TargetGraph:
    """Evaluate every requested metatarget under every request into one graph."""
    graph = TargetGraph()
    for request in requests:
        props = expand_defaults(project.env.features, request.properties)
        for name in request.targets or list(project.metatargets):
            for target in project.evaluate(name, props):
                graph.add(target)
    return graph


class Driver:
    """One invocation; keeps the project, graph, and report for inspection."""

    def __init__(self, root=None, env: BuildEnvironment | None = None, out=None, err=None):
        self.root = Path.cwd() if root is None else Path(root)
        self.env = env
        self.out = out or sys.stdout
        self.err = err or sys.stderr
        self.config: InvocationConfig | None = None
        self.project: Project | None = None
        self.graph: TargetGraph | None = None
        self.report: BuildReport | None = None

    def configure(self, argv) -> InvocationConfig:
        if self.env is None:
            self.env = default_environment()
        options, requests = parse_command_line(self.env.features, argv)
        self.config = InvocationConfig(
            options.jobs, options.dry_run, options.list_targets, tuple(requests), self.root
        )
        return self.config

    def load_project(self) -> Project:
        path = self.root / BUILDFILE
        try:
            text = path.read_text(encoding="utf-8")
        except OSError:
            raise BuildError(f"no {BUILDFILE} in {self.root}") from None
        try:
            self.project = Project(self.env).load(parse_text(text, self.env.features))
        except BuildError as exc:
            exc.source = exc.source or BUILDFILE
            raise
        return self.project

    def run(self, argv) -> int:
        try:
            config = self.configure(argv)
            project = self.load_project()
            if config.list_targets:
                for mt in project.metatargets.values():
                    print(f"{mt.name} {mt.target_type}", file=self.out)
                return 0
            self.graph = build_graph(project, config.requests)
            store = StateStore(self.root / STATE_FILE)
            self.report = execute(self.graph, store, config.jobs, config.dry_run, self.root, self.out)
        except BuildError as exc:
            print(f"forgevar: error: {exc}", file=self.err)
            return 2
        return 0 if self.report.ok else 1


def run(argv=None, cwd=None, out=None, err=None, env=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    return Driver(cwd, env, out, err).run(argv)


def main():
    sys.exit(run())
