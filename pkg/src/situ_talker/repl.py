"""Interactive terminal REPL and the scripted scenario replayer.

Both drive the same SessionStore methods as the HTTP API, so a scripted
REPL session and an API session produce identical transcripts.

Script files are line-oriented::

    world library            # create a session (emits the start greeting)
    date 1995-04-24          # optional date override, before 'world' actions
    say Computer science     # an utterance turn
    enter 11                 # a situation event turn
    look 1135
    expect-spoken <text>     # assert on the latest output, byte for byte
    expect-display <title>
    expect-item <text>       # consecutive lines assert the full item list
"""

from __future__ import annotations

import datetime as dt
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, TextIO

from .dialogue import TurnOutput
from .service import SessionStore
from .world import EventKind


@dataclass
class ReplayCheck:
    line: int
    kind: str
    expected: str
    actual: str

    @property
    def ok(self) -> bool:
        return self.expected == self.actual


@dataclass
class ReplayResult:
    script: str
    checks: list[ReplayCheck] = field(default_factory=list)
    turns: int = 0
    elapsed: float = 0.0

    @property
    def mismatches(self) -> list[ReplayCheck]:
        return [c for c in self.checks if not c.ok]

    @property
    def ok(self) -> bool:
        return not self.mismatches


def replay_script(store: SessionStore, script_path: str | Path) -> ReplayResult:
    """Replay a scenario script and diff every expectation against actual output."""
    path = Path(script_path)
    result = ReplayResult(script=str(path))
    session_id: Optional[str] = None
    date_override: Optional[dt.date] = None
    output: Optional[TurnOutput] = None
    item_cursor = 0
    items_expected = False
    start = time.perf_counter()

    def close_item_block(line_no: int) -> None:
        nonlocal items_expected, item_cursor
        if items_expected and output is not None:
            result.checks.append(
                ReplayCheck(line_no, "item-count", str(item_cursor), str(len(output.display.items)))
            )
        items_expected = False
        item_cursor = 0

    lines = path.read_text(encoding="utf-8").splitlines()
    for line_no, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        directive, _, rest = stripped.partition(" ")
        if directive != "expect-item":
            close_item_block(line_no)

        if directive == "date":
            date_override = dt.date.fromisoformat(rest.strip())
        elif directive == "world":
            session, output = store.create(rest.strip(), date_override)
            session_id = session.id
            result.turns += 1
        elif directive in ("say", "enter", "look"):
            if session_id is None:
                raise ValueError(f"{path.name}:{line_no}: no 'world' directive before {directive!r}")
            if directive == "say":
                output = store.utterance(session_id, rest)
            else:
                kind = EventKind.ENTER if directive == "enter" else EventKind.LOOK_AT
                output = store.event(session_id, kind, int(rest.strip()))
            result.turns += 1
        elif directive == "expect-spoken":
            actual = output.spoken if output else "<no output>"
            result.checks.append(ReplayCheck(line_no, "spoken", rest, actual))
        elif directive == "expect-display":
            actual = output.display.title if output else "<no output>"
            result.checks.append(ReplayCheck(line_no, "display", rest, actual))
        elif directive == "expect-item":
            items = output.display.items if output else ()
            actual = items[item_cursor] if item_cursor < len(items) else "<missing>"
            result.checks.append(ReplayCheck(line_no, "item", rest, actual))
            item_cursor += 1
            items_expected = True
        else:
            raise ValueError(f"{path.name}:{line_no}: unknown directive {directive!r}")

    close_item_block(len(lines) + 1)
    result.elapsed = time.perf_counter() - start
    return result


def format_replay(result: ReplayResult) -> str:
    lines = []
    for check in result.checks:
        if check.ok:
            lines.append(f"ok   line {check.line} [{check.kind}] {check.expected}")
        else:
            lines.append(f"FAIL line {check.line} [{check.kind}]")
            lines.append(f"  expected: {check.expected}")
            lines.append(f"  actual:   {check.actual}")
    status = "PASS" if result.ok else f"FAIL ({len(result.mismatches)} mismatches)"
    lines.append(f"{result.script}: {status} — {result.turns} turns in {result.elapsed:.2f}s")
    return "\n".join(lines)


def _print_output(output: TurnOutput, out: TextIO) -> None:
    print(output.spoken, file=out)
    if output.display.title or output.display.items:
        print(f"[{output.display.title}]", file=out)
        for item in output.display.items:
            print(f"  {item}", file=out)


def run_repl(
    store: SessionStore,
    world_name: str,
    date: Optional[dt.date] = None,
    stdin: Optional[TextIO] = None,
    stdout: Optional[TextIO] = None,
) -> str:
    """Interactive loop; returns the session id when the user quits."""
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    session, output = store.create(world_name, date)
    print(f"session {session.id} in world {world_name!r}", file=stdout)
    print("commands: /enter <id>, /look <id>, /scan <ppm-file>, /state, /quit", file=stdout)
    _print_output(output, stdout)

    while True:
        print("> ", end="", file=stdout, flush=True)
        line = stdin.readline()
        if not line:
            break
        line = line.strip()
        if not line:
            continue
        if line.startswith("/"):
            command, _, rest = line[1:].partition(" ")
            if command == "quit":
                break
            if command == "state":
                view = store.state_view(session.id)
                situation = view["situation"]["label"] if view["situation"] else "nowhere"
                print(f"turn {view['turn']}, at {situation}", file=stdout)
                for neighbor in view["adjacent"]:
                    print(f"  nearby: {neighbor['id']} {neighbor['label']}", file=stdout)
                continue
            if command in ("enter", "look"):
                try:
                    target = int(rest.strip())
                except ValueError:
                    print(f"usage: /{command} <id>", file=stdout)
                    continue
                kind = EventKind.ENTER if command == "enter" else EventKind.LOOK_AT
                _print_output(store.event(session.id, kind, target), stdout)
                continue
            if command == "scan":
                try:
                    data = Path(rest.strip()).read_bytes()
                    _print_output(store.scanline(session.id, data), stdout)
                except (OSError, ValueError) as exc:
                    print(f"scan failed: {exc}", file=stdout)
                continue
            print(f"unknown command /{command}", file=stdout)
            continue
        _print_output(store.utterance(session.id, line), stdout)
    return session.id
