"""Terminal entry point: check, fmt, run, replay, and serve.

Exit codes: 0 success, 1 diagnostics or execution errors, 2 usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import engine, values
from .errors import ParseFailed, RobotoError
from .parser import parse_with_diagnostics
from .formatter import format_document
from .nodes import Diagnostic, StrategyDoc
from .validator import validate


def _read_file(path: str, err) -> str | None:
    p = Path(path)
    if not p.is_file():
        print(f"error: no such file: {path}", file=err)
        return None
    try:
        return p.read_text(encoding="utf-8")
    except UnicodeDecodeError:
        print(f"error: {path} is not valid UTF-8", file=err)
        return None


def _diagnose(text: str, path: str) -> tuple[StrategyDoc | None, list[Diagnostic]]:
    doc, diags = parse_with_diagnostics(text, path)
    if doc is not None:
        diags = diags + validate(doc)
    return doc, diags


def cmd_check(args, out, err) -> int:
    worst = 0
    for path in args.paths:
        text = _read_file(path, err)
        if text is None:
            return 2
        _, diags = _diagnose(text, path)
        for d in diags:
            print(str(d), file=err)
        if any(d.severity == "error" for d in diags):
            worst = 1
    return worst


def cmd_fmt(args, out, err) -> int:
    for path in args.paths:
        text = _read_file(path, err)
        if text is None:
            return 2
        doc, diags = parse_with_diagnostics(text, path)
        if doc is None:
            for d in diags:
                print(str(d), file=err)
            return 1
        formatted = format_document(doc)
        if args.write:
            Path(path).write_text(formatted, encoding="utf-8")
        else:
            out.write(formatted)
    return 0


def _load_valid_doc(path: str, out, err) -> StrategyDoc | None:
    text = _read_file(path, err)
    if text is None:
        return None
    doc, diags = _diagnose(text, path)
    for d in diags:
        print(str(d), file=err)
    if doc is None or any(d.severity == "error" for d in diags):
        return None
    return doc


def _parse_cli_args(pairs: list[str], err) -> dict[str, values.Value] | None:
    out: dict[str, values.Value] = {}
    for pair in pairs:
        if "=" not in pair:
            print(f"error: --arg expects name=value, got {pair!r}", file=err)
            return None
        name, raw = pair.split("=", 1)
        out[name] = values.parse_answer(raw)
    return out


def _print_state(state: engine.ExecutionState, out) -> None:
    frame = state.stack[-1]
    stmt = engine.current_statement(state)
    print(f"\n[{frame.strategy_name}] depth {len(state.stack)}", file=out)
    if stmt.comment:
        for line in stmt.comment.split("\n"):
            print(f"  # {line}", file=out)
    print(f"> {engine.render_statement(stmt, frame.bindings)}", file=out)
    for step in engine.responsibility_steps(state):
        print(f"  [{step.actor}] {step.description}", file=out)
    variables = engine.visible_variables(state)
    if variables:
        print("variables:", file=out)
        for name, value in variables:
            print(f"  {name} = {values.display(value)}", file=out)
    if isinstance(state.status, engine.AwaitingInput):
        print(f"(awaiting {state.status.pending.kind})", file=out)
    else:
        print("(ready: 'next' advances)", file=out)


def _prompt_input(state: engine.ExecutionState, ask) -> engine.HumanInput | None:
    if not isinstance(state.status, engine.AwaitingInput):
        return None
    kind = state.status.pending.kind
    if kind == engine.CONDITION_DECISION:
        while True:
            raw = ask("True or False? ").strip().lower()
            if raw in ("true", "t", "yes", "y"):
                return engine.Decision(True)
            if raw in ("false", "f", "no", "n"):
                return engine.Decision(False)
    if kind == engine.QUERY_ANSWER:
        return engine.Answer(values.parse_answer(ask("value: ")))
    ask("press enter to acknowledge ")
    return engine.Ack()


def run_interactive(doc: StrategyDoc, root: str, args: dict[str, values.Value], ask, out) -> int:
    """REPL over one session: next / back / vars / set <name> <value> / quit."""
    strategy = doc.strategy(root)
    for param in strategy.params:
        if param not in args:
            args[param] = values.parse_answer(ask(f"value for '{param}': "))
    if strategy.leading_comment:
        print(strategy.leading_comment, file=out)
    state = engine.start(doc, root, args)
    _print_state(state, out)
    while True:
        try:
            command = ask("roboto> ").strip()
        except EOFError:
            return 0
        if not command:
            continue
        word, _, rest = command.partition(" ")
        word = word.lower()
        try:
            if word in ("quit", "exit", "q"):
                return 0
            elif word == "next":
                state = engine.next_step(state, _prompt_input(state, ask))
                if isinstance(state.status, engine.Completed):
                    print(
                        f"Completed with value: {values.display(state.status.value)}",
                        file=out,
                    )
                    return 0
                _print_state(state, out)
            elif word == "back":
                state = engine.step_back(state)
                _print_state(state, out)
            elif word == "vars":
                for name, value in engine.visible_variables(state):
                    print(f"  {name} = {values.display(value)}", file=out)
            elif word == "set":
                name, _, raw = rest.partition(" ")
                if not name or not raw:
                    print("usage: set <name> <value>", file=out)
                    continue
                state = engine.set_variable(state, name, values.parse_answer(raw))
                _print_state(state, out)
            else:
                print("commands: next, back, vars, set <name> <value>, quit", file=out)
        except RobotoError as exc:
            print(f"error [{exc.code}]: {exc.message}", file=out)


def cmd_run(args, out, err, ask=None) -> int:
    doc = _load_valid_doc(args.path, out, err)
    if doc is None:
        return 2 if not Path(args.path).is_file() else 1
    root = args.strategy or doc.strategies[0].name
    if doc.strategy(root) is None:
        print(f"error: no strategy named {root!r} in {args.path}", file=err)
        return 1
    cli_args = _parse_cli_args(args.arg or [], err)
    if cli_args is None:
        return 2
    if ask is None:
        ask = input
    try:
        return run_interactive(doc, root, cli_args, ask, out)
    except RobotoError as exc:
        print(f"error [{exc.code}]: {exc.message}", file=err)
        return 1


def _load_script(path: str, err) -> list[engine.HumanInput] | None:
    text = _read_file(path, err)
    if text is None:
        return None
    try:
        raw = json.loads(text)
        if not isinstance(raw, list):
            raise ValueError("script file must hold a JSON array")
        return [engine.decode_input(item) for item in raw]
    except (ValueError, RobotoError) as exc:
        print(f"error: bad script file: {exc}", file=err)
        return None


def cmd_replay(args, out, err) -> int:
    doc = _load_valid_doc(args.path, out, err)
    if doc is None:
        return 2 if not Path(args.path).is_file() else 1
    args_text = _read_file(args.args_file, err)
    if args_text is None:
        return 2
    script = _load_script(args.script_file, err)
    if script is None:
        return 2
    try:
        run_args = {k: values.from_json(v) for k, v in json.loads(args_text).items()}
    except (ValueError, AttributeError) as exc:
        print(f"error: bad args file: {exc}", file=err)
        return 2
    try:
        trace = engine.run_scripted(doc, args.strategy, run_args, script)
    except RobotoError as exc:
        print(f"error [{exc.code}]: {exc.message}", file=err)
        return 1
    for line in trace.to_json_lines():
        print(line, file=out)
    return 0


def cmd_serve(args, out, err) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(Path(args.catalog), Path(args.store))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="roboto", description="Roboto strategy toolchain")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="parse and validate strategy files")
    p.add_argument("paths", nargs="+")

    p = sub.add_parser("fmt", help="canonically format strategy files")
    p.add_argument("--write", action="store_true", help="rewrite files in place")
    p.add_argument("paths", nargs="+")

    p = sub.add_parser("run", help="step a strategy interactively")
    p.add_argument("path")
    p.add_argument("--strategy", help="strategy name (default: first in file)")
    p.add_argument("--arg", action="append", metavar="NAME=VALUE")

    p = sub.add_parser("replay", help="replay a scripted run and print its trace")
    p.add_argument("path")
    p.add_argument("--strategy", required=True)
    p.add_argument("--args-file", required=True)
    p.add_argument("--script-file", required=True)

    p = sub.add_parser("serve", help="serve the HTTP API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=int(os.environ.get("ROBOTO_PORT", "8023")))
    p.add_argument("--catalog", default=os.environ.get("ROBOTO_CATALOG", "./catalog"))
    p.add_argument("--store", default=os.environ.get("ROBOTO_STORE", "./sessions"))

    return parser


def main(argv: list[str] | None = None, out=None, err=None, ask=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    handlers = {
        "check": lambda: cmd_check(args, out, err),
        "fmt": lambda: cmd_fmt(args, out, err),
        "run": lambda: cmd_run(args, out, err, ask),
        "replay": lambda: cmd_replay(args, out, err),
        "serve": lambda: cmd_serve(args, out, err),
    }
    return handlers[args.command]()


if __name__ == "__main__":
    sys.exit(main())
