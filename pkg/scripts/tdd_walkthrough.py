"""Transcript of a test-driven-development session.

Walks the TDD strategy with two scenarios, appends a third mid-loop,
shows the loop-element lock, and steps backwards once, printing what a
tracker user would see at each point.
"""

from roboto.catalog import builtin_corpus_text
from roboto.engine import (
    Ack,
    Answer,
    AwaitingInput,
    Completed,
    current_statement,
    next_step,
    render_statement,
    set_variable,
    start,
    step_back,
    visible_variables,
)
from roboto.errors import LoopElementLocked
from roboto.parser import parse_document
from roboto.values import Text, TextList, display, parse_answer


def show(state, note=""):
    if isinstance(state.status, Completed):
        print(f"== completed with {display(state.status.value)} {note}")
        return
    stmt = current_statement(state)
    frame = state.stack[-1]
    pending = state.status.pending.kind if isinstance(state.status, AwaitingInput) else "ready"
    variables = ", ".join(f"{n}={display(v)}" for n, v in visible_variables(state))
    print(f"[{pending:>22}] {render_statement(stmt, frame.bindings)}   ({variables}) {note}")


def main() -> None:
    from roboto.engine import Decision

    doc = parse_document(builtin_corpus_text("testDrivenDevelopment.roboto"))
    state = start(doc, "testDrivenDevelopment", {"requirements": Text("the feature brief")})
    show(state)

    state = next_step(state, Answer(parse_answer("login works, logout works")))
    show(state, "<- scenarios recorded as a two-element list")

    state = next_step(state, Ack())
    show(state, "<- first scenario bound")

    print("append a scenario mid-loop:")
    state = set_variable(
        state, "scenarios", TextList(("login works", "logout works", "errors are shown"))
    )
    show(state)

    print("editing the consumed first element is locked:")
    try:
        set_variable(state, "scenarios", TextList(("LOGIN", "logout works", "errors are shown")))
    except LoopElementLocked as exc:
        print(f"   LoopElementLocked: {exc.message}")

    print("one step back re-prompts the iteration:")
    state = step_back(state)
    state = step_back(state)
    show(state)

    tail = [
        Ack(), Decision(True), Ack(), Ack(), Decision(True),
        Answer(Text("nothing")), Decision(True), Answer(Text("nothing")), Decision(True),
    ]
    for _ in ("login works", "logout works"):
        state = next_step(state, Ack())
        for inp in tail:
            state = next_step(state, inp)
    state = next_step(state)  # loop exhausted; implicit return
    show(state)


if __name__ == "__main__":
    main()
