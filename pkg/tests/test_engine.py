import pytest

from roboto import engine
from roboto.engine import (
    Ack,
    Answer,
    AwaitingInput,
    Completed,
    Decision,
    ReadyToAdvance,
    current_statement,
    next_step,
    observation,
    responsibility_steps,
    run_scripted,
    set_variable,
    start,
    step_back,
    visible_variables,
)
from roboto.errors import (
    ArityMismatch,
    AtStart,
    InputKindMismatch,
    LoopElementLocked,
    MissingInput,
    ScriptExhausted,
    ScriptKindMismatch,
    SessionCompleted,
    UnknownOrHiddenVariable,
    UnknownStrategy,
    ValidationFailed,
)
from roboto.parser import parse_document
from roboto.values import NOTHING, Text, TextList, parse_answer


def hanoi_args(level):
    return {
        "level": Text(str(level)),
        "source": Text("A"),
        "target": Text("C"),
        "auxiliary": Text("B"),
    }


def hanoi_script(level, corrected=False):
    script = [Answer(Text(str(level - 1))), Decision(level > 1)]
    if level > 1:
        script.extend(hanoi_script(level - 1, corrected))
    if corrected or level > 1:
        script.append(Ack())
    script.append(Decision(level > 1))
    if level > 1:
        script.extend(hanoi_script(level - 1, corrected))
    return script


def tdd_script(scenario_count):
    iteration = [
        Ack(),            # FOR EACH binds the next scenario
        Ack(),            # Create a new test
        Decision(True),   # UNTIL the new test does not pass
        Ack(),            # Implement the code
        Ack(),            # Run the tests
        Decision(True),   # UNTIL all of the tests pass
        Answer(Text("nothing")),  # SET designIssue
        Decision(True),   # UNTIL designIssue is nothing
        Answer(Text("nothing")),  # SET perfIssue
        Decision(True),   # UNTIL perfIssue is nothing
    ]
    return [Answer(parse_answer("a, b"))] + iteration * scenario_count


# --- start ---------------------------------------------------------------


def test_start_tower(hanoi_doc):
    state = start(hanoi_doc, "towerOfHanoi", hanoi_args(2))
    stmt = current_statement(state)
    assert type(stmt).__name__ == "Assignment"
    assert stmt.target == "topDiscs"
    assert isinstance(state.status, AwaitingInput)
    assert state.status.pending.kind == engine.QUERY_ANSWER
    assert state.status.pending.prompt == "SET 'topDiscs' TO 2 minus one"
    assert state.event_log[0].kind == "StartedWithArguments"


def test_start_arity_mismatch(hanoi_doc):
    with pytest.raises(ArityMismatch):
        start(hanoi_doc, "towerOfHanoi", {})


def test_start_unknown_strategy(hanoi_doc):
    with pytest.raises(UnknownStrategy):
        start(hanoi_doc, "nope", {})


def test_start_zero_params(debug_doc):
    state = start(debug_doc, "debug", {})
    assert len(state.stack) == 1
    assert state.stack[0].bindings == {}
    assert current_statement(state) is debug_doc.strategies[0].body[0]


def test_start_rejects_invalid_doc():
    doc = parse_document("STRATEGY s ()\n  DO missing()\n")
    with pytest.raises(ValidationFailed):
        start(doc, "s", {})


# --- next ---------------------------------------------------------------


def test_conditional_false_skips_block(hanoi_doc):
    state = start(hanoi_doc, "towerOfHanoi", hanoi_args(1))
    state = next_step(state, Answer(Text("0")))
    assert type(current_statement(state)).__name__ == "Conditional"
    state = next_step(state, Decision(False))
    # Skips the first IF block entirely: lands on the second IF.
    assert current_statement(state) is hanoi_doc.strategies[0].body[2]


def test_conditional_true_enters_block(hanoi_doc):
    state = start(hanoi_doc, "towerOfHanoi", hanoi_args(2))
    state = next_step(state, Answer(Text("1")))
    state = next_step(state, Decision(True))
    assert current_statement(state) is hanoi_doc.strategies[0].body[1].block[0]


def test_comma_answer_binds_list(tdd_doc):
    state = start(tdd_doc, "testDrivenDevelopment", {"requirements": Text("spec")})
    state = next_step(state, Answer(parse_answer("alpha, beta")))
    assert state.stack[0].bindings["scenarios"] == TextList(("alpha", "beta"))


def test_call_pushes_fresh_scope(hanoi_doc):
    state = start(hanoi_doc, "towerOfHanoi", hanoi_args(2))
    state = next_step(state, Answer(Text("1")))
    state = next_step(state, Decision(True))
    assert isinstance(state.status, ReadyToAdvance)
    state = next_step(state)  # DO towerOfHanoi(...)
    assert len(state.stack) == 2
    callee = state.stack[-1]
    assert set(callee.bindings) == {"level", "source", "target", "auxiliary"}
    assert callee.bindings["level"] == Text("1")
    # by-value: caller's topDiscs is unaffected by callee edits
    state = set_variable(state, "level", Text("99"))
    assert state.stack[0].bindings["topDiscs"] == Text("1")


def test_visible_variables_hide_caller(hanoi_doc):
    state = start(hanoi_doc, "towerOfHanoi", hanoi_args(2))
    state = next_step(state, Answer(Text("1")))
    state = next_step(state, Decision(True))
    state = next_step(state)
    names = [n for n, _ in visible_variables(state)]
    assert names == ["level", "source", "target", "auxiliary"]


def test_input_kind_mismatch(hanoi_doc):
    state = start(hanoi_doc, "towerOfHanoi", hanoi_args(1))
    with pytest.raises(InputKindMismatch):
        next_step(state, Decision(True))


def test_missing_input(hanoi_doc):
    state = start(hanoi_doc, "towerOfHanoi", hanoi_args(1))
    with pytest.raises(MissingInput):
        next_step(state)


def test_ready_state_rejects_input(hanoi_doc):
    state = start(hanoi_doc, "towerOfHanoi", hanoi_args(2))
    state = next_step(state, Answer(Text("1")))
    state = next_step(state, Decision(True))
    with pytest.raises(InputKindMismatch):
        next_step(state, Ack())


def test_completed_run_rejects_next(hanoi_doc):
    state = start(hanoi_doc, "towerOfHanoi", hanoi_args(1))
    state = next_step(state, Answer(Text("0")))
    state = next_step(state, Decision(False))
    state = next_step(state, Decision(False))
    assert state.status == Completed(NOTHING)
    with pytest.raises(SessionCompleted):
        next_step(state, Ack())


def test_return_bare_reference_resolves_from_bindings():
    doc = parse_document("STRATEGY s ()\n  SET 'x' TO something useful\n  RETURN 'x'\n")
    state = start(doc, "s", {})
    state = next_step(state, Answer(Text("result!")))
    assert isinstance(state.status, AwaitingInput)
    assert state.status.pending.kind == engine.ACTION_ACKNOWLEDGE
    state = next_step(state, Ack())
    assert state.status == Completed(Text("result!"))


def test_return_nothing_needs_only_ack(debug_doc):
    state = start(debug_doc, "debug", {})
    state = next_step(state, Decision(False))  # IF command line
    state = next_step(state, Decision(False))  # IF graphical
    state = next_step(state)                   # FOR EACH over unbound list: exhausted
    assert state.status.pending.kind == engine.ACTION_ACKNOWLEDGE
    state = next_step(state, Ack())            # RETURN nothing
    assert state.status == Completed(NOTHING)


def test_return_answer_value():
    doc = parse_document("STRATEGY s ()\n  RETURN the answer you found\n")
    state = start(doc, "s", {})
    state = next_step(state, Answer(Text("42")))
    assert state.status == Completed(Text("42"))


def test_embedded_call_assignment_delivers_value():
    text = (
        "STRATEGY s ()\n"
        "  SET 'x' TO the result of helper()\n"
        "  RETURN 'x'\n"
        "\n"
        "STRATEGY helper ()\n"
        "  RETURN what you saw\n"
    )
    doc = parse_document(text)
    state = start(doc, "s", {})
    assert isinstance(state.status, ReadyToAdvance)
    state = next_step(state)  # push helper
    assert len(state.stack) == 2
    state = next_step(state, Answer(Text("seen")))  # helper returns
    assert len(state.stack) == 1
    assert state.stack[0].bindings["x"] == Text("seen")
    state = next_step(state, Ack())
    assert state.status == Completed(Text("seen"))


def test_return_with_embedded_call_propagates():
    text = (
        "STRATEGY s ()\n"
        "  RETURN helper()\n"
        "\n"
        "STRATEGY helper ()\n"
        "  RETURN what you saw\n"
    )
    doc = parse_document(text)
    state = start(doc, "s", {})
    state = next_step(state)  # push helper
    state = next_step(state, Answer(Text("deep")))
    assert state.status == Completed(Text("deep"))
    assert len(state.stack) == 1  # root frame retained for inspection


def test_until_pre_test_semantics():
    doc = parse_document("STRATEGY s ()\n  UNTIL it works\n    Fix the thing\n  Celebrate\n")
    state = start(doc, "s", {})
    # True on first ask: the block never runs.
    done = next_step(state, Decision(True))
    assert type(current_statement(done)).__name__ == "Action"
    assert "Celebrate" in engine.render_statement(current_statement(done), {})
    # False: enter the block, then control returns to the UNTIL head.
    looping = next_step(state, Decision(False))
    assert "Fix" in engine.render_statement(current_statement(looping), {})
    looping = next_step(looping, Ack())
    assert type(current_statement(looping)).__name__ == "Until"


def test_history_counts_forward_steps(hanoi_doc):
    state = start(hanoi_doc, "towerOfHanoi", hanoi_args(1))
    assert state.history == []
    state = next_step(state, Answer(Text("0")))
    assert len(state.history) == 1
    state = next_step(state, Decision(False))
    assert len(state.history) == 2
    state = step_back(state)
    assert len(state.history) == 1


# --- previous ---------------------------------------------------------------


def test_previous_at_start(hanoi_doc):
    state = start(hanoi_doc, "towerOfHanoi", hanoi_args(1))
    with pytest.raises(AtStart):
        step_back(state)


def test_previous_reverts_assignment_and_visibility(rename_doc):
    state = start(rename_doc, "renameVariable", {"name": Text("speed")})
    assert visible_variables(state) == [("name", Text("speed"))]
    advanced = next_step(state, Answer(parse_answer("a, b")))
    assert [n for n, _ in visible_variables(advanced)] == ["name", "codeLines"]
    back = step_back(advanced)
    assert visible_variables(back) == [("name", Text("speed"))]
    assert observation(back) == observation(state)


def test_previous_discards_input_and_reprompts(hanoi_doc):
    state = start(hanoi_doc, "towerOfHanoi", hanoi_args(1))
    advanced = next_step(state, Answer(Text("0")))
    back = step_back(advanced)
    assert isinstance(back.status, AwaitingInput)
    assert back.status.pending.kind == engine.QUERY_ANSWER


def test_previous_restores_popped_frame(hanoi_doc):
    state = start(hanoi_doc, "towerOfHanoi", hanoi_args(2))
    script = [Answer(Text("1")), Decision(True), None, Answer(Text("0")), Decision(False)]
    for inp in script:
        state = next_step(state, inp)
    # Inside the callee at the second IF; undo across the call boundary and back.
    assert len(state.stack) == 2
    snapshots = [observation(state)]
    for _ in range(3):
        state = step_back(state)
        snapshots.append(observation(state))
    assert len(state.stack) == 1
    replay = state
    for inp in script[2:]:
        replay = next_step(replay, inp)
    assert observation(replay) == snapshots[0]


def test_forward_k_then_back_k(hanoi_doc):
    script = hanoi_script(3)
    for k in (1, 4, 9, len(script)):
        state = start(hanoi_doc, "towerOfHanoi", hanoi_args(3))
        base = observation(state)
        taken = 0
        i = 0
        while taken < k and not isinstance(state.status, Completed):
            inp = None
            if isinstance(state.status, AwaitingInput):
                inp = script[i]
                i += 1
            state = next_step(state, inp)
            taken += 1
        for _ in range(taken):
            state = step_back(state)
        assert observation(state) == base


# --- setVariable ---------------------------------------------------------------


def loop_state(tdd_doc, *, iterations=1):
    """TDD session paused just after entering the given loop iteration."""
    state = start(tdd_doc, "testDrivenDevelopment", {"requirements": Text("spec")})
    state = next_step(state, Answer(parse_answer("a, b, c")))
    for _ in range(iterations):
        state = next_step(state, Ack())  # enter iteration
        if _ != iterations - 1:
            for inp in [Ack(), Decision(True), Ack(), Ack(), Decision(True),
                        Answer(Text("none")), Decision(True), Answer(Text("none")),
                        Decision(True)]:
                state = next_step(state, inp)
    return state


def test_edit_consumed_element_locked(tdd_doc):
    state = loop_state(tdd_doc, iterations=2)  # bound to "b"; "a" consumed
    with pytest.raises(LoopElementLocked):
        set_variable(state, "scenarios", TextList(("X", "b", "c")))
    with pytest.raises(LoopElementLocked):
        set_variable(state, "scenarios", TextList(("a", "Y", "c")))
    with pytest.raises(LoopElementLocked):
        set_variable(state, "scenarios", TextList(("a",)))  # deletes the current element


def test_edit_unconsumed_and_append_allowed(tdd_doc):
    state = loop_state(tdd_doc, iterations=2)
    edited = set_variable(state, "scenarios", TextList(("a", "b", "C2", "d")))
    assert edited.stack[0].bindings["scenarios"] == TextList(("a", "b", "C2", "d"))


def test_locked_edit_leaves_state_unchanged(tdd_doc):
    state = loop_state(tdd_doc, iterations=2)
    before = observation(state)
    before_events = len(state.event_log)
    with pytest.raises(LoopElementLocked):
        set_variable(state, "scenarios", TextList(("X", "b", "c")))
    assert observation(state) == before
    assert len(state.event_log) == before_events


def test_edit_hidden_variable_rejected(tdd_doc):
    state = start(tdd_doc, "testDrivenDevelopment", {"requirements": Text("spec")})
    with pytest.raises(UnknownOrHiddenVariable):
        set_variable(state, "scenarios", Text("x"))  # not yet referenced


def test_noop_edit_logs_event(rename_doc):
    state = start(rename_doc, "renameVariable", {"name": Text("speed")})
    edited = set_variable(state, "name", Text("speed"))
    assert visible_variables(edited) == visible_variables(state)
    assert edited.event_log[-1].kind == "VariableEdited"
    assert edited.event_log[-1].payload == {"name": "name", "old": "speed", "new": "speed"}


def test_edit_is_undoable(rename_doc):
    state = start(rename_doc, "renameVariable", {"name": Text("speed")})
    edited = set_variable(state, "name", Text("velocity"))
    assert edited.stack[0].bindings["name"] == Text("velocity")
    back = step_back(edited)
    assert back.stack[0].bindings["name"] == Text("speed")


def test_append_at_exhausted_head_rearms_loop():
    doc = parse_document("STRATEGY s (xs)\n  FOR EACH 'e' IN 'xs'\n    Handle 'e'\n  Wrap up\n")
    state = start(doc, "s", {"xs": TextList(("a",))})
    state = next_step(state, Ack())
    state = next_step(state, Ack())  # back at the head, list exhausted
    assert isinstance(state.status, ReadyToAdvance)
    state = set_variable(state, "xs", TextList(("a", "b")))
    assert isinstance(state.status, AwaitingInput)
    assert state.status.pending.kind == engine.ITERATION_ACKNOWLEDGE
    state = next_step(state, Ack())
    assert state.stack[0].bindings["e"] == Text("b")


def test_mid_loop_append_is_visited(tdd_doc):
    state = loop_state(tdd_doc, iterations=1)  # bound to "a"
    state = set_variable(state, "scenarios", TextList(("a", "b", "c", "d")))
    iteration_tail = [Ack(), Decision(True), Ack(), Ack(), Decision(True),
                      Answer(Text("none")), Decision(True), Answer(Text("none")),
                      Decision(True)]
    seen = []
    for _ in range(3):  # b, c, d
        for inp in iteration_tail:
            state = next_step(state, inp)
        assert state.status.pending.kind == engine.ITERATION_ACKNOWLEDGE
        state = next_step(state, Ack())
        seen.append(state.stack[0].bindings["scenario"])
    assert seen == [Text("b"), Text("c"), Text("d")]


# --- visibility & responsibilities ------------------------------------------------


def test_visible_only_after_reference(rename_doc):
    state = start(rename_doc, "renameVariable", {"name": Text("speed")})
    state = next_step(state, Answer(parse_answer("l1, l2")))
    names = [n for n, _ in visible_variables(state)]
    assert "docLines" not in names  # defined later, not yet executed
    assert names == ["name", "codeLines"]


def test_responsibility_steps_conditional(hanoi_doc):
    state = start(hanoi_doc, "towerOfHanoi", hanoi_args(1))
    state = next_step(state, Answer(Text("0")))
    steps = responsibility_steps(state)
    actors = [s.actor for s in steps]
    assert actors.count("developer") == 3
    assert actors.count("computer") == 2


def test_responsibility_steps_action():
    doc = parse_document("STRATEGY s ()\n  Act now\n")
    steps = responsibility_steps(start(doc, "s", {}))
    actors = [s.actor for s in steps]
    assert actors.count("developer") == 2
    assert actors.count("computer") == 1


def test_every_kind_has_both_actors(tdd_doc, debug_doc, hanoi_doc):
    cases = [
        start(tdd_doc, "testDrivenDevelopment", {"requirements": Text("r")}),
        start(debug_doc, "debug", {}),
        start(hanoi_doc, "towerOfHanoi", hanoi_args(1)),
    ]
    # Walk a few steps of TDD to reach other statement kinds too.
    state = cases[0]
    state = next_step(state, Answer(parse_answer("a")))
    cases.append(state)  # FOR EACH
    state = next_step(state, Ack())
    cases.append(state)  # Action inside the loop
    for s in cases:
        actors = {step.actor for step in responsibility_steps(s)}
        assert actors == {"developer", "computer"}


def test_responsibility_steps_completed_rejected(hanoi_doc):
    state = start(hanoi_doc, "towerOfHanoi", hanoi_args(1))
    for inp in [Answer(Text("0")), Decision(False), Decision(False)]:
        state = next_step(state, inp)
    with pytest.raises(SessionCompleted):
        responsibility_steps(state)


# --- scripted runs ---------------------------------------------------------------


def test_scripted_tdd_two_iterations(tdd_doc):
    trace = run_scripted(
        tdd_doc, "testDrivenDevelopment", {"requirements": Text("spec")}, tdd_script(2)
    )
    iteration_entries = [
        e for e in trace.entries if e.kind == "foreach" and e.input == {"ack": True}
    ]
    assert len(iteration_entries) == 2
    assert trace.value is NOTHING


def test_script_exhausted(hanoi_doc):
    with pytest.raises(ScriptExhausted):
        run_scripted(hanoi_doc, "towerOfHanoi", hanoi_args(2), hanoi_script(2)[:3])


def test_script_kind_mismatch(hanoi_doc):
    script = [Decision(True)] + hanoi_script(1)
    with pytest.raises(ScriptKindMismatch):
        run_scripted(hanoi_doc, "towerOfHanoi", hanoi_args(1), script)


def test_scripted_run_deterministic(hanoi_doc):
    a = run_scripted(hanoi_doc, "towerOfHanoi", hanoi_args(3), hanoi_script(3))
    b = run_scripted(hanoi_doc, "towerOfHanoi", hanoi_args(3), hanoi_script(3))
    assert a.to_json_lines() == b.to_json_lines()


def test_stack_discipline(hanoi_doc):
    state = start(hanoi_doc, "towerOfHanoi", hanoi_args(3))
    script = iter(hanoi_script(3))
    depth = len(state.stack)
    while not isinstance(state.status, Completed):
        inp = next(script) if isinstance(state.status, AwaitingInput) else None
        state = next_step(state, inp)
        new_depth = len(state.stack)
        assert new_depth - depth <= 1  # at most one push per transition
        assert new_depth >= 1
        depth = new_depth


# --- events ---------------------------------------------------------------


def test_event_ordinals_gapless(hanoi_doc):
    state = start(hanoi_doc, "towerOfHanoi", hanoi_args(1))
    state = next_step(state, Answer(Text("0")))
    state = set_variable(state, "topDiscs", Text("7"))
    state = step_back(state)
    assert [e.ordinal for e in state.event_log] == [1, 2, 3, 4]
    assert [e.kind for e in state.event_log] == [
        "StartedWithArguments",
        "AdvancedWith",
        "VariableEdited",
        "SteppedBack",
    ]
