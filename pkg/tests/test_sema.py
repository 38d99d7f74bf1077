from __future__ import annotations

import os

import pytest

from seni import ast as A
from seni.errors import Diagnostics, SemaError, SeniError
from seni.sema import check_source, load_program

from conftest import load_case, write_files
from negatives import CASES


def diagnostics_of(tmp_path, case):
    write_files(tmp_path, case.clean_files())
    try:
        load_program(os.path.join(tmp_path, case.entry))
    except Diagnostics as exc:
        return exc.errors
    except SeniError as exc:
        return [exc]
    return []


@pytest.mark.parametrize("case", CASES, ids=[c.name for c in CASES])
def test_negative_case_yields_one_located_diagnostic(tmp_path, case):
    errors = diagnostics_of(tmp_path, case)
    assert len(errors) == 1, [e.render() for e in errors]
    (err,) = errors
    fname, line, col = case.expected_location()
    assert os.path.basename(err.span.file) == fname
    assert (err.span.line, err.span.col) == (line, col)
    assert case.kind in {getattr(k, "kind", None) for k in type(err).__mro__}


@pytest.mark.parametrize("case, name, entry", [
    ("primary-philosopher", "PhilosopherAbstract.seni", "PhilosopherAbstract"),
    ("refined-philosopher", "Philosopher.seni", "Philosopher"),
    ("table-deadlock", "Table.seni", "Table"),
    ("table-deadlock", "Fork.seni", "Fork"),
    ("refinement-chain", "PhilosopherSlow.seni", "PhilosopherSlow"),
    ("broken-refinement", "PhilosopherBroken.seni", "PhilosopherBroken"),
])
def test_corpus_checks_cleanly(case, name, entry):
    program = load_case(case, name)
    assert program.default_entry() == entry


def test_refinement_inherits_and_shadows():
    program = load_case("refined-philosopher", "Philosopher.seni")
    phil = program["Philosopher"]
    assert list(phil.state_vars) == ["id", "isThinking", "h"]
    assert {"PickFork", "ReturnFork", "PickLeft", "ReturnRight"} <= set(phil.actions)
    assert list(phil.specs) == ["Main", "PickFork", "ReturnFork"]
    assert phil.init is not None
    assert "getForkId" in phil.funcs
    assert phil.ancestors(program.systems) == ["PhilosopherAbstract"]


def test_function_parameters_are_inferred_in_order_of_use():
    program = load_case("primary-philosopher", "PhilosopherAbstract.seni")
    assert program["PhilosopherAbstract"].funcs["getForkId"].params == ("i", "side")


def test_static_property_is_split_into_spec_and_invariant():
    program = load_case("table-deadlock", "Table.seni")
    body = program["Table"].static_props["DeadlockFree"].body
    assert body == A.Binary("=>", A.Name("Main"),
                            A.Unary("always", A.Unary("!", A.PropRef("AllWaiting"))))


def test_names_resolve_to_state_reads_and_locals():
    program = load_case("primary-philosopher", "PhilosopherAbstract.seni")
    pick = program["PhilosopherAbstract"].actions["PickFork"]
    call = pick.body[0].value
    assert isinstance(call, A.FuncCall)
    assert call.args[0] == A.StateRead(("id",))


def test_independent_errors_are_all_reported_in_source_order():
    src = """system S {
    state int x;
    action A { @.x: true; }
    action B { @.y: 1; }
    spec Main { always (A | B) }
}
"""
    with pytest.raises(Diagnostics) as info:
        check_source(src, "s.seni")
    errs = info.value.errors
    assert [e.span.line for e in errs] == [3, 4]
    assert info.value.render().count(": error: ") == 2
    assert info.value.render().startswith("s.seni:3:")


def test_nullable_state_allows_null_comparisons():
    src = """system S {
    state int h: null;
    action Set { @.h: 1; }
    action Clear { @.h: null; }
    spec Main { always (Set . Clear) }
    prop Held { @.h /= null }
}
"""
    program = check_source(src)
    assert program["S"].state_vars["h"].type.nullable


def test_entry_is_ambiguous_without_system_flag():
    src = """system A { state int x; action Go { @.x: 1; } spec Main { always (Go) } }
system B { state int x; action Go { @.x: 2; } spec Main { always (Go) } }
"""
    program = check_source(src)
    with pytest.raises(SemaError):
        program.default_entry()


def test_missing_file_raises_oserror(tmp_path):
    with pytest.raises(OSError):
        load_program(str(tmp_path / "absent.seni"))


def test_imports_are_searched_in_given_paths_first(tmp_path):
    lib = tmp_path / "lib"
    lib.mkdir()
    write_files(lib, {"Base.seni": "system Base { state int x; action A { @.x: 1; } "
                                   "spec Main { always (A) } }\n"})
    write_files(tmp_path, {"Top.seni": "import Base;\nsystem Top refines Base { }\n"})
    program = load_program(str(tmp_path / "Top.seni"), [str(lib)])
    assert program["Top"].parent == "Base"
