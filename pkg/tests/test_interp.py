from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from seni import ast as A
from seni.errors import DivisionByZero, EvalFault, NegativeCount
from seni.interp import (
    Env,
    InstanceTemplate,
    Record,
    Scope,
    builtin_replicate,
    eval_expr,
    eval_func,
    format_value,
    values_equal,
)
from seni.parser import parse_expression

from conftest import load_case


def ev(text: str, **bindings):
    """Evaluate a literal-only expression; names are bound as locals."""
    e = parse_expression(text)
    return eval_expr(_localise(e), Env(bindings))


def _localise(e):
    if isinstance(e, A.Name):
        return A.Local(e.ident)
    if isinstance(e, A.Binary):
        return A.Binary(e.op, _localise(e.left), _localise(e.right))
    if isinstance(e, A.Unary):
        return A.Unary(e.op, _localise(e.operand))
    if isinstance(e, A.If):
        return A.If(_localise(e.cond), _localise(e.then), _localise(e.orelse))
    if isinstance(e, A.Cast):
        return A.Cast(e.to, _localise(e.operand))
    if isinstance(e, A.Index):
        return A.Index(_localise(e.target), _localise(e.index))
    return e


@pytest.fixture(scope="module")
def get_fork_id():
    program = load_case("primary-philosopher", "PhilosopherAbstract.seni")
    sd = program["PhilosopherAbstract"]
    return lambda i, side: eval_func(sd.funcs["getForkId"], [i, side], Scope(sd))


@pytest.mark.parametrize("seat, side, fork", [
    (0, "L", 0), (0, "R", 1), (1, "L", 1), (1, "R", 2), (2, "L", 2), (2, "R", 0),
])
def test_get_fork_id_seat_convention(get_fork_id, seat, side, fork):
    assert get_fork_id(seat, side) == fork


def test_every_fork_is_shared_by_two_seats(get_fork_id):
    users = {}
    for seat in range(3):
        for side in "LR":
            users.setdefault(get_fork_id(seat, side), []).append(seat)
    assert sorted(users) == [0, 1, 2]
    assert all(len(set(s)) == 2 for s in users.values())


def test_integer_division_truncates_toward_zero():
    assert ev("7 / 2") == 3
    assert ev("-7 / 2") == -3
    assert ev("-7 mod 3") == -1
    assert ev("7 mod -3") == 1


@given(st.integers(-50, 50), st.integers(-50, 50).filter(lambda b: b != 0))
def test_div_mod_identity(a, b):
    q = ev("a / b", a=a, b=b)
    r = ev("a mod b", a=a, b=b)
    assert q * b + r == a
    assert abs(r) < abs(b)
    assert r == 0 or (r > 0) == (a > 0)


def test_division_by_zero_faults():
    with pytest.raises(DivisionByZero):
        ev("1 / 0")
    with pytest.raises(DivisionByZero):
        ev("1 mod 0")


def test_boolean_connectives_short_circuit():
    assert ev("false & (1 / 0 = 1)") is False
    assert ev("true | (1 / 0 = 1)") is True
    assert ev("false => (1 / 0 = 1)") is True


def test_equality_is_type_strict():
    assert values_equal(1, 1)
    assert not values_equal(True, 1)
    assert not values_equal(None, 0)
    assert values_equal(Record("R", (("a", 1),)), Record("R", (("a", 1),)))


def test_casts():
    assert ev('(int) "42"') == 42
    assert ev("(string) 7") == "7"
    assert ev('(bool) "true"') is True
    with pytest.raises(EvalFault):
        ev('(int) "x"')


def test_index_out_of_range_faults():
    with pytest.raises(EvalFault):
        ev("xs[2]", xs=("a",))
    assert ev("xs[0]", xs=("a",)) == "a"


def test_replicate():
    tmpl = InstanceTemplate("p", "Philosopher")
    out = builtin_replicate(3, tmpl)
    assert [t.args for t in out] == [("0",), ("1",), ("2",)]
    assert builtin_replicate(0, tmpl) == ()
    with pytest.raises(NegativeCount):
        builtin_replicate(-1, tmpl)


def test_format_value():
    rec = Record("Holding", (("leftHand", 0), ("rightHand", None)))
    assert format_value(rec) == "{leftHand: 0, rightHand: null}"
    assert format_value(("a", True)) == '["a", true]'


def test_recursive_function_depth_limit():
    from seni.sema import check_source

    src = """system S {
    state int x;
    action A { @.x: down(3); }
    spec Main { always (A) }
    func down(n) :: int -> int { if n = 0 then 0 else down(n - 1) }
    func forever(n) :: int -> int { forever(n + 1) }
}
"""
    sd = check_source(src)["S"]
    assert eval_func(sd.funcs["down"], [50], Scope(sd)) == 0
    with pytest.raises(EvalFault):
        eval_func(sd.funcs["forever"], [0], Scope(sd, recursion_limit=200))
