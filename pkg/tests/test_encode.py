import subprocess
from fractions import Fraction

import pytest

from cegio.encode import Query, affine_form, encode_query, tabulate
from cegio.errors import CapExceededError, EncodingError, GridError
from cegio.expr import evaluate, parse
from cegio.grid import BoxDomain, make_grid

URSEM03 = ("-sin(2.2*pi*x0 - pi/2)*(2 - abs(x0))*(3 - abs(x0))/4"
           " - sin(2.2*pi*x1 - pi/2)*(2 - abs(x1))*(3 - abs(x1))/4")


def _q(text, box=BoxDomain.uniform(-2, 2, 2), level=0, t=100, lower=None):
    return Query(parse(text), make_grid(box, level), Fraction(t), lower)


def test_header_and_structure():
    s = encode_query(_q("x0^2 + x1^2", level=1, t=1))
    lines = s.text.splitlines()
    assert lines[0] == "(set-option :produce-models true)"
    assert lines[1] == "(set-logic QF_NIRA)"
    assert "(declare-const K0 Int)" in lines and "(declare-const K1 Int)" in lines
    assert "(define-fun x0 () Real (/ (to_real K0) 10.0))" in lines
    assert "(assert (and (<= (- 20) K0) (<= K0 20)))" in lines
    assert "(assert (< objective 1.0))" in lines
    assert lines[-2:] == ["(check-sat)", "(get-value (K0 K1))"]
    assert s.symbols == ("K0", "K1")


def test_only_used_variables_get_definitions():
    s = encode_query(_q("x1 + 1"))
    assert "(declare-const K0 Int)" in s.text
    assert "define-fun x0 " not in s.text
    assert "define-fun x1 " in s.text


def test_rational_literals_and_lower_cut():
    s = encode_query(_q("x0 - 0.25", t=Fraction(-1, 3), lower=Fraction(-7, 2)))
    assert "(/ 1.0 4.0)" in s.text
    assert "(assert (< objective (- (/ 1.0 3.0))))" in s.text
    assert "(assert (<= (- (/ 7.0 2.0)) objective))" in s.text


def test_division_guard_only_for_variable_denominators():
    assert "(assert (not (= " in encode_query(_q("1/(x0 - x1)")).text
    assert "(assert (not (= " not in encode_query(_q("x0/4")).text


def test_abs_and_floor():
    s = encode_query(_q("abs(x0 - 1) + floor(x1)")).text
    assert "ite (< " in s
    assert "(to_real (to_int x1))" in s


def test_transcendental_tables_use_evaluator_values():
    f = parse("sin(x0)")
    g = make_grid(BoxDomain.uniform(-1, 1, 1), 1)
    rows = tabulate(f, g)
    assert len(rows) == 21
    assert all(v == evaluate(f, (Fraction(k, 10),)) for k, v in rows)
    assert "define-fun tab0" in encode_query(Query(f, g, 0)).text


def test_table_cap():
    with pytest.raises(CapExceededError):
        tabulate(parse("sin(x0)"), make_grid(BoxDomain.uniform(-100, 100, 1), 3), cap=1000)


def test_non_affine_transcendental_rejected():
    with pytest.raises(EncodingError):
        encode_query(_q("sin(x0*x1)"))
    with pytest.raises(EncodingError):
        encode_query(_q("cos(x0 + x1)"))
    with pytest.raises(EncodingError):
        encode_query(_q("0.5 + (cos(sin(abs(x0^2 - x1^2)))^2 - 0.5)/(1 + 0.001*(x0^2 + x1^2))^2"))


def test_closed_transcendentals_fold():
    s = encode_query(_q("sqrt(3)*x0 + sin(pi)")).text
    assert "sqrt" not in s and "sin" not in s


def test_affine_form():
    coeffs, off = affine_form(parse("2.2*pi*x0 - pi/2"))
    assert set(coeffs) == {0} and off < 0
    assert affine_form(parse("x0*x1")) is None
    assert affine_form(parse("(x0 + 1)/2")) == ({0: Fraction(1, 2)}, Fraction(1, 2))


def test_query_dimension_check():
    with pytest.raises(GridError):
        Query(parse("x2"), make_grid(BoxDomain.uniform(0, 1, 2), 0), 1)


def test_query_accepts():
    q = _q("x0", t=1, lower=0)
    assert q.accepts(Fraction(0)) and not q.accepts(Fraction(1)) and not q.accepts(Fraction(-1))


def test_ursem03_script_is_accepted_by_z3(z3_config):
    s = encode_query(_q(URSEM03))
    out = subprocess.run([z3_config.executable, *z3_config.args], input=s.text,
                         capture_output=True, text=True, timeout=60).stdout
    assert out.startswith("sat")
