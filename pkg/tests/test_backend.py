import os
import sys
import time
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from cegio.backend import (
    BackendError, EnumBackend, Sat, SmtBackend, SolverConfig, Timeout, Unknown, Unsat,
    check, enum_check, enumerate_min, load_solver_configs, parse_model, resolve_solver,
)
from cegio.benchlib import lookup
from cegio.encode import Query, SmtScript, encode_query
from cegio.enumerator import naive_first_below, naive_minimum
from cegio.errors import CapExceededError
from cegio.expr import parse
from cegio.grid import BoxDomain, make_grid

BOOTH = parse("(x0 + 2*x1 - 7)^2 + (2*x0 + x1 - 5)^2")
SPHERE = parse("x0^2 + x1^2")


def _stub(tmp_path, body, name="stub.py"):
    path = tmp_path / name
    path.write_text("import sys\n" + body)
    return SolverConfig(sys.executable, (str(path),), timeout=10, name="stub")


SCRIPT = SmtScript("QF_NIRA", (), (), ("(check-sat)",), ("K0", "K1"))


# model parsing

def test_parse_model_negative_values():
    assert parse_model("((K0 (- 2)) (K1 0))", ("K0", "K1")) == (-2, 0)


def test_parse_model_single():
    assert parse_model("((K0 7))", ("K0",)) == (7,)


def test_parse_model_reorders_by_symbol():
    assert parse_model("((K1 4) (K0 (- 1)))", ("K0", "K1")) == (-1, 4)


def test_parse_model_rejects_garbage():
    with pytest.raises(BackendError):
        parse_model("((K0 7)", ("K0",))
    with pytest.raises(BackendError):
        parse_model("((K0 7))", ("K0", "K1"))
    with pytest.raises(BackendError):
        parse_model("((K0 x))", ("K0",))


# solver processes

def test_sphere_below_zero_is_unsat(z3_config):
    q = Query(SPHERE, make_grid(BoxDomain.uniform(-5, 5, 2), 1), 0)
    assert check(encode_query(q), z3_config) == Unsat()


def test_booth_below_one_is_sat_at_minimizer(z3_config):
    q = Query(BOOTH, make_grid(BoxDomain.uniform(-10, 10, 2), 0), 1)
    assert check(encode_query(q), z3_config) == Sat((1, 3))


def test_timeout_kills_solver(tmp_path):
    pidfile = tmp_path / "pid"
    cfg = _stub(tmp_path, f"import os, time\nopen({str(pidfile)!r}, 'w').write(str(os.getpid()))\n"
                          "time.sleep(60)\n").with_timeout(0.5)
    t0 = time.perf_counter()
    assert check(SCRIPT, cfg) == Timeout(0.5)
    assert time.perf_counter() - t0 < 10
    pid = int(pidfile.read_text())
    with pytest.raises(ProcessLookupError):
        os.kill(pid, 0)


def test_tiny_timeout(tmp_path):
    cfg = _stub(tmp_path, "import time\ntime.sleep(5)\n").with_timeout(0.001)
    assert isinstance(check(SCRIPT, cfg), Timeout)


def test_missing_executable():
    with pytest.raises(BackendError):
        check(SCRIPT, SolverConfig("/nonexistent/solver-binary"))


@pytest.mark.parametrize("out", ["hello\n", "", "sat\n", "sat\n(error \"boom\")\n", "(error \"bad\")\n"])
def test_malformed_output(tmp_path, out):
    cfg = _stub(tmp_path, f"sys.stdin.read()\nsys.stdout.write({out!r})\n")
    with pytest.raises(BackendError):
        check(SCRIPT, cfg)


def test_error_after_unsat_is_ignored(tmp_path):
    cfg = _stub(tmp_path, "sys.stdin.read()\nprint('unsat')\nprint('(error \"model is not available\")')\n")
    assert check(SCRIPT, cfg) == Unsat()


def test_unknown(tmp_path):
    cfg = _stub(tmp_path, "sys.stdin.read()\nprint('unknown')\n")
    assert isinstance(check(SCRIPT, cfg), Unknown)


def test_stub_sat(tmp_path):
    cfg = _stub(tmp_path, "sys.stdin.read()\nprint('sat')\nprint('((K0 3) (K1 (- 4)))')\n")
    assert check(SCRIPT, cfg) == Sat((3, -4))


def test_smt_backend_rejects_witness_outside_grid(tmp_path):
    cfg = _stub(tmp_path, "sys.stdin.read()\nprint('sat')\nprint('((K0 300) (K1 0))')\n")
    q = Query(SPHERE, make_grid(BoxDomain.uniform(-1, 1, 2), 0), 5)
    with pytest.raises(BackendError):
        SmtBackend(cfg).check(q)


def test_config_file_and_file_input(tmp_path):
    stub = tmp_path / "filestub.py"
    stub.write_text("import sys\ntext = open(sys.argv[1]).read()\n"
                    "print('unsat' if 'check-sat' in text else 'unknown')\n")
    ini = tmp_path / "solvers.ini"
    ini.write_text(f"[fake]\ncommand = {sys.executable} {stub} {{script}}\ninput = file\ntimeout = 7\n")
    cfgs = load_solver_configs(ini)
    assert cfgs["fake"].timeout == 7 and cfgs["fake"].input == "file"
    assert check(SCRIPT, cfgs["fake"]) == Unsat()
    assert resolve_solver("fake", ini) == cfgs["fake"]


def test_config_from_environment(tmp_path, monkeypatch):
    ini = tmp_path / "solvers.ini"
    ini.write_text("[mine]\ncommand = mysolver --flag\n")
    monkeypatch.setenv("CEGIO_SOLVERS_CONFIG", str(ini))
    cfg = resolve_solver("mine")
    assert cfg.executable == "mysolver" and cfg.args == ("--flag",)
    with pytest.raises(BackendError):
        resolve_solver("no-such-solver")


def test_bad_config_values():
    with pytest.raises(ValueError):
        SolverConfig("z3", timeout=0)
    with pytest.raises(ValueError):
        SolverConfig("z3", input="pipe")


# enumeration

def test_enum_check_constant():
    g = make_grid(BoxDomain.uniform(-1, 1, 2), 1)
    assert enum_check(Query(parse("5"), g, 5)) == Unsat()
    assert enum_check(Query(parse("5"), g, 6)) == Sat((-10, -10))


def test_enum_check_lower_cut():
    g = make_grid(BoxDomain.uniform(-2, 2, 1), 1)
    assert enum_check(Query(parse("x0^2"), g, Fraction(1, 2), Fraction(1, 4))) == Sat((-7,))


def test_enumerate_min_examples():
    assert enumerate_min(BOOTH, make_grid(BoxDomain.uniform(-10, 10, 2), 1)).x == (1, 3)
    m = enumerate_min(parse("0.26*(x0^2 + x1^2) - 0.48*x0*x1"), make_grid(BoxDomain.uniform(-10, 10, 2), 1))
    assert m.x == (0, 0) and m.value == 0
    u = lookup("ursem03")
    for eta in (0, 1, 2):
        assert enumerate_min(u.objective, make_grid(u.box, eta)).value == u.golden[eta]


def test_cap():
    g = make_grid(BoxDomain.uniform(-10, 10, 2), 2)
    with pytest.raises(CapExceededError):
        enumerate_min(SPHERE, g, cap=1000)
    with pytest.raises(CapExceededError):
        EnumBackend(cap=1000).check(Query(SPHERE, g, 1))
    assert enumerate_min(SPHERE, g, cap=None).value == 0


def test_undefined_everywhere():
    with pytest.raises(BackendError):
        enumerate_min(parse("sqrt(-1 - x0^2)"), make_grid(BoxDomain.uniform(-1, 1, 1), 0))


coef = st.integers(-4, 4)


@given(coef, coef, coef, coef, st.integers(-30, 30))
@settings(max_examples=60, deadline=None)
def test_enum_agrees_with_naive_scan(a, b, c, d, t):
    f = parse(f"({a})*x0^2 + ({b})*x1^2 + ({c})*x0*x1 + ({d})*x0")
    g = make_grid(BoxDomain.uniform(-2, 2, 2), 1)
    thr = Fraction(t, 4)
    hit = naive_first_below(f, g, thr)
    assert enum_check(Query(f, g, thr)) == (Unsat() if hit is None else Sat(hit[0]))
    m = enumerate_min(f, g)
    assert (m.k, m.value) == naive_minimum(f, g)


@given(coef, coef, coef)
@settings(max_examples=30, deadline=None)
def test_minimum_is_fixpoint(a, b, c):
    f = parse(f"({a})*x0^2 + ({b})*x1^2 + ({c})*x0")
    g = make_grid(BoxDomain.uniform(-1, 1, 2), 1)
    m = enumerate_min(f, g)
    assert enum_check(Query(f, g, m.value)) == Unsat()
    assert isinstance(enum_check(Query(f, g, m.value + Fraction(1, 10**9))), Sat)


@given(coef, coef, st.integers(-10, 10))
@settings(max_examples=15, deadline=None)
def test_solver_agrees_with_enumerator_on_satisfiability(z3_config, a, b, t):
    f = parse(f"({a})*x0^2 + ({b})*x0*x1 + x1")
    q = Query(f, make_grid(BoxDomain.uniform(-1, 1, 2), 0), Fraction(t, 2))
    assert type(check(encode_query(q), z3_config)) is type(enum_check(q))
