from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from cegio.baselines import BaselineParams, pattern_search, simulated_annealing
from cegio.benchlib import lookup
from cegio.errors import GridError
from cegio.expr import evaluate, parse
from cegio.grid import BoxDomain

SPHERE = parse("x0^2 + x1^2")
BOX = BoxDomain.uniform(-5, 5, 2)


def test_annealing_on_sphere():
    c = simulated_annealing(SPHERE, BOX, BaselineParams(budget=5000, seed=1), (4, 4))
    assert c.value <= Fraction(1, 100)


def test_pattern_search_on_sphere():
    c = pattern_search(SPHERE, BOX, BaselineParams(), (3, -2))
    assert c.x == (0, 0) and c.value == 0


def test_single_step_budget():
    traj = []
    c = simulated_annealing(SPHERE, BOX, BaselineParams(budget=1), (1, 1), trajectory=traj)
    assert c.value <= 2 and len(traj) <= 2
    c = pattern_search(SPHERE, BOX, BaselineParams(budget=1), (1, 1))
    assert c.value <= 2


def test_local_minimum_start_stays():
    f = parse("(x0^2 - 1)^2 + 0.1*x0")
    box = BoxDomain.uniform(-2, 2, 1)
    c = pattern_search(f, box, BaselineParams(step=0.01), (Fraction(1),))
    assert c.x[0] > 0


def test_entrapment_on_ursem_plane():
    u = lookup("ursem03_plane")
    ps = pattern_search(u.objective, u.box, BaselineParams(step=0.1), ("1.2",))
    sa = simulated_annealing(u.objective, u.box,
                             BaselineParams(budget=200, seed=3, temperature=0.05, neighborhood=0.05), ("1.5",))
    assert ps.value - u.minimum >= Fraction(1, 2)
    assert sa.value - u.minimum >= Fraction(1, 2)


def test_deterministic():
    p = BaselineParams(budget=300, seed=9)
    t1, t2 = [], []
    a = simulated_annealing(SPHERE, BOX, p, (2, 2), trajectory=t1)
    b = simulated_annealing(SPHERE, BOX, p, (2, 2), trajectory=t2)
    assert a == b and t1 == t2


def test_init_outside_box():
    with pytest.raises(GridError):
        pattern_search(SPHERE, BOX, BaselineParams(), (9, 0))


@pytest.mark.parametrize("kw", [dict(budget=0), dict(cooling=1.0), dict(contraction=0),
                                dict(temperature=-1), dict(step=0), dict(neighborhood=0)])
def test_param_validation(kw):
    with pytest.raises(ValueError):
        BaselineParams(**kw)


@given(st.integers(-3, 3), st.integers(-3, 3), st.integers(0, 50), st.fractions(-5, 5), st.fractions(-5, 5))
@settings(max_examples=40, deadline=None)
def test_results_stay_in_box_and_never_worsen(a, b, seed, x0, x1):
    f = parse(f"({a})*x0^2 + ({b})*x0*x1 + sin(x1)")
    init = (x0, x1)
    start = evaluate(f, init)
    for c in (simulated_annealing(f, BOX, BaselineParams(budget=100, seed=seed), init),
              pattern_search(f, BOX, BaselineParams(budget=100), init)):
        assert BOX.contains(c.x) and c.value <= start
