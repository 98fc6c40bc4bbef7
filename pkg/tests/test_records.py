import json
from fractions import Fraction

import jsonschema
import pytest

from cegio.algorithms import cegio_g
from cegio.backend import EnumBackend
from cegio.benchlib import lookup
from cegio.records import dumps, from_rational, rational, run_record, schema


def test_rational_forms():
    assert rational(Fraction(1, 3)) == {"exact": "1/3", "decimal": "0.333333333333"}
    assert rational(Fraction(-4)) == {"exact": "-4", "decimal": "-4"}
    assert from_rational(rational(Fraction(-22, 7))) == Fraction(-22, 7)


@pytest.mark.parametrize("key", ["booth", "ursem03", "himmelblau"])
def test_record_matches_schema(key):
    b = lookup(key)
    res = cegio_g(b.objective, b.box, 1, EnumBackend())
    rec = run_record(res, benchmark={"key": b.key, "id": b.id, "name": b.name}, expr=b.expr_text, box=b.box, params={"eta": 1})
    jsonschema.validate(rec, schema())
    back = json.loads(dumps(rec))
    assert back == rec
    assert from_rational(back["value"]) == res.value
    assert [from_rational(c) for c in back["minimizer"]] == list(res.candidate.x)


def test_dumps_is_single_line_and_sorted():
    text = dumps({"b": 1, "a": [1, 2]})
    assert text == '{"a": [1, 2], "b": 1}'
