"""Counterexample-guided global minimization over fixed-point grids."""

__version__ = "0.1.0"

from .algorithms import CegioResult, SimplifiedParams, Status, cegio_f, cegio_g, cegio_s
from .backend import EnumBackend, SmtBackend, enum_check, enumerate_min
from .benchlib import list_benchmarks, lookup
from .expr import evaluate, parse
from .grid import BoxDomain, make_grid, parse_box

__all__ = [
    "__version__", "CegioResult", "SimplifiedParams", "Status", "cegio_f", "cegio_g", "cegio_s",
    "EnumBackend", "SmtBackend", "enum_check", "enumerate_min", "list_benchmarks", "lookup",
    "evaluate", "parse", "BoxDomain", "make_grid", "parse_box",
]
