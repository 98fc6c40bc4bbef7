"""Falsification backends: an external SMT solver process, or grid enumeration.

Both answer a :class:`~cegio.encode.Query` with a :class:`Verdict`.  The
enumerator is exact by construction and doubles as the test oracle.
"""

from __future__ import annotations

import configparser
import os
import shlex
import shutil
import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

from . import enumerator
from .candidate import Candidate
from .encode import DEFAULT_LOGIC, TABLE_CAP, Query, SmtScript, encode_query
from .errors import BackendError, CapExceededError
from .expr import Expr
from .grid import GridSpec

__all__ = [
    "Sat", "Unsat", "Unknown", "Timeout", "Verdict",
    "SolverConfig", "load_solver_configs", "default_solver_configs", "resolve_solver",
    "check", "parse_model", "parse_sexpr",
    "enum_check", "enumerate_min", "DEFAULT_CAP",
    "EnumBackend", "SmtBackend", "CONFIG_ENV",
]

DEFAULT_CAP = 10**7
CONFIG_ENV = "CEGIO_SOLVERS_CONFIG"


@dataclass(frozen=True)
class Sat:
    witness: tuple[int, ...]


@dataclass(frozen=True)
class Unsat:
    pass


@dataclass(frozen=True)
class Unknown:
    reason: str = ""


@dataclass(frozen=True)
class Timeout:
    seconds: float = 0.0


Verdict = Union[Sat, Unsat, Unknown, Timeout]


# --- solver configuration -------------------------------------------------

@dataclass(frozen=True)
class SolverConfig:
    """How to launch one solver.

    ``args`` may contain ``{script}``; with ``input="file"`` it is replaced by
    the path of a temporary file holding the script, otherwise the script is
    written to standard input.
    """

    executable: str
    args: tuple[str, ...] = ()
    timeout: float = 60.0
    name: str = "smt"
    input: str = "stdin"
    logic: str = DEFAULT_LOGIC

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        if not self.timeout > 0:
            raise ValueError("solver timeout must be positive")
        if self.input not in ("stdin", "file"):
            raise ValueError("solver input must be 'stdin' or 'file'")

    def with_timeout(self, seconds: float) -> SolverConfig:
        return SolverConfig(self.executable, self.args, seconds, self.name, self.input, self.logic)


def load_solver_configs(path: Union[str, Path]) -> dict[str, SolverConfig]:
    """Read an INI file with one ``[tag]`` section per solver.

    Keys: ``command`` (required, shell-style words), ``timeout`` (seconds),
    ``logic``, ``input`` (``stdin`` or ``file``).
    """
    parser = configparser.ConfigParser(interpolation=None)
    with open(path, encoding="utf-8") as fh:
        parser.read_file(fh)
    out = {}
    for tag in parser.sections():
        sec = parser[tag]
        words = shlex.split(sec.get("command", ""))
        if not words:
            raise ValueError(f"solver [{tag}] has no command")
        out[tag] = SolverConfig(
            executable=words[0],
            args=tuple(words[1:]),
            timeout=sec.getfloat("timeout", 60.0),
            name=tag,
            input=sec.get("input", "stdin"),
            logic=sec.get("logic", DEFAULT_LOGIC),
        )
    return out


def default_solver_configs() -> dict[str, SolverConfig]:
    """Built-in entries for solvers found on ``PATH``."""
    known = {
        "z3": ("z3", ("-smt2", "-in")),
        "cvc5": ("cvc5", ("--lang=smt2", "--incremental")),
    }
    out = {}
    for tag, (exe, args) in known.items():
        found = shutil.which(exe)
        if found:
            out[tag] = SolverConfig(found, args, name=tag)
    return out


def resolve_solver(tag: str, config_path: Optional[Union[str, Path]] = None) -> SolverConfig:
    """Look ``tag`` up in the config file (argument, then environment), then built-ins."""
    path = config_path or os.environ.get(CONFIG_ENV)
    if path:
        configs = load_solver_configs(path)
        if tag in configs:
            return configs[tag]
    builtin = default_solver_configs()
    if tag in builtin:
        return builtin[tag]
    raise BackendError(f"unknown solver {tag!r}" + (f" (not in {path})" if path else ""))


# --- solver output --------------------------------------------------------

def _tokens(text: str):
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()":
            yield c
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c == '"':
            j = i + 1
            while j < n and not (text[j] == '"' and (j + 1 >= n or text[j + 1] != '"')):
                j += 2 if text[j] == '"' else 1
            if j >= n:
                raise BackendError("unterminated string in solver output")
            yield text[i:j + 1]
            i = j + 1
        elif c == "|":
            j = text.find("|", i + 1)
            if j < 0:
                raise BackendError("unterminated quoted symbol in solver output")
            yield text[i:j + 1]
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in '();"|':
                j += 1
            yield text[i:j]
            i = j


def parse_sexpr(text: str) -> list:
    """All top-level s-expressions in ``text``: atoms are strings, lists are lists."""
    stack: list[list] = [[]]
    for tok in _tokens(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise BackendError("unbalanced ')' in solver output")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    if len(stack) != 1:
        raise BackendError("unbalanced '(' in solver output")
    return stack[0]


def _int_value(v) -> int:
    if isinstance(v, str):
        try:
            return int(v)
        except ValueError:
            pass
    elif len(v) == 2 and v[0] == "-":
        return -_int_value(v[1])
    raise BackendError(f"not an integer value: {v!r}")


def parse_model(text: str, symbols: Sequence[str] = ()) -> tuple[int, ...]:
    """Integers from a ``get-value`` listing, in the order of ``symbols``.

    With no ``symbols`` the listing order is kept.
    """
    exprs = parse_sexpr(text)
    if len(exprs) != 1 or not isinstance(exprs[0], list):
        raise BackendError(f"expected one value listing, got {text.strip()!r}")
    return _model(exprs[0], symbols)


def _model(listing: list, symbols: Sequence[str]) -> tuple[int, ...]:
    values: dict[str, int] = {}
    for pair in listing:
        if not isinstance(pair, list) or len(pair) != 2 or not isinstance(pair[0], str):
            raise BackendError(f"malformed value pair {pair!r}")
        values[pair[0].strip("|")] = _int_value(pair[1])
    if not symbols:
        return tuple(values.values())
    missing = [s for s in symbols if s not in values]
    if missing:
        raise BackendError(f"solver model lacks {', '.join(missing)}")
    return tuple(values[s] for s in symbols)


def _is_error(e) -> bool:
    return isinstance(e, list) and bool(e) and e[0] == "error"


def _interpret(out: str, symbols: Sequence[str]) -> Verdict:
    """Classify solver output.

    Errors after ``unsat``/``unknown`` are expected (``get-value`` has no
    model to report) and ignored; any other error is a backend failure.
    """
    exprs = parse_sexpr(out)
    if not exprs:
        raise BackendError("solver produced no output")
    head = exprs[0]
    if head == "unsat":
        return Unsat()
    if head == "unknown":
        return Unknown("solver answered unknown")
    if _is_error(head):
        raise BackendError(f"solver reported an error: {' '.join(map(str, head[1:]))}")
    if head == "sat":
        if len(exprs) < 2:
            raise BackendError("solver answered sat without a value listing")
        if _is_error(exprs[1]):
            raise BackendError(f"solver reported an error: {' '.join(map(str, exprs[1][1:]))}")
        if not isinstance(exprs[1], list):
            raise BackendError(f"malformed value listing {exprs[1]!r}")
        return Sat(_model(exprs[1], symbols))
    raise BackendError(f"unexpected solver output: {out.strip()[:200]!r}")


def check(script: SmtScript, cfg: SolverConfig) -> Verdict:
    """Run one solver process on ``script`` and classify its answer."""
    text = script.text
    tmp = None
    args = list(cfg.args)
    stdin = text
    try:
        if cfg.input == "file":
            fd, tmp = tempfile.mkstemp(suffix=".smt2", prefix="cegio-")
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(text)
            args = [a.replace("{script}", tmp) for a in args]
            if not any(tmp in a for a in args):
                args.append(tmp)
            stdin = None
        try:
            proc = subprocess.run(
                [cfg.executable, *args],
                input=stdin,
                capture_output=True,
                text=True,
                timeout=cfg.timeout,
            )
        except subprocess.TimeoutExpired:
            # subprocess.run kills and reaps the child before re-raising
            return Timeout(cfg.timeout)
        except OSError as exc:
            raise BackendError(f"cannot start solver {cfg.executable!r}: {exc}") from exc
    finally:
        if tmp:
            os.unlink(tmp)
    return _interpret(proc.stdout, script.symbols)


# --- enumeration ----------------------------------------------------------

def _check_cap(grid: GridSpec, cap: Optional[int]) -> None:
    if cap is not None and grid.size > cap:
        raise CapExceededError(f"grid has {grid.size} points, enumerator cap is {cap}")


def enum_check(q: Query, cap: Optional[int] = DEFAULT_CAP) -> Verdict:
    """Sat at the lexicographically first grid point meeting the query, else Unsat."""
    _check_cap(q.grid, cap)
    hit = enumerator.first_below(q.objective, q.grid, q.threshold, q.lower)
    return Unsat() if hit is None else Sat(hit[0])


def enumerate_min(f: Expr, grid: GridSpec, cap: Optional[int] = DEFAULT_CAP) -> Candidate:
    """Exact grid minimizer; ties go to the lexicographically smallest ``k``."""
    _check_cap(grid, cap)
    hit = enumerator.grid_minimum(f, grid)
    if hit is None:
        raise BackendError("objective is undefined at every grid point")
    k, value = hit
    return Candidate(x=grid.point(k), value=value, k=k, level=grid.level)


# --- backend objects used by the optimization loops -----------------------

@dataclass
class EnumBackend:
    cap: Optional[int] = DEFAULT_CAP
    name: str = "enum"

    def check(self, q: Query) -> Verdict:
        return enum_check(q, self.cap)


@dataclass
class SmtBackend:
    config: SolverConfig
    table_cap: int = TABLE_CAP
    scripts: list = field(default_factory=list, repr=False)
    keep_scripts: bool = False

    @property
    def name(self) -> str:
        return self.config.name

    def check(self, q: Query) -> Verdict:
        script = encode_query(q, logic=self.config.logic, table_cap=self.table_cap)
        if self.keep_scripts:
            self.scripts.append(script)
        verdict = check(script, self.config)
        if isinstance(verdict, Sat) and not q.grid.contains_k(verdict.witness):
            raise BackendError(f"solver witness {verdict.witness} lies outside the grid")
        return verdict
