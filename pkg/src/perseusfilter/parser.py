"""Reader and writer for Cassandra's ``.POMDP`` text format.

Supported: the preamble (``discount``, ``values``, ``states``, ``actions``,
``observations`` as counts or name lists), ``start`` in its vector,
``uniform``, single-state and ``include``/``exclude`` forms, and ``T``/``O``/``R``
entries in scalar, row and matrix forms with ``*`` wildcards and the
``uniform``/``identity`` keywords.

Rewards that depend on the observation are folded into R(s, a, s') by taking
the expectation under p(o | s', a).
"""
from __future__ import annotations

import os
import re
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .core import PomdpModel, validate_model

_TOKEN = re.compile(r":|[^\s:]+")
_NUMBER = re.compile(r"[-+]?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?$")
_PREAMBLE = {"discount", "values", "states", "actions", "observations"}


@dataclass(frozen=True)
class ParseDiagnostic:
    line: int
    message: str
    severity: str = "error"

    def __str__(self):
        return f"line {self.line}: {self.severity}: {self.message}"


class PomdpParseError(ValueError):
    def __init__(self, diagnostics: list[ParseDiagnostic]):
        self.diagnostics = list(diagnostics)
        shown = "\n".join(str(d) for d in self.diagnostics[:20])
        more = len(self.diagnostics) - 20
        if more > 0:
            shown += f"\n... {more} more"
        super().__init__(f"invalid .POMDP input:\n{shown}")


class _Abort(Exception):
    pass


class _Tokens:
    def __init__(self, text: str):
        self.items: list[tuple[str, int]] = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0]
            self.items.extend((tok, lineno) for tok in _TOKEN.findall(line))
        self.pos = 0

    def peek(self, k: int = 0) -> Optional[str]:
        i = self.pos + k
        return self.items[i][0] if i < len(self.items) else None

    @property
    def line(self) -> int:
        if not self.items:
            return 1
        return self.items[min(self.pos, len(self.items) - 1)][1]

    def next(self) -> str:
        tok = self.peek()
        if tok is None:
            raise IndexError
        self.pos += 1
        return tok

    def at_statement(self) -> bool:
        tok, nxt = self.peek(), self.peek(1)
        if tok is None:
            return True
        if tok in ("T", "O", "R") and nxt == ":":
            return True
        if tok in _PREAMBLE and nxt == ":":
            return True
        return tok == "start" and nxt in (":", "include", "exclude")


class _Parser:
    def __init__(self, text: str):
        self.tok = _Tokens(text)
        self.diags: list[ParseDiagnostic] = []
        self.discount: Optional[float] = None
        self.is_cost = False
        self.names: dict[str, Optional[list[str]]] = {}
        self.sizes: dict[str, int] = {}
        self.start: Optional[np.ndarray] = None
        self.T = self.O = self.R4 = None
        self.row_lines: dict[tuple[str, int, int], int] = {}

    def error(self, message: str, line: Optional[int] = None):
        self.diags.append(ParseDiagnostic(line or self.tok.line, message))

    # -- tokens --------------------------------------------------------------
    def expect(self, value: str):
        line = self.tok.line
        try:
            tok = self.tok.next()
        except IndexError:
            self.error(f"unexpected end of input, expected '{value}'", line)
            raise _Abort
        if tok != value:
            self.error(f"expected '{value}', found '{tok}'", line)
            raise _Abort

    def number(self) -> float:
        line = self.tok.line
        try:
            tok = self.tok.next()
        except IndexError:
            self.error("unexpected end of input, expected a number", line)
            raise _Abort
        if not _NUMBER.match(tok):
            self.error(f"malformed number '{tok}'", line)
            raise _Abort
        return float(tok)

    def numbers(self, count: int) -> np.ndarray:
        return np.array([self.number() for _ in range(count)])

    def skip_statement(self):
        self.tok.pos += 1
        while not self.tok.at_statement():
            self.tok.pos += 1

    # -- identifiers ---------------------------------------------------------
    def resolve(self, kind: str, tok: str, line: int) -> list[int]:
        n = self.sizes[kind]
        if tok == "*":
            return list(range(n))
        if tok.isdigit():
            idx = int(tok)
            if idx >= n:
                self.error(f"{kind[:-1]} index {idx} out of range 0..{n - 1}", line)
                raise _Abort
            return [idx]
        names = self.names.get(kind)
        if names and tok in names:
            return [names.index(tok)]
        self.error(f"unknown {kind[:-1]} '{tok}'", line)
        raise _Abort

    def ident(self, kind: str) -> list[int]:
        line = self.tok.line
        try:
            tok = self.tok.next()
        except IndexError:
            self.error(f"unexpected end of input, expected a {kind[:-1]}", line)
            raise _Abort
        return self.resolve(kind, tok, line)

    # -- preamble ------------------------------------------------------------
    def parse_space(self, kind: str):
        self.expect(":")
        first = self.tok.peek()
        if first is not None and first.isdigit():
            self.tok.next()
            self.sizes[kind] = int(first)
            self.names[kind] = None
            if int(first) <= 0:
                self.error(f"{kind} count must be positive")
                raise _Abort
            return
        names = []
        while not self.tok.at_statement():
            names.append(self.tok.next())
        if not names:
            self.error(f"empty {kind} declaration")
            raise _Abort
        if len(set(names)) != len(names):
            self.error(f"duplicate names in {kind} declaration")
        self.sizes[kind] = len(names)
        self.names[kind] = names

    def ensure_tables(self):
        if self.T is not None:
            return
        missing = [k for k in ("states", "actions", "observations") if k not in self.sizes]
        if missing:
            self.error(f"preamble is missing {', '.join(missing)}")
            raise _Abort
        S, A, O = self.sizes["states"], self.sizes["actions"], self.sizes["observations"]
        self.T = np.zeros((A, S, S))
        self.O = np.zeros((A, S, O))
        self.R4 = np.zeros((A, S, S, O))

    def parse_start(self):
        S = self.sizes.get("states")
        if S is None:
            self.error("'start' appears before 'states'")
            raise _Abort
        mode = self.tok.next() if self.tok.peek() in ("include", "exclude") else None
        self.expect(":")
        if mode is not None:
            chosen = set()
            while not self.tok.at_statement():
                line = self.tok.line
                chosen.update(self.resolve("states", self.tok.next(), line))
            mask = np.zeros(S, dtype=bool)
            mask[sorted(chosen)] = True
            if mode == "exclude":
                mask = ~mask
            if not mask.any():
                self.error("start distribution excludes every state")
                raise _Abort
            self.start = mask / mask.sum()
            return
        if self.tok.peek() == "uniform":
            self.tok.next()
            self.start = np.full(S, 1.0 / S)
            return
        tok = self.tok.peek()
        if tok is not None and not _NUMBER.match(tok):
            line = self.tok.line
            (s,) = self.resolve("states", self.tok.next(), line)
            self.start = np.zeros(S)
            self.start[s] = 1.0
            return
        if tok is not None and tok.isdigit() and self._single_token_statement():
            line = self.tok.line
            (s,) = self.resolve("states", self.tok.next(), line)
            self.start = np.zeros(S)
            self.start[s] = 1.0
            return
        self.start = self.numbers(S)

    def _single_token_statement(self) -> bool:
        save = self.tok.pos
        self.tok.pos += 1
        alone = self.tok.at_statement()
        self.tok.pos = save
        return alone and self.sizes["states"] > 1

    # -- entries -------------------------------------------------------------
    def parse_entry(self, kind: str):
        self.ensure_tables()
        self.expect(":")
        line = self.tok.line
        actions = self.ident("actions")
        specs = []
        nparts = {"T": 2, "O": 2, "R": 3}[kind]
        kinds = {"T": ("states", "states"), "O": ("states", "observations"),
                 "R": ("states", "states", "observations")}[kind]
        while len(specs) < nparts and self.tok.peek() == ":":
            self.tok.next()
            specs.append(self.ident(kinds[len(specs)]))
        getattr(self, f"fill_{kind}")(actions, specs, line)

    def _keyword_or_numbers(self, shape: tuple[int, ...], allow_identity: bool):
        tok = self.tok.peek()
        if tok == "uniform":
            self.tok.next()
            return np.full(shape, 1.0 / shape[-1])
        if tok == "identity":
            self.tok.next()
            if not allow_identity:
                self.error("'identity' is only valid for square transition matrices")
                raise _Abort
            return np.eye(shape[0])
        return self.numbers(int(np.prod(shape))).reshape(shape)

    def fill_T(self, actions, specs, line):
        S = self.sizes["states"]
        if len(specs) == 2:
            value = self.number()
            for a in actions:
                for s in specs[0]:
                    self.T[a, s, specs[1]] = value
                    self.row_lines[("T", a, s)] = line
        elif len(specs) == 1:
            row = self._keyword_or_numbers((S,), allow_identity=False)
            for a in actions:
                for s in specs[0]:
                    self.T[a, s] = row
                    self.row_lines[("T", a, s)] = line
        else:
            mat = self._keyword_or_numbers((S, S), allow_identity=True)
            for a in actions:
                self.T[a] = mat
                for s in range(S):
                    self.row_lines[("T", a, s)] = line

    def fill_O(self, actions, specs, line):
        S, O = self.sizes["states"], self.sizes["observations"]
        if len(specs) == 2:
            value = self.number()
            for a in actions:
                for s in specs[0]:
                    self.O[a, s, specs[1]] = value
                    self.row_lines[("O", a, s)] = line
        elif len(specs) == 1:
            row = self._keyword_or_numbers((O,), allow_identity=False)
            for a in actions:
                for s in specs[0]:
                    self.O[a, s] = row
                    self.row_lines[("O", a, s)] = line
        else:
            mat = self._keyword_or_numbers((S, O), allow_identity=False)
            for a in actions:
                self.O[a] = mat
                for s in range(S):
                    self.row_lines[("O", a, s)] = line

    def fill_R(self, actions, specs, line):
        S, O = self.sizes["states"], self.sizes["observations"]
        if len(specs) == 3:
            value = self.number()
            idx = np.ix_(actions, specs[0], specs[1], specs[2])
            self.R4[idx] = value
        elif len(specs) == 2:
            row = self.numbers(O)
            for a in actions:
                for s in specs[0]:
                    for s2 in specs[1]:
                        self.R4[a, s, s2] = row
        elif len(specs) == 1:
            mat = self.numbers(S * O).reshape(S, O)
            for a in actions:
                for s in specs[0]:
                    self.R4[a, s] = mat
        else:
            self.error("R entries need at least a start state")
            raise _Abort

    # -- driver --------------------------------------------------------------
    def run(self) -> Optional[PomdpModel]:
        tok = self.tok
        while tok.peek() is not None:
            head = tok.peek()
            line = tok.line
            if not tok.at_statement():
                self.error(f"unexpected token '{head}'", line)
                self.skip_statement()
                continue
            tok.next()
            try:
                if head == "discount":
                    self.expect(":")
                    self.discount = self.number()
                elif head == "values":
                    self.expect(":")
                    word = tok.next() if tok.peek() is not None else None
                    if word not in ("reward", "cost"):
                        self.error(f"values must be 'reward' or 'cost', found '{word}'", line)
                    self.is_cost = word == "cost"
                elif head in ("states", "actions", "observations"):
                    if self.T is not None:
                        self.error(f"'{head}' declared after transition/observation/reward entries", line)
                        raise _Abort
                    self.parse_space(head)
                elif head == "start":
                    self.parse_start()
                else:
                    self.parse_entry(head)
            except _Abort:
                while not tok.at_statement():
                    tok.pos += 1
                if self.T is None and head in ("states", "actions", "observations", "T", "O", "R"):
                    return None
            else:
                if not tok.at_statement():
                    self.error(f"unexpected trailing token '{tok.peek()}'", tok.line)
                    while not tok.at_statement():
                        tok.pos += 1
        if self.T is None:
            self.ensure_tables_or_report()
            if self.T is None:
                return None
        if self.discount is None:
            self.error("missing 'discount'", 1)
        self.check_rows()
        if any(d.severity == "error" for d in self.diags):
            return None
        # R(s,a,s') = Σ_o p(o|s',a) R(a,s,s',o)
        R = np.einsum("aijo,ajo->aij", self.R4, self.O)
        flat = self.R4.max(axis=3) == self.R4.min(axis=3)
        R[flat] = self.R4[..., 0][flat]
        if self.is_cost:
            R = -R
        labels = self.names
        return PomdpModel(
            self.T, self.O, R, self.discount,
            initial_belief=self.start,
            state_labels=labels.get("states"),
            action_labels=labels.get("actions"),
            observation_labels=labels.get("observations"),
        )

    def ensure_tables_or_report(self):
        try:
            self.ensure_tables()
        except _Abort:
            pass

    def check_rows(self):
        for name, table in (("T", self.T), ("O", self.O)):
            for a in range(table.shape[0]):
                for s in range(table.shape[1]):
                    row = table[a, s]
                    line = self.row_lines.get((name, a, s), 1)
                    if np.any(row < 0.0):
                        self.error(f"{name} row (action {a}, state {s}) has a negative entry", line)
                    total = row.sum()
                    if abs(total - 1.0) > 1e-6:
                        self.error(f"{name} row (action {a}, state {s}) sums to {total:.6g}", line)
        if self.start is not None:
            if np.any(self.start < 0.0) or abs(self.start.sum() - 1.0) > 1e-6:
                self.error(f"start distribution sums to {self.start.sum():.6g}", 1)
        if self.discount is not None and not 0.0 <= self.discount < 1.0:
            self.error(f"discount {self.discount} outside [0, 1)", 1)


def parse_pomdp(text: str) -> PomdpModel:
    """Parse ``.POMDP`` text; raises :class:`PomdpParseError` listing every problem found."""
    parser = _Parser(text)
    model = parser.run()
    if model is None:
        if not parser.diags:
            parser.error("no model could be assembled", 1)
        raise PomdpParseError(parser.diags)
    return model


def load_model(path, terminal_states: Iterable[int] = ()) -> PomdpModel:
    """Read a ``.POMDP`` file and attach goal-state metadata (0-based indices)."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    model = parse_pomdp(text)
    name = os.path.splitext(os.path.basename(str(path)))[0]
    model = PomdpModel(
        model.transition, model.observation, model.reward, model.discount,
        frozenset(terminal_states), model.initial_belief,
        model.state_labels, model.action_labels, model.observation_labels, name,
    )
    problems = validate_model(model)
    if problems:
        raise PomdpParseError([ParseDiagnostic(1, p) for p in problems])
    return model


def _fmt(x: float) -> str:
    if x == 0.0:
        return "0"
    if float(x).is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def write_pomdp(model: PomdpModel, header: str = "") -> str:
    """Serialize a model; parsing the output reproduces the model exactly."""
    out = []
    for line in header.splitlines():
        out.append(f"# {line}".rstrip())
    if header:
        out.append("")

    def space(kind, labels, n):
        return f"{kind}: " + (" ".join(labels) if labels else str(n))

    S, A, O = model.num_states, model.num_actions, model.num_observations
    out.append(f"discount: {_fmt(model.discount)}")
    out.append("values: reward")
    out.append(space("states", model.state_labels, S))
    out.append(space("actions", model.action_labels, A))
    out.append(space("observations", model.observation_labels, O))
    b0 = model.initial_belief
    if np.all(b0 == 1.0 / S):
        out.append("start: uniform")
    else:
        out.append("start: " + " ".join(_fmt(x) for x in b0))
    out.append("")

    for a in range(A):
        T = model.transition[a]
        if np.array_equal(T, np.eye(S)):
            out.append(f"T: {a}\nidentity")
            continue
        for s in range(S):
            out.append(f"T: {a} : {s}\n" + " ".join(_fmt(x) for x in T[s]))
    out.append("")
    for a in range(A):
        Oa = model.observation[a]
        for s in range(S):
            row = Oa[s]
            if np.all(row == 1.0 / O):
                out.append(f"O: {a} : {s}\nuniform")
            else:
                out.append(f"O: {a} : {s}\n" + " ".join(_fmt(x) for x in row))
    out.append("")
    for a in range(A):
        for s, s2 in zip(*np.nonzero(model.reward[a])):
            out.append(f"R: {a} : {s} : {s2} : * {_fmt(model.reward[a, s, s2])}")
    return "\n".join(out) + "\n"
