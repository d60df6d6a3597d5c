"""Surface syntax and AST for normal logic programs.

Grammar::

    program    := statement*
    statement  := (rule | constraint | query) "."
    rule       := atom [":-" body]
    constraint := ":-" body
    query      := "?-" body
    body       := literal ("," literal)*
    literal    := ["not"] atom
    atom       := IDENT ["(" term ("," term)* ")"]
    term       := IDENT | VARIABLE | INTEGER

``%`` starts a comment that runs to the end of the line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

from .terms import Struct, Var, render, term_vars

HIDDEN_PREFIX = "__c_"


class ProgramError(Exception):
    """Base class for errors in a user program (CLI exit code 1)."""


class ParseError(ProgramError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class SafetyError(ProgramError):
    def __init__(self, message: str, rule=None):
        super().__init__(message)
        self.rule = rule


class UnsafeProgram(ProgramError):
    def __init__(self, errors: list):
        super().__init__("; ".join(str(e) for e in errors))
        self.errors = errors


class BuiltinError(ProgramError):
    pass


# -- AST -----------------------------------------------------------------------


@dataclass(frozen=True)
class Literal:
    positive: bool
    atom: Struct

    @property
    def pred(self) -> str:
        return self.atom.functor

    def flip(self) -> "Literal":
        return Literal(not self.positive, self.atom)

    def __str__(self):
        return render(self.atom) if self.positive else f"not {render(self.atom)}"


def pos(atom: Struct) -> Literal:
    return Literal(True, atom)


def neg(atom: Struct) -> Literal:
    return Literal(False, atom)


@dataclass(frozen=True)
class Rule:
    head: Struct
    body: tuple = ()
    origin: Optional[tuple] = field(default=None, compare=False)

    def variables(self) -> list:
        acc = term_vars(self.head)
        for lit in self.body:
            term_vars(lit.atom, acc)
        return acc

    def __str__(self):
        if not self.body:
            return f"{render(self.head)}."
        return f"{render(self.head)} :- {', '.join(map(str, self.body))}."


@dataclass(frozen=True)
class Program:
    rules: tuple = ()
    queries: tuple = ()
    constraints: tuple = ()
    constants: frozenset = frozenset()

    @classmethod
    def from_rules(cls, rules: Iterable[Rule], queries=(), constraints=()) -> "Program":
        rules = tuple(rules)
        consts = set()
        bodies = [r.body for r in rules] + list(queries) + list(constraints)
        for r in rules:
            consts.update(_constants(r.head))
        for body in bodies:
            for lit in body:
                consts.update(_constants(lit.atom))
        return cls(rules, tuple(queries), tuple(constraints), frozenset(consts))


def _constants(atom: Struct):
    return [a for a in atom.args if type(a) in (str, int)]


# -- builtins ------------------------------------------------------------------

# name -> (arity, input positions that must be ground, output positions)
BUILTINS = {
    "neq": (2, (0, 1), ()),
    "lt": (2, (0, 1), ()),
    "plus": (3, (0, 1), (2,)),
    "absdiff": (3, (0, 1), (2,)),
}


def is_builtin(name: str) -> bool:
    return name in BUILTINS


def eval_builtin(name: str, args: tuple) -> Optional[tuple]:
    """Evaluate a builtin on walked arguments.

    Returns the argument tuple with outputs filled in, or ``None`` if the
    builtin is false. Unbound inputs raise ``BuiltinError``.
    """
    _, inputs, _ = BUILTINS[name]
    for i in inputs:
        if type(args[i]) is Var or type(args[i]) is Struct:
            raise BuiltinError(f"{name}/{len(args)}: argument {i + 1} is not ground")
    a, b = args[0], args[1]
    if name == "neq":
        return args if (type(a) is not type(b) or a != b) else None
    if type(a) is not int or type(b) is not int:
        return None
    if name == "lt":
        return args if a < b else None
    value = a + b if name == "plus" else abs(a - b)
    out = args[2]
    if type(out) is Var:
        return (a, b, value)
    return args if out == value else None


# -- parser --------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|%[^\n]*)
  | (?P<if>:-)
  | (?P<query>\?-)
  | (?P<int>-?[0-9]+)
  | (?P<ident>[a-z][A-Za-z0-9_]*)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<punct>[(),.])
    """,
    re.VERBOSE,
)


def _tokenize(text: str):
    tokens = []
    line, line_start, i = 1, 0, 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if m is None:
            raise ParseError(f"unexpected character {text[i]!r}", line, i - line_start + 1)
        kind = m.lastgroup
        value = m.group()
        if kind != "ws":
            tokens.append((kind if kind != "punct" else value, value, line, i - line_start + 1))
        for j, ch in enumerate(value):
            if ch == "\n":
                line += 1
                line_start = i + j + 1
        i = m.end()
    tokens.append(("eof", "", line, i - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.arity = {}
        self.next_var = 0
        self.scope = {}

    def peek(self, offset=0):
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, expected: str, tok=None):
        tok = tok or self.peek()
        found = "end of input" if tok[0] == "eof" else repr(tok[1])
        raise ParseError(f"expected {expected}, found {found}", tok[2], tok[3])

    def expect(self, kind: str, what: str):
        if self.peek()[0] != kind:
            self.fail(what)
        return self.advance()

    def program(self) -> Program:
        rules, queries, constraints = [], [], []
        while self.peek()[0] != "eof":
            self.scope = {}
            tok = self.peek()
            if tok[0] == "if":
                self.advance()
                constraints.append(self.body())
            elif tok[0] == "query":
                self.advance()
                queries.append(self.body())
            else:
                head = self.atom(head=True)
                body = ()
                if self.peek()[0] == "if":
                    self.advance()
                    body = self.body()
                rules.append(Rule(head, body, (tok[2], tok[3])))
            self.expect(".", "'.'")
        return Program.from_rules(rules, queries, constraints)

    def body(self) -> tuple:
        lits = [self.literal()]
        while self.peek()[0] == ",":
            self.advance()
            lits.append(self.literal())
        return tuple(lits)

    def literal(self) -> Literal:
        tok = self.peek()
        if tok[0] == "ident" and tok[1] == "not" and self.peek(1)[0] == "ident":
            self.advance()
            return Literal(False, self.atom())
        return Literal(True, self.atom())

    def atom(self, head=False) -> Struct:
        tok = self.peek()
        if tok[0] != "ident":
            self.fail("an atom")
        self.advance()
        name = tok[1]
        args = []
        if self.peek()[0] == "(":
            self.advance()
            args.append(self.term())
            while self.peek()[0] == ",":
                self.advance()
                args.append(self.term())
            self.expect(")", "')' or ','")
        if head and is_builtin(name):
            raise ParseError(f"builtin {name} cannot be defined", tok[2], tok[3])
        expected = BUILTINS[name][0] if is_builtin(name) else self.arity.setdefault(name, len(args))
        if expected != len(args):
            raise ParseError(
                f"predicate {name} used with arity {len(args)}, previously {expected}",
                tok[2],
                tok[3],
            )
        return Struct(name, tuple(args))

    def term(self):
        tok = self.advance()
        kind, value = tok[0], tok[1]
        if kind == "int":
            return int(value)
        if kind == "ident":
            if self.peek()[0] == "(":
                self.fail("',' or ')' (compound terms are not supported)")
            return value
        if kind == "var":
            if value == "_":
                return self._fresh("_")
            if value not in self.scope:
                self.scope[value] = self._fresh(value)
            return self.scope[value]
        self.pos -= 1
        self.fail("a term")

    def _fresh(self, hint):
        v = Var(self.next_var, hint)
        self.next_var += 1
        return v


def parse_program(text: str) -> Program:
    return _Parser(text).program()


def parse_body(text: str) -> tuple:
    """Parse a comma-separated literal list such as ``"path(a,X), not q(X)"``."""
    src = text.strip()
    if src.startswith("?-"):
        src = src[2:]
    if not src.rstrip().endswith("."):
        src += "."
    prog = parse_program("?- " + src)
    return prog.queries[0]


def render_body(body) -> str:
    return ", ".join(map(str, body))


def render_program(prog: Program) -> str:
    lines = [str(r) for r in prog.rules]
    lines += [f":- {render_body(b)}." for b in prog.constraints]
    lines += [f"?- {render_body(b)}." for b in prog.queries]
    return "\n".join(lines) + ("\n" if lines else "")


# -- transformations -------------------------------------------------------------


def constraint_atom(i: int) -> Struct:
    return Struct(f"{HIDDEN_PREFIX}{i}", ())


def is_hidden(name: str) -> bool:
    return name.startswith(HIDDEN_PREFIX)


def desugar_constraints(prog: Program) -> Program:
    """Turn each ``:- B.`` into ``__c_i :- B, not __c_i.``"""
    if not prog.constraints:
        return prog
    extra = []
    for i, body in enumerate(prog.constraints):
        head = constraint_atom(i)
        extra.append(Rule(head, tuple(body) + (Literal(False, head),)))
    return replace(prog, rules=prog.rules + tuple(extra), constraints=())


def classify_predicates(prog: Program):
    """Split user predicates into (base, derived) name sets."""
    derived = {r.head.functor for r in prog.rules}
    used = set()
    for body in [r.body for r in prog.rules] + list(prog.constraints) + list(prog.queries):
        for lit in body:
            if not is_builtin(lit.pred):
                used.add(lit.pred)
    return used - derived, derived


def check_safety(prog: Program) -> list:
    errors = []
    for rule in prog.rules:
        errors += _body_safety(rule.body, rule.head, str(rule))
    for body in prog.constraints:
        errors += _body_safety(body, None, f":- {render_body(body)}.")
    for body in prog.queries:
        errors += _body_safety(body, None, f"?- {render_body(body)}.")
    return errors


def ensure_safe(prog: Program) -> Program:
    errors = check_safety(prog)
    if errors:
        raise UnsafeProgram(errors)
    return prog


def _body_safety(body, head, where: str) -> list:
    errors = []
    bound = set()
    for lit in body:
        if is_builtin(lit.pred):
            _, inputs, outputs = BUILTINS[lit.pred]
            for i in inputs:
                for v in term_vars(lit.atom.args[i]):
                    if v not in bound:
                        errors.append(
                            SafetyError(f"variable {render(v)} is not ground at builtin {lit} in {where}", where)
                        )
            if lit.positive:
                for i in outputs:
                    bound.update(term_vars(lit.atom.args[i]))
        elif lit.positive:
            bound.update(term_vars(lit.atom))
    reported = set()
    for i, lit in enumerate(body):
        if lit.positive or is_builtin(lit.pred):
            continue
        for v in term_vars(lit.atom):
            if v in bound and domain_source(body, i, v) is None and not _bound_before(body, i, v):
                # bound only by a builtin after this point: no domain to enumerate
                bound.discard(v)
            if v not in bound and v not in reported:
                reported.add(v)
                errors.append(SafetyError(f"variable {render(v)} is unsafe in {where}", where))
    if head is not None:
        for v in term_vars(head):
            if v not in bound and v not in reported:
                reported.add(v)
                errors.append(SafetyError(f"variable {render(v)} is unsafe in {where}", where))
    return errors


def _bound_before(body, i: int, v: Var) -> bool:
    for lit in body[:i]:
        if lit.positive and not is_builtin(lit.pred) and v in term_vars(lit.atom):
            return True
        if lit.positive and is_builtin(lit.pred):
            outs = BUILTINS[lit.pred][2]
            if any(v in term_vars(lit.atom.args[j]) for j in outs):
                return True
    return False


def domain_source(body, i: int, v: Var):
    """First (pred, argpos) at or after position ``i`` where ``v`` occurs in a
    positive non-builtin literal."""
    for lit in body[i:]:
        if lit.positive and not is_builtin(lit.pred):
            for j, a in enumerate(lit.atom.args):
                if a == v:
                    return (lit.pred, j)
    return None
