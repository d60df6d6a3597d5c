"""Complement rules: compiling the failure conditions of derived predicates.

A rule body ``B1, ..., Bk`` fails exactly when some ``Bi`` fails while every
literal before it succeeded. Each such case is a ``Check`` (guard = the
prefix, negated = the flipped literal). An atom is false when every rule
defining it fails; body variables that do not occur in the head are
quantified universally over the values their predicate can take.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .program import (
    BUILTINS,
    Literal,
    Program,
    ProgramError,
    Rule,
    desugar_constraints,
    domain_source,
    ensure_safe,
    eval_builtin,
    is_builtin,
    is_hidden,
)
from .terms import Struct, Var, term_vars
from .verifier import GroundProgram, ground_program, possible_atoms


class CompileError(ProgramError):
    pass


@dataclass(frozen=True)
class Check:
    guard: tuple
    negated: Literal

    def __str__(self):
        parts = [str(l) for l in self.guard] + [_render_negated(self.negated)]
        return " & ".join(parts)


def _render_negated(lit: Literal) -> str:
    # flipping a negative body literal gives a plain positive check
    return str(lit) if lit.positive else f"not {lit.atom!r}"


def negate_body(body) -> list:
    """One check per body position: the prefix holds and this literal fails."""
    body = tuple(body)
    return [Check(body[:i], body[i].flip()) for i in range(len(body))]


@dataclass(frozen=True)
class ComplementRule:
    head: Struct
    disjuncts: tuple
    locals: tuple
    rule: Rule
    # per body position, the local variables first bound there
    introduce: tuple = ()

    @property
    def body(self) -> tuple:
        return self.rule.body

    def __str__(self):
        checks = " | ".join(f"({c})" for c in self.disjuncts) or "false"
        quant = ""
        if self.locals:
            quant = "forall " + ",".join(repr(v) for v, _ in self.locals) + ": "
        return f"not {self.head!r} <- {quant}{checks}"


@dataclass
class CompiledProgram:
    original: Program
    rules: dict
    complements: dict
    domains: dict
    ground: GroundProgram
    possible: dict
    recursive: frozenset
    facts: frozenset
    # ground constraint bodies as tuples of (atom, positive) and their index
    constraints: list = field(default_factory=list)
    watches: dict = field(default_factory=dict)
    binders: dict = field(default_factory=dict)

    def __post_init__(self):
        self.possible_set = frozenset(a for atoms in self.possible.values() for a in atoms)
        universe = set(self.original.constants)
        for values in self.domains.values():
            universe.update(values)
        self.universe = tuple(sorted(universe, key=lambda c: (type(c) is str, c)))

    def domain(self, pred: str, argpos: int) -> tuple:
        return self.domains.get((pred, argpos), ())


def domain_of(pred: str, argpos: int, prog: Program, narrow: bool = True) -> set:
    """Ground terms that can occupy ``argpos`` of ``pred``.

    With ``narrow`` the set is read off the atoms that can possibly be
    derived (exact for flat programs); otherwise it is every constant and
    integer mentioned in the program.
    """
    if not narrow:
        return set(prog.constants)
    return {a.args[argpos] for a in possible_atoms(prog).get(pred, ())}


def _dependencies(prog: Program) -> dict:
    deps = {}
    for r in prog.rules:
        deps.setdefault(r.head.functor, set()).update(
            lit.pred for lit in r.body if not is_builtin(lit.pred)
        )
    return deps


def recursive_predicates(prog: Program) -> frozenset:
    deps = _dependencies(prog)
    out = set()
    for p in deps:
        todo, seen = list(deps[p]), set()
        while todo:
            q = todo.pop()
            if q == p:
                out.add(p)
                break
            if q not in seen:
                seen.add(q)
                todo.extend(deps.get(q, ()))
    return frozenset(out)


def body_binders(body, head=None) -> tuple:
    """For each body position, variables of a negative literal not bound by
    an earlier literal, paired with the (pred, argpos) supplying their domain."""
    out = []
    bound = set(term_vars(head)) if head is not None else set()
    for i, lit in enumerate(body):
        entry = []
        if is_builtin(lit.pred):
            if lit.positive:
                bound.update(term_vars(lit.atom))
        elif lit.positive:
            bound.update(term_vars(lit.atom))
        else:
            for v in term_vars(lit.atom):
                if v not in bound:
                    src = domain_source(body, i, v)
                    if src is None:
                        raise CompileError(f"no domain for variable {v!r} in {render_lits(body)}")
                    entry.append((v, src))
        out.append(tuple(entry))
    return tuple(out)


def render_lits(body) -> str:
    return ", ".join(map(str, body))


def _complement_rule(rule: Rule) -> ComplementRule:
    head_vars = set(term_vars(rule.head))
    bound = set(head_vars)
    introduce = []
    locals_ = []
    for i, lit in enumerate(rule.body):
        new = [v for v in term_vars(lit.atom) if v not in bound]
        if is_builtin(lit.pred):
            outputs = BUILTINS[lit.pred][2]
            for v in new:
                if not any(v in term_vars(lit.atom.args[j]) for j in outputs) or not lit.positive:
                    raise CompileError(f"variable {v!r} is not ground at {lit} in {rule}")
                locals_.append((v, "builtin"))
            bound.update(new)
            introduce.append(())
            continue
        if lit.positive:
            for v in new:
                locals_.append((v, (lit.pred, lit.atom.args.index(v))))
        else:
            for v in new:
                src = domain_source(rule.body, i, v)
                if src is None:
                    raise CompileError(f"no domain for variable {v!r} in {rule}")
                locals_.append((v, src))
        bound.update(new)
        introduce.append(tuple(new))
    return ComplementRule(
        rule.head, tuple(negate_body(rule.body)), tuple(locals_), rule, tuple(introduce)
    )


def complement_program(prog: Program) -> CompiledProgram:
    """Compile a desugared, safe program for top-down stable-model solving."""
    prog = desugar_constraints(prog)
    gp = ground_program(prog)
    possible = gp.possible
    domains = {}
    for pred, atoms in possible.items():
        for atom in atoms:
            for j, a in enumerate(atom.args):
                domains.setdefault((pred, j), set()).add(a)
    domains = {k: tuple(sorted(v, key=lambda c: (type(c) is str, c))) for k, v in domains.items()}

    rules, complements, binders = {}, {}, {}
    for r in prog.rules:
        rules.setdefault(r.head.functor, []).append(r)
        complements.setdefault(r.head.functor, []).append(_complement_rule(r))
        binders[r] = body_binders(r.body, r.head)
    facts = frozenset(r.head for r in prog.rules if not r.body and not term_vars(r.head))

    cp = CompiledProgram(
        original=prog,
        rules=rules,
        complements=complements,
        domains=domains,
        ground=gp,
        possible=possible,
        recursive=recursive_predicates(prog),
        facts=facts,
        binders=binders,
    )
    _index_constraints(cp)
    return cp


def _index_constraints(cp: CompiledProgram):
    """Index ground constraint bodies by atom so that a state whose
    assumptions already satisfy a whole body can be discarded early."""
    for r in cp.ground.rules:
        if not is_hidden(r.head.functor):
            continue
        lits = []
        dead = False
        for lit in r.body:
            if lit.atom == r.head:
                continue
            if lit.positive:
                if lit.atom in cp.facts:
                    continue
                if lit.atom not in cp.possible_set:
                    dead = True
                    break
            else:
                if lit.atom in cp.facts:
                    dead = True
                    break
                if lit.atom not in cp.possible_set:
                    continue
            lits.append((lit.atom, lit.positive))
        if dead or not lits:
            continue
        idx = len(cp.constraints)
        cp.constraints.append(tuple(lits))
        for atom, _ in lits:
            cp.watches.setdefault(atom, []).append(idx)


def compile_program(prog: Program) -> CompiledProgram:
    prog = desugar_constraints(prog)
    ensure_safe(prog)
    return complement_program(prog)


# -- ground-level check semantics (used to validate the decomposition) --------


def refine_per_argument(checks) -> list:
    """Split each check on a flipped positive literal ``not p(t1..tn)`` into
    argument-prefix checks ``p(t1..tj-1, _..) & not p(t1..tj, _..)``."""
    out = []
    for c in checks:
        lit = c.negated
        n = len(lit.atom.args)
        if lit.positive or n < 2 or is_builtin(lit.pred):
            out.append(c)
            continue
        for j in range(1, n + 1):
            prefix = tuple(_project(lit.atom, k) for k in range(1, j))
            out.append(Check(c.guard + tuple(Literal(True, a) for a in prefix), Literal(False, _project(lit.atom, j))))
    return out


def _project(atom: Struct, j: int) -> Struct:
    wild = tuple(Var(-1 - k, "_") for k in range(len(atom.args) - j))
    return Struct(atom.functor, atom.args[:j] + wild)


def literal_holds(lit: Literal, interpretation) -> bool:
    """Truth of a ground (possibly wildcarded) literal in a set of atoms."""
    atom = lit.atom
    if is_builtin(atom.functor):
        ok = eval_builtin(atom.functor, atom.args) is not None
    elif any(type(a) is Var for a in atom.args):
        ok = any(
            b.functor == atom.functor
            and len(b.args) == len(atom.args)
            and all(type(x) is Var or x == y for x, y in zip(atom.args, b.args))
            for b in interpretation
        )
    else:
        ok = atom in interpretation
    return ok if lit.positive else not ok


def check_succeeds(check: Check, interpretation) -> bool:
    return all(literal_holds(l, interpretation) for l in check.guard) and literal_holds(
        check.negated, interpretation
    )
