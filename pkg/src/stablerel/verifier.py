"""Grounding, Gelfond-Lifschitz reducts and stable-model checking.

Grounding is relevance-driven: the atoms that could possibly be true are
computed as the least model of the program with negative literals ignored,
and rules are instantiated only by joining their positive literals against
that set. For safe programs this yields the same stable models as the full
Herbrand instantiation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Iterator

from .program import (
    ProgramError,
    Literal,
    Program,
    Rule,
    desugar_constraints,
    eval_builtin,
    is_builtin,
)
from .terms import Struct, Var

DEFAULT_INSTANCE_CAP = 5_000_000
ORACLE_ATOM_LIMIT = 24


class GroundingError(ProgramError):
    pass


@dataclass
class GroundProgram:
    rules: list
    atoms: list
    possible: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.index = {a: i for i, a in enumerate(self.atoms)}

    @classmethod
    def from_rules(cls, rules: Iterable[Rule]) -> "GroundProgram":
        """Wrap already-ground rules without any relevance filtering."""
        rules = list(rules)
        atoms = {}
        for r in rules:
            atoms.setdefault(r.head, None)
            for lit in r.body:
                atoms.setdefault(lit.atom, None)
        return cls(rules, list(atoms))

    def head_atoms(self) -> list:
        seen = {}
        for r in self.rules:
            seen.setdefault(r.head, None)
        return list(seen)


@dataclass(frozen=True)
class Reduct:
    rules: tuple


def _match(pattern: tuple, atom_args: tuple, env: dict):
    """Extend ``env`` so that ``pattern`` equals the ground ``atom_args``."""
    out = env
    for p, a in zip(pattern, atom_args):
        if type(p) is Var:
            bound = out.get(p, _MISSING)
            if bound is _MISSING:
                if out is env:
                    out = dict(env)
                out[p] = a
            elif type(bound) is not type(a) or bound != a:
                return None
        elif type(p) is not type(a) or p != a:
            return None
    return out


_MISSING = object()


def instantiate(atom: Struct, env: dict) -> Struct:
    return Struct(atom.functor, tuple(env.get(a, a) if type(a) is Var else a for a in atom.args))


def _join(body: tuple, possible: dict, env: dict, i: int = 0) -> Iterator[dict]:
    """Enumerate environments satisfying the positive and builtin literals of
    ``body`` over the ``possible`` atoms; plain negative literals are skipped."""
    if i == len(body):
        yield env
        return
    lit = body[i]
    name = lit.pred
    if is_builtin(name):
        args = tuple(env.get(a, a) if type(a) is Var else a for a in lit.atom.args)
        result = eval_builtin(name, args)
        if lit.positive:
            if result is None:
                return
            env2 = _match(lit.atom.args, result, env)
            if env2 is not None:
                yield from _join(body, possible, env2, i + 1)
        elif result is None:
            yield from _join(body, possible, env, i + 1)
        return
    if not lit.positive:
        yield from _join(body, possible, env, i + 1)
        return
    pattern = lit.atom.args
    for atom in possible.get(name, ()):
        env2 = _match(pattern, atom.args, env)
        if env2 is not None:
            yield from _join(body, possible, env2, i + 1)


def possible_atoms(prog: Program) -> dict:
    """Least model of the program with negation dropped, as pred -> atom list."""
    prog = desugar_constraints(prog)
    possible: dict = {}
    seen = set()
    changed = True
    while changed:
        changed = False
        for rule in prog.rules:
            for env in list(_join(rule.body, possible, {})):
                head = instantiate(rule.head, env)
                if head not in seen:
                    seen.add(head)
                    possible.setdefault(head.functor, []).append(head)
                    changed = True
    return possible


def ground_program(prog: Program, cap: int = DEFAULT_INSTANCE_CAP) -> GroundProgram:
    prog = desugar_constraints(prog)
    possible = possible_atoms(prog)
    rules = []
    seen = set()
    for rule in prog.rules:
        for env in _join(rule.body, possible, {}):
            body = tuple(
                Literal(lit.positive, instantiate(lit.atom, env))
                for lit in rule.body
                if not is_builtin(lit.pred)
            )
            g = Rule(instantiate(rule.head, env), body)
            if g not in seen:
                seen.add(g)
                rules.append(g)
                if len(rules) > cap:
                    raise GroundingError(
                        f"grounding exceeds {cap} rule instances (at rule {rule})"
                    )
    gp = GroundProgram.from_rules(rules)
    gp.possible = possible
    return gp


# -- reduct and least model ----------------------------------------------------


def gl_reduct(gp: GroundProgram, m) -> Reduct:
    """Drop rules blocked by ``m``; strip negative literals from the rest."""
    m = set(m)
    out = []
    for r in gp.rules:
        if any(not lit.positive and lit.atom in m for lit in r.body):
            continue
        out.append(Rule(r.head, tuple(lit for lit in r.body if lit.positive)))
    return Reduct(tuple(out))


def least_model_iterates(r: Reduct) -> Iterator[frozenset]:
    """Successive iterates of the immediate-consequence operator from the
    empty set, ending with the fixpoint."""
    current = frozenset()
    yield current
    while True:
        nxt = frozenset(
            rule.head for rule in r.rules if all(lit.atom in current for lit in rule.body)
        )
        if nxt == current:
            return
        current = nxt
        yield current


def least_model(r: Reduct) -> frozenset:
    model = frozenset()
    for model in least_model_iterates(r):
        pass
    return model


def verify_stable(gp: GroundProgram, m) -> bool:
    return least_model(gl_reduct(gp, m)) == frozenset(m)


# -- exhaustive oracle -----------------------------------------------------------


def brute_force_models(gp: GroundProgram, limit: int = ORACLE_ATOM_LIMIT) -> set:
    """All stable models, by checking every interpretation over ``gp.atoms``."""
    n = len(gp.atoms)
    if n > limit:
        raise GroundingError(f"brute-force oracle limited to {limit} atoms, program has {n}")
    bit = {a: 1 << i for i, a in enumerate(gp.atoms)}
    encoded = []
    for r in gp.rules:
        pmask = nmask = 0
        for lit in r.body:
            if lit.positive:
                pmask |= bit[lit.atom]
            else:
                nmask |= bit[lit.atom]
        encoded.append((bit[r.head], pmask, nmask))
    found = []
    for m in range(1 << n):
        reduct = [(h, p) for h, p, q in encoded if not q & m]
        lm = 0
        while True:
            nxt = 0
            for h, p in reduct:
                if p & lm == p:
                    nxt |= h
            if nxt == lm:
                break
            lm = nxt
        if lm == m:
            found.append(m)
    for a, b in product(found, repeat=2):
        assert a == b or (a & b) != a, "stable models must form an antichain"
    return {frozenset(x for x in gp.atoms if bit[x] & m) for m in found}
