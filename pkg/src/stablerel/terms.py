"""Logic terms, triangular substitutions and unification.

A term is one of:

* ``Var``: a logic variable, identified by an integer id;
* ``str``: a symbolic constant (lowercase identifier);
* ``int``: an integer;
* ``Struct``: a functor applied to a tuple of terms.

Atoms are represented as ``Struct`` values whose functor is the predicate
name, so a propositional atom ``p`` is ``Struct("p", ())``.
"""

from __future__ import annotations

from typing import NamedTuple, Optional, Union


class Var:
    __slots__ = ("id", "hint")

    def __init__(self, id: int, hint: Optional[str] = None):
        self.id = id
        self.hint = hint

    def __eq__(self, other):
        return type(other) is Var and other.id == self.id

    def __hash__(self):
        return hash(self.id)

    def __repr__(self):
        if self.hint:
            return f"{self.hint}#{self.id}"
        return f"_G{self.id}"


class Struct(NamedTuple):
    functor: str
    args: tuple = ()

    def __repr__(self):
        return render(self)


Term = Union[Var, str, int, Struct]
Substitution = dict


def is_const(t) -> bool:
    return type(t) is str


def is_int(t) -> bool:
    return type(t) is int


def walk(t, s: Substitution):
    """Follow variable bindings in ``s`` until reaching a non-variable or an
    unbound variable. Does not descend into structure arguments."""
    while type(t) is Var:
        bound = s.get(t)
        if bound is None:
            return t
        t = bound
    return t


def walk_all(t, s: Substitution):
    t = walk(t, s)
    if type(t) is Struct:
        return Struct(t.functor, tuple(walk_all(a, s) for a in t.args))
    return t


def occurs(v: Var, t, s: Substitution) -> bool:
    t = walk(t, s)
    if type(t) is Var:
        return t == v
    if type(t) is Struct:
        return any(occurs(v, a, s) for a in t.args)
    return False


def extend(v: Var, t, s: Substitution) -> Optional[Substitution]:
    """Bind ``v`` to ``t``; ``None`` if the binding would be cyclic."""
    if occurs(v, t, s):
        return None
    s2 = dict(s)
    s2[v] = t
    return s2


def unify(t1, t2, s: Substitution) -> Optional[Substitution]:
    """Most general unifier of ``t1`` and ``t2`` extending ``s``, or ``None``."""
    t1 = walk(t1, s)
    t2 = walk(t2, s)
    if type(t1) is Var:
        if t1 == t2:
            return s
        return extend(t1, t2, s)
    if type(t2) is Var:
        return extend(t2, t1, s)
    if type(t1) is Struct:
        if type(t2) is not Struct or t1.functor != t2.functor or len(t1.args) != len(t2.args):
            return None
        for a, b in zip(t1.args, t2.args):
            s = unify(a, b, s)
            if s is None:
                return None
        return s
    # str and int never unify with each other, nor with a struct
    if type(t1) is type(t2) and t1 == t2:
        return s
    return None


def unify_args(xs, ys, s: Substitution) -> Optional[Substitution]:
    if len(xs) != len(ys):
        return None
    for a, b in zip(xs, ys):
        s = unify(a, b, s)
        if s is None:
            return None
    return s


def term_vars(t, acc=None) -> list:
    """Variables of ``t`` in first-occurrence order."""
    if acc is None:
        acc = []
    if type(t) is Var:
        if t not in acc:
            acc.append(t)
    elif type(t) is Struct:
        for a in t.args:
            term_vars(a, acc)
    return acc


def is_ground(t) -> bool:
    if type(t) is Var:
        return False
    if type(t) is Struct:
        return all(is_ground(a) for a in t.args)
    return True


def reify(t, s: Substitution):
    """Fully resolve ``t`` and rename its free variables ``_0``, ``_1``, ...
    in first-occurrence order."""
    t = walk_all(t, s)
    names = {v: f"_{i}" for i, v in enumerate(term_vars(t))}
    return _rename(t, names)


def _rename(t, names):
    if type(t) is Var:
        return names[t]
    if type(t) is Struct:
        return Struct(t.functor, tuple(_rename(a, names) for a in t.args))
    return t


def render(t) -> str:
    if type(t) is Struct:
        if not t.args:
            return t.functor
        return f"{t.functor}({','.join(render(a) for a in t.args)})"
    if type(t) is Var:
        return t.hint if t.hint else f"_G{t.id}"
    return str(t)
