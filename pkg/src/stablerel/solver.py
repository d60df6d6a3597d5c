"""Top-down stable-model resolution.

Calls are resolved against rules (positive) or complement rules (negative)
while carrying a set of assumptions: every ground atom proven true or false
on the current branch. Recursion is detected on the ancestor stack:

* a recursive call that never changed polarity on the way back to its
  ancestor (a loop through positive rules only) fails, as in least-fixpoint
  SLD resolution;
* a call that returns to an ancestor of the same polarity after changing
  polarity (an even loop through negation), or a complement calling itself
  without a polarity change, succeeds by assumption;
* a call that meets its own atom with opposite polarity (an odd loop) fails.

Every candidate model is checked against the reduct before it is reported.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import product
from typing import Iterator, NamedTuple, Optional

from .complement import CompiledProgram, body_binders
from .program import BUILTINS, BuiltinError, eval_builtin, is_hidden
from .stream import Budget, BudgetExceeded, State, bind, interleave, iter_stream
from .terms import Struct, Var, reify, unify, unify_args, walk, walk_all
from .verifier import instantiate, verify_stable


class LoopKind(enum.Enum):
    NONE = "none"
    POSITIVE = "positive_loop"
    EVEN = "even_neg_loop"
    ODD = "odd_neg_loop"


class Frame(NamedTuple):
    atom: Struct
    positive: bool
    parent: Optional["Frame"]


def make_stack(frames) -> Optional[Frame]:
    """Build a call stack from ``(atom, positive)`` pairs, outermost first."""
    stack = None
    for atom, positive in frames:
        stack = Frame(_variant_key(atom), positive, stack)
    return stack


def stack_frames(stack: Optional[Frame]) -> list:
    out = []
    while stack is not None:
        out.append((stack.atom, stack.positive))
        stack = stack.parent
    return out[::-1]


def _variant_key(atom: Struct) -> Struct:
    for a in atom.args:
        if type(a) is Var:
            return reify(atom, {})
    return atom


def detect_loop(atom: Struct, positive: bool, stack: Optional[Frame]) -> LoopKind:
    key = _variant_key(atom)
    switches = 0
    current = positive
    frame = stack
    while frame is not None:
        if frame.positive != current:
            switches += 1
            current = frame.positive
        if frame.atom == key:
            if frame.positive != positive:
                return LoopKind.ODD
            if switches == 0 and positive:
                return LoopKind.POSITIVE
            return LoopKind.EVEN
        frame = frame.parent
    return LoopKind.NONE


class Assumptions:
    """Ground atoms assumed (or proven) true and false on one branch."""

    __slots__ = ("values",)

    def __init__(self, values: Optional[dict] = None):
        self.values = values if values is not None else {}

    def get(self, atom) -> Optional[bool]:
        return self.values.get(atom)

    def extend(self, atom, value: bool) -> Optional["Assumptions"]:
        current = self.values.get(atom)
        if current is not None:
            return self if current == value else None
        values = dict(self.values)
        values[atom] = value
        return Assumptions(values)

    @property
    def assumed_true(self) -> frozenset:
        return frozenset(a for a, v in self.values.items() if v)

    @property
    def assumed_false(self) -> frozenset:
        return frozenset(a for a, v in self.values.items() if not v)

    def __len__(self):
        return len(self.values)

    def __repr__(self):
        return f"Assumptions(true={sorted(map(repr, self.assumed_true))}, false={sorted(map(repr, self.assumed_false))})"


@dataclass(frozen=True)
class Answer:
    bindings: dict
    assumptions: Assumptions
    model: Optional[frozenset] = None


def initial_state(prog: CompiledProgram, assumptions: Optional[Assumptions] = None, var_counter: int = 0) -> State:
    if assumptions is None:
        assumptions = Assumptions({a: True for a in prog.facts})
    return State({}, None, assumptions, var_counter)


def assume(st: State, atom: Struct, value: bool, prog: CompiledProgram) -> Optional[State]:
    """Record ``atom`` as ``value``; ``None`` if that contradicts the branch."""
    current = st.assumptions.get(atom)
    if current is not None:
        return st if current == value else None
    if atom not in prog.possible_set:
        # no rule instance can ever derive it
        return None if value else st
    new = st.assumptions.extend(atom, value)
    values = new.values
    for idx in prog.watches.get(atom, ()):
        if all(values.get(a) == p for a, p in prog.constraints[idx]):
            return None
    return State(st.subst, st.stack, new, st.var_counter)


# -- resolution ----------------------------------------------------------------


def resolve_call(atom: Struct, positive: bool, st: State, prog: CompiledProgram):
    """Stream of states in which ``atom`` holds (or fails, if not positive)."""
    s = st.subst
    name = atom.functor
    args = tuple(walk(a, s) for a in atom.args)
    if name in BUILTINS:
        return _builtin(name, atom.args, args, positive, st)
    atom = Struct(name, args)
    if any(type(a) is Var for a in args):
        if positive and name not in prog.recursive:
            return lambda: _positive(atom, st, prog)
        return _ground_first(atom, positive, st, prog)

    known = st.assumptions.get(atom)
    if known is not None:
        return (st, None) if known == positive else None
    if atom not in prog.possible_set:
        return None if positive else (st, None)

    kind = detect_loop(atom, positive, st.stack)
    if kind is LoopKind.POSITIVE or kind is LoopKind.ODD:
        return None
    if kind is LoopKind.EVEN:
        st2 = assume(st, atom, positive, prog)
        return None if st2 is None else (st2, None)
    if positive:
        return lambda: _positive(atom, st, prog)
    return lambda: _negative(atom, st, prog)


def _builtin(name, raw_args, args, positive, st):
    result = eval_builtin(name, args)
    if not positive:
        return (st, None) if result is None else None
    if result is None:
        return None
    s = unify_args(args, result, st.subst)
    return None if s is None else (st._replace(subst=s), None)


def _ground_first(atom, positive, st, prog):
    """Instantiate the unbound arguments of a call before resolving it."""
    name = atom.functor
    if positive:
        options = [a.args for a in prog.possible.get(name, ())]
    else:
        options = list(product(prog.universe, repeat=len(atom.args)))
    out = None
    for values in reversed(options):
        s = unify_args(atom.args, values, st.subst)
        if s is None:
            continue
        ground = Struct(name, tuple(values))
        st2 = st._replace(subst=s)
        out = interleave(_deferred_call(ground, positive, st2, prog), out)
    return out


def _deferred_call(atom, positive, st, prog):
    return lambda: resolve_call(atom, positive, st, prog)


def _positive(atom: Struct, st: State, prog: CompiledProgram):
    inner = st._replace(stack=Frame(_variant_key(atom), True, st.stack))
    out = None
    for rule in reversed(prog.rules.get(atom.functor, ())):
        out = interleave(_rule_branch(rule, atom, inner, prog), out)

    def finish(st3: State):
        walked = walk_all(atom, st3.subst)
        s = unify_args(atom.args, walked.args, st.subst)
        if s is None:
            return None
        done = State(s, st.stack, st3.assumptions, st3.var_counter)
        if any(type(a) is Var for a in walked.args):
            return (done, None)
        done = assume(done, walked, True, prog)
        return None if done is None else (done, None)

    return bind(out, finish)


def _rule_branch(rule, atom, st, prog):
    def run():
        base = st.var_counter
        names = {}
        for v in rule.variables():
            names[v] = Var(base + len(names), v.hint)
        head_args = tuple(names.get(a, a) if type(a) is Var else a for a in rule.head.args)
        s = unify_args(head_args, atom.args, st.subst)
        if s is None:
            return None
        body = tuple(_rename_literal(lit, names) for lit in rule.body)
        binders = tuple(tuple((names[v], src) for v, src in entry) for entry in prog.binders[rule])
        start = State(s, st.stack, st.assumptions, base + len(names))
        return run_body(body, binders, start, prog)

    return run


def _rename_literal(lit, names):
    return lit.__class__(lit.positive, instantiate(lit.atom, names))


def run_body(body, binders, st: State, prog: CompiledProgram, i: int = 0):
    """Evaluate body literals left to right."""
    if i == len(body):
        return (st, None)
    lit = body[i]
    stream = _bind_domain(binders[i], st, prog) if binders[i] else (st, None)
    stream = bind(stream, lambda st1: resolve_call(lit.atom, lit.positive, st1, prog))
    if i + 1 == len(body):
        return stream
    return bind(stream, lambda st2: run_body(body, binders, st2, prog, i + 1))


def _bind_domain(entries, st, prog):
    """Enumerate values for variables that first occur under negation."""
    free = [(v, src) for v, src in entries if type(walk(v, st.subst)) is Var]
    if not free:
        return (st, None)
    out = None
    domains = [prog.domain(*src) for _, src in free]
    for values in reversed(list(product(*domains))):
        s = st.subst
        for (v, _), value in zip(free, values):
            s = unify(v, value, s)
            if s is None:
                break
        if s is not None:
            out = interleave((st._replace(subst=s), None), out)
    return out


def _negative(atom: Struct, st: State, prog: CompiledProgram):
    inner = st._replace(stack=Frame(atom, False, st.stack))
    parts = []
    for crule in prog.complements.get(atom.functor, ()):
        env = _match_head(crule.head.args, atom.args)
        if env is not None:
            parts.append((crule, env))

    def step(i, st1):
        if i == len(parts):
            done = State(st.subst, st.stack, st1.assumptions, st1.var_counter)
            done = assume(done, atom, False, prog)
            return None if done is None else (done, None)
        crule, env = parts[i]
        return bind(_neg_body(crule, 0, env, st1, prog), lambda st2: step(i + 1, st2))

    return step(0, inner)


def _match_head(pattern, args) -> Optional[dict]:
    env = {}
    for p, a in zip(pattern, args):
        if type(p) is Var:
            if env.setdefault(p, a) != a or type(env[p]) is not type(a):
                return None
        elif type(p) is not type(a) or p != a:
            return None
    return env


def _neg_body(crule, i, env, st, prog):
    """States in which the body of ``crule`` fails for every instantiation of
    its local variables from position ``i`` on."""
    body = crule.body
    if i == len(body):
        return None
    lit = body[i]
    name = lit.pred
    if name in BUILTINS:
        args = tuple(env.get(a, a) if type(a) is Var else a for a in lit.atom.args)
        try:
            result = eval_builtin(name, args)
        except BuiltinError as exc:
            raise BuiltinError(f"{exc} in rule {crule.rule}") from None
        holds = result is not None
        if holds != lit.positive:
            return (st, None)
        if lit.positive:
            env = _extend_env(env, lit.atom.args, result)
        return _neg_body(crule, i + 1, env, st, prog)

    new = crule.introduce[i]
    if not new:
        return _check(crule, i, env, st, prog)
    if lit.positive:
        envs = []
        for a in prog.possible.get(name, ()):
            e = _match_env(lit.atom.args, a.args, env)
            if e is not None:
                envs.append(e)
    else:
        srcs = dict(crule.locals)
        domains = [prog.domain(*srcs[v]) for v in new]
        envs = [{**env, **dict(zip(new, values))} for values in product(*domains)]

    def every(k, st1):
        if k == len(envs):
            return (st1, None)
        return bind(_check(crule, i, envs[k], st1, prog), lambda st2: every(k + 1, st2))

    return every(0, st)


def _check(crule, i, env, st, prog):
    """Either literal ``i`` fails here, or it holds and a later one fails."""
    lit = crule.body[i]
    atom = instantiate(lit.atom, env)
    fails_here = lambda: resolve_call(atom, not lit.positive, st, prog)
    holds = resolve_call(atom, lit.positive, st, prog)
    later = bind(holds, lambda st1: _neg_body(crule, i + 1, env, st1, prog))
    return interleave(fails_here, later)


def _extend_env(env, pattern, values):
    env = dict(env)
    for p, v in zip(pattern, values):
        if type(p) is Var:
            env.setdefault(p, v)
    return env


def _match_env(pattern, args, env):
    out = None
    for p, a in zip(pattern, args):
        if type(p) is Var:
            bound = env.get(p) if out is None else out.get(p)
            if bound is None:
                if out is None:
                    out = dict(env)
                out[p] = a
            elif type(bound) is not type(a) or bound != a:
                return None
        elif type(p) is not type(a) or p != a:
            return None
    return out if out is not None else env


# -- models ----------------------------------------------------------------------


def decision_atoms(prog: CompiledProgram) -> list:
    """Ground atoms to branch on: constraint heads first, so that their
    complements drive the search, then every other derivable atom."""
    heads = prog.ground.head_atoms()
    hidden = [a for a in heads if is_hidden(a.functor)]
    return hidden + [a for a in heads if not is_hidden(a.functor)]


def _decide(atom, st, prog):
    return interleave(
        _deferred_call(atom, True, st, prog), _deferred_call(atom, False, st, prog)
    )


def iter_models(prog: CompiledProgram, st: Optional[State] = None, budget: Optional[Budget] = None) -> Iterator[frozenset]:
    """Verified stable models extending the assumptions of ``st``.

    The same model may be produced more than once.
    """
    if st is None:
        st = initial_state(prog)
    st = State({}, None, st.assumptions, st.var_counter)
    order = decision_atoms(prog)
    gp = prog.ground
    # explicit depth-first walk over decisions, each decision a lazy stream
    stack = [(iter([st]), 0)]
    while stack:
        states, i = stack[-1]
        current = next(states, None)
        if current is None:
            stack.pop()
            continue
        values = current.assumptions.values
        while i < len(order) and order[i] in values:
            i += 1
        if i == len(order):
            candidate = frozenset(a for a, v in values.items() if v)
            if verify_stable(gp, candidate):
                yield frozenset(a for a in candidate if not is_hidden(a.functor))
            continue
        stack.append((iter_stream(_decide(order[i], current, prog), budget), i + 1))


def model_key(model) -> tuple:
    return tuple(sorted(repr(a) for a in model))


def enumerate_models(prog: CompiledProgram, budget: Optional[Budget] = None, limit: Optional[int] = None) -> list:
    """All stable models (or the first ``limit``), in canonical order."""
    found = set()
    try:
        for m in iter_models(prog, budget=budget):
            found.add(m)
            if limit is not None and len(found) >= limit:
                break
    except BudgetExceeded as exc:
        exc.partial = sorted(found, key=model_key)
        raise
    return sorted(found, key=model_key)


def solve(query, prog: CompiledProgram, n: Optional[int] = None, budget: Optional[Budget] = None, models: bool = False) -> list:
    """Answers to a query body, each backed by a verified stable model.

    Without ``models``, answers with identical bindings are reported once.
    """
    names = {}
    for lit in query:
        for a in lit.atom.args:
            if type(a) is Var and a not in names:
                names[a] = Var(len(names), a.hint)
    body = tuple(lit.__class__(lit.positive, instantiate(lit.atom, names)) for lit in query)
    binders = body_binders(body)
    start = initial_state(prog, var_counter=len(names))
    raw = run_body(body, binders, start, prog) if body else (start, None)
    shown = [v for v in names.values() if v.hint != "_"]
    answers = []
    seen = set()
    try:
        for st in iter_stream(raw, budget):
            bindings = {v.hint: reify(v, st.subst) for v in shown}
            key = tuple(sorted((k, repr(t)) for k, t in bindings.items()))
            if not models and key in seen:
                continue
            reported = set()
            for m in iter_models(prog, st, budget):
                if m in reported:
                    continue
                reported.add(m)
                answers.append(Answer(bindings, st.assumptions, m))
                seen.add(key)
                if not models or (n is not None and len(answers) >= n):
                    break
            if n is not None and len(answers) >= n:
                break
    except BudgetExceeded as exc:
        exc.partial = answers
        raise
    return answers
