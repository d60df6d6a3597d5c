"""Lazy answer streams with interleaving search, and the goal language.

A stream is ``None`` (empty), a pair ``(state, stream)`` or a zero-argument
callable that produces a stream when forced (a suspension). Forcing a
suspension is the unit of work counted against a step budget.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import Any, Callable, NamedTuple, Optional

from .terms import Var, unify

DEFAULT_BUDGET = 50_000_000


class BudgetExceeded(Exception):
    """The forcing-step budget ran out before the search finished.

    ``partial`` carries whatever results were collected so far.
    """

    def __init__(self, steps: int, partial=None):
        super().__init__(f"step budget exhausted after {steps} steps")
        self.steps = steps
        self.partial = partial if partial is not None else []


class Budget:
    def __init__(self, limit: Optional[int] = DEFAULT_BUDGET):
        self.limit = limit
        self.steps = 0

    def spend(self):
        self.steps += 1
        if self.limit is not None and self.steps > self.limit:
            raise BudgetExceeded(self.steps)


class State(NamedTuple):
    subst: dict
    stack: Any = None
    assumptions: Any = None
    var_counter: int = 0


def unit(state):
    return (state, None)


def interleave(s1, s2):
    """Fair merge: whenever ``s1`` is suspended the two streams swap."""
    if s1 is None:
        return s2
    if callable(s1):
        return lambda: interleave(s2, s1())
    head, tail = s1
    if tail is None:
        return (head, s2)
    return (head, lambda: interleave(tail, s2))


def bind(s, goal: Callable):
    """Feed every state of ``s`` through ``goal`` (a state -> stream function)."""
    if s is None:
        return None
    if callable(s):
        return lambda: bind(s(), goal)
    head, tail = s
    if tail is None:
        return goal(head)
    return interleave(goal(head), lambda: bind(tail, goal))


def iter_stream(s, budget: Optional[Budget] = None):
    while s is not None:
        if callable(s):
            if budget is not None:
                budget.spend()
            s = s()
        else:
            head, s = s
            yield head


def take(n: Optional[int], s, budget: Optional[Budget] = None) -> list:
    """Force ``s`` until ``n`` answers are collected (``None`` means all)."""
    out = []
    if n is not None and n < 1:
        raise ValueError("take needs n >= 1 or None")
    try:
        for state in iter_stream(s, budget):
            out.append(state)
            if n is not None and len(out) >= n:
                break
    except BudgetExceeded as exc:
        exc.partial = out
        raise
    return out


# Nested binds recurse once per pending conjunct when forced.
if sys.getrecursionlimit() < 20000:
    sys.setrecursionlimit(20000)


# -- goals -------------------------------------------------------------------


class Goal:
    __slots__ = ()


@dataclass(frozen=True)
class Eq(Goal):
    left: Any
    right: Any


@dataclass(frozen=True)
class Fresh(Goal):
    """Introduce ``count`` new variables and pass them to ``body``."""

    body: Callable[..., Goal]
    count: int = 1
    hints: tuple = ()


@dataclass(frozen=True)
class Conj(Goal):
    goals: tuple


@dataclass(frozen=True)
class Disj(Goal):
    goals: tuple


@dataclass(frozen=True)
class Call(Goal):
    pred: str
    positive: bool
    args: tuple = ()


@dataclass(frozen=True)
class _Succeed(Goal):
    pass


@dataclass(frozen=True)
class _Fail(Goal):
    pass


Succeed = _Succeed()
Fail = _Fail()


def eval_goal(goal: Goal, state: State, prog=None):
    kind = type(goal)
    if kind is Call:
        from .solver import resolve_call
        from .terms import Struct

        return resolve_call(Struct(goal.pred, tuple(goal.args)), goal.positive, state, prog)
    if kind is Eq:
        s = unify(goal.left, goal.right, state.subst)
        return None if s is None else (state._replace(subst=s), None)
    if kind is Conj:
        return _conj(goal.goals, 0, state, prog)
    if kind is Disj:
        out = None
        for g in reversed(goal.goals):
            out = interleave(_suspended(g, state, prog), out)
        return out
    if kind is Fresh:
        n = state.var_counter
        hints = goal.hints or (None,) * goal.count
        fresh = [Var(n + i, hints[i]) for i in range(goal.count)]
        return eval_goal(goal.body(*fresh), state._replace(var_counter=n + goal.count), prog)
    if goal is Succeed:
        return (state, None)
    if goal is Fail:
        return None
    raise TypeError(f"not a goal: {goal!r}")


def _suspended(goal, state, prog):
    return lambda: eval_goal(goal, state, prog)


def _conj(goals, i, state, prog):
    if i == len(goals):
        return (state, None)
    s = eval_goal(goals[i], state, prog)
    if i + 1 == len(goals):
        return s
    return bind(s, lambda st: _conj(goals, i + 1, st, prog))
