"""Random normal programs and independent reference semantics for tests."""

from __future__ import annotations

import random
from itertools import product

from hypothesis import strategies as st

from stablerel.program import Literal, Program, Rule
from stablerel.terms import Struct, Var, term_vars
from stablerel.verifier import GroundProgram, brute_force_models, instantiate


def atom(name, *args):
    return Struct(name, tuple(args))


def ground_rules(rng: random.Random, n_atoms=8, max_rules=16, max_body=3, p_neg=0.5):
    atoms = [atom(f"a{i}") for i in range(rng.randint(1, n_atoms))]
    rules = []
    for _ in range(rng.randint(1, max_rules)):
        head = rng.choice(atoms)
        body = tuple(
            Literal(rng.random() >= p_neg, rng.choice(atoms)) for _ in range(rng.randint(0, max_body))
        )
        rules.append(Rule(head, body))
    return rules


def positive_rules(rng: random.Random, **kw):
    return ground_rules(rng, p_neg=0.0, **kw)


@st.composite
def ground_programs(draw, n_atoms=8, max_rules=16, max_body=3):
    n = draw(st.integers(1, n_atoms))
    atoms = [atom(f"a{i}") for i in range(n)]
    lit = st.builds(Literal, st.booleans(), st.sampled_from(atoms))
    rule = st.builds(Rule, st.sampled_from(atoms), st.lists(lit, max_size=max_body).map(tuple))
    return draw(st.lists(rule, min_size=1, max_size=max_rules))


def oracle_models(rules) -> set:
    """Stable models by exhaustive search over the atoms the rules mention."""
    return brute_force_models(GroundProgram.from_rules(rules))


# -- small non-ground programs ------------------------------------------------------

CONSTANTS = ("a", "b")
SIGNATURES = {"p": 1, "q": 1, "r": 2}
X, Y = Var(0, "X"), Var(1, "Y")


@st.composite
def safe_programs(draw):
    """Safe programs over ``e/1`` facts and derived ``p/1, q/1, r/2``."""
    facts = draw(st.lists(st.sampled_from(CONSTANTS), min_size=1, max_size=2, unique=True))
    rules = [Rule(atom("e", c)) for c in facts]
    term = st.sampled_from((X, Y) + CONSTANTS)
    preds = st.sampled_from(sorted(SIGNATURES) + ["e"])
    for _ in range(draw(st.integers(1, 5))):
        body = []
        for _ in range(draw(st.integers(1, 3))):
            name = draw(preds)
            args = tuple(draw(term) for _ in range(SIGNATURES.get(name, 1)))
            body.append(Literal(draw(st.booleans()), atom(name, *args)))
        bound = set()
        for lit in body:
            if lit.positive:
                bound.update(term_vars(lit.atom))
        # make negative literals safe by grounding stray variables
        fixed = []
        for lit in body:
            if not lit.positive:
                args = tuple(a if type(a) is not Var or a in bound else CONSTANTS[0] for a in lit.atom.args)
                lit = Literal(False, atom(lit.pred, *args))
            fixed.append(lit)
        name = draw(st.sampled_from(sorted(SIGNATURES)))
        head_term = st.sampled_from(sorted(bound, key=lambda v: v.id) + list(CONSTANTS))
        head = atom(name, *(draw(head_term) for _ in range(SIGNATURES[name])))
        rules.append(Rule(head, tuple(fixed)))
    return Program.from_rules(rules)


def herbrand_grounding(prog: Program, constants=CONSTANTS) -> GroundProgram:
    """Every instance of every rule over ``constants`` (no relevance filtering)."""
    out = []
    for rule in prog.rules:
        vs = rule.variables()
        for values in product(constants, repeat=len(vs)):
            env = dict(zip(vs, values))
            out.append(
                Rule(instantiate(rule.head, env), tuple(Literal(l.positive, instantiate(l.atom, env)) for l in rule.body))
            )
    return GroundProgram.from_rules(out)
