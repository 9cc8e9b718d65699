"""Shared generators for randomized (seeded, deterministic) test corpora."""

import random

import pytest

from msort_kit.syntax import (
    And,
    App,
    Eq,
    Exists,
    FALSE,
    Forall,
    Implies,
    Not,
    Or,
    PredApp,
    Signature,
    TRUE,
    Var,
)


@pytest.fixture
def rng():
    return random.Random(0)


def random_term(rng, sig, sort, env, depth):
    """A random term of `sort`; `env` maps in-scope variable names to sorts."""
    candidates = [n for n, s in env.items() if s == sort]
    producers = [
        (f, a) for f, (a, r) in sig.functions.items() if r == sort
    ]
    if depth <= 0 or not producers or (candidates and rng.random() < 0.6):
        if candidates:
            return Var(rng.choice(sorted(candidates)), sort)
        nullary = [f for f, a in producers if not a]
        if nullary:
            return App(rng.choice(sorted(nullary)), (), sort)
    if producers:
        f, arg_sorts = producers[rng.randrange(len(producers))]
        args = tuple(random_term(rng, sig, s, env, depth - 1) for s in arg_sorts)
        return App(f, args, sort)
    if candidates:
        return Var(rng.choice(sorted(candidates)), sort)
    raise ValueError(f"cannot build a term of sort {sort}")


def _term_possible(sig, sort, env):
    if any(s == sort for s in env.values()):
        return True
    return any(r == sort for _, (a, r) in sig.functions.items() if not a) or any(
        r == sort for _, (a, r) in sig.functions.items()
    )


def random_formula(rng, sig, env, depth, max_binders=2, _binders_used=0):
    """A random sort-correct formula over `sig` with free variables `env`."""
    atoms = []
    for sort in sig.sorts:
        if _term_possible(sig, sort, env):
            atoms.append(("eq", sort))
    for p, arg_sorts in sig.predicates.items():
        if all(_term_possible(sig, s, env) for s in arg_sorts):
            atoms.append(("pred", p))

    def make_atom():
        kind = atoms[rng.randrange(len(atoms))] if atoms else None
        if kind is None:
            return TRUE if rng.random() < 0.5 else FALSE
        if kind[0] == "eq":
            sort = kind[1]
            return Eq(
                random_term(rng, sig, sort, env, 1),
                random_term(rng, sig, sort, env, 1),
            )
        p = kind[1]
        arg_sorts = sig.predicates[p]
        return PredApp(
            p, tuple(random_term(rng, sig, s, env, 1) for s in arg_sorts)
        )

    if depth <= 0:
        roll = rng.random()
        if roll < 0.08:
            return TRUE
        if roll < 0.12:
            return FALSE
        return make_atom()
    roll = rng.random()
    if roll < 0.30:
        return make_atom()
    if roll < 0.45:
        return Not(random_formula(rng, sig, env, depth - 1, max_binders, _binders_used))
    if roll < 0.60:
        parts = tuple(
            random_formula(rng, sig, env, depth - 1, max_binders, _binders_used)
            for _ in range(rng.choice((2, 2, 3)))
        )
        return And(parts)
    if roll < 0.75:
        parts = tuple(
            random_formula(rng, sig, env, depth - 1, max_binders, _binders_used)
            for _ in range(rng.choice((2, 2, 3)))
        )
        return Or(parts)
    if roll < 0.85:
        return Implies(
            random_formula(rng, sig, env, depth - 1, max_binders, _binders_used),
            random_formula(rng, sig, env, depth - 1, max_binders, _binders_used),
        )
    if _binders_used < max_binders:
        sort = rng.choice(sorted(sig.sorts))
        name = f"q{_binders_used}"
        inner = dict(env)
        inner[name] = sort
        body = random_formula(rng, sig, inner, depth - 1, max_binders, _binders_used + 1)
        ctor = Forall if rng.random() < 0.5 else Exists
        return ctor(name, sort, body)
    return make_atom()
