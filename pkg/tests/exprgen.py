"""Seeded random expressions shared by the property and acceptance suites."""

from __future__ import annotations

import random

from muhka.expr import ONE, ZERO, Expr, Lit, Mu, Nu, Prod, Sum, Var, classify, size

_VARS = "XYZUVW"


def _build(rng: random.Random, budget: int, bound: list[str], alphabet: str, nu: bool) -> Expr:
    if budget <= 1:
        pool = [Lit(a) for a in alphabet] * 3 + [ONE] * 2 + [ZERO] + [Var(v) for v in bound]
        return rng.choice(pool)
    if bound and budget <= 3 and rng.random() < 0.6:
        # a letter in front keeps the recursive call guarded
        return Prod(Lit(rng.choice(alphabet)), Var(rng.choice(bound)))
    roll = rng.random()
    if bound and roll < 0.15:
        # star-like shapes keep recursive languages dense
        rest = _build(rng, max(1, budget - 4), bound, alphabet, nu)
        step = Prod(Lit(rng.choice(alphabet)), Var(rng.choice(bound)))
        return Sum(ONE, Prod(rest, step)) if rng.random() < 0.5 else Sum(rest, step)
    if roll < 0.35:
        k = rng.randint(1, budget - 2) if budget > 2 else 1
        return Prod(_build(rng, k, bound, alphabet, nu), _build(rng, max(1, budget - 1 - k), bound, alphabet, nu))
    if roll < 0.65:
        k = rng.randint(1, budget - 2) if budget > 2 else 1
        return Sum(_build(rng, k, bound, alphabet, nu), _build(rng, max(1, budget - 1 - k), bound, alphabet, nu))
    if len(bound) < len(_VARS):
        v = _VARS[len(bound)]
        binder = Nu if nu and rng.random() < 0.5 else Mu
        return binder(v, _build(rng, budget - 1, bound + [v], alphabet, nu))
    return _build(rng, budget - 1, bound, alphabet, nu)


def random_expr(rng: random.Random, max_size: int = 25, alphabet: str = "ab", nu: bool = False,
                left: bool = False) -> Expr:
    """A random closed expression that is guarded (left-guarded if asked)."""
    while True:
        e = _build(rng, rng.randint(1, max_size), [], alphabet, nu)
        c = classify(e)
        if size(e) <= max_size and (c.left_guarded if left else c.guarded):
            return e
