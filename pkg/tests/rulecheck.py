"""Random rule instances and the bounded soundness/invertibility checks."""

from __future__ import annotations

import random

from exprgen import random_expr
from muhka.errors import RuleError
from muhka.expr import Fix, Lit, Mu, One, Prod, Sum, Zero
from muhka.sequent import Hypersequent, RuleInstance, apply_rule, seq_valid_upto, LOGICAL_RULES

_LEFT = {Zero: "0-l", One: "1-l", Prod: "·-l", Sum: "+-l", Mu: "μ-l"}
_RIGHT = {Zero: "0-r", One: "1-r", Prod: "·-r", Sum: "+-r", Mu: "μ-r"}


def random_sequent(rng: random.Random, max_size: int = 8) -> Hypersequent:
    lhs = [random_expr(rng, max_size) for _ in range(rng.randint(0, 2))]
    rhs = [[random_expr(rng, max_size) for _ in range(rng.randint(0, 2))] for _ in range(rng.randint(0, 2))]
    if rng.random() < 0.3:
        a = Lit(rng.choice("ab"))
        if rng.random() < 0.5:
            lhs.insert(0, a)
            rhs = [[a] + c for c in rhs]
        else:
            lhs.append(a)
            rhs = [c + [a] for c in rhs]
    return Hypersequent.make(tuple(lhs), rhs)


def rule_instances(s: Hypersequent) -> list[RuleInstance]:
    out = []
    tries: list[tuple[str, object]] = [("init", None), ("k-l", None), ("k-r", None)]
    tries += [("w-r", c) for c in range(len(s.rhs))]
    for i, f in enumerate(s.lhs):
        if type(f) in _LEFT:
            tries.append((_LEFT[type(f)], i))
    for c, ced in enumerate(s.rhs):
        for i, f in enumerate(ced):
            if type(f) in _RIGHT:
                tries.append((_RIGHT[type(f)], (c, i)))
    for rule, pr in tries:
        try:
            out.append(apply_rule(s, rule, pr))
        except RuleError:
            pass
    return out


def _shortest_counterexample(s: Hypersequent, bound: int) -> int | None:
    res = seq_valid_upto(s, bound)
    return None if res.valid else len(res.witness)


def soundness_violation(step: RuleInstance, bound: int) -> str | None:
    """A counterexample to the conclusion must be reflected in some premiss,
    no longer than it, and strictly shorter across a modal step."""
    m = _shortest_counterexample(step.conclusion, bound)
    if m is None:
        return None
    limit = m - 1 if step.rule in ("k-l", "k-r") else m
    for prem in step.premisses:
        if limit >= 0 and not seq_valid_upto(prem, limit).valid:
            return None
    return f"{step.rule} at {step.conclusion}: conclusion fails at length {m}, premisses valid up to {limit}"


def invertibility_violation(step: RuleInstance, bound: int) -> str | None:
    """Logical steps: a valid conclusion has valid premisses (up to the bound)."""
    if step.rule not in LOGICAL_RULES or not seq_valid_upto(step.conclusion, bound).valid:
        return None
    for prem in step.premisses:
        res = seq_valid_upto(prem, bound)
        if not res.valid:
            return f"{step.rule} at {step.conclusion}: premiss {prem} fails on {res.witness!r}"
    return None
