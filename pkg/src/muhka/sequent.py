"""Hypersequents and single inference steps.

A hypersequent ``Gamma |- [D1], [D2]`` has a list of expressions on the
left and a set of lists on the right.  The right-hand side is kept sorted
and free of duplicates, so equal sequents compare equal.

Formula occurrences are addressed as ``("L", i)`` on the left and
``("R", c, i)`` for item ``i`` of cedent ``c`` on the right.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import ExprSyntaxError, FragmentError, NotGuardedError, RuleError
from .expr import (
    Expr, Lit, Mu, Nu, One, Prod, Sum, Zero, classify, is_mu_only, parse_cedent_items,
    product, to_text, unfold,
)
from .grammar import enumerate_words

__all__ = [
    "Hypersequent", "RuleInstance", "apply_rule", "is_leftmost", "seq_valid_upto",
    "BoundedValidity", "RULES", "LOGICAL_RULES", "canonical_rule_name", "parse_sequent",
]

Cedent = tuple[Expr, ...]
Occ = tuple

LEFT_RULES = ("0-l", "1-l", "·-l", "+-l", "μ-l", "ν-l")
RIGHT_RULES = ("0-r", "1-r", "·-r", "+-r", "μ-r", "ν-r")
LOGICAL_RULES = LEFT_RULES + RIGHT_RULES
RULES = ("init", "w-r", "k-l", "k-r") + LOGICAL_RULES

_ALIASES = {
    "mu-l": "μ-l", "nu-l": "ν-l", "mu-r": "μ-r", "nu-r": "ν-r",
    ".-l": "·-l", ".-r": "·-r", "*-l": "·-l", "*-r": "·-r",
    "wr": "w-r", "kl": "k-l", "kr": "k-r",
}


def canonical_rule_name(name: str) -> str:
    name = name.strip()
    name = _ALIASES.get(name, name)
    if name not in RULES:
        raise RuleError(f"unknown rule {name!r}")
    return name


def _cedent_key(cedent: Cedent) -> tuple[str, ...]:
    return tuple(e.canon() for e in cedent)


@dataclass(frozen=True)
class Hypersequent:
    lhs: Cedent
    rhs: tuple[Cedent, ...]

    @classmethod
    def make(cls, lhs: Iterable[Expr], rhs: Iterable[Iterable[Expr]]) -> "Hypersequent":
        seen = {}
        for ced in rhs:
            ced = tuple(ced)
            seen.setdefault(_cedent_key(ced), ced)
        return cls(tuple(lhs), tuple(seen[k] for k in sorted(seen)))

    def __post_init__(self):
        keys = [_cedent_key(c) for c in self.rhs]
        if keys != sorted(set(keys)):
            raise ValueError("right-hand side must be built with Hypersequent.make")

    def text(self, unicode: bool = False) -> str:
        left = ", ".join(to_text(e, unicode) for e in self.lhs)
        arrow = "→" if unicode else "|-"
        if self.rhs:
            right = ", ".join("[" + ", ".join(to_text(e, unicode) for e in c) + "]" for c in self.rhs)
        else:
            right = "{}"
        return f"{left} {arrow} {right}" if left else f"{arrow} {right}"

    def __str__(self):
        return self.text()

    @classmethod
    def parse(cls, text: str, alphabet=None) -> "Hypersequent":
        return parse_sequent(text, alphabet)

    def occurrences(self) -> list[Occ]:
        occs = [("L", i) for i in range(len(self.lhs))]
        for c, ced in enumerate(self.rhs):
            occs.extend(("R", c, i) for i in range(len(ced)))
        return occs

    def formula_at(self, occ: Occ) -> Expr:
        try:
            if occ[0] == "L":
                return self.lhs[occ[1]]
            if occ[0] == "R":
                return self.rhs[occ[1]][occ[2]]
        except (IndexError, TypeError):
            pass
        raise RuleError(f"no formula at position {occ!r} of {self}")

    def formulas(self) -> Iterable[Expr]:
        yield from self.lhs
        for c in self.rhs:
            yield from c

    def is_mu_only(self) -> bool:
        return all(is_mu_only(e) for e in self.formulas())


def parse_sequent(text: str, alphabet=None) -> Hypersequent:
    for arrow in ("|-", "→", "->"):
        if arrow in text:
            left, right = text.split(arrow, 1)
            break
    else:
        raise ExprSyntaxError("sequent needs a turnstile '|-'", text, 0)
    lhs = parse_cedent_items(left, alphabet)
    right = right.strip()
    rhs: list[Cedent] = []
    if right != "{}":
        pos = 0
        while pos < len(right):
            if right[pos].isspace():
                pos += 1
                continue
            if right[pos] != "[":
                raise ExprSyntaxError("expected '[' opening a cedent", right, pos)
            end = right.find("]", pos)
            if end < 0:
                raise ExprSyntaxError("unclosed cedent", right, pos)
            rhs.append(parse_cedent_items(right[pos + 1:end], alphabet))
            pos = end + 1
            while pos < len(right) and right[pos].isspace():
                pos += 1
            if pos < len(right):
                if right[pos] != ",":
                    raise ExprSyntaxError("expected ',' between cedents", right, pos)
                pos += 1
    return Hypersequent.make(lhs, rhs)


# ---------------------------------------------------------------------------
# Rule instances

@dataclass(frozen=True)
class RuleInstance:
    """One inference step.

    ``ancestry[k]`` maps every occurrence of premiss ``k`` to the tuple of its
    immediate ancestors in the conclusion.  There is usually exactly one;
    right-hand cedents that become equal after a step are merged, and the
    merged occurrence then inherits the ancestors of both copies.
    """

    rule: str
    conclusion: Hypersequent
    premisses: tuple[Hypersequent, ...]
    principal: Occ | None
    ancestry: tuple[Mapping[Occ, tuple[Occ, ...]], ...] = field(compare=False)
    # auxiliary occurrences per premiss (the magenta formulas of the schema)
    auxiliary: tuple[frozenset, ...] = field(compare=False, default=())

    @property
    def letter(self) -> str | None:
        if self.rule in ("k-l", "k-r"):
            return self.conclusion.formula_at(self.principal).symbol
        return None

    @property
    def weakened(self) -> Cedent | None:
        if self.rule == "w-r":
            return self.conclusion.rhs[self.principal[1]]
        return None


def _finish(lhs_pairs, rhs_raw):
    """Canonicalise a premiss built from (expr, ancestor) pairs."""
    lhs = tuple(e for e, _ in lhs_pairs)
    groups: dict[tuple, list] = {}
    for ced in rhs_raw:
        key = tuple(e.canon() for e, _ in ced)
        groups.setdefault(key, []).append(ced)
    seq = Hypersequent.make(lhs, [[e for e, _ in g[0]] for g in groups.values()])
    anc: dict[Occ, tuple[Occ, ...]] = {}
    aux = set()
    for i, (_, a) in enumerate(lhs_pairs):
        anc[("L", i)] = (a[0],)
        if a[1]:
            aux.add(("L", i))
    for c, ced in enumerate(seq.rhs):
        for copy in groups[_cedent_key(ced)]:
            for i, (_, a) in enumerate(copy):
                prev = anc.get(("R", c, i), ())
                if a[0] not in prev:
                    anc[("R", c, i)] = tuple(sorted(prev + (a[0],)))
                if a[1]:
                    aux.add(("R", c, i))
    return seq, anc, frozenset(aux)


def _normalise_principal(rule: str, conclusion: Hypersequent, principal) -> Occ | None:
    if rule == "init":
        return None
    if rule in ("k-l", "k-r"):
        if not conclusion.lhs:
            raise RuleError(f"{rule} needs a non-empty left-hand side")
        return ("L", 0) if rule == "k-l" else ("L", len(conclusion.lhs) - 1)
    if principal is None:
        raise RuleError(f"{rule} needs a principal position")
    if rule == "w-r":
        if isinstance(principal, tuple) and principal and principal[0] == "C":
            principal = principal[1]
        if isinstance(principal, (tuple, list)) and all(isinstance(x, Expr) for x in principal):
            key = _cedent_key(tuple(principal))
            for c, ced in enumerate(conclusion.rhs):
                if _cedent_key(ced) == key:
                    return ("C", c)
            raise RuleError("weakened cedent does not occur on the right")
        if not isinstance(principal, int) or not 0 <= principal < len(conclusion.rhs):
            raise RuleError(f"w-r: cedent index {principal!r} out of range")
        return ("C", principal)
    if rule in LEFT_RULES:
        i = principal[1] if isinstance(principal, tuple) else principal
        if not isinstance(i, int) or not 0 <= i < len(conclusion.lhs):
            raise RuleError(f"{rule}: left position {principal!r} out of range")
        return ("L", i)
    if isinstance(principal, tuple) and principal and principal[0] == "R":
        principal = principal[1:]
    try:
        c, i = principal
        conclusion.rhs[c][i]
    except (TypeError, ValueError, IndexError):
        raise RuleError(f"{rule}: right position {principal!r} out of range") from None
    return ("R", c, i)


_HEAD = {"0": Zero, "1": One, "·": Prod, "+": Sum, "μ": Mu, "ν": Nu}


def apply_rule(conclusion: Hypersequent, rule: str, principal=None) -> RuleInstance:
    """Read a rule bottom-up: compute the premisses and their ancestry."""
    rule = canonical_rule_name(rule)
    occ = _normalise_principal(rule, conclusion, principal)
    lhs, rhs = conclusion.lhs, conclusion.rhs
    keep_l = [(e, (("L", i), False)) for i, e in enumerate(lhs)]
    keep_r = [[(e, (("R", c, i), False)) for i, e in enumerate(ced)] for c, ced in enumerate(rhs)]

    if rule == "init":
        if lhs or rhs != ((),):
            raise RuleError(f"init only closes '|- []', not {conclusion}")
        return RuleInstance(rule, conclusion, (), None, (), ())

    if rule == "w-r":
        c = occ[1]
        prem = _finish(keep_l, keep_r[:c] + keep_r[c + 1:])
        return _instance(rule, conclusion, occ, [prem])

    if rule in ("k-l", "k-r"):
        head = lhs[occ[1]]
        if not isinstance(head, Lit):
            raise RuleError(f"{rule}: {to_text(head)} is not a letter")
        at = 0 if rule == "k-l" else -1
        for ced in rhs:
            if not ced or ced[at] != head:
                raise RuleError(
                    f"{rule}({head.symbol}): every right cedent must {'start' if at == 0 else 'end'} "
                    f"with {head.symbol}; weaken the others first")
        if rule == "k-l":
            prem = _finish(keep_l[1:], [c[1:] for c in keep_r])
        else:
            prem = _finish(keep_l[:-1], [c[:-1] for c in keep_r])
        return _instance(rule, conclusion, occ, [prem])

    f = conclusion.formula_at(occ)
    want = _HEAD[rule[0]]
    if not isinstance(f, want):
        raise RuleError(f"{rule}: principal formula {to_text(f)} has the wrong shape")

    if occ[0] == "L":
        i = occ[1]
        before, after = keep_l[:i], keep_l[i + 1:]
        a = (occ, True)
        if rule == "0-l":
            return RuleInstance(rule, conclusion, (), occ, (), ())
        if rule == "1-l":
            prems = [(before + after)]
        elif rule == "·-l":
            prems = [before + [(f.left, a), (f.right, a)] + after]
        elif rule == "+-l":
            prems = [before + [(f.left, a)] + after, before + [(f.right, a)] + after]
        else:
            prems = [before + [(unfold(f), a)] + after]
        return _instance(rule, conclusion, occ, [_finish(p, keep_r) for p in prems])

    c, i = occ[1], occ[2]
    others = keep_r[:c] + keep_r[c + 1:]
    ced = keep_r[c]
    before, after = ced[:i], ced[i + 1:]
    a = (occ, True)
    if rule == "0-r":
        new = []
    elif rule == "1-r":
        new = [before + after]
    elif rule == "·-r":
        new = [before + [(f.left, a), (f.right, a)] + after]
    elif rule == "+-r":
        new = [before + [(f.left, a)] + after, before + [(f.right, a)] + after]
    else:
        new = [before + [(unfold(f), a)] + after]
    return _instance(rule, conclusion, occ, [_finish(keep_l, others + new)])


def _instance(rule, conclusion, occ, prems) -> RuleInstance:
    return RuleInstance(
        rule, conclusion, tuple(p[0] for p in prems), occ,
        tuple(p[1] for p in prems), tuple(p[2] for p in prems),
    )


def is_leftmost(step: RuleInstance) -> bool:
    """Logical steps act on the first formula of their cedent; no k-r."""
    if step.rule == "k-r":
        return False
    if step.rule in LOGICAL_RULES:
        return step.principal[-1] == 0
    return True


# ---------------------------------------------------------------------------
# Bounded validity

@dataclass(frozen=True)
class BoundedValidity:
    bound: int
    witness: str | None = None

    @property
    def valid(self) -> bool:
        return self.witness is None

    def __str__(self):
        return f"valid up to length {self.bound}" if self.valid else f"counterexample {self.witness!r}"


def seq_valid_upto(s: Hypersequent, max_len: int) -> BoundedValidity:
    """Shortest word of length <= max_len in L(lhs) but in no right cedent."""
    if not s.is_mu_only():
        raise FragmentError("bounded finite-word validity is only defined for mu-only sequents")
    for e in s.formulas():
        if not classify(e).guarded:
            raise NotGuardedError(f"unguarded expression {to_text(e)}")
    left = enumerate_words(product(s.lhs), max_len)
    if not left:
        return BoundedValidity(max_len)
    right: set[str] = set()
    for ced in s.rhs:
        right |= enumerate_words(product(ced), max_len)
    bad = left - right
    if not bad:
        return BoundedValidity(max_len)
    return BoundedValidity(max_len, min(bad, key=lambda w: (len(w), w)))
