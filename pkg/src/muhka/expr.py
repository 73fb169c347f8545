"""Fixed-point expressions: syntax, parsing, printing and structural analyses.

Expressions are immutable trees.  Equality and hashing are up to renaming of
bound variables: every node carries a cached de Bruijn style canonical string
(:meth:`Expr.canon`) which is what ``==`` and ``hash`` compare.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import cmp_to_key, lru_cache
from typing import Iterable, Iterator, Sequence

from .errors import (
    ExprSyntaxError,
    FragmentError,
    NotGuardedError,
    UnboundVariableError,
    UnknownLetterError,
)

__all__ = [
    "Expr", "Zero", "One", "Lit", "Var", "Sum", "Prod", "Fix", "Mu", "Nu",
    "ZERO", "ONE", "parse_expr", "parse_cedent_items", "free_vars", "classify",
    "Classification", "unfold", "substitute", "fl_closure", "dependency_key",
    "dependency_compare", "dependency_leq", "critical_formula", "approximant",
    "product", "is_mu_only", "require_guarded", "size", "letters_of", "to_text", "sort_by_dependency", "star",
]


class Expr:
    __slots__ = ("_canon", "_hash", "_fv", "_size", "_prod", "_lprod", "_fl")

    def __init__(self):
        self._canon = None
        self._hash = None
        self._fv = None
        self._size = None
        self._prod = None
        self._lprod = None
        self._fl = None

    # -- identity ---------------------------------------------------------
    def canon(self) -> str:
        if self._canon is None:
            self._canon = _canon(self, {}, 0)
        return self._canon

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Expr):
            return NotImplemented
        return self.canon() == other.canon()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.canon())
        return self._hash

    def __repr__(self):
        return f"<{type(self).__name__} {to_text(self)}>"

    def __str__(self):
        return to_text(self)

    def children(self) -> tuple[Expr, ...]:
        return ()

    @property
    def is_closed(self) -> bool:
        return not free_vars(self)


class Zero(Expr):
    __slots__ = ()


class One(Expr):
    __slots__ = ()


class Lit(Expr):
    __slots__ = ("symbol",)

    def __init__(self, symbol: str):
        super().__init__()
        if len(symbol) != 1:
            raise ValueError(f"letters are single characters, got {symbol!r}")
        self.symbol = symbol


class Var(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        super().__init__()
        self.name = name


class _Binary(Expr):
    __slots__ = ("left", "right")

    def __init__(self, left: Expr, right: Expr):
        super().__init__()
        self.left = left
        self.right = right

    def children(self):
        return (self.left, self.right)


class Sum(_Binary):
    __slots__ = ()


class Prod(_Binary):
    __slots__ = ()


class Fix(Expr):
    """Common base of the two binders."""

    __slots__ = ("var", "body", "_unfolded")
    keyword = ""

    def __init__(self, var: str, body: Expr):
        super().__init__()
        self.var = var
        self.body = body
        self._unfolded = None

    def children(self):
        return (self.body,)


class Mu(Fix):
    __slots__ = ()
    keyword = "mu"


class Nu(Fix):
    __slots__ = ()
    keyword = "nu"


ZERO = Zero()
ONE = One()


def _canon(e: Expr, env: dict, depth: int) -> str:
    if e._canon is not None and (not env or not free_vars(e)):
        return e._canon
    if isinstance(e, Zero):
        return "0"
    if isinstance(e, One):
        return "1"
    if isinstance(e, Lit):
        return e.symbol
    if isinstance(e, Var):
        if e.name in env:
            return f"%{depth - env[e.name]}"
        return e.name
    if isinstance(e, Sum):
        return f"+({_canon(e.left, env, depth)},{_canon(e.right, env, depth)})"
    if isinstance(e, Prod):
        return f".({_canon(e.left, env, depth)},{_canon(e.right, env, depth)})"
    if isinstance(e, Fix):
        inner = dict(env)
        inner[e.var] = depth + 1
        return f"{e.keyword}({_canon(e.body, inner, depth + 1)})"
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# Printing

def to_text(e: Expr, unicode: bool = False) -> str:
    """Render ``e`` in the concrete syntax accepted by :func:`parse_expr`."""
    return _show(e, True, unicode)


def _show(e: Expr, tail: bool, uni: bool) -> str:
    if isinstance(e, Zero):
        return "0"
    if isinstance(e, One):
        return "1"
    if isinstance(e, Lit):
        return e.symbol
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Sum):
        left = _show(e.left, False, uni)
        if isinstance(e.left, Sum):
            left = f"({left})"
        return f"{left} + {_show(e.right, tail, uni)}"
    if isinstance(e, Prod):
        left = _show(e.left, False, uni)
        if isinstance(e.left, (Sum, Prod)):
            left = f"({left})"
        if isinstance(e.right, Sum):
            return f"{left} ({_show(e.right, True, uni)})"
        right = _show(e.right, tail, uni)
        return f"{left} {right}"
    if isinstance(e, Fix):
        kw = ("μ" if isinstance(e, Mu) else "ν") if uni else e.keyword + " "
        body = e.body
        if isinstance(body, (Zero, One, Lit, Var)):
            text = f"{kw}{e.var}.{_show(body, True, uni)}"
        else:
            text = f"{kw}{e.var}.({_show(body, True, uni)})"
        return text if tail else f"({text})"
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# Parsing

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<binder>(?:mu|nu)(?=\s*[A-Z])|[μν])
  | (?P<var>[A-Z][A-Za-z0-9_']*)
  | (?P<const>[01])
  | (?P<punct>[+().{}*\[\],])
  | (?P<letter>[a-z<>])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    i = 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[i]!r}", text, i)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), i))
        i = m.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, alphabet):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.alphabet = None if alphabet is None else frozenset(alphabet)
        self._fresh = itertools.count()

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        raise ExprSyntaxError(msg, self.text, tok.pos)

    def expect(self, text):
        if self.tok.text != text:
            self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        self.i += 1

    def at_start_of_factor(self) -> bool:
        t = self.tok
        return t.kind in ("binder", "var", "const", "letter") or t.text in ("(", "{")

    def parse_sum(self) -> Expr:
        left = self.parse_prod()
        if self.tok.text == "+":
            self.i += 1
            return Sum(left, self.parse_sum())
        return left

    def parse_prod(self) -> Expr:
        if not self.at_start_of_factor():
            self.error(f"expected an expression, found {self.tok.text or 'end of input'!r}")
        factors = [self.parse_unary()]
        while self.at_start_of_factor():
            factors.append(self.parse_unary())
        out = factors[-1]
        for f in reversed(factors[:-1]):
            out = Prod(f, out)
        return out

    def parse_unary(self) -> Expr:
        e = self.parse_atom()
        while self.tok.text == "*":
            self.i += 1
            e = star(e)
        return e

    def parse_atom(self) -> Expr:
        t = self.tok
        if t.kind == "binder":
            self.i += 1
            if self.tok.kind != "var":
                self.error("expected a variable after binder")
            name = self.tok.text
            self.i += 1
            self.expect(".")
            body = self.parse_sum()
            return Mu(name, body) if t.text in ("mu", "μ") else Nu(name, body)
        if t.kind == "var":
            self.i += 1
            return Var(t.text)
        if t.kind == "const":
            self.i += 1
            return ZERO if t.text == "0" else ONE
        if t.kind == "letter":
            if self.alphabet is not None and t.text not in self.alphabet:
                raise UnknownLetterError(f"letter {t.text!r} not in alphabet", self.text, t.pos)
            self.i += 1
            return Lit(t.text)
        if t.text in ("(", "{"):
            close = ")" if t.text == "(" else "}"
            self.i += 1
            e = self.parse_sum()
            self.expect(close)
            return e
        self.error(f"unexpected token {t.text!r}")


def star(e: Expr) -> Expr:
    """Kleene star as the least fixed point ``mu X.(1 + e X)``."""
    taken = free_vars(e)
    name = "S" if "S" not in taken else _fresh_name("S", taken)
    return Mu(name, Sum(ONE, Prod(e, Var(name))))


def _check_scope(e: Expr, free, text: str) -> None:
    if free is None:
        return
    extra = free_vars(e) - frozenset(free)
    if extra:
        raise UnboundVariableError(f"unbound variable(s) {', '.join(sorted(extra))} in {text!r}")


def parse_expr(text: str, alphabet: Iterable[str] | None = None, free: Iterable[str] | None = ()) -> Expr:
    """Parse one expression.

    ``free`` lists variables allowed to occur free; the default demands a
    closed expression, ``None`` lifts the check.
    """
    p = _Parser(text, alphabet)
    e = p.parse_sum()
    if p.tok.kind != "eof":
        p.error(f"trailing input {p.tok.text!r}")
    _check_scope(e, free, text)
    return e


def parse_cedent_items(text: str, alphabet=None, free=()) -> tuple[Expr, ...]:
    """Parse a comma-separated list of expressions (possibly empty)."""
    if not text.strip():
        return ()
    p = _Parser(text, alphabet)
    items = [p.parse_sum()]
    while p.tok.text == ",":
        p.i += 1
        items.append(p.parse_sum())
    if p.tok.kind != "eof":
        p.error(f"trailing input {p.tok.text!r}")
    for it in items:
        _check_scope(it, free, text)
    return tuple(items)


# ---------------------------------------------------------------------------
# Structural analyses

def free_vars(e: Expr) -> frozenset[str]:
    if e._fv is None:
        if isinstance(e, Var):
            fv = frozenset((e.name,))
        elif isinstance(e, _Binary):
            fv = free_vars(e.left) | free_vars(e.right)
        elif isinstance(e, Fix):
            fv = free_vars(e.body) - {e.var}
        else:
            fv = frozenset()
        e._fv = fv
    return e._fv


def size(e: Expr) -> int:
    if e._size is None:
        e._size = 1 + sum(size(c) for c in e.children())
    return e._size


def subterms(e: Expr) -> Iterator[Expr]:
    stack = [e]
    while stack:
        f = stack.pop()
        yield f
        stack.extend(f.children())


def letters_of(e: Expr) -> frozenset[str]:
    return frozenset(f.symbol for f in subterms(e) if isinstance(f, Lit))


def is_mu_only(e: Expr) -> bool:
    return not any(isinstance(f, Nu) for f in subterms(e))


def _productive(e: Expr) -> bool:
    if e._prod is None:
        if isinstance(e, Lit):
            r = True
        elif isinstance(e, Sum):
            r = _productive(e.left) and _productive(e.right)
        elif isinstance(e, Prod):
            r = _productive(e.left) or _productive(e.right)
        elif isinstance(e, Fix):
            r = _productive(e.body)
        else:
            r = False
        e._prod = r
    return e._prod


def _left_productive(e: Expr) -> bool:
    if e._lprod is None:
        if isinstance(e, Lit):
            r = True
        elif isinstance(e, Sum):
            r = _left_productive(e.left) and _left_productive(e.right)
        elif isinstance(e, Prod):
            r = _left_productive(e.left)
        elif isinstance(e, Fix):
            r = _left_productive(e.body)
        else:
            r = False
        e._lprod = r
    return e._lprod


def _guarded(e: Expr, test) -> bool:
    # scope: bound variables in scope -> "under a productive node within
    # which the variable is free"; free_ok plays that role for free ones.
    stack = [(e, {}, False)]
    while stack:
        f, scope, free_ok = stack.pop()
        if test(f):
            scope = dict.fromkeys(scope, True)
            free_ok = True
        if isinstance(f, Var):
            if not scope.get(f.name, free_ok):
                return False
        elif isinstance(f, Fix):
            inner = dict(scope)
            inner[f.var] = False
            stack.append((f.body, inner, free_ok))
        else:
            for c in f.children():
                stack.append((c, scope, free_ok))
    return True


@dataclass(frozen=True)
class Classification:
    productive: bool
    left_productive: bool
    guarded: bool
    left_guarded: bool


@lru_cache(maxsize=4096)
def classify(e: Expr) -> Classification:
    return Classification(
        productive=_productive(e),
        left_productive=_left_productive(e),
        guarded=_guarded(e, _productive),
        left_guarded=_guarded(e, _left_productive),
    )


def require_guarded(e: Expr, left: bool = False) -> None:
    ok = _guarded(e, _left_productive if left else _productive)
    if not ok:
        kind = "left-guarded" if left else "guarded"
        raise NotGuardedError(f"expression is not {kind}: {to_text(e)}")


def _fresh_name(base: str, avoid: frozenset[str]) -> str:
    for i in itertools.count(1):
        cand = f"{base}{i}"
        if cand not in avoid:
            return cand


def substitute(e: Expr, name: str, g: Expr) -> Expr:
    """Capture-avoiding substitution of ``g`` for the free occurrences of ``name``."""
    if name not in free_vars(e):
        return e
    if isinstance(e, Var):
        return g
    if isinstance(e, Sum):
        return Sum(substitute(e.left, name, g), substitute(e.right, name, g))
    if isinstance(e, Prod):
        return Prod(substitute(e.left, name, g), substitute(e.right, name, g))
    if isinstance(e, Fix):
        var, body = e.var, e.body
        gfv = free_vars(g)
        if var in gfv:
            new = _fresh_name(var, gfv | free_vars(body) | {name})
            body = substitute(body, var, Var(new))
            var = new
        return type(e)(var, substitute(body, name, g))
    raise TypeError(f"not an expression: {e!r}")


def unfold(e: Expr) -> Expr:
    if not isinstance(e, Fix):
        raise FragmentError(f"not a fixed-point expression: {to_text(e)}")
    if e._unfolded is None:
        e._unfolded = substitute(e.body, e.var, e)
    return e._unfolded


def fl_closure(e: Expr) -> frozenset[Expr]:
    """Fischer-Ladner closure: closed subformulas plus one-step unfoldings."""
    if e._fl is None:
        if free_vars(e):
            raise UnboundVariableError(f"FL closure needs a closed expression: {to_text(e)}")
        seen: set[Expr] = set()
        work = [e]
        while work:
            f = work.pop()
            if f in seen:
                continue
            seen.add(f)
            for s in subterms(f):
                if s is not f and not free_vars(s) and s not in seen:
                    work.append(s)
            if isinstance(f, Fix):
                work.append(unfold(f))
        e._fl = frozenset(seen)
    return e._fl


def dependency_leq(e: Expr, f: Expr) -> bool:
    """The dependency preorder: FL-inclusion, then reverse subformula within a class."""
    e_in_f = e in fl_closure(f)
    f_in_e = f in fl_closure(e)
    if e_in_f and not f_in_e:
        return True
    if e_in_f and f_in_e:
        return e == f or any(s == f for s in subterms(e) if not free_vars(s))
    return False


def dependency_key(e: Expr) -> tuple:
    # Linear extension of dependency_leq: a strictly smaller FL closure comes
    # first; inside one FL class the larger formula comes first.
    return (len(fl_closure(e)), -size(e), e.canon())


def dependency_compare(e: Expr, f: Expr) -> int:
    ke, kf = dependency_key(e), dependency_key(f)
    return (ke > kf) - (ke < kf)


def critical_formula(formulas: Iterable[Expr]) -> Expr | None:
    """The outermost formula of a set drawn from one FL class.

    For the principal formulas of an infinitely-often-principal thread this
    is the unique subformula-least one, i.e. the dependency-greatest.
    """
    best = None
    for f in formulas:
        if best is None or dependency_key(f) > dependency_key(best):
            best = f
    return best


def sort_by_dependency(formulas: Iterable[Expr]) -> list[Expr]:
    return sorted(formulas, key=cmp_to_key(dependency_compare))


def approximant(e: Expr, n: int) -> Expr:
    if not isinstance(e, Mu):
        raise FragmentError(f"approximants are defined for mu-expressions only: {to_text(e)}")
    out: Expr = ZERO
    for _ in range(n):
        out = substitute(e.body, e.var, out)
    return out


def product(items: Sequence[Expr]) -> Expr:
    """Right-nested product of a cedent; the empty product is 1."""
    if not items:
        return ONE
    out = items[-1]
    for f in reversed(items[:-1]):
        out = Prod(f, out)
    return out
