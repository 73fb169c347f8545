"""Grammar back-ends and word-membership oracles.

* canonical context-free grammars of closed mu-expressions,
* Muller grammars of mu/nu-expressions (two copies of every nonterminal, the
  marked copy follows a guessed nu-thread),
* Bekic-style elimination turning a left-guarded equation system into one
  expression,
* membership for finite words by two unrelated parsers, and acceptance of
  ultimately periodic words by Muller grammars.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .errors import (
    BoundExceeded,
    FragmentError,
    MembershipError,
    NotGuardedError,
    UnboundVariableError,
)
from .expr import (
    Expr, Fix, Lit, Mu, Nu, One, Prod, Sum, Zero, Var, classify,
    critical_formula, dependency_key, fl_closure, free_vars, is_mu_only,
    parse_expr, product, require_guarded, substitute, to_text, unfold,
)

__all__ = [
    "CFG", "MullerCFG", "LassoWord", "Verdict", "LassoBounds",
    "to_canonical_cfg", "to_muller_cfg", "cfg_to_expr", "member_finite", "member_topdown", "member_chart",
    "enumerate_words", "accepts_lasso", "expr_words", "system_words",
    "cfg_words", "nonterminal_name",
]


class Verdict(str, enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"

    def __str__(self):
        return self.value


# ---------------------------------------------------------------------------
# Ultimately periodic words

@dataclass(frozen=True)
class LassoWord:
    """The omega-word ``prefix . loop^omega`` in normal form.

    The loop is primitive and the prefix as short as possible, so two
    instances are equal exactly when they denote the same omega-word.
    """

    prefix: str
    loop: str

    def __post_init__(self):
        if not self.loop:
            raise ValueError("lasso loop must be non-empty")
        u, v = self.prefix, self.loop
        n = len(v)
        for d in range(1, n + 1):
            if n % d == 0 and v[:d] * (n // d) == v:
                v = v[:d]
                break
        while u and u[-1] == v[-1]:
            u, v = u[:-1], v[-1] + v[:-1]
        object.__setattr__(self, "prefix", u)
        object.__setattr__(self, "loop", v)

    @classmethod
    def parse(cls, text: str) -> "LassoWord":
        if ":" not in text:
            raise ValueError(f"lasso words are written PREFIX:LOOP, got {text!r}")
        u, v = text.split(":", 1)
        return cls(u, v)

    def __str__(self):
        return f"{self.prefix}:{self.loop}"

    @property
    def n_positions(self) -> int:
        return len(self.prefix) + len(self.loop)

    def letter(self, i: int) -> str:
        return self.prefix[i] if i < len(self.prefix) else self.loop[i - len(self.prefix)]

    def succ(self, i: int) -> int:
        i += 1
        return i if i < self.n_positions else len(self.prefix)

    def suffix(self, i: int) -> "LassoWord":
        """The omega-word read from lasso position i."""
        if i < len(self.prefix):
            return LassoWord(self.prefix[i:], self.loop)
        k = i - len(self.prefix)
        return LassoWord("", self.loop[k:] + self.loop[:k])

    def take(self, n: int) -> str:
        out, i = [], 0
        for _ in range(n):
            out.append(self.letter(i))
            i = self.succ(i)
        return "".join(out)


# ---------------------------------------------------------------------------
# Grammars

def nonterminal_name(f: Expr, marked: bool = False) -> str:
    return f"{'M' if marked else 'X'}[{to_text(f)}]"


@dataclass
class CFG:
    nonterminals: tuple[str, ...]
    start: str
    productions: dict[str, tuple[tuple[str, ...], ...]]
    labels: dict[str, Expr] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        declared = set(self.nonterminals)
        if self.start not in declared:
            raise ValueError(f"start symbol {self.start!r} is not declared")
        for lhs, rhss in self.productions.items():
            if lhs not in declared:
                raise ValueError(f"production for undeclared nonterminal {lhs!r}")
            for rhs in rhss:
                for s in rhs:
                    if s not in declared and len(s) != 1:
                        raise ValueError(f"undeclared symbol {s!r} in production of {lhs!r}")

    def is_terminal(self, s: str) -> bool:
        return s not in self.productions and len(s) == 1

    def to_json(self) -> dict:
        return {
            "nonterminals": list(self.nonterminals),
            "start": self.start,
            "productions": {n: [list(r) for r in self.productions.get(n, ())] for n in self.nonterminals},
        }

    @classmethod
    def from_json(cls, doc: Mapping) -> "CFG":
        nts = tuple(doc["nonterminals"])
        prods = {n: tuple(tuple(r) for r in doc["productions"].get(n, [])) for n in nts}
        return cls(nts, doc["start"], prods)


@dataclass
class MullerCFG:
    """A grammar together with its acceptable sets of nonterminals.

    Acceptance is intensional: a set is acceptable iff it contains a marked
    nonterminal and the critical formula among its marked nonterminals is a
    nu-formula.  ``acceptable_base`` lists the marked nu-nonterminals, each
    of which forms a minimal acceptable set.
    """

    underlying: CFG
    acceptable_base: tuple[tuple[str, ...], ...]
    marked: frozenset[str]

    def is_acceptable(self, names: Iterable[str]) -> bool:
        labels = self.underlying.labels
        forms = [labels[n] for n in names if n in self.marked]
        crit = critical_formula(forms)
        return isinstance(crit, Nu)

    def to_json(self) -> dict:
        doc = self.underlying.to_json()
        doc["acceptable_base"] = [list(b) for b in self.acceptable_base]
        return doc

    @classmethod
    def from_json(cls, doc: Mapping) -> "MullerCFG":
        cfg = CFG.from_json(doc)
        marked = frozenset(n for n in cfg.nonterminals if n.startswith("M["))
        for n in cfg.nonterminals:
            cfg.labels[n] = parse_expr(n[2:-1])
        base = tuple(tuple(b) for b in doc.get("acceptable_base", []))
        return cls(cfg, base, marked)


def dumps(doc: Mapping) -> str:
    return json.dumps(doc, sort_keys=True, ensure_ascii=False, indent=2) + "\n"


def _require_closed(e: Expr) -> None:
    if free_vars(e):
        raise UnboundVariableError(f"closed expression required: {to_text(e)}")


def _productions_for(f: Expr, name) -> tuple[tuple[str, ...], ...]:
    if isinstance(f, One):
        return ((),)
    if isinstance(f, Zero):
        return ()
    if isinstance(f, Lit):
        return ((f.symbol,),)
    if isinstance(f, Sum):
        return ((name(f.left),), (name(f.right),))
    if isinstance(f, Prod):
        return ((name(f.left), name(f.right)),)
    if isinstance(f, Fix):
        return ((name(unfold(f)),),)
    raise UnboundVariableError(f"open subformula in FL closure: {to_text(f)}")


def _ordered_closure(e: Expr) -> list[Expr]:
    return sorted(fl_closure(e), key=dependency_key)


def to_canonical_cfg(e: Expr) -> CFG:
    """One nonterminal per FL formula, productions read off the top connective."""
    _require_closed(e)
    if not is_mu_only(e):
        raise FragmentError("the canonical grammar is defined for mu-only expressions")
    require_guarded(e)
    return _canonical_cfg(e)


@lru_cache(maxsize=512)
def _canonical_cfg(e: Expr) -> CFG:
    forms = _ordered_closure(e)
    names = {f: nonterminal_name(f) for f in forms}
    prods = {names[f]: _productions_for(f, names.__getitem__) for f in forms}
    cfg = CFG(tuple(names[f] for f in forms), names[e], prods)
    cfg.labels.update({n: f for f, n in names.items()})
    return cfg


def to_muller_cfg(e: Expr) -> MullerCFG:
    _require_closed(e)
    require_guarded(e, left=True)
    forms = _ordered_closure(e)
    normal = {f: nonterminal_name(f) for f in forms}
    mark = {f: nonterminal_name(f, marked=True) for f in forms}
    prods: dict[str, tuple[tuple[str, ...], ...]] = {}
    for f in forms:
        prods[normal[f]] = _productions_for(f, normal.__getitem__)
        if isinstance(f, Prod):
            prods[mark[f]] = ((mark[f.left], normal[f.right]), (normal[f.left], mark[f.right]))
        else:
            prods[mark[f]] = _productions_for(f, mark.__getitem__)
    nts = tuple(normal[f] for f in forms) + tuple(mark[f] for f in forms)
    cfg = CFG(nts, mark[e], prods)
    cfg.labels.update({n: f for f, n in normal.items()})
    cfg.labels.update({n: f for f, n in mark.items()})
    base = tuple((mark[f],) for f in forms if isinstance(f, Nu))
    return MullerCFG(cfg, base, frozenset(mark.values()))


# ---------------------------------------------------------------------------
# Equation systems

def cfg_to_expr(system: Mapping[str, Expr], start: str) -> Expr:
    """Solve ``{X -> e_X}`` for ``start`` by eliminating one variable at a time."""
    if start not in system:
        raise ValueError(f"start variable {start!r} has no equation")
    names = set(system)
    for x, rhs in system.items():
        extra = free_vars(rhs) - names
        if extra:
            raise UnboundVariableError(f"equation for {x} mentions unknown variable(s) {sorted(extra)}")
        if not classify(rhs).left_guarded:
            raise NotGuardedError(f"right-hand side of {x} is not left-guarded: {to_text(rhs)}")
    eqs = dict(system)
    pending = [x for x in eqs if x != start]
    while pending:
        x = pending.pop()
        rhs = eqs.pop(x)
        solution = Mu(x, rhs) if x in free_vars(rhs) else rhs
        for y in eqs:
            eqs[y] = substitute(eqs[y], x, solution)
    rhs = eqs[start]
    return Mu(start, rhs) if start in free_vars(rhs) else rhs


# ---------------------------------------------------------------------------
# Bounded languages

def _concat(left: frozenset[str], right: frozenset[str], k: int) -> frozenset[str]:
    if not left or not right:
        return frozenset()
    by_len: dict[int, list[str]] = {}
    for v in right:
        by_len.setdefault(len(v), []).append(v)
    out = set()
    for u in left:
        room = k - len(u)
        for n, vs in by_len.items():
            if n <= room:
                out.update(u + v for v in vs)
    return frozenset(out)


def expr_words(e: Expr, k: int, env: Mapping[str, frozenset[str]] | None = None) -> frozenset[str]:
    """Words of length <= k in L(e), straight from the least-fixed-point semantics."""
    env = dict(env or {})
    if isinstance(e, Zero):
        return frozenset()
    if isinstance(e, One):
        return frozenset(("",))
    if isinstance(e, Lit):
        return frozenset((e.symbol,)) if k >= 1 else frozenset()
    if isinstance(e, Var):
        if e.name not in env:
            raise UnboundVariableError(f"unbound variable {e.name}")
        return env[e.name]
    if isinstance(e, Sum):
        return expr_words(e.left, k, env) | expr_words(e.right, k, env)
    if isinstance(e, Prod):
        return _concat(expr_words(e.left, k, env), expr_words(e.right, k, env), k)
    if isinstance(e, Nu):
        raise FragmentError("finite-word semantics is defined here for mu-only expressions")
    if isinstance(e, Mu):
        approx: frozenset[str] = frozenset()
        while True:
            env[e.var] = approx
            nxt = expr_words(e.body, k, env)
            if nxt == approx:
                return approx
            approx = nxt
    raise TypeError(e)


def system_words(system: Mapping[str, Expr], start: str, k: int) -> frozenset[str]:
    """Least solution of an equation system, truncated at length k."""
    sol = {x: frozenset() for x in system}
    while True:
        nxt = {x: expr_words(rhs, k, sol) for x, rhs in system.items()}
        if nxt == sol:
            return sol[start]
        sol = nxt


def cfg_words(cfg: CFG, k: int) -> frozenset[str]:
    """Words of length <= k derivable from the start symbol (least fixpoint)."""
    lang = {n: frozenset() for n in cfg.nonterminals}
    changed = True
    while changed:
        changed = False
        for n in cfg.nonterminals:
            acc = set(lang[n])
            for rhs in cfg.productions.get(n, ()):
                words = frozenset(("",))
                for s in rhs:
                    part = lang[s] if s in lang else frozenset((s,))
                    words = _concat(words, part, k)
                    if not words:
                        break
                acc.update(words)
            if len(acc) != len(lang[n]):
                lang[n] = frozenset(acc)
                changed = True
    return lang[cfg.start]


# ---------------------------------------------------------------------------
# Membership for finite words

@dataclass
class _Compiled:
    names: tuple[str, ...]
    index: dict[str, int]
    # per nonterminal: tuple of right-hand sides; a symbol is an int
    # (nonterminal) or a one-character str (terminal)
    rules: tuple[tuple[tuple, ...], ...]
    start: int
    nullable: tuple[bool, ...]
    chart: "_ChartGrammar | None" = None
    suffix_min: tuple | None = None


def _compile(cfg: CFG) -> _Compiled:
    index = {n: i for i, n in enumerate(cfg.nonterminals)}
    rules = tuple(
        tuple(tuple(index.get(s, s) for s in rhs) for rhs in cfg.productions.get(n, ()))
        for n in cfg.nonterminals
    )
    nullable = [False] * len(rules)
    changed = True
    while changed:
        changed = False
        for i, rhss in enumerate(rules):
            if nullable[i]:
                continue
            if any(all(isinstance(s, int) and nullable[s] for s in rhs) for rhs in rhss):
                nullable[i] = True
                changed = True
    return _Compiled(cfg.nonterminals, index, rules, index[cfg.start], tuple(nullable))


def _suffix_min_lengths(g: _Compiled) -> tuple[tuple[tuple[int, ...], ...], ...]:
    """For rule r of n, entry [n][r][pos]: shortest yield of rhs[pos:]."""
    inf = float("inf")
    ml = [inf] * len(g.rules)
    changed = True
    while changed:
        changed = False
        for n, rhss in enumerate(g.rules):
            for rhs in rhss:
                v = sum(1 if isinstance(s, str) else ml[s] for s in rhs)
                if v < ml[n]:
                    ml[n] = v
                    changed = True
    out = []
    for rhss in g.rules:
        per = []
        for rhs in rhss:
            acc = [0] * (len(rhs) + 1)
            for pos in range(len(rhs) - 1, -1, -1):
                s = rhs[pos]
                acc[pos] = acc[pos + 1] + (1 if isinstance(s, str) else ml[s])
            per.append(tuple(acc))
        out.append(tuple(per))
    return tuple(out)


def _member_topdown(g: _Compiled, w: str) -> bool:
    """Memoised recursive descent, enumerating split points of each right-hand side."""
    if g.suffix_min is None:
        g.suffix_min = _suffix_min_lengths(g)
    suffix_min = g.suffix_min
    memo: dict[tuple, bool] = {}
    seq_memo: dict[tuple, bool] = {}
    active: set[tuple] = set()

    def sym(s, i, j) -> bool:
        if isinstance(s, str):
            return j == i + 1 and w[i] == s
        return nt(s, i, j)

    def seq(n, r, pos, i, j) -> bool:
        rhs = g.rules[n][r]
        if pos == len(rhs):
            return i == j
        if j - i < suffix_min[n][r][pos]:
            return False
        s = rhs[pos]
        if pos == len(rhs) - 1:
            return sym(s, i, j)
        key = (n, r, pos, i, j)
        if key in seq_memo:
            return seq_memo[key]
        rest = suffix_min[n][r][pos + 1]
        res = False
        # empty pieces are settled by nullability first so that the only
        # same-span recursion left is the one guardedness rules out
        for k in range(i, j - rest + 1):
            if k == i:
                if isinstance(s, int) and g.nullable[s] and seq(n, r, pos + 1, i, j):
                    res = True
                    break
            elif k == j:
                if rest == 0 and all(isinstance(t, int) and g.nullable[t] for t in rhs[pos + 1:]) \
                        and sym(s, i, j):
                    res = True
                    break
            elif sym(s, i, k) and seq(n, r, pos + 1, k, j):
                res = True
                break
        seq_memo[key] = res
        return res

    def nt(n, i, j) -> bool:
        if i == j:
            return g.nullable[n]
        key = (n, i, j)
        if key in memo:
            return memo[key]
        if key in active:
            raise NotGuardedError("left recursion on a fixed span: grammar is not guarded")
        active.add(key)
        res = any(seq(n, r, 0, i, j) for r in range(len(g.rules[n])))
        active.discard(key)
        memo[key] = res
        return res

    return nt(g.start, 0, len(w))


def _binarise(g: _Compiled) -> tuple[list[tuple[tuple, ...]], int]:
    rules = [list(r) for r in g.rules]
    out: list[list[tuple]] = [[] for _ in rules]
    for n, rhss in enumerate(rules):
        for rhs in rhss:
            while len(rhs) > 2:
                out.append([rhs[1:]])
                rhs = (rhs[0], len(out) - 1)
            out[n].append(tuple(rhs))
    # helper nonterminals appended above may themselves be long
    i = len(rules)
    while i < len(out):
        fixed = []
        for rhs in out[i]:
            while len(rhs) > 2:
                out.append([rhs[1:]])
                rhs = (rhs[0], len(out) - 1)
            fixed.append(tuple(rhs))
        out[i] = fixed
        i += 1
    return [tuple(r) for r in out], len(out)


@dataclass
class _ChartGrammar:
    binary: list[tuple[int, object, object]]   # A -> X Y, both parts non-empty
    parents: dict[object, list[int]]            # X -> every A with A =>* X by a unit or nullable step


def _chart_grammar(g: _Compiled) -> _ChartGrammar:
    rules, count = _binarise(g)
    nullable = list(g.nullable) + [False] * (count - len(g.nullable))
    changed = True
    while changed:
        changed = False
        for a in range(len(g.nullable), count):
            if not nullable[a] and any(all(isinstance(x, int) and nullable[x] for x in rhs) for rhs in rules[a]):
                nullable[a] = changed = True
    null = lambda x: isinstance(x, int) and nullable[x]
    binary = []
    parents: dict[object, list[int]] = {}
    for a, rhss in enumerate(rules):
        for rhs in rhss:
            if len(rhs) == 1:
                parents.setdefault(rhs[0], []).append(a)
            elif len(rhs) == 2:
                binary.append((a, rhs[0], rhs[1]))
                if null(rhs[0]):
                    parents.setdefault(rhs[1], []).append(a)
                if null(rhs[1]):
                    parents.setdefault(rhs[0], []).append(a)
    return _ChartGrammar(binary, parents)


def _member_chart(g: _Compiled, w: str) -> bool:
    """CYK-style chart parsing over spans of increasing length.

    Each cell holds the nonterminals deriving that non-empty span; splits
    with an empty side are folded into the unit closure.
    """
    if not w:
        return g.nullable[g.start]
    cg = g.chart
    if cg is None:
        cg = g.chart = _chart_grammar(g)
    n = len(w)
    chart: dict[tuple[int, int], set] = {}

    def close(cell: set) -> None:
        todo = list(cell)
        while todo:
            x = todo.pop()
            for a in cg.parents.get(x, ()):
                if a not in cell:
                    cell.add(a)
                    todo.append(a)

    for length in range(1, n + 1):
        for i in range(n - length + 1):
            j = i + length
            cell: set = {w[i]} if length == 1 else set()
            for k in range(i + 1, j):
                left, right = chart[(i, k)], chart[(k, j)]
                if left and right:
                    for a, x, y in cg.binary:
                        if x in left and y in right:
                            cell.add(a)
            close(cell)
            chart[(i, j)] = cell
    return g.start in chart[(0, n)]


def _cedent_expr(cedent: Sequence[Expr] | Expr) -> Expr:
    if isinstance(cedent, Expr):
        return cedent
    return product(tuple(cedent))


@lru_cache(maxsize=512)
def _compiled_for(e: Expr) -> _Compiled:
    return _compile(to_canonical_cfg(e))


def member_topdown(w: str, cedent: Sequence[Expr] | Expr) -> bool:
    """Membership by memoised top-down split search over the canonical grammar."""
    return _member_topdown(_compiled_for(_cedent_expr(cedent)), w)


def member_chart(w: str, cedent: Sequence[Expr] | Expr) -> bool:
    """Membership by a bottom-up chart parser over the binarised grammar."""
    return _member_chart(_compiled_for(_cedent_expr(cedent)), w)


def member_finite(w: str, cedent: Sequence[Expr] | Expr, cross_check: bool = True) -> bool:
    """Decide ``w in L(cedent)`` for closed guarded mu-only expressions.

    Both parsers run unless ``cross_check`` is false; disagreement raises.
    """
    e = _cedent_expr(cedent)
    g = _compiled_for(e)
    first = _member_topdown(g, w)
    if cross_check:
        second = _member_chart(g, w)
        if first != second:
            raise AssertionError(f"membership back-ends disagree on {w!r} in {to_text(e)}")
    return first


def enumerate_words(cedent: Sequence[Expr] | Expr, max_len: int) -> frozenset[str]:
    e = _cedent_expr(cedent)
    return _enumerate_cached(e, max_len)


@lru_cache(maxsize=4096)
def _enumerate_cached(e: Expr, max_len: int) -> frozenset[str]:
    return cfg_words(to_canonical_cfg(e), max_len)


# ---------------------------------------------------------------------------
# Muller acceptance of lasso words

@dataclass(frozen=True)
class LassoBounds:
    """Caps for lasso searches; exceeding one yields an unknown verdict."""

    max_nodes: int = 200_000


@dataclass
class LassoResult:
    verdict: Verdict
    # summary-graph witness: spine nodes (name, position) of stem and loop
    stem: list = field(default_factory=list)
    loop: list = field(default_factory=list)


def _muller_summary(g: MullerCFG, w: LassoWord, bounds: LassoBounds):
    cfg = g.underlying
    P = w.n_positions
    nts = cfg.nonterminals
    if len(nts) * P > bounds.max_nodes:
        raise BoundExceeded("summary graph exceeds node cap")

    # fin[(N, i)] = {(j, consumed)}: N derives a finite factor from i to j
    fin: dict[tuple[str, int], set[tuple[int, bool]]] = {(n, i): set() for n in nts for i in range(P)}

    def step(s, i, table):
        if s in cfg.productions:
            return table[(s, i)]
        return {(w.succ(i), True)} if w.letter(i) == s else set()

    def run(symbols, i, table):
        cur = {(i, False)}
        for s in symbols:
            nxt = set()
            for j, c in cur:
                for k, c2 in step(s, j, table):
                    nxt.add((k, c or c2))
            cur = nxt
            if not cur:
                break
        return cur

    changed = True
    while changed:
        changed = False
        for n in nts:
            for i in range(P):
                acc = fin[(n, i)]
                before = len(acc)
                for rhs in cfg.productions.get(n, ()):
                    acc |= run(rhs, i, fin)
                if len(acc) != before:
                    changed = True

    # spine edges: the m-th symbol is never completed, earlier ones are
    edges: dict[tuple[str, int], set[tuple[tuple[str, int], bool]]] = {}
    for n in nts:
        for i in range(P):
            out = set()
            for rhs in cfg.productions.get(n, ()):
                for m, s in enumerate(rhs):
                    if s not in cfg.productions:
                        continue
                    for j, c in run(rhs[:m], i, fin):
                        out.add(((s, j), c))
            edges[(n, i)] = out
    return edges


def _sccs(nodes, succ):
    """Tarjan's algorithm, iterative; returns a list of node lists."""
    index, low, on, stack, out = {}, {}, set(), [], []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for u in it:
                if u not in index:
                    index[u] = low[u] = counter
                    counter += 1
                    stack.append(u)
                    on.add(u)
                    work.append((u, iter(succ(u))))
                    advanced = True
                    break
                if u in on:
                    low[v] = min(low[v], index[u])
            if advanced:
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    u = stack.pop()
                    on.discard(u)
                    comp.append(u)
                    if u == v:
                        break
                out.append(comp)
    return out


def _reachable(start, succ):
    seen = {start}
    order = [start]
    for v in order:
        for u in succ(v):
            if u not in seen:
                seen.add(u)
                order.append(u)
    return order


def find_good_cycle(start, succ, edge_consumes, allowed, is_anchor):
    """Find stem/loop through an anchor node inside the ``allowed`` subgraph.

    The loop must contain a consuming edge.  Returns ``(stem, loop)`` as node
    lists (loop starts and ends at the same node) or ``None``.
    """
    reach = _reachable(start, succ)
    sub = [v for v in reach if allowed(v)]
    subset = set(sub)

    def sub_succ(v):
        return [u for u in succ(v) if u in subset]

    for comp in _sccs(sub, sub_succ):
        cset = set(comp)
        anchors = [v for v in comp if is_anchor(v)]
        if not anchors:
            continue
        consuming = [(v, u) for v in comp for u in sub_succ(v) if u in cset and edge_consumes(v, u)]
        if not consuming:
            continue
        anchor = min(anchors, key=repr)
        v0, u0 = min(consuming, key=repr)
        inner = lambda v: [u for u in sub_succ(v) if u in cset]  # noqa: E731
        loop = _path(anchor, v0, inner) + _path(u0, anchor, inner)
        stem = _path(start, anchor, succ)
        return stem, loop
    return None


def _path(src, dst, succ):
    prev = {src: None}
    queue = [src]
    for v in queue:
        if v == dst:
            break
        for u in succ(v):
            if u not in prev:
                prev[u] = v
                queue.append(u)
    if dst not in prev:
        raise AssertionError("no path between nodes of one component")
    out = [dst]
    while out[-1] != src:
        out.append(prev[out[-1]])
    return out[::-1]


def accepts_lasso(g: MullerCFG, w: LassoWord, bounds: LassoBounds | None = None) -> LassoResult:
    """Does some accepting leftmost derivation of ``g`` converge to ``w``?

    An infinite leftmost derivation has a spine: the leftmost symbol that is
    never completed.  Symbols to its right are never rewritten, so the set of
    productions used infinitely often is decided on the spine alone.  Spine
    steps over completed factors are summarised by a least fixpoint, leaving
    a finite graph on (nonterminal, lasso position) pairs.
    """
    if not isinstance(w, LassoWord):
        raise TypeError("accepts_lasso expects a LassoWord")
    bounds = bounds or LassoBounds()
    try:
        edges = _muller_summary(g, w, bounds)
    except BoundExceeded:
        return LassoResult(Verdict.UNKNOWN)
    labels = g.underlying.labels
    start = (g.underlying.start, 0)

    def succ(v):
        return sorted({u for u, _ in edges[v]})

    def consumes(v, u):
        return any(x == u and c for x, c in edges[v])

    candidates = sorted({labels[n] for n in g.marked if isinstance(labels[n], Nu)}, key=dependency_key)
    for phi in candidates:
        kphi = dependency_key(phi)

        def allowed(v, kphi=kphi):
            return v[0] in g.marked and dependency_key(labels[v[0]]) <= kphi

        def anchor(v, phi=phi):
            return v[0] in g.marked and labels[v[0]] == phi

        found = find_good_cycle(start, succ, consumes, allowed, anchor)
        if found is not None:
            stem, loop = found
            return LassoResult(Verdict.YES, stem, loop)
    return LassoResult(Verdict.NO)
