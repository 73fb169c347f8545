"""Bounded bottom-up proof search with countermodel extraction.

Two strategies:

``mu``
    for mu-only sequents.  A bounded validity check runs first and returns
    the shortest counterexample when there is one.  Otherwise the search
    decomposes the left-hand side, consumes letters at either end with
    ``k-l``/``k-r`` after expanding the right-hand cedents, and finishes
    letter-only sequents with membership proofs.  Sequents that repeat an
    ancestor are folded into back-edges when the loop contains ``μ-l``.

``munu``
    the Prover strategy for leftmost proofs: leftmost logical steps while
    possible, then ``init`` or ``k-l``.  The graph is closed under repeated
    sequents and the progress check decides whether it is a proof; a
    deadlock or a non-progressing branch yields a countermodel, which is
    accepted only after the puzzle certifies it.
"""

from __future__ import annotations

import sys
from contextlib import contextmanager
from dataclasses import dataclass, field

from .errors import BoundExceeded, FragmentError, MuhkaError, NotGuardedError
from .expr import Expr, Fix, Lit, Mu, Nu, One, Prod, Sum, Zero, classify, product, to_text
from .grammar import LassoWord, Verdict, member_finite
from .preproof import Child, Preproof, ProofNode, check_progress_mu, check_progress_munu
from .puzzle import evaluate_finite, evaluate_lasso, finite_play
from .sequent import Hypersequent, RuleInstance, apply_rule, seq_valid_upto

__all__ = [
    "SearchBounds", "Proof", "Countermodel", "Unknown", "search", "saturate_left",
    "membership_proof",
]


@dataclass(frozen=True)
class SearchBounds:
    depth: int = 2000      # node budget
    branch: int = 300      # longest branch explored before giving up
    word_len: int = 10     # bound for finite-word validity checks
    lasso: int = 8         # longest lasso loop offered as a countermodel
    cedent_bound: int = 32


@dataclass
class Proof:
    proof: Preproof
    mode: str

    def to_json(self):
        return {"outcome": "proof", "mode": self.mode, "proof": self.proof.to_json()}


@dataclass
class Countermodel:
    witness: str | LassoWord
    mode: str

    @property
    def kind(self) -> str:
        return "lasso" if isinstance(self.witness, LassoWord) else "finite"

    def to_json(self):
        return {"outcome": "countermodel", "mode": self.mode, "kind": self.kind, "witness": str(self.witness)}


@dataclass
class Unknown:
    reason: str
    mode: str

    def to_json(self):
        return {"outcome": "unknown", "mode": self.mode, "reason": self.reason}


_RIGHT_RULE = {Zero: "0-r", One: "1-r", Prod: "·-r", Sum: "+-r", Mu: "μ-r", Nu: "ν-r"}
_LEFT_RULE = {Zero: "0-l", One: "1-l", Prod: "·-l", Sum: "+-l", Mu: "μ-l", Nu: "ν-l"}


class _OutOfBudget(Exception):
    pass


class _BranchTooLong(Exception):
    pass


@contextmanager
def _stack_for(bounds: SearchBounds):
    # every branch entry costs a few interpreter frames
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 4 * bounds.branch + 2000))
    try:
        yield
    finally:
        sys.setrecursionlimit(old)


class _Deadlock(Exception):
    def __init__(self, word: str):
        super().__init__(word)
        self.word = word


class _Builder:
    """Node table with sequential ids and rollback."""

    def __init__(self, budget: int, prefix: str = "n"):
        self.nodes: dict[str, ProofNode] = {}
        self.order: list[str] = []
        self.budget = budget
        self.prefix = prefix

    def add(self, step: RuleInstance) -> str:
        if len(self.order) >= self.budget:
            raise _OutOfBudget()
        nid = f"{self.prefix}{len(self.order)}"
        self.nodes[nid] = ProofNode(step.conclusion, step.rule, step.principal, [], step)
        self.order.append(nid)
        return nid

    def add_open(self, seq: Hypersequent) -> str:
        if len(self.order) >= self.budget:
            raise _OutOfBudget()
        nid = f"{self.prefix}{len(self.order)}"
        self.nodes[nid] = ProofNode(seq, "open")
        self.order.append(nid)
        return nid

    def checkpoint(self) -> int:
        return len(self.order)

    def rollback(self, cp: int) -> None:
        for nid in self.order[cp:]:
            del self.nodes[nid]
        del self.order[cp:]

    def chain(self, steps: list[RuleInstance]) -> tuple[str | None, str | None]:
        """Add unary steps as a path; returns (first id, last id)."""
        first = last = None
        for st in steps:
            nid = self.add(st)
            if last is not None:
                self.nodes[last].children.append(Child(nid))
            first = first or nid
            last = nid
        return first, last

    def preproof(self, root: str) -> Preproof:
        return Preproof(root, dict(self.nodes))


# ---------------------------------------------------------------------------
# Membership proofs

def _membership_steps(word: str, seq: Hypersequent, cedent_bound: int) -> list[RuleInstance]:
    """Steps proving ``word |- S`` (left-hand side all letters) from a winning play."""
    steps: list[RuleInstance] = []
    target = None
    for ced in seq.rhs:
        if evaluate_finite(word, ced, cedent_bound):
            target = ced
            break
    if target is None:
        raise MuhkaError(f"{word!r} is not in the language of the right-hand side")
    seq = _weaken_all_but(seq, target, steps)
    play = finite_play(word, target, cedent_bound)
    for p, q in zip(play.positions, play.positions[1:]):
        head = p.cedent[0]
        if isinstance(head, Lit):
            st = apply_rule(seq, "k-l")
        elif isinstance(head, Sum):
            st = apply_rule(seq, "+-r", (0, 0))
            steps.append(st)
            seq = _weaken_all_but(st.premisses[0], q.cedent, steps)
            continue
        else:
            st = apply_rule(seq, _RIGHT_RULE[type(head)], (0, 0))
        steps.append(st)
        seq = st.premisses[0]
    steps.append(apply_rule(seq, "init"))
    return steps


def _weaken_all_but(seq: Hypersequent, keep, steps: list[RuleInstance]) -> Hypersequent:
    keep = tuple(keep)
    while len(seq.rhs) > 1 or (seq.rhs and seq.rhs[0] != keep):
        c = next(i for i, ced in enumerate(seq.rhs) if ced != keep)
        st = apply_rule(seq, "w-r", c)
        steps.append(st)
        seq = st.premisses[0]
    return seq


def membership_proof(letters: str, rhs, cedent_bound: int = 32) -> Preproof:
    """Finite proof of ``a1, ..., an |- S`` for a word of L(S)."""
    if isinstance(rhs, Hypersequent):
        seq = rhs
    else:
        seq = Hypersequent.make(tuple(Lit(a) for a in letters), rhs)
    if "".join(e.symbol for e in seq.lhs if isinstance(e, Lit)) != letters or len(seq.lhs) != len(letters):
        raise MuhkaError("membership proofs need a left-hand side of letters")
    b = _Builder(10 ** 6, "m")
    first, _ = b.chain(_membership_steps(letters, seq, cedent_bound))
    return b.preproof(first)


# ---------------------------------------------------------------------------
# Left saturation

def saturate_left(s: Hypersequent, budget: int = 2000) -> Preproof:
    """Decompose the left-hand side down to letters; leaves stay open.

    Repeated sequents are folded into back-edges when the loop contains μ-l.
    """
    b = _Builder(budget, "s")

    def go(seq, path):
        for idx, (nid, s2, _) in enumerate(path):
            if s2 == seq and any(m for _, _, m in path[idx:]):
                return Child(nid, True)
        i = next((i for i, e in enumerate(seq.lhs) if not isinstance(e, Lit)), None)
        if i is None:
            return Child(b.add_open(seq))
        st = apply_rule(seq, _LEFT_RULE[type(seq.lhs[i])], i)
        nid = b.add(st)
        for prem in st.premisses:
            b.nodes[nid].children.append(go(prem, path + [(nid, seq, st.rule == "μ-l")]))
        return Child(nid)

    root = go(s, [])
    return b.preproof(root.target)


# ---------------------------------------------------------------------------
# mu mode

def _expand(seq: Hypersequent, letter: str, at: int, limit: int = 400):
    """Right rules and weakenings until every cedent starts (at=0) or ends
    (at=-1) with ``letter``.  A μ-formula is not unfolded twice in the same
    position of one cedent, which cuts left (resp. right) recursion.
    """
    steps: list[RuleInstance] = []
    hist = [frozenset() for _ in seq.rhs]
    while True:
        target = None
        for c, ced in enumerate(seq.rhs):
            if not (ced and isinstance(ced[at], Lit) and ced[at].symbol == letter):
                target = c
                break
        if target is None:
            return steps, seq
        if len(steps) >= limit:
            return None
        ced = seq.rhs[target]
        head = ced[at] if ced else None
        if head is None or isinstance(head, Lit) or (isinstance(head, Mu) and head in hist[target]):
            st = apply_rule(seq, "w-r", target)
            grow = None
        else:
            st = apply_rule(seq, _RIGHT_RULE[type(head)], (target, len(ced) - 1 if at == -1 else 0))
            grow = head if isinstance(head, Mu) else None
        prem = st.premisses[0]
        new_hist = []
        for c2, ced2 in enumerate(prem.rhs):
            h = frozenset()
            for i in range(len(ced2)):
                for anc in st.ancestry[0][("R", c2, i)]:
                    h |= hist[anc[1]]
                    if anc[1] == target and grow is not None:
                        h |= {grow}
            new_hist.append(h)
        hist = new_hist
        steps.append(st)
        seq = prem


def _has_binder(e: Expr) -> bool:
    return isinstance(e, Fix) or any(_has_binder(c) for c in e.children())


class _MuSearch:
    def __init__(self, bounds: SearchBounds):
        self.bounds = bounds
        self.b = _Builder(bounds.depth)
        self.valid_cache: dict[Hypersequent, bool] = {}

    def valid(self, seq: Hypersequent) -> bool:
        if seq not in self.valid_cache:
            self.valid_cache[seq] = seq_valid_upto(seq, self.bounds.word_len).valid
        return self.valid_cache[seq]

    def prove(self, seq: Hypersequent, path) -> Child | None:
        if len(path) > self.bounds.branch:
            raise _BranchTooLong
        for idx, (nid, s2, _) in enumerate(path):
            if s2 == seq and any(m for _, _, m in path[idx:]):
                return Child(nid, True)
        cp = self.b.checkpoint()
        for strategy in (self.zero, self.letters, self.modal_left, self.modal_right, self.left_logical):
            try:
                res = strategy(seq, path)
            except MuhkaError:
                res = None
            if res is not None:
                return res
            self.b.rollback(cp)
        return None

    def zero(self, seq, path):
        i = next((i for i, e in enumerate(seq.lhs) if isinstance(e, Zero)), None)
        if i is None:
            return None
        return Child(self.b.add(apply_rule(seq, "0-l", i)))

    def letters(self, seq, path):
        if not all(isinstance(e, Lit) for e in seq.lhs):
            return None
        word = "".join(e.symbol for e in seq.lhs)
        if not any(member_finite(word, ced) for ced in seq.rhs):
            return None
        first, _ = self.b.chain(_membership_steps(word, seq, self.bounds.cedent_bound))
        return Child(first)

    def _modal(self, seq, path, at, rule):
        head = seq.lhs[at] if seq.lhs else None
        if not isinstance(head, Lit):
            return None
        res = _expand(seq, head.symbol, at)
        if res is None:
            return None
        steps, last = res
        k = apply_rule(last, rule)
        if not self.valid(k.premisses[0]):
            return None
        steps.append(k)
        return self._commit_chain(steps, path)

    def modal_left(self, seq, path):
        return self._modal(seq, path, 0, "k-l")

    def modal_right(self, seq, path):
        return self._modal(seq, path, -1, "k-r")

    def left_logical(self, seq, path):
        # formulas without binders decompose finitely; do them before unfolding
        todo = [i for i, e in enumerate(seq.lhs) if not isinstance(e, Lit)]
        if not todo:
            return None
        i = next((i for i in todo if not _has_binder(seq.lhs[i])), todo[0])
        st = apply_rule(seq, _LEFT_RULE[type(seq.lhs[i])], i)
        nid = self.b.add(st)
        sub = path + [(nid, seq, st.rule == "μ-l")]
        for prem in st.premisses:
            ch = self.prove(prem, sub)
            if ch is None:
                return None
            self.b.nodes[nid].children.append(ch)
        return Child(nid)

    def _commit_chain(self, steps, path):
        first, last = self.b.chain(steps)
        sub = path + [(n, self.b.nodes[n].sequent, False) for n in self.b.order[self.b.order.index(first):]]
        ch = self.prove(steps[-1].premisses[0], sub)
        if ch is None:
            return None
        self.b.nodes[last].children.append(ch)
        return Child(first)


def _search_mu(s: Hypersequent, bounds: SearchBounds):
    for e in s.formulas():
        if not classify(e).guarded:
            raise NotGuardedError(f"unguarded expression {to_text(e)}")
    v = seq_valid_upto(s, bounds.word_len)
    if not v.valid:
        w = v.witness
        if member_finite(w, s.lhs) and not any(member_finite(w, c) for c in s.rhs):
            return Countermodel(w, "mu")
        raise AssertionError("bounded validity produced an uncertified witness")
    srch = _MuSearch(bounds)
    try:
        with _stack_for(bounds):
            root = srch.prove(s, [])
    except _OutOfBudget:
        return Unknown(f"node budget {bounds.depth} exhausted", "mu")
    except _BranchTooLong:
        return Unknown(f"branch length bound {bounds.branch} exceeded", "mu")
    if root is None:
        return Unknown("no proof found within bounds", "mu")
    p = srch.b.preproof(root.target)
    if not check_progress_mu(p):
        return Unknown("constructed preproof does not progress", "mu")
    return Proof(p, "mu")


# ---------------------------------------------------------------------------
# munu mode

class _ProverStrategy:
    def __init__(self, bounds: SearchBounds):
        self.bounds = bounds
        self.b = _Builder(bounds.depth)

    def run(self, seq: Hypersequent, path, word: str) -> Child:
        if len(path) > self.bounds.branch:
            raise _BranchTooLong
        for nid, s2 in path:
            if s2 == seq:
                return Child(nid, True)
        # 1. leftmost logical steps, left-hand side first
        st = None
        if seq.lhs and not isinstance(seq.lhs[0], Lit):
            st = apply_rule(seq, _LEFT_RULE[type(seq.lhs[0])], 0)
        else:
            for c, ced in enumerate(seq.rhs):
                if ced and not isinstance(ced[0], Lit):
                    st = apply_rule(seq, _RIGHT_RULE[type(ced[0])], (c, 0))
                    break
        if st is None:
            # 2. empty left-hand side: close with init or deadlock
            if not seq.lhs:
                if () not in seq.rhs:
                    raise _Deadlock(word)
                steps: list[RuleInstance] = []
                last = _weaken_all_but(seq, (), steps)
                steps.append(apply_rule(last, "init"))
                first, _ = self.b.chain(steps)
                return Child(first)
            # 3. letter at the head: weaken the rest and consume it
            a = seq.lhs[0]
            steps = []
            cur = seq
            while True:
                c = next((c for c, ced in enumerate(cur.rhs) if not ced or ced[0] != a), None)
                if c is None:
                    break
                w = apply_rule(cur, "w-r", c)
                steps.append(w)
                cur = w.premisses[0]
            steps.append(apply_rule(cur, "k-l"))
            first, last = self.b.chain(steps)
            ids = self.b.order[self.b.order.index(first):]
            sub = path + [(n, self.b.nodes[n].sequent) for n in ids]
            ch = self.run(steps[-1].premisses[0], sub, word + a.symbol)
            self.b.nodes[last].children.append(ch)
            return Child(first)
        nid = self.b.add(st)
        sub = path + [(nid, seq)]
        for prem in st.premisses:
            self.b.nodes[nid].children.append(self.run(prem, sub, word))
        return Child(nid)


def _branch_word(p: Preproof, nodes: list[str]) -> str:
    out = []
    for v, u in zip(nodes, nodes[1:]):
        node = p.nodes[v]
        if node.rule == "k-l":
            out.append(node.sequent.lhs[0].symbol)
    return "".join(out)


def _search_munu(s: Hypersequent, bounds: SearchBounds):
    for e in s.formulas():
        if not classify(e).left_guarded:
            raise NotGuardedError(f"expression is not left-guarded: {to_text(e)}")
    strat = _ProverStrategy(bounds)
    try:
        with _stack_for(bounds):
            root = strat.run(s, [], "")
    except _OutOfBudget:
        return Unknown(f"node budget {bounds.depth} exhausted", "munu")
    except _BranchTooLong:
        return Unknown(f"branch length bound {bounds.branch} exceeded", "munu")
    except _Deadlock as dl:
        w = dl.word
        try:
            ok = evaluate_finite(w, s.lhs, bounds.cedent_bound) and not any(
                evaluate_finite(w, c, bounds.cedent_bound) for c in s.rhs)
        except BoundExceeded:
            ok = False
        if ok:
            return Countermodel(w, "munu")
        return Unknown(f"deadlock on {w!r} could not be certified", "munu")
    p = strat.b.preproof(root.target)
    rep = check_progress_munu(p, report=True)
    if rep.ok:
        return Proof(p, "munu")
    u = _branch_word(p, rep.stem)
    v = _branch_word(p, rep.loop)
    if not v or len(v) > bounds.lasso:
        return Unknown("non-progressing branch without a usable lasso", "munu")
    w = LassoWord(u, v)
    left = evaluate_lasso(w, s.lhs).verdict
    right = [evaluate_lasso(w, c).verdict for c in s.rhs]
    if left == Verdict.YES and all(r == Verdict.NO for r in right):
        return Countermodel(w, "munu")
    return Unknown(f"lasso {w} from a non-progressing branch could not be certified", "munu")


def search(s: Hypersequent, bounds: SearchBounds | None = None, mode: str | None = None):
    """Three-valued proof search: Proof, Countermodel or Unknown."""
    bounds = bounds or SearchBounds()
    if mode is None:
        mode = "mu" if s.is_mu_only() else "munu"
    if mode == "mu":
        if not s.is_mu_only():
            raise FragmentError("mu mode needs a mu-only sequent")
        return _search_mu(s, bounds)
    if mode == "munu":
        return _search_munu(s, bounds)
    raise ValueError(f"unknown search mode {mode!r}")
