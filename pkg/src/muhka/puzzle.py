"""The evaluation puzzle: a one-player game deciding word membership.

A position pairs the remaining input with a cedent.  The player only chooses
at sums; every other head formula has at most one move.  A finite play wins
when it reaches the empty word with the empty cedent.  On an omega-word a
play wins when it is infinite and the thread of head formulas is a
nu-thread.

For omega-words given as lassos the search works on a finite summary graph.
Nodes are (formula, input position) pairs for the formula at the head of
the cedent; an edge either steps into the head (sum, unfolding, left factor
of a product) or jumps over a completed left factor to the right factor.
Formulas below the head are never touched again, so a winning infinite play
is a cycle of this graph whose dependency-greatest formula is a nu.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

from .errors import BoundExceeded, NotGuardedError, UnboundVariableError
from .expr import (
    Expr, Fix, Lit, Mu, Nu, One, Prod, Sum, Zero, classify, critical_formula,
    dependency_key, fl_closure, free_vars, to_text, unfold,
)
from .grammar import LassoWord, Verdict, find_good_cycle

__all__ = [
    "Position", "PuzzlePlay", "puzzle_moves", "evaluate_finite", "finite_play",
    "evaluate_lasso", "replay", "min_lengths", "LassoBounds",
]

Cedent = tuple[Expr, ...]


@dataclass(frozen=True)
class Position:
    """``pointer`` indexes the input: a suffix start for finite words, a
    lasso position for omega-words."""

    pointer: int
    cedent: Cedent


@dataclass
class PuzzlePlay:
    word: str | LassoWord
    positions: list[Position]
    loop_start: int | None = None
    # index of the traced occurrence in each loop position
    thread: list[int] = field(default_factory=list)
    critical: Expr | None = None

    def to_json(self) -> dict:
        def word_at(p: Position) -> str:
            if isinstance(self.word, LassoWord):
                return str(self.word.suffix(p.pointer))
            return self.word[p.pointer:]

        doc = {
            "play": [{"word": word_at(p), "cedent": [to_text(e) for e in p.cedent]} for p in self.positions],
        }
        if self.loop_start is not None:
            doc["loop_start"] = self.loop_start
            doc["nu_thread"] = self.thread
            doc["critical"] = to_text(self.critical)
        return doc


def _letter_at(word, i):
    if isinstance(word, LassoWord):
        return word.letter(i), word.succ(i)
    if i < len(word):
        return word[i], i + 1
    return None, i


def puzzle_moves(word: str | LassoWord, pos: Position) -> list[Position]:
    """Successor positions; the list has two entries only at sums."""
    if not pos.cedent:
        return []
    head, rest = pos.cedent[0], pos.cedent[1:]
    i = pos.pointer
    if isinstance(head, Zero):
        return []
    if isinstance(head, One):
        return [Position(i, rest)]
    if isinstance(head, Lit):
        a, j = _letter_at(word, i)
        return [Position(j, rest)] if a == head.symbol else []
    if isinstance(head, Prod):
        return [Position(i, (head.left, head.right) + rest)]
    if isinstance(head, Sum):
        return [Position(i, (head.left,) + rest), Position(i, (head.right,) + rest)]
    if isinstance(head, Fix):
        return [Position(i, (unfold(head),) + rest)]
    raise UnboundVariableError(f"open formula {to_text(head)} in a puzzle position")


def _check_closed(cedent: Sequence[Expr], left: bool) -> None:
    for e in cedent:
        if free_vars(e):
            raise UnboundVariableError(f"closed expression required: {to_text(e)}")
        c = classify(e)
        if not (c.left_guarded if left else c.guarded):
            raise NotGuardedError(f"{'left-' if left else ''}guarded expression required: {to_text(e)}")


def min_lengths(forms) -> dict[Expr, float]:
    """Length of the shortest finite word of each formula (inf if none)."""
    inf = float("inf")
    ml = {f: inf for f in forms}
    changed = True
    while changed:
        changed = False
        for f in forms:
            if isinstance(f, One):
                v = 0
            elif isinstance(f, Zero):
                v = inf
            elif isinstance(f, Lit):
                v = 1
            elif isinstance(f, Sum):
                v = min(ml[f.left], ml[f.right])
            elif isinstance(f, Prod):
                v = ml[f.left] + ml[f.right]
            else:
                v = ml[unfold(f)]
            if v < ml[f]:
                ml[f] = v
                changed = True
    return ml


@lru_cache(maxsize=1024)
def _min_lengths_for(cedent: Cedent) -> dict[Expr, float]:
    return min_lengths(_closure_of(cedent))


def _closure_of(cedent) -> set[Expr]:
    out: set[Expr] = set()
    for e in cedent:
        out |= fl_closure(e)
    return out


def finite_play(w: str, cedent: Sequence[Expr], cedent_bound: int = 32) -> PuzzlePlay | None:
    """A winning play from (w, cedent), or None if there is none.

    Raises BoundExceeded if the search had to cut a cedent longer than
    ``cedent_bound`` and found no winning play.
    """
    cedent = tuple(cedent)
    _check_closed(cedent, left=False)
    ml = _min_lengths_for(cedent)
    n = len(w)
    start = Position(0, cedent)
    parent: dict[Position, Position | None] = {start: None}
    stack = [start]
    cut = False
    while stack:
        p = stack.pop()
        if p.pointer == n and not p.cedent:
            path = [p]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])
            return PuzzlePlay(w, path[::-1])
        for q in reversed(puzzle_moves(w, p)):
            if q in parent:
                continue
            if sum(ml[f] for f in q.cedent) > n - q.pointer:
                continue
            if len(q.cedent) > cedent_bound:
                cut = True
                continue
            parent[q] = p
            stack.append(q)
    if cut:
        raise BoundExceeded(f"cedent bound {cedent_bound} exceeded without a verdict")
    return None


def evaluate_finite(w: str, cedent: Sequence[Expr], cedent_bound: int = 32) -> bool:
    return finite_play(w, cedent, cedent_bound) is not None


# ---------------------------------------------------------------------------
# Lasso words

@dataclass(frozen=True)
class LassoBounds:
    max_nodes: int = 200_000


@dataclass
class LassoVerdict:
    verdict: Verdict
    play: PuzzlePlay | None = None


class _Summary:
    """Completion facts and spine edges for the formulas of a cedent.

    ``fin[(f, i)]`` maps ``(j, consumed)`` to a witness that ``f`` has a
    finite play from input position i to j; witnesses only refer to facts
    derived earlier, so expanding them terminates.
    """

    def __init__(self, w: LassoWord, forms: set[Expr]):
        self.w = w
        self.forms = sorted(forms, key=dependency_key)
        P = w.n_positions
        self.fin: dict[tuple[Expr, int], dict[tuple[int, bool], tuple]] = {
            (f, i): {} for f in self.forms for i in range(P)}
        changed = True
        while changed:
            changed = False
            for f in self.forms:
                for i in range(P):
                    table = self.fin[(f, i)]
                    for end, why in list(self._derive(f, i)):
                        if end not in table:
                            table[end] = why
                            changed = True

    def _derive(self, f, i):
        w = self.w
        if isinstance(f, One):
            yield (i, False), ("one",)
        elif isinstance(f, Lit):
            if w.letter(i) == f.symbol:
                yield (w.succ(i), True), ("lit",)
        elif isinstance(f, Sum):
            for end in list(self.fin[(f.left, i)]):
                yield end, ("sum", 0)
            for end in list(self.fin[(f.right, i)]):
                yield end, ("sum", 1)
        elif isinstance(f, Prod):
            for (j, c1) in list(self.fin[(f.left, i)]):
                for (k, c2) in list(self.fin[(f.right, j)]):
                    yield (k, c1 or c2), ("prod", j, c1, c2)
        elif isinstance(f, Fix):
            for end in list(self.fin[(unfold(f), i)]):
                yield end, ("fix",)

    def spine(self, node):
        """Edges (target, consumed) out of a head node."""
        f, i = node
        if isinstance(f, Sum):
            return [((f.left, i), False), ((f.right, i), False)]
        if isinstance(f, Fix):
            return [((unfold(f), i), False)]
        if isinstance(f, Prod):
            out = [((f.left, i), False)]
            out += [((f.right, j), c) for (j, c) in sorted(self.fin[(f.left, i)], key=repr)]
            return out
        return []

    def complete(self, f, i, end, tail) -> list[Position]:
        """Positions after (i, [f, *tail]) of a finite play ending in (j, tail)."""
        why = self.fin[(f, i)][end]
        kind = why[0]
        if kind in ("one", "lit"):
            return [Position(end[0], tail)]
        if kind == "sum":
            g = f.right if why[1] else f.left
            return [Position(i, (g,) + tail)] + self.complete(g, i, end, tail)
        if kind == "fix":
            g = unfold(f)
            return [Position(i, (g,) + tail)] + self.complete(g, i, end, tail)
        j, c1, c2 = why[1:]
        return ([Position(i, (f.left, f.right) + tail)]
                + self.complete(f.left, i, (j, c1), (f.right,) + tail)
                + self.complete(f.right, j, (end[0], c2), tail))


def evaluate_lasso(w: LassoWord, cedent: Sequence[Expr], bounds: LassoBounds | None = None) -> LassoVerdict:
    """Is there a winning infinite play on ``w`` from ``cedent``?

    Yes answers carry a replayable play (see ``replay``).
    """
    if not isinstance(w, LassoWord):
        raise TypeError("evaluate_lasso expects a LassoWord")
    bounds = bounds or LassoBounds()
    cedent = tuple(cedent)
    _check_closed(cedent, left=True)
    forms = _closure_of(cedent)
    if len(forms) * w.n_positions > bounds.max_nodes:
        return LassoVerdict(Verdict.UNKNOWN)
    summ = _Summary(w, forms)

    # layers[k]: (pointer, consumed) after completing cedent[:k], with parents
    layers: list[dict] = [{(0, False): None}]
    for e in cedent:
        nxt: dict = {}
        for (j, c) in sorted(layers[-1], key=repr):
            for (j2, c2) in sorted(summ.fin[(e, j)], key=repr):
                nxt.setdefault((j2, c or c2), ((j, c), (j2, c2)))
        layers.append(nxt)
    entry_of: dict = {}
    for k, e in enumerate(cedent):
        for key in sorted(layers[k], key=repr):
            entry_of.setdefault((e, key[0]), (k, key))

    START = ("start", -1)

    def succ(v):
        if v == START:
            return sorted(entry_of, key=repr)
        return sorted({t for t, _ in summ.spine(v)}, key=repr)

    def consumes(v, u):
        return v != START and any(t == u and c for t, c in summ.spine(v))

    for phi in (f for f in summ.forms if isinstance(f, Nu)):
        kphi = dependency_key(phi)

        def allowed(v, kphi=kphi):
            return v == START or dependency_key(v[0]) <= kphi

        def anchor(v, phi=phi):
            return v != START and v[0] == phi

        found = find_good_cycle(START, succ, consumes, allowed, anchor)
        if found is not None:
            stem, loop = found
            return LassoVerdict(Verdict.YES, _materialise(summ, w, cedent, layers, entry_of, stem, loop))
    return LassoVerdict(Verdict.NO)


def _materialise(summ, w, cedent, layers, entry_of, stem, loop) -> PuzzlePlay:
    """Concrete positions for a summary stem and loop, with the thread."""
    k, key = entry_of[stem[1]]
    ends = []
    for layer in range(k, 0, -1):
        prev, end = layers[layer][key]
        ends.append(end)
        key = prev
    ends.reverse()
    positions = [Position(0, cedent)]
    for idx in range(k):
        positions += summ.complete(cedent[idx], positions[-1].pointer, ends[idx], cedent[idx + 1:])
    threads: list[int] = [0]

    def walk(path):
        for v, u in zip(path, path[1:]):
            f, i = v
            cur = positions[-1]
            rest = cur.cedent[1:]
            if isinstance(f, (Sum, Fix)):
                positions.append(Position(i, (u[0],) + rest))
                threads.append(0)
            elif isinstance(f, Prod):
                positions.append(Position(i, (f.left, f.right) + rest))
                if u == (f.left, i):
                    threads.append(0)
                    continue
                threads.append(1)
                # prefer a completion that consumes input
                end = max((e for e in summ.fin[(f.left, i)] if e[0] == u[1]), key=lambda e: e[1])
                done = summ.complete(f.left, i, end, (f.right,) + rest)
                for p in done:
                    positions.append(p)
                    threads.append(len(p.cedent) - len(rest) - 1)
            else:
                raise AssertionError("spine edge from a formula without one")

    walk(stem[1:])
    loop_start = len(positions) - 1
    walk(loop)
    thread = threads[loop_start:]
    principal = [positions[n].cedent[0] for n in range(loop_start, len(positions) - 1) if threads[n] == 0]
    return PuzzlePlay(w, positions, loop_start, thread, critical_formula(principal))


def replay(play: PuzzlePlay, word: str | LassoWord, cedent: Sequence[Expr]) -> bool:
    """Re-check a certificate move by move against ``puzzle_moves``."""
    pos = play.positions
    if not pos or pos[0] != Position(0, tuple(cedent)):
        return False
    for p, q in zip(pos, pos[1:]):
        if q not in puzzle_moves(word, p):
            return False
    if play.loop_start is None:
        return not isinstance(word, LassoWord) and pos[-1] == Position(len(word), ())
    if not isinstance(word, LassoWord):
        return False
    st, last = pos[play.loop_start], pos[-1]
    frame = st.cedent[1:]
    if last.pointer != st.pointer or not last.cedent or last.cedent[0] != st.cedent[0]:
        return False
    if frame and last.cedent[-len(frame):] != frame:
        return False
    loop = pos[play.loop_start:]
    if len(play.thread) != len(loop) or play.thread[0] != 0 or play.thread[-1] != 0:
        return False
    consumed = False
    principal = []
    for n, (p, q) in enumerate(zip(loop, loop[1:])):
        t, t2 = play.thread[n], play.thread[n + 1]
        if isinstance(p.cedent[0], Lit):
            consumed = True
        if t == 0:
            head = p.cedent[0]
            principal.append(head)
            allowed = {0, 1} if isinstance(head, Prod) else {0} if isinstance(head, (Sum, Fix)) else set()
            if t2 not in allowed:
                return False
        elif t2 != t + len(q.cedent) - len(p.cedent):
            return False
    return consumed and isinstance(critical_formula(principal), Nu)
