"""Cyclic preproofs as finite graphs, and their correctness checks.

A proof file is a JSON document::

    {"root": "n0",
     "nodes": {"n0": {"sequent": "...", "rule": "μ-l", "principal": {"lhs": 0},
                      "children": ["n1", {"backedge": "n0", "shift": ["a"]}]}}}

A child is either a node id (a tree edge) or a back-edge.  A back-edge may
carry a ``shift``: a list of letters prefixed to every right-hand cedent of
the target, which lets a finite graph describe the non-regular proofs that
arise when right-hand material accumulates in front of a loop.  Everything
reachable from a shifted target must survive the prefixing, so ``init`` and
``k-l`` are banned there.

The rule ``open`` marks an unfinished leaf; such graphs are well-formed but
are not proofs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import ExprSyntaxError, FragmentError, MuhkaError, ProofFormatError, RuleError
from .expr import Lit, Mu, Nu, Fix, critical_formula, dependency_key, parse_cedent_items, to_text
from .sequent import (
    LOGICAL_RULES, Hypersequent, RuleInstance, apply_rule, canonical_rule_name,
    is_leftmost, parse_sequent,
)

__all__ = [
    "Child", "ProofNode", "Preproof", "check_wellformed", "check_progress_mu",
    "check_progress_munu", "is_leftmost_proof", "ProgressReport", "shift_sequent",
]

OPEN = "open"


@dataclass(frozen=True)
class Child:
    target: str
    backedge: bool = False
    shift: tuple[str, ...] = ()

    def to_json(self):
        if not self.backedge:
            return self.target
        doc = {"backedge": self.target}
        if self.shift:
            doc["shift"] = list(self.shift)
        return doc

    @classmethod
    def from_json(cls, doc) -> "Child":
        if isinstance(doc, str):
            return cls(doc)
        if isinstance(doc, Mapping) and "backedge" in doc:
            shift = tuple(doc.get("shift", ()))
            if any(not isinstance(a, str) or len(a) != 1 for a in shift):
                raise ProofFormatError(f"shift must be a list of letters, got {shift!r}")
            return cls(doc["backedge"], True, shift)
        raise ProofFormatError(f"malformed child {doc!r}")


@dataclass
class ProofNode:
    sequent: Hypersequent
    rule: str
    principal: tuple | None = None
    children: list[Child] = field(default_factory=list)
    _step: RuleInstance | None = field(default=None, repr=False, compare=False)

    def step(self) -> RuleInstance | None:
        """The rule instance, rebuilt from sequent, rule and principal."""
        if self.rule == OPEN:
            return None
        if self._step is None:
            self._step = apply_rule(self.sequent, self.rule, self.principal)
        return self._step


def shift_sequent(s: Hypersequent, letters: Iterable[str]) -> Hypersequent:
    pre = tuple(Lit(a) for a in letters)
    return Hypersequent.make(s.lhs, [pre + c for c in s.rhs])


def _principal_to_json(node: ProofNode):
    p = node.principal
    if node.rule in ("init", OPEN) or p is None:
        return None
    if p[0] == "L":
        return {"lhs": p[1]}
    if p[0] == "R":
        return {"rhs": [p[1], p[2]]}
    return {"cedent": p[1]}


def _principal_from_json(rule: str, doc, seq: Hypersequent):
    if doc is None:
        if rule in ("k-l", "k-r"):
            return ("L", 0) if rule == "k-l" else ("L", len(seq.lhs) - 1)
        return None
    if not isinstance(doc, Mapping) or len(doc) != 1:
        raise ProofFormatError(f"malformed principal {doc!r}")
    (key, val), = doc.items()
    if key == "lhs" and isinstance(val, int):
        return ("L", val)
    if key == "rhs" and isinstance(val, list) and len(val) == 2:
        return ("R", int(val[0]), int(val[1]))
    if key == "cedent" and isinstance(val, int):
        return ("C", val)
    raise ProofFormatError(f"malformed principal {doc!r}")


class Preproof:
    """A rooted graph of proof nodes; ids are strings."""

    def __init__(self, root: str, nodes: dict[str, ProofNode]):
        self.root = root
        self.nodes = nodes

    # -- construction helpers -------------------------------------------------
    @property
    def root_sequent(self) -> Hypersequent:
        return self.nodes[self.root].sequent

    def edges(self):
        for nid, node in self.nodes.items():
            for k, ch in enumerate(node.children):
                yield nid, k, ch

    def successors(self, nid: str) -> list[str]:
        return [c.target for c in self.nodes[nid].children]

    def reachable(self) -> list[str]:
        order, seen = [self.root], {self.root}
        for v in order:
            for u in self.successors(v):
                if u in self.nodes and u not in seen:
                    seen.add(u)
                    order.append(u)
        return order

    def has_backedges(self) -> bool:
        return any(ch.backedge for _, _, ch in self.edges())

    def open_leaves(self) -> list[str]:
        return sorted(n for n, node in self.nodes.items() if node.rule == OPEN)

    def rules_used(self) -> set[str]:
        return {node.rule for node in self.nodes.values()}

    def is_mu_only(self) -> bool:
        return all(node.sequent.is_mu_only() for node in self.nodes.values())

    # -- serialisation --------------------------------------------------------
    def to_json(self) -> dict:
        nodes = {}
        for nid, node in self.nodes.items():
            doc = {
                "sequent": node.sequent.text(),
                "rule": node.rule,
                "principal": _principal_to_json(node),
                "children": [c.to_json() for c in node.children],
            }
            if node.rule == "w-r":
                ced = node.sequent.rhs[node.principal[1]]
                doc["weakened"] = "[" + ", ".join(to_text(e) for e in ced) + "]"
            nodes[nid] = doc
        return {"root": self.root, "nodes": nodes}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, ensure_ascii=False, indent=2) + "\n"

    @classmethod
    def from_json(cls, doc: Mapping) -> "Preproof":
        try:
            root = doc["root"]
            raw = doc["nodes"]
        except (KeyError, TypeError):
            raise ProofFormatError("proof file needs 'root' and 'nodes'") from None
        nodes = {}
        for nid, nd in raw.items():
            try:
                seq = parse_sequent(nd["sequent"])
                rule = nd["rule"] if nd["rule"] == OPEN else canonical_rule_name(nd["rule"])
                principal = _principal_from_json(rule, nd.get("principal"), seq)
                children = [Child.from_json(c) for c in nd.get("children", [])]
            except (KeyError, ExprSyntaxError, RuleError) as exc:
                raise ProofFormatError(f"node {nid}: {exc}") from None
            if rule == "w-r" and "weakened" in nd and principal is not None:
                text = nd["weakened"].strip()
                if not (text.startswith("[") and text.endswith("]")):
                    raise ProofFormatError(f"node {nid}: weakened cedent must be bracketed")
                items = parse_cedent_items(text[1:-1])
                try:
                    principal = apply_rule(seq, "w-r", items).principal
                except RuleError as exc:
                    raise ProofFormatError(f"node {nid}: {exc}") from None
            nodes[nid] = ProofNode(seq, rule, principal, children)
        return cls(root, nodes)

    @classmethod
    def loads(cls, text: str) -> "Preproof":
        return cls.from_json(json.loads(text))

    # -- display --------------------------------------------------------------
    def pretty(self, unicode: bool = True) -> str:
        """Indented tree; back-edges point at their target with a bullet."""
        targets = {c.target for _, _, c in self.edges() if c.backedge}
        lines: list[str] = []

        def walk(nid, depth):
            node = self.nodes[nid]
            mark = " •" + nid if nid in targets else ""
            lines.append(f"{'  ' * depth}{node.sequent.text(unicode)}   ({node.rule}){mark}")
            for c in node.children:
                if c.backedge:
                    sh = f" shifted by {''.join(c.shift)}" if c.shift else ""
                    lines.append(f"{'  ' * (depth + 1)}• back to {c.target}{sh}")
                else:
                    walk(c.target, depth + 1)

        walk(self.root, 0)
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# Well-formedness

@dataclass
class WellformednessReport:
    defects: list[tuple[str, str]]

    @property
    def ok(self) -> bool:
        return not self.defects

    def __str__(self):
        if self.ok:
            return "ok"
        return "\n".join(f"{nid}: {msg}" for nid, msg in self.defects)


def check_wellformed(p: Preproof) -> WellformednessReport:
    defects: list[tuple[str, str]] = []
    if p.root not in p.nodes:
        return WellformednessReport([(p.root, "root node is missing")])
    tree_parent: dict[str, str] = {}
    for nid, k, ch in p.edges():
        if ch.target not in p.nodes:
            defects.append((nid, f"child {k} points to unknown node {ch.target}"))
            continue
        if not ch.backedge:
            if ch.target in tree_parent or ch.target == p.root:
                defects.append((ch.target, "node has more than one tree parent"))
            tree_parent[ch.target] = nid
        elif ch.shift and not all(c.isalpha() or c in "<>" for c in ch.shift):
            defects.append((nid, f"bad shift {ch.shift!r}"))
    if defects:
        return WellformednessReport(defects)

    for nid in sorted(p.nodes):
        node = p.nodes[nid]
        if node.rule == OPEN:
            if node.children:
                defects.append((nid, "open leaf with children"))
            continue
        try:
            step = node.step()
        except MuhkaError as exc:
            defects.append((nid, f"rule does not apply: {exc}"))
            continue
        if len(step.premisses) != len(node.children):
            defects.append((nid, f"{node.rule} has {len(step.premisses)} premiss(es) but "
                                 f"{len(node.children)} child(ren)"))
            continue
        for k, (prem, ch) in enumerate(zip(step.premisses, node.children)):
            target = p.nodes[ch.target].sequent
            if ch.shift:
                target = shift_sequent(target, ch.shift)
            if target != prem:
                kind = "back-edge target" if ch.backedge else "child"
                defects.append((nid, f"premiss {k} is '{prem}' but {kind} {ch.target} concludes '{target}'"))

    seen = set(p.reachable())
    for nid in sorted(set(p.nodes) - seen):
        defects.append((nid, "unreachable from root"))

    shifted = [c.target for _, _, c in p.edges() if c.shift]
    if shifted:
        stable_seen = set()
        stack = list(shifted)
        while stack:
            v = stack.pop()
            if v in stable_seen:
                continue
            stable_seen.add(v)
            if p.nodes[v].rule in ("init", "k-l"):
                defects.append((v, f"{p.nodes[v].rule} is reachable from a shifted back-edge"))
            stack.extend(p.successors(v))
    return WellformednessReport(defects)


def _require_wellformed(p: Preproof) -> None:
    rep = check_wellformed(p)
    if not rep.ok:
        raise ProofFormatError(f"ill-formed preproof:\n{rep}")


# ---------------------------------------------------------------------------
# Progress

def _sccs(nodes, succ):
    from .grammar import _sccs as tarjan
    return tarjan(nodes, succ)


def check_progress_mu(p: Preproof) -> bool:
    """Every cycle of the graph passes through a μ-l step."""
    _require_wellformed(p)
    if not p.is_mu_only():
        raise FragmentError("check_progress_mu is for mu-only preproofs")
    return _mu_cycle_free(p) is None


def _mu_cycle_free(p: Preproof):
    nodes = [v for v in p.reachable() if p.nodes[v].rule != "μ-l"]
    keep = set(nodes)

    def succ(v):
        return [u for u in p.successors(v) if u in keep]

    for comp in _sccs(nodes, succ):
        if len(comp) > 1 or comp[0] in succ(comp[0]):
            return sorted(comp)
    return None


@dataclass
class ProgressReport:
    ok: bool
    # on failure: a lasso-shaped branch, as node ids; loop starts and ends at
    # the same node
    stem: list[str] = field(default_factory=list)
    loop: list[str] = field(default_factory=list)


def _edge_relation(p: Preproof, nid: str, k: int, rank_of) -> frozenset:
    """Triples (occ in node, occ in child, rank) for one edge."""
    node = p.nodes[nid]
    step = node.step()
    ch = node.children[k]
    s = len(ch.shift)
    anc = step.ancestry[k]
    principal = step.principal
    rank = rank_of(node.sequent.formula_at(principal)) if principal and principal[0] in "LR" else -1
    out = set()
    for occ, parents in anc.items():
        if occ[0] == "R":
            if occ[2] < s:
                continue
            occ = ("R", occ[1], occ[2] - s)
        for par in parents:
            out.add((par, occ, rank if par == principal else -1))
    return frozenset(out)


def _compose(g1: frozenset, g2: frozenset) -> frozenset:
    by_src: dict = {}
    for o, o2, r in g2:
        by_src.setdefault(o, []).append((o2, r))
    out = set()
    for o, o1, r1 in g1:
        for o2, r2 in by_src.get(o1, ()):
            out.add((o, o2, r1 if r1 > r2 else r2))
    return frozenset(out)


def check_progress_munu(p: Preproof, *, report: bool = False):
    """Every infinite branch carries a progressing thread.

    Ramsey-style closure: the relation of every finite path is a set of
    (start occurrence, end occurrence, highest principal formula) triples.
    The branch condition holds iff every idempotent loop relation contains a
    triple (o, o, f) whose formula f is a μ on the left or a ν on the right.
    """
    _require_wellformed(p)
    forms = sorted({f for node in p.nodes.values() for f in node.sequent.formulas()}, key=dependency_key)
    rank_index = {f: i for i, f in enumerate(forms)}

    def rank_of(f):
        return rank_index[f]

    reach = p.reachable()
    comps = _sccs(reach, p.successors)
    comp_of = {v: i for i, comp in enumerate(comps) for v in comp}
    edge_graphs: dict[str, list] = {}
    for nid in reach:
        node = p.nodes[nid]
        for k, ch in enumerate(node.children):
            if comp_of.get(ch.target) == comp_of[nid]:
                edge_graphs.setdefault(nid, []).append((ch.target, _edge_relation(p, nid, k, rank_of)))

    # closure; parent pointers rebuild the path of each relation
    closure: dict[tuple, tuple | None] = {}
    work = []
    for u, outs in edge_graphs.items():
        for v, g in outs:
            key = (u, v, g)
            if key not in closure:
                closure[key] = None
                work.append(key)
    while work:
        key = work.pop()
        u, v, g = key
        for w, e in edge_graphs.get(v, ()):
            nk = (u, w, _compose(g, e))
            if nk not in closure:
                closure[nk] = (key, w)
                work.append(nk)

    bad = None
    for (u, v, g) in sorted(closure, key=lambda k: (k[0], k[1], sorted(map(repr, k[2])))):
        if u != v or _compose(g, g) != g:
            continue
        good = False
        for o, o2, r in g:
            if o != o2 or r < 0:
                continue
            f = forms[r]
            if not isinstance(f, Fix):
                raise AssertionError(f"critical formula of a looping thread is not a fixed point: {to_text(f)}")
            if (o[0] == "L" and isinstance(f, Mu)) or (o[0] == "R" and isinstance(f, Nu)):
                good = True
                break
        if not good:
            bad = (u, v, g)
            break
    if not report:
        return bad is None
    if bad is None:
        return ProgressReport(True)
    loop = _closure_path(closure, bad)
    stem = _tree_path(p, bad[0])
    return ProgressReport(False, stem, loop)


def _closure_path(closure, key) -> list[str]:
    tail = []
    while closure[key] is not None:
        prev, w = closure[key]
        tail.append(w)
        key = prev
    u, v, _ = key
    return [u, v] + tail[::-1]


def _tree_path(p: Preproof, dst: str) -> list[str]:
    prev = {p.root: None}
    queue = [p.root]
    for v in queue:
        if v == dst:
            break
        for u in p.successors(v):
            if u not in prev:
                prev[u] = v
                queue.append(u)
    out = [dst]
    while prev[out[-1]] is not None:
        out.append(prev[out[-1]])
    return out[::-1]


def is_leftmost_proof(p: Preproof) -> bool:
    """All steps leftmost, also in the shifted copies reached via back-edges."""
    _require_wellformed(p)
    for nid in p.reachable():
        step = p.nodes[nid].step()
        if step is not None and not is_leftmost(step):
            return False
    # in a copy shifted by s letters every right-hand position moves by s
    shifted = [c.target for _, _, c in p.edges() if c.shift]
    seen = set()
    stack = list(shifted)
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        node = p.nodes[v]
        if node.rule in LOGICAL_RULES and node.principal[0] == "R":
            return False
        stack.extend(p.successors(v))
    return True
