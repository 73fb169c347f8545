"""Projections of mu-only proofs and the omega-translation.

A projection fixes some μ-formulas of the root's left-hand side and
replaces each by a finite approximant ``f^n(0)``.  The proof is re-read
with annotated formulas: an :class:`Approx` node stands for ``f^n(0)`` and
remembers ``f`` and ``n``.  A ``μ-l`` step on an annotated occurrence with
value 0 becomes ``0-l``; with value ``n+1`` the step disappears, since
``f^(n+1)(0)`` already is the unfolding of ``f`` at ``f^n(0)``.  Every
other step is copied at the same position.

States ``(node, annotated left-hand side, shift)`` on the current branch
are remembered: meeting one again closes a back-edge, so the projection
of a cyclic proof is a finite cyclic proof whenever branches revisit
states.  Equal states on different branches are rebuilt rather than
shared, which keeps the result in the usual tree-plus-back-edges form.
A branch exceeding the depth budget ends in an ``open`` leaf.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Sequence

from .errors import FragmentError, ProofFormatError, WellfoundednessViolation
from .expr import Expr, Fix, Mu, Prod, Sum, approximant, substitute, to_text
from .preproof import Child, Preproof, ProofNode, check_progress_mu, check_wellformed, shift_sequent
from .sequent import Hypersequent

__all__ = ["Approx", "project", "check_projection_progress", "omega_translate", "OmegaTree"]


class Approx(Expr):
    """Placeholder for the approximant ``mu^n(0)`` inside annotated formulas."""

    __slots__ = ("mu", "n")

    def __init__(self, mu: Mu, n: int):
        super().__init__()
        self.mu = mu
        self.n = n
        self._canon = f"approx({n},{mu.canon()})"

    def __repr__(self):
        return f"<Approx {to_text(self.mu)} ^ {self.n}>"


def concretize(e: Expr) -> Expr:
    """Replace every Approx placeholder by the approximant it stands for."""
    if isinstance(e, Approx):
        return approximant(e.mu, e.n)
    if isinstance(e, Sum):
        return Sum(concretize(e.left), concretize(e.right))
    if isinstance(e, Prod):
        return Prod(concretize(e.left), concretize(e.right))
    if isinstance(e, Fix):
        return type(e)(e.var, concretize(e.body))
    return e


def _aux(rule: str, a: Expr, k: int) -> list[Expr]:
    """Annotated auxiliary formulas of premiss k for principal formula a."""
    if rule == "·-l":
        return [a.left, a.right]
    if rule == "+-l":
        return [a.left if k == 0 else a.right]
    if rule in ("μ-l", "ν-l"):
        return [substitute(a.body, a.var, a)]
    return []


def project(p: Preproof, targets: Sequence[int], values: Sequence[int], depth_budget: int = 500,
            max_nodes: int = 50_000) -> Preproof:
    """The projection of ``p`` that assigns values[k] to root LHS index targets[k].

    Branches longer than ``depth_budget`` and anything beyond ``max_nodes``
    nodes end in open leaves.
    """
    if len(targets) != len(values):
        raise ValueError("targets and values must have the same length")
    if len(set(targets)) != len(targets):
        raise ValueError("targets must be pairwise distinct")
    rep = check_wellformed(p)
    if not rep.ok:
        raise ProofFormatError(f"ill-formed preproof:\n{rep}")
    root_seq = p.root_sequent
    alhs = list(root_seq.lhs)
    for t, n in zip(targets, values):
        if not 0 <= t < len(alhs):
            raise ValueError(f"target {t} is not a left-hand position of the root")
        if not isinstance(alhs[t], Mu):
            raise FragmentError(f"target {t} is not a μ-formula: {to_text(alhs[t])}")
        if n < 0:
            raise ValueError("approximation values are natural numbers")
        alhs[t] = Approx(alhs[t], n)

    nodes: dict[str, ProofNode] = {}
    on_branch: dict[tuple, str] = {}

    def fresh(seq, rule, principal) -> str:
        nid = f"p{len(nodes)}"
        nodes[nid] = ProofNode(seq, rule, principal, [])
        return nid

    def visit(nid: str, lhs: tuple, shift: tuple, depth: int) -> Child:
        key = (nid, tuple(e.canon() for e in lhs), shift)
        if key in on_branch:
            return Child(on_branch[key], True)
        node = p.nodes[nid]
        concrete = Hypersequent.make(tuple(concretize(e) for e in lhs), node.sequent.rhs)
        if shift:
            concrete = shift_sequent(concrete, shift)
        if depth > depth_budget or len(nodes) >= max_nodes:
            return Child(fresh(concrete, "open", None))
        if node.rule == "open":
            return Child(fresh(concrete, "open", None))
        step = node.step()
        pr = step.principal
        if node.rule == "μ-l" and isinstance(lhs[pr[1]], Approx):
            a = lhs[pr[1]]
            i = pr[1]
            if a.n == 0:
                return Child(fresh(concrete, "0-l", ("L", i)))
            inner = substitute(a.mu.body, a.mu.var, Approx(a.mu, a.n - 1))
            ch = node.children[0]
            return visit(ch.target, lhs[:i] + (inner,) + lhs[i + 1:], shift + ch.shift, depth + 1)
        if pr is not None and pr[0] == "R":
            principal = ("R", pr[1], pr[2] + len(shift))
        else:
            principal = pr
        out = fresh(concrete, node.rule, principal)
        on_branch[key] = out
        for k, ch in enumerate(node.children):
            prem_lhs = []
            anc = step.ancestry[k]
            aux_count: dict = {}
            for i in range(len(step.premisses[k].lhs)):
                (src,) = anc[("L", i)]
                if src == pr:
                    j = aux_count.get(src, 0)
                    prem_lhs.append(_aux(node.rule, lhs[src[1]], k)[j])
                    aux_count[src] = j + 1
                else:
                    prem_lhs.append(lhs[src[1]])
            nodes[out].children.append(visit(ch.target, tuple(prem_lhs), shift + ch.shift, depth + 1))
        del on_branch[key]
        return Child(out)

    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 4 * depth_budget + 2000))
    try:
        root = visit(p.root, tuple(alhs), (), 0)
    finally:
        sys.setrecursionlimit(old)
    q = Preproof(root.target, nodes)
    rep = check_wellformed(q)
    if not rep.ok:
        raise AssertionError(f"projection produced an ill-formed preproof:\n{rep}")
    return q


def check_projection_progress(p: Preproof, targets: Sequence[int], values: Sequence[int]) -> bool:
    q = project(p, targets, values)
    if q.open_leaves():
        raise WellfoundednessViolation(f"projection has open leaves: {q.open_leaves()}")
    return check_progress_mu(q)


# ---------------------------------------------------------------------------
# Omega translation

@dataclass
class OmegaTree:
    """A node of the omega-translation: an ordinary step or an omega-node."""

    sequent: Hypersequent
    rule: str
    principal: tuple | None = None
    children: list["OmegaTree"] = field(default_factory=list)
    materialized: dict[int, "OmegaTree"] = field(default_factory=dict)
    budget: int | None = None

    def to_json(self) -> dict:
        if self.rule == "omega":
            return {
                "rule": "omega",
                "sequent": self.sequent.text(),
                "principal": {"lhs": self.principal[1]},
                "budget": self.budget,
                "materialized": {str(n): t.to_json() for n, t in sorted(self.materialized.items())},
            }
        prin = None
        if self.principal is not None:
            prin = ({"lhs": self.principal[1]} if self.principal[0] == "L"
                    else {"rhs": [self.principal[1], self.principal[2]]} if self.principal[0] == "R"
                    else {"cedent": self.principal[1]})
        return {"sequent": self.sequent.text(), "rule": self.rule, "principal": prin,
                "children": [c.to_json() for c in self.children]}

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children) + sum(t.size() for t in self.materialized.values())

    def is_finite_proof(self) -> bool:
        """No open leaves anywhere (back-edges cannot occur in a tree)."""
        if self.rule == "open":
            return False
        return all(c.is_finite_proof() for c in self.children) and all(
            t.is_finite_proof() for t in self.materialized.values())


def _subproof(p: Preproof, nid: str) -> Preproof:
    return Preproof(nid, p.nodes)


def omega_translate(p: Preproof, premiss_budget: int, internal_budget: int = 100_000) -> OmegaTree:
    """Unfold ``p`` into a tree, turning each μ-l step into an omega-node.

    The n-th premiss of an omega-node is the translation of the projection
    of the subproof at that step, with the principal occurrence set to n.
    Exceeding ``internal_budget`` nodes means some premiss is not
    wellfounded and raises WellfoundednessViolation.
    """
    if not p.is_mu_only():
        raise FragmentError("the omega-translation is defined for mu-only proofs")
    if any(c.shift for _, _, c in p.edges()):
        raise FragmentError("shifted back-edges are not supported by the omega-translation")
    counter = [0]

    def tr(q: Preproof, nid: str) -> OmegaTree:
        counter[0] += 1
        if counter[0] > internal_budget:
            raise WellfoundednessViolation("omega-translation did not close within the internal budget")
        node = q.nodes[nid]
        if node.rule == "open":
            raise WellfoundednessViolation(f"open leaf reached at {node.sequent}")
        if node.rule == "μ-l":
            i = node.principal[1]
            mats = {}
            for n in range(premiss_budget):
                proj = project(_subproof(q, nid), [i], [n])
                if proj.open_leaves():
                    raise WellfoundednessViolation(f"projection at {n} has open leaves")
                mats[n] = tr(proj, proj.root)
            return OmegaTree(node.sequent, "omega", node.principal, [], mats, premiss_budget)
        kids = [tr(q, c.target) for c in node.children]
        return OmegaTree(node.sequent, node.rule, node.principal, kids)

    return tr(p, p.root)
