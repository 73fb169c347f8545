"""Hand-built golden proofs and the shared example expressions.

Proofs are written as plans, a nested description of bottom-up rule
applications; ``build`` replays a plan through ``apply_rule`` so every step
is checked as it is constructed.
"""

from __future__ import annotations

from dataclasses import dataclass

from .expr import parse_cedent_items, parse_expr
from .preproof import Child, Preproof, ProofNode
from .sequent import Hypersequent, apply_rule, parse_sequent

__all__ = [
    "ANBN", "ASBS", "DYCK", "DYCK_OMEGA", "ABW", "AB_OMEGA_RHS", "NU_A",
    "anbn_proof", "ab_omega_proof", "empty_nu_preproof", "Step", "Back", "build",
    "golden_proofs", "stuck_mu_preproof", "example_expressions",
]

ANBN = "mu X.(1 + a X b)"
ASBS = "mu X.(1 + a X + X b)"
DYCK = "mu X.(< > + < X > X)"
DYCK_OMEGA = f"nu Y.(({DYCK}) Y)"
ABW = "nu Z.(a b Z)"
AB_OMEGA_RHS = "mu Y.(b + nu X.(a Y X))"
NU_A = "nu X.(a X)"


@dataclass
class Step:
    rule: str
    principal: object = None
    kids: tuple = ()
    label: str | None = None


@dataclass
class Back:
    label: str
    shift: tuple[str, ...] = ()


def _resolve(seq: Hypersequent, principal):
    """Principals in plans may name a right cedent by its text."""
    if isinstance(principal, tuple) and principal and principal[0] in ("R", "W"):
        items = parse_cedent_items(principal[1])
        for c, ced in enumerate(seq.rhs):
            if ced == items:
                return (c, principal[2]) if principal[0] == "R" else c
        raise ValueError(f"cedent [{principal[1]}] not found in {seq}")
    return principal


def build(root: str | Hypersequent, plan: Step, prefix: str = "n") -> Preproof:
    seq = parse_sequent(root) if isinstance(root, str) else root
    nodes: dict[str, ProofNode] = {}
    labels: dict[str, str] = {}
    pending: list[tuple[str, int, Back]] = []

    def go(s: Hypersequent, st: Step) -> str:
        nid = f"{prefix}{len(nodes)}"
        step = apply_rule(s, st.rule, _resolve(s, st.principal))
        node = ProofNode(s, step.rule, step.principal, [])
        nodes[nid] = node
        if st.label:
            labels[st.label] = nid
        if len(st.kids) != len(step.premisses):
            raise ValueError(f"{st.rule} at {s} has {len(step.premisses)} premisses, plan gives {len(st.kids)}")
        for k, (prem, kid) in enumerate(zip(step.premisses, st.kids)):
            if isinstance(kid, Back):
                node.children.append(Child("?"))
                pending.append((nid, k, kid))
            else:
                node.children.append(Child(go(prem, kid)))
        return nid

    root_id = go(seq, plan)
    for nid, k, back in pending:
        nodes[nid].children[k] = Child(labels[back.label], True, tuple(back.shift))
    return Preproof(root_id, nodes)


def _chain(*steps: Step) -> Step:
    """Link unary steps; the last step keeps its own children."""
    out = steps[-1]
    for st in reversed(steps[:-1]):
        out = Step(st.rule, st.principal, (out,), st.label)
    return out


def anbn_proof() -> Preproof:
    """Regular proof of {a^n b^n} |- [(a*b*)] with one loop through the root."""
    A, B = ANBN, ASBS
    unf = f"1 + a ({B}) + ({B}) b"
    rest = f"a ({B}) + ({B}) b"
    left = _chain(
        Step("+-r", ("R", unf, 0)),
        Step("w-r", ("W", rest)),
        Step("1-l", 0),
        Step("1-r", ("R", "1", 0)),
        Step("init"),
    )
    loop_back = _chain(
        Step("μ-r", ("R", B, 0)),
        Step("+-r", ("R", unf, 0)),
        Step("w-r", ("W", "1")),
        Step("+-r", ("R", rest, 0)),
        Step("w-r", ("W", f"a ({B})")),
        Step("·-l", 0),
        Step("·-r", ("R", f"({B}) b", 0)),
        Step("k-r", None, (Back("root"),)),
    )
    right = _chain(
        Step("+-r", ("R", unf, 0)),
        Step("w-r", ("W", "1")),
        Step("+-r", ("R", rest, 0)),
        Step("w-r", ("W", f"({B}) b")),
        Step("·-l", 0),
        Step("·-r", ("R", f"a ({B})", 0)),
        Step("k-l", None, (loop_back,)),
    )
    plan = _chain(
        Step("μ-l", 0, label="root"),
        Step("μ-r", ("R", B, 0)),
        Step("+-l", 0, (left, right)),
    )
    return build(f"{A} |- [{B}]", plan)


def ab_omega_proof() -> Preproof:
    """Leftmost proof of nu Z.(a b Z) |- [mu Y.(b + nu X.(a Y X))]."""
    e, f = ABW, AB_OMEGA_RHS
    nu1 = f"nu X.(a ({f}) X)"
    plan = _chain(
        Step("μ-r", ("R", f, 0)),
        Step("+-r", ("R", f"b + {nu1}", 0)),
        Step("w-r", ("W", "b")),
        Step("ν-r", ("R", nu1, 0), label="loop"),
        Step("ν-l", 0),
        Step("·-l", 0),
        Step("·-r", ("R", f"a ({f}) ({nu1})", 0)),
        Step("k-l"),
        Step("·-l", 0),
        Step("·-r", ("R", f"({f}) ({nu1})", 0)),
        Step("μ-r", ("R", f"{f}, {nu1}", 0)),
        Step("+-r", ("R", f"b + {nu1}, {nu1}", 0)),
        Step("w-r", ("W", f"{nu1}, {nu1}")),
        Step("k-l", None, (Back("loop"),)),
    )
    return build(f"{e} |- [{f}]", plan)


def empty_nu_preproof() -> Preproof:
    """Progressing but not leftmost: |- [nu X.(a X)] looping with a shift."""
    plan = _chain(
        Step("ν-r", ("R", NU_A, 0), label="top"),
        Step("·-r", ("R", f"a ({NU_A})", 0), (Back("top", ("a",)),)),
    )
    return build(f"|- [{NU_A}]", plan)


def golden_proofs() -> dict[str, Preproof]:
    return {"anbn_in_astar_bstar": anbn_proof(), "ab_omega_leftmost": ab_omega_proof(), "empty_nu_not_leftmost": empty_nu_preproof()}


def example_expressions() -> dict[str, object]:
    return {name: parse_expr(text) for name, text in
            {"anbn": ANBN, "asbs": ASBS, "dyck": DYCK, "dyck_omega": DYCK_OMEGA,
             "abw": ABW, "ab_omega_rhs": AB_OMEGA_RHS, "nu_a": NU_A}.items()}


def stuck_mu_preproof() -> Preproof:
    """Non-progressing control: |- [mu X.(a X)] loops through mu-r only."""
    mu_a = "mu X.(a X)"
    plan = _chain(
        Step("μ-r", ("R", mu_a, 0), label="top"),
        Step("·-r", ("R", f"a ({mu_a})", 0), (Back("top", ("a",)),)),
    )
    return build(f"|- [{mu_a}]", plan)
