import random

import pytest
from hypothesis import given, settings, strategies as st

from exprgen import random_expr
from muhka.corpus import ANBN, ASBS, anbn_proof, ab_omega_proof, stuck_mu_preproof
from muhka.errors import FragmentError, WellfoundednessViolation
from muhka.expr import Mu, approximant, parse_expr
from muhka.preproof import check_progress_mu, check_wellformed
from muhka.search import Proof, membership_proof, search
from muhka.sequent import Hypersequent, seq_valid_upto
from muhka.transforms import Approx, check_projection_progress, concretize, omega_translate, project


def test_approx_placeholder_concretizes():
    f = parse_expr(ANBN)
    assert concretize(Approx(f, 2)) == approximant(f, 2)
    assert Approx(f, 2) == Approx(f, 2) and Approx(f, 2) != Approx(f, 3)


def test_projection_at_zero_is_zero_left():
    q = project(anbn_proof(), [0], [0])
    (node,) = q.nodes.values()
    assert node.rule == "0-l" and str(node.sequent) == f"0 |- [{ASBS}]"


@pytest.mark.parametrize("n", range(1, 6))
def test_projection_at_n(n):
    q = project(anbn_proof(), [0], [n])
    assert q.root_sequent == Hypersequent.make((approximant(parse_expr(ANBN), n),), [[parse_expr(ASBS)]])
    assert check_wellformed(q).ok and not q.open_leaves() and not q.has_backedges()
    assert "μ-l" not in q.rules_used()
    assert check_progress_mu(q)


def test_projection_of_mu_left_free_proof_is_unchanged():
    p = membership_proof("ab", [[parse_expr(ANBN)]])
    q = project(p, [], [])
    assert q.pretty() == p.pretty()


def test_projection_argument_errors():
    p = anbn_proof()
    with pytest.raises(ValueError):
        project(p, [0], [1, 2])
    with pytest.raises(ValueError):
        project(p, [3], [1])
    with pytest.raises(ValueError):
        project(p, [0], [-1])


def test_projection_of_non_progressing_control():
    # the shifted loop never revisits a state, so the projection is cut
    q = project(stuck_mu_preproof(), [], [], depth_budget=50)
    assert q.open_leaves()
    with pytest.raises(WellfoundednessViolation):
        check_projection_progress(stuck_mu_preproof(), [], [])


def _cyclic_mu_proofs(seed: int, count: int):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        e = random_expr(rng, 10)
        if not isinstance(e, Mu):
            continue
        f = random_expr(rng, 10)
        for rhs in (f, e):
            res = search(Hypersequent.make((e,), [[rhs]]))
            if isinstance(res, Proof) and res.proof.has_backedges():
                out.append(res.proof)
                break
    return out


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 4))
def test_projections_of_found_proofs(seed, n):
    (p,) = _cyclic_mu_proofs(seed, 1)
    q = project(p, [0], [n])
    f = p.root_sequent.lhs[0]
    assert q.root_sequent == Hypersequent.make((approximant(f, n),), p.root_sequent.rhs)
    assert check_wellformed(q).ok
    if not q.open_leaves():
        assert check_projection_progress(p, [0], [n])
        assert seq_valid_upto(q.root_sequent, 6).valid


def test_omega_translation_of_anbn_proof():
    t = omega_translate(anbn_proof(), 5)
    assert t.rule == "omega" and t.budget == 5 and sorted(t.materialized) == [0, 1, 2, 3, 4]
    assert t.materialized[0].rule == "0-l"
    for n, sub in t.materialized.items():
        assert sub.is_finite_proof()
        assert sub.sequent.lhs == (approximant(parse_expr(ANBN), n),)
    doc = t.to_json()
    assert doc["rule"] == "omega" and set(doc["materialized"]) == {"0", "1", "2", "3", "4"}


def test_omega_translation_without_mu_left_is_the_proof_tree():
    p = membership_proof("aabb", [[parse_expr(ANBN)]])
    t = omega_translate(p, 3)
    assert t.size() == len(p.nodes)
    assert t.rule == p.nodes[p.root].rule


def test_omega_translation_rejects_nu():
    with pytest.raises(FragmentError):
        omega_translate(ab_omega_proof(), 2)


def test_omega_translation_of_found_proofs_is_wellfounded():
    for p in _cyclic_mu_proofs(5, 6):
        t = omega_translate(p, 3)
        assert t.is_finite_proof()
