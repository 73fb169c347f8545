import itertools
import json

import pytest
from hypothesis import given, settings, strategies as st

from exprgen import random_expr
from muhka.corpus import ABW, ANBN, ASBS, DYCK, DYCK_OMEGA, AB_OMEGA_RHS, NU_A
from muhka.errors import NotGuardedError
from muhka.expr import Nu, parse_expr
from muhka.grammar import (CFG, LassoWord, MullerCFG, Verdict, accepts_lasso, cfg_to_expr, cfg_words,
                           enumerate_words, expr_words, member_chart, member_finite, member_topdown,
                           system_words, to_canonical_cfg, to_muller_cfg)

WORDS6 = ["".join(w) for n in range(7) for w in itertools.product("ab", repeat=n)]


def exprs(**kw):
    return st.randoms(use_true_random=False).map(lambda r: random_expr(r, **kw))


def test_canonical_grammar_of_anbn():
    cfg = to_canonical_cfg(parse_expr(ANBN))
    assert cfg_words(cfg, 6) == {"", "ab", "aabb", "aaabbb"}
    assert cfg.start == "X[mu X.(1 + a X b)]"


@settings(max_examples=120, deadline=None)
@given(exprs())
def test_grammar_language_matches_semantics(e):
    assert cfg_words(to_canonical_cfg(e), 6) == expr_words(e, 6) == enumerate_words(e, 6)


@settings(max_examples=60, deadline=None)
@given(exprs())
def test_membership_matches_semantics(e):
    lang = expr_words(e, 6)
    for w in WORDS6:
        assert member_topdown(w, e) == member_chart(w, e) == (w in lang)


def test_member_finite_cross_checks():
    assert member_finite("aabb", parse_expr(ANBN))
    assert not member_finite("aab", parse_expr(ANBN))
    assert member_finite("abb", (parse_expr(ANBN), parse_expr("b")))
    assert member_finite("<<>><>", parse_expr(DYCK))


def test_cfg_json_round_trip():
    cfg = to_canonical_cfg(parse_expr(ASBS))
    doc = json.loads(json.dumps(cfg.to_json()))
    assert CFG.from_json(doc) == cfg


def test_muller_json_round_trip():
    g = to_muller_cfg(parse_expr(AB_OMEGA_RHS))
    back = MullerCFG.from_json(json.loads(json.dumps(g.to_json())))
    assert back.underlying == g.underlying and back.marked == g.marked
    for w in ["ab:ab", ":ab", "b:a", ":a"]:
        lw = LassoWord.parse(w)
        assert accepts_lasso(back, lw).verdict == accepts_lasso(g, lw).verdict


def test_muller_acceptance_is_decided_by_the_critical_formula():
    g = to_muller_cfg(parse_expr(AB_OMEGA_RHS))
    nu_names = [n for n in g.marked if isinstance(g.underlying.labels[n], Nu)]
    mu_names = [n for n in g.marked if n not in nu_names and n.endswith("]") and "mu Y" in n[:6]]
    assert all(g.is_acceptable([n]) for n in nu_names)
    assert mu_names and not g.is_acceptable(mu_names + nu_names)
    assert not g.is_acceptable([])


def test_equation_systems_to_expressions():
    x, y = parse_expr("1 + a Y", free=["X", "Y"]), parse_expr("b X", free=["X", "Y"])
    system = {"X": x, "Y": y}
    e = cfg_to_expr(system, "X")
    assert expr_words(e, 6) == system_words(system, "X", 6) == {"", "ab", "abab", "ababab"}


def test_equation_system_must_be_left_guarded():
    with pytest.raises(NotGuardedError):
        cfg_to_expr({"X": parse_expr("1 + X a", free=["X"])}, "X")


@settings(max_examples=60, deadline=None)
@given(exprs(left=True, max_size=12))
def test_expression_as_single_equation(e):
    # a closed expression is the solution of the trivial one-equation system
    assert expr_words(cfg_to_expr({"S": e}, "S"), 5) == expr_words(e, 5)


@pytest.mark.parametrize("text, normal", [
    ("ab:ab", ":ab"), ("a:ba", ":ab"), (":abab", ":ab"), ("b:aa", "b:a"), ("abc:c", "ab:c"),
])
def test_lasso_normal_form(text, normal):
    assert str(LassoWord.parse(text)) == normal


@settings(max_examples=200)
@given(st.text("ab", max_size=4), st.text("ab", min_size=1, max_size=4))
def test_lasso_normal_form_denotes_the_same_word(u, v):
    w = LassoWord(u, v)
    raw = (u + v * 40)[:40]
    assert w.take(40) == raw
    assert len(w.loop) <= len(v) and len(w.prefix) <= len(u)
    for i in range(w.n_positions):
        assert w.suffix(i).take(20) == w.take(i + 20)[i:]


def test_lasso_parse_errors():
    with pytest.raises(ValueError):
        LassoWord.parse("ab")
    with pytest.raises(ValueError):
        LassoWord.parse("ab:")


@pytest.mark.parametrize("expr, word, verdict", [
    (ABW, ":ab", Verdict.YES),
    (ABW, "a:ba", Verdict.YES),
    (ABW, ":ba", Verdict.NO),
    (ABW, ":a", Verdict.NO),
    (DYCK_OMEGA, ":<>", Verdict.YES),
    (DYCK_OMEGA, ":<", Verdict.NO),
    (DYCK_OMEGA, "<:<>>", Verdict.NO),
    (NU_A, ":a", Verdict.YES),
    (NU_A, "b:a", Verdict.NO),
    (AB_OMEGA_RHS, ":ab", Verdict.YES),
    (AB_OMEGA_RHS, ":a", Verdict.NO),
    ("nu X.(mu Y.(a Y + b X))", ":a", Verdict.NO),
    ("nu X.(mu Y.(a Y + b X))", ":ab", Verdict.YES),
    ("mu X.(nu Y.(a Y + b X))", ":a", Verdict.YES),
    ("mu X.(nu Y.(a Y + b X))", ":ab", Verdict.NO),
])
def test_muller_acceptance_examples(expr, word, verdict):
    assert accepts_lasso(to_muller_cfg(parse_expr(expr)), LassoWord.parse(word)).verdict == verdict


def test_dyck_with_balanced_prefix():
    # <<>> is not in the language (both calls non-empty) but <<>><> is
    g = to_muller_cfg(parse_expr(DYCK_OMEGA))
    assert accepts_lasso(g, LassoWord.parse("<<>><>:<>")).verdict == Verdict.YES


def test_muller_grammar_needs_left_guarded_input():
    with pytest.raises(NotGuardedError):
        to_muller_cfg(parse_expr("nu X.(X a)"))
