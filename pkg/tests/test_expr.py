import random

import pytest
from hypothesis import given, settings, strategies as st

from exprgen import random_expr
from muhka.corpus import ABW, ANBN, ASBS, DYCK, AB_OMEGA_RHS
from muhka.errors import ExprSyntaxError, FragmentError, UnboundVariableError
from muhka.expr import (ONE, ZERO, Lit, Mu, Nu, Prod, Sum, Var, approximant, classify, critical_formula,
                        dependency_key, dependency_leq, fl_closure, free_vars, parse_expr, product,
                        sort_by_dependency, star, substitute, to_text, unfold)
from muhka.grammar import expr_words

a, b = Lit("a"), Lit("b")


def exprs(**kw):
    return st.randoms(use_true_random=False).map(lambda r: random_expr(r, **kw))


def test_products_and_sums_nest_to_the_right():
    assert parse_expr("a b a") == Prod(a, Prod(b, a))
    assert parse_expr("a + b + 1") == Sum(a, Sum(b, ONE))
    assert parse_expr("a b + b") == Sum(Prod(a, b), b)


def test_binder_scope_extends_right():
    e = parse_expr("mu X.(1 + a X b)")
    assert isinstance(e, Mu) and e.body == Sum(ONE, Prod(a, Prod(Var("X"), b)))


def test_alpha_equivalent_expressions_are_equal():
    assert parse_expr("mu X.(a X)") == parse_expr("mu Y.(a Y)")
    assert parse_expr("mu X.(a X)") != parse_expr("nu X.(a X)")
    assert hash(parse_expr("mu X.(a X)")) == hash(parse_expr("mu Z.(a Z)"))


def test_sugar_and_grouping():
    assert parse_expr("a*") == star(a)
    assert parse_expr("{a b}") == parse_expr("(a b)")
    assert parse_expr("μX.(a X)") == parse_expr("mu X.(a X)")
    assert parse_expr("νX.(a X)") == parse_expr("nu X.(a X)")


@pytest.mark.parametrize("bad", ["a +", "(a", "mu .a", "a ) b", "A"])
def test_syntax_errors(bad):
    with pytest.raises((ExprSyntaxError, UnboundVariableError)):
        parse_expr(bad)


def test_free_variables_are_rejected_unless_allowed():
    with pytest.raises(UnboundVariableError):
        parse_expr("a X")
    assert free_vars(parse_expr("a X", free=["X"])) == {"X"}


@settings(max_examples=200, deadline=None)
@given(exprs(nu=True))
def test_printing_round_trips(e):
    assert parse_expr(to_text(e)) == e
    assert parse_expr(to_text(e, unicode=True)) == e


def test_classification_examples():
    anbn, asbs = classify(parse_expr(ANBN)), classify(parse_expr(ASBS))
    assert anbn.guarded and anbn.left_guarded and not anbn.productive
    assert asbs.guarded and not asbs.left_guarded
    assert not classify(parse_expr("mu X.X")).guarded
    assert classify(parse_expr("a b")).productive and classify(parse_expr("a b")).left_productive
    assert classify(parse_expr("1 a")).productive and not classify(parse_expr("1 a")).left_productive


def test_substitution_avoids_capture():
    body = parse_expr("mu Y.(X Y)", free=["X"])
    out = substitute(body, "X", Var("Y"))
    assert free_vars(out) == {"Y"}
    assert isinstance(out, Mu) and out.var != "Y"


def test_closure_of_nu_example():
    fl = {to_text(f) for f in fl_closure(parse_expr(ABW))}
    assert fl == {"a", "b", "a b nu Z.(a b Z)", "b nu Z.(a b Z)", "nu Z.(a b Z)"}


@settings(max_examples=150, deadline=None)
@given(exprs(nu=True))
def test_closure_is_closed(e):
    fl = fl_closure(e)
    assert e in fl
    for f in fl:
        assert not free_vars(f)
        for c in f.children():
            if not free_vars(c):
                assert c in fl
        if isinstance(f, (Mu, Nu)):
            assert unfold(f) in fl
        assert fl_closure(f) <= fl


@settings(max_examples=150, deadline=None)
@given(exprs(nu=True))
def test_dependency_key_extends_the_preorder(e):
    fl = list(fl_closure(e))
    for f in fl:
        assert dependency_leq(f, f)
        for g in fl:
            if dependency_leq(f, g) and not dependency_leq(g, f):
                assert dependency_key(f) < dependency_key(g)
    ordered = sort_by_dependency(fl)
    assert [dependency_key(f) for f in ordered] == sorted(dependency_key(f) for f in fl)


def test_critical_formula_of_nested_loop():
    f = parse_expr(AB_OMEGA_RHS)
    inner = parse_expr(f"nu X.(a ({AB_OMEGA_RHS}) X)")
    # on a thread visiting both, the outer mu is the subformula-least
    assert critical_formula([f, inner]) == f
    assert critical_formula([]) is None


@pytest.mark.parametrize("n", range(6))
def test_approximants_denote_bounded_unions(n):
    words = expr_words(approximant(parse_expr(ANBN), n), 2 * n + 2)
    assert words == {"a" * k + "b" * k for k in range(n)}


@settings(max_examples=80, deadline=None)
@given(st.randoms(use_true_random=False), st.integers(0, 3))
def test_approximants_increase_towards_the_fixed_point(rng, n):
    e = random_expr(rng)
    if not isinstance(e, Mu):
        e = Mu("V", Sum(ONE, Prod(a, Var("V"))))
    k = 5
    lo, hi, top = (expr_words(approximant(e, n), k), expr_words(approximant(e, n + 1), k), expr_words(e, k))
    assert lo <= hi <= top


def test_approximant_requires_mu():
    with pytest.raises(FragmentError):
        approximant(parse_expr("nu X.(a X)"), 2)


def test_product_of_cedent():
    assert product(()) == ONE
    assert product((a, b, ZERO)) == Prod(a, Prod(b, ZERO))


def test_dyck_language_small():
    # both recursive calls are non-empty, so the next word after <> has length 6
    assert expr_words(parse_expr(DYCK), 5) == {"<>"}
    assert expr_words(parse_expr(DYCK), 6) == {"<>", "<<>><>"}


def test_unfold_of_random_fixpoint_preserves_language():
    rng = random.Random(2)
    checked = 0
    while checked < 40:
        e = random_expr(rng)
        if isinstance(e, Mu):
            assert expr_words(unfold(e), 6) == expr_words(e, 6)
            checked += 1
