import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extent.syntax import (BOT, EMPTY, TOP, Anno, App, CApp, CLam, Fst, Lam, Pair, ParseError, Point, Snd,
                           TConst, TermDecl, TExt, TPi, TSigma, TShape, TypeDecl, Var, alpha_eq, compose_subst,
                           free_cube_vars, free_vars, parse, parse_term, parse_type, show, subst_cube,
                           subst_term)
from extent.topes import And, Eq, Leq, Or


def test_ext_type_with_empty_boundary():
    (d,) = parse("type A := <{t} TOP | C ^ BOT -> ()>")
    assert isinstance(d, TypeDecl)
    assert d.type == TExt(("t",), TOP, TConst("C"), BOT, EMPTY)


def test_extension_lambda():
    (d,) = parse("term f := \\t^{t|TOP}. c")
    assert isinstance(d, TermDecl) and d.term == CLam(("t",), TOP, Var("c"))


def test_unclosed_paren_position():
    with pytest.raises(ParseError) as err:
        parse("term x := (")
    assert (err.value.line, err.value.col) == (1, 12)
    assert "identifier" in err.value.expected


def test_error_on_second_line():
    with pytest.raises(ParseError) as err:
        parse("type B := base {a b}\nterm x : B := a ==")
    assert err.value.line == 2 and err.value.col == 17


def test_short_extension_form():
    assert parse_type("<{t} t == 0 | B>") == TExt(("t",), Eq("t", 0), TConst("B"), BOT, EMPTY)


def test_variable_prints_as_name():
    assert show(Var("x")) == "x"


def test_cube_application_needs_adjacent_paren():
    assert parse_term("f(s)") == CApp(Var("f"), ("s",))
    assert parse_term("f (s)") == App(Var("f"), Var("s"))
    assert parse_term("g x(s)") == App(Var("g"), CApp(Var("x"), ("s",)))


def test_nested_lambda_parenthesized_when_applied():
    e = App(CLam(("t",), TOP, Lam("x", Var("x"))), Var("y"))
    assert show(e) == "(\\t^{t|TOP}. \\x. x) y"
    assert parse_term(show(e)) == e


def test_comments_and_multi_dim_binder():
    (d,) = parse("-- header\nterm f := \\(s,t)^{s t|s <= t}. c  -- trailing\n")
    assert d.term == CLam(("s", "t"), Leq("s", "t"), Var("c"))


def test_binder_names_must_match():
    with pytest.raises(ParseError):
        parse_term("\\t^{s|TOP}. c")


# --- generated ASTs -----------------------------------------------------

NAMES = ["x", "y", "f", "g"]
CUBE = ["s", "t", "u"]
cube_terms = st.sampled_from(CUBE + [0, 1])


def tope_strategy():
    atoms = st.one_of(st.just(TOP), st.just(BOT), st.builds(Leq, cube_terms, cube_terms),
                      st.builds(Eq, cube_terms, cube_terms))
    return st.recursive(atoms, lambda inner: st.one_of(st.builds(And, inner, inner), st.builds(Or, inner, inner)),
                        max_leaves=4)


topes = tope_strategy()
binders = st.lists(st.sampled_from(CUBE), min_size=1, max_size=2, unique=True).map(tuple)
points = st.lists(cube_terms, min_size=1, max_size=2).map(tuple)


def terms(depth):
    leaf = st.one_of(st.sampled_from(NAMES).map(Var), st.just(EMPTY), points.map(Point))
    if depth <= 0:
        return leaf
    sub = terms(depth - 1)
    return st.one_of(
        leaf,
        st.builds(Lam, st.sampled_from(NAMES), sub),
        st.builds(App, sub, sub),
        st.builds(CLam, binders, topes, sub),
        st.builds(CApp, sub, points),
        st.builds(Pair, sub, sub),
        st.builds(Fst, sub),
        st.builds(Snd, sub),
        st.builds(Anno, sub, types(depth - 1)),
    )


def types(depth):
    leaf = st.one_of(st.sampled_from(["A", "B"]).map(TConst), st.builds(TShape, binders, topes))
    if depth <= 0:
        return leaf
    sub = types(depth - 1)
    var = st.sampled_from(NAMES + ["_"])
    return st.one_of(
        leaf,
        st.builds(TPi, var, sub, sub),
        st.builds(TSigma, var, sub, sub),
        st.builds(TExt, binders, topes, sub, topes, terms(depth - 1)),
    )


@settings(max_examples=300, deadline=None)
@given(terms(5))
def test_term_round_trip(e):
    assert parse_term(show(e)) == e


@settings(max_examples=300, deadline=None)
@given(types(4))
def test_type_round_trip(t):
    assert parse_type(show(t)) == t


@settings(max_examples=200, deadline=None)
@given(terms(4), st.sampled_from(NAMES))
def test_unused_variable_substitution_is_identity(e, name):
    if name not in free_vars(e):
        assert subst_term(e, {name: Var("zzz")}) == e


def test_substitution_avoids_cube_capture():
    e = CLam(("t",), TOP, App(Var("x"), CApp(Var("f"), ("t",))))
    out = subst_term(e, {"x": CApp(Var("g"), ("t",))})
    assert isinstance(out, CLam) and out.cube != ("t",)
    (fresh,) = out.cube
    assert out.body == App(CApp(Var("g"), ("t",)), CApp(Var("f"), (fresh,)))


def test_substitution_avoids_term_capture():
    out = subst_term(Lam("y", App(Var("x"), Var("y"))), {"x": Var("y")})
    assert out.var != "y" and out.body == App(Var("y"), Var(out.var))


def test_substitution_reaches_both_ext_components():
    ty = TExt(("t",), TOP, TPi("_", TConst("A"), TConst("A")), Eq("t", 0), Var("a"))
    ty = TExt(ty.cube, ty.psi, TExt(("s",), TOP, TConst("A"), Eq("s", 0), Var("a")), ty.phi,
              CLam(("s",), TOP, Var("a")))
    out = subst_term(ty, {"a": Var("b")})
    assert out.body.partial == Var("b") and out.partial == CLam(("s",), TOP, Var("b"))


def test_cube_substitution_renames_binders():
    e = CLam(("s",), TOP, CApp(Var("f"), ("s", "t")))
    out = subst_cube(e, {"t": "s"})
    assert out.cube != ("s",) and out.body == CApp(Var("f"), (out.cube[0], "s"))
    assert free_cube_vars(out) == {"s"}


substitutions = st.dictionaries(st.sampled_from(NAMES), terms(2), max_size=2)


@settings(max_examples=200, deadline=None)
@given(terms(4), substitutions, substitutions)
def test_substitution_composes(e, sigma, tau):
    lhs = subst_term(subst_term(e, sigma), tau)
    rhs = subst_term(e, compose_subst(sigma, tau))
    assert alpha_eq(lhs, rhs)


@settings(max_examples=200, deadline=None)
@given(terms(4), substitutions)
def test_substitution_commutes_with_printing(e, sigma):
    assert parse_term(show(subst_term(e, sigma))) == subst_term(parse_term(show(e)), sigma)
