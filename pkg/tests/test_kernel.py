import dataclasses
import itertools
import pathlib

import pytest

from extent.kernel import RULES, Kernel, check_program, check_source
from extent.syntax import (Anno, CApp, CLam, EqualDecl, Lam, TConst, Term, TermDecl, TExt, TriContext, TShape,
                           Type, Var, parse, parse_term, parse_type, show, subst_cube, subst_term)
from extent.topes import TOP, Eq

CORPUS = pathlib.Path(__file__).parent / "corpus"
ACCEPT = sorted((CORPUS / "accept").glob("*.stt"))
REJECT = sorted((CORPUS / "reject").glob("*.stt"))

PRELUDE = "type Bool := base {tt ff}\n"


def expected_kind(path):
    first = path.read_text().splitlines()[0]
    assert first.startswith("-- expect: ")
    return first.removeprefix("-- expect: ").strip()


@pytest.mark.parametrize("path", ACCEPT, ids=lambda p: p.stem)
def test_accepting_program(path):
    report = check_source(path.read_text())
    failure = report.first_failure
    assert failure is None, f"line {failure.decl.line}: {failure.report.kind}: {failure.report.reason}"
    assert all(d.report.trace for d in report.decls)


@pytest.mark.parametrize("path", REJECT, ids=lambda p: p.stem)
def test_rejecting_program(path):
    report = check_source(path.read_text())
    assert not report.verdict
    assert report.first_failure.report.kind == expected_kind(path)
    assert report.first_failure.report.reason


def test_every_rule_is_traced():
    traced = set()
    for path in ACCEPT:
        traced |= check_source(path.read_text()).rules
    assert set(RULES) <= traced


def test_rejections_cover_failing_premises():
    kinds = {expected_kind(p) for p in REJECT}
    assert {"BoundaryMismatch", "NotAnInclusion", "ShapeMiss", "NotEqual"} <= kinds


def _kernel(src=PRELUDE):
    k = Kernel()
    assert check_program(parse(src), k).verdict
    return k


def test_vacuous_boundary_accepts():
    k = _kernel()
    assert k.check_type(TriContext(), parse_type("<{t} TOP | Bool ^ BOT -> ()>"))


def test_total_boundary_accepts():
    k = _kernel()
    assert k.check_type(TriContext(), parse_type("<{t} TOP | Bool ^ TOP -> tt>"))


def test_non_inclusion_rejects_with_witness():
    k = _kernel()
    rep = k.check_type(TriContext(), parse_type("<{t} t == 1 | Bool ^ TOP -> tt>"))
    assert not rep and rep.kind == "NotAnInclusion" and "t↦0" in rep.reason


def test_literal_boundary_accepts():
    k = _kernel()
    rep = k.check_term(TriContext(), parse_term("\\t^{t|TOP}. tt"), parse_type("<{t} TOP | Bool ^ t == 0 -> tt>"))
    assert rep and "Ext-Intro" in rep.rules


def test_boundary_mismatch():
    k = _kernel()
    rep = k.check_term(TriContext(), parse_term("\\t^{t|TOP}. ff"), parse_type("<{t} TOP | Bool ^ t == 0 -> tt>"))
    assert rep.kind == "BoundaryMismatch"


def test_elimination_at_legal_point_has_instantiated_type():
    k = _kernel()
    ctx = TriContext(("s",), TOP, (("g", parse_type("<{t} TOP | Bool>")),
                                   ("f", parse_type("<{t} TOP | <{u} TOP | Bool ^ u == 0 -> g(t)>>"))))
    ty, rep = k.infer(ctx, parse_term("f(s)"))
    assert rep and show(ty) == "<{u} TOP | Bool ^ u == 0 -> g(s)>"


def _eq(k, ctx, a, b, ty):
    return k.judg_equal(ctx, parse_term(a), parse_term(b), parse_type(ty))


def test_beta_comp_eta_examples():
    k = _kernel()
    s = TriContext(("s",), TOP, (("x", parse_type("Bool")),))
    assert "Ext-Beta" in _eq(k, s, "(\\t^{t|TOP}. x : <{t} TOP | Bool>)(s)", "x", "Bool").conversion
    f = TriContext((), TOP, (("f", parse_type("<{t} TOP | Bool ^ t == 1 -> ff>")),))
    assert "Ext-Eta" in _eq(k, f, "f", "\\t^{t|TOP}. f(t)", "<{t} TOP | Bool ^ t == 1 -> ff>").conversion
    fs = TriContext(("s",), Eq("s", 1), f.types)
    assert "Ext-Comp" in _eq(k, fs, "f(s)", "ff", "Bool").conversion


def test_comp_is_tried_before_beta():
    k = _kernel()
    rep = _eq(k, TriContext(), "(\\t^{t|TOP}. tt : <{t} TOP | Bool ^ t == 0 -> tt>)(0)", "tt", "Bool")
    assert rep and "Ext-Comp" in rep.conversion and "Ext-Beta" not in rep.conversion


def test_comp_and_beta_are_confluent():
    """Wherever a checked abstraction meets its boundary, the β reduct and
    the Comp reduct are judgmentally equal."""
    tried = 0
    for path in ACCEPT:
        k = Kernel()
        decls = parse(path.read_text())
        check_program(decls, k)
        for d in decls:
            if not isinstance(d, TermDecl) or d.type is None or not isinstance(d.term, CLam):
                continue
            ty = k.unfold(d.type)
            if not isinstance(ty, TExt) or len(ty.cube) != len(d.term.cube):
                continue
            for pt in itertools.product((0, 1), repeat=len(ty.cube)):
                env = dict(zip(ty.cube, pt))
                if not (ty.phi.holds(env) and ty.psi.holds(env)):
                    continue
                body_ty = subst_cube(ty.body, env)
                beta = subst_cube(d.term.body, dict(zip(d.term.cube, pt)))
                comp = subst_cube(ty.partial, env)
                assert k.judg_equal(TriContext(), beta, comp, body_ty), (path.name, d.name, pt)
                assert k.judg_equal(TriContext(), CApp(Anno(d.term, ty), pt), beta, body_ty)
                tried += 1
    assert tried >= 10


def _rename_bound(node):
    """Rename every bound cube and term variable by priming it."""
    if isinstance(node, (CLam, TExt, TShape)):
        ren = {n: n + "_r" for n in node.cube}
        if isinstance(node, TShape):
            return TShape(tuple(ren.values()), node.tope.subst(ren))
        if isinstance(node, CLam):
            return CLam(tuple(ren.values()), node.psi.subst(ren), _rename_bound(subst_cube(node.body, ren)))
        return TExt(tuple(ren.values()), node.psi.subst(ren), _rename_bound(subst_cube(node.body, ren)),
                    node.phi.subst(ren), _rename_bound(subst_cube(node.partial, ren)))
    if isinstance(node, Lam):
        return Lam(node.var + "_r", _rename_bound(subst_term(node.body, {node.var: Var(node.var + "_r")})))
    if isinstance(node, (Type, Term)) and dataclasses.is_dataclass(node):
        return type(node)(*[_rename_bound(getattr(node, f.name)) for f in dataclasses.fields(node)])
    return node


def test_alpha_renaming_does_not_change_verdicts():
    for path in ACCEPT + REJECT:
        decls = parse(path.read_text())
        renamed = []
        for d in decls:
            changes = {f.name: _rename_bound(getattr(d, f.name)) for f in dataclasses.fields(d)
                       if isinstance(getattr(d, f.name), (Type, Term))}
            renamed.append(dataclasses.replace(d, **changes))
        before = [r.report.kind for r in check_program(decls).decls]
        after = [r.report.kind for r in check_program(renamed).decls]
        assert before == after, path.name


def test_subject_reduction_for_one_step():
    for path in ACCEPT:
        k = Kernel()
        report = check_program(parse(path.read_text()), k)
        for d in report.decls:
            if isinstance(d.decl, EqualDecl):
                reduced = k.whnf(d.decl.ctx, d.decl.lhs)
                assert k.check_term(d.decl.ctx, reduced, d.decl.type), (path.name, show(reduced))


def _stability_cases():
    for path in ACCEPT:
        k = Kernel()
        for d in check_program(parse(path.read_text()), k).decls:
            if isinstance(d.decl, EqualDecl) and d.decl.ctx.types:
                yield path.stem, k, d.decl


def test_identity_and_weakening_substitutions_are_stable():
    for name, k, d in _stability_cases():
        ctx, e, ty = d.ctx, d.lhs, d.type
        identity = {n: Var(n) for n, _ in ctx.types}
        assert k.check_subst_stability(ctx, e, ty, identity), name
        weaker = ctx.extend("extra", TConst(next(iter(k.sig.bases))))
        assert k.check_subst_stability(ctx, e, ty, {}, weaker), name


def test_substitution_into_boundary_produces_reindexed_extension():
    k = _kernel()
    ctx = TriContext((), TOP, (("x", parse_type("Bool")),))
    ty = parse_type("<{t} TOP | Bool ^ t == 1 -> x>")
    e = parse_term("\\t^{t|TOP}. x")
    sigma = {"x": Var("tt")}
    assert k.check_morphism(TriContext(), ctx, sigma)
    assert k.check_subst_stability(ctx, e, ty, sigma, TriContext())
    assert subst_term(ty, sigma) == parse_type("<{t} TOP | Bool ^ t == 1 -> tt>")


def test_substitution_preserves_rejection():
    k = _kernel()
    ctx = TriContext((), TOP, (("x", parse_type("Bool")), ("y", parse_type("Bool"))))
    ty = parse_type("<{t} TOP | Bool ^ t == 1 -> x>")
    e = parse_term("\\t^{t|TOP}. y")
    assert not k.check_term(ctx, e, ty)
    # identifying x and y makes the boundary hold, so that substitution is not verdict-preserving
    assert not k.check_subst_stability(ctx, e, ty, {"x": Var("y")}, ctx)
    assert k.check_subst_stability(ctx, e, ty, {"x": Var("tt"), "y": Var("ff")}, TriContext())
