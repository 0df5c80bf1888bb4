"""Bidirectional checker and judgmental equality for ``.stt`` programs.

Equality is decided by weak-head normalization (β for functions, pairs
and extension λ, plus the boundary computation ``f(s) ≡ a[s/t]`` when
``s`` lies in ``φ``) followed by a type-directed comparison that expands
η at function, pair and extension types.  Boundary computation is tried
before β, so normal forms do not depend on how a term was introduced.
Comparisons at base types split the tope context into its disjuncts when
the direct comparison fails.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .syntax import (Anno, App, BaseDecl, CApp, CheckDecl, CLam, Decl, Empty, EqualDecl, Fst,
                     Lam, Pair, Point, Snd, TConst, TermDecl, TExt, TPi, TriContext, TSigma, TShape,
                     Type, TypeDecl, Var, WfDecl, alpha_eq, free_cube_vars, free_vars, show, subst_cube,
                     subst_term)
from .topes import (And, Cube, Eq, NotAnInclusion, Or, Tope, conj, entailment_witness, fresh_name,
                    inconsistent, tope_entails, tope_equiv)

RULES = ("Ext-Form", "Ext-Intro", "Ext-Elim", "Ext-Comp", "Ext-Beta", "Ext-Eta")


class KernelError(Exception):
    def __init__(self, kind: str, reason: str):
        self.kind = kind
        self.reason = reason
        super().__init__(f"{kind}: {reason}")


@dataclass
class CheckReport:
    verdict: bool
    trace: list = field(default_factory=list)  # [(rule, node)]
    reason: str = ""
    kind: str = ""
    conversion: set = field(default_factory=set)  # rules fired while comparing, for equalities

    @property
    def rules(self) -> set:
        return {r for r, _ in self.trace}

    def __bool__(self):
        return self.verdict


@dataclass
class Signature:
    bases: dict = field(default_factory=dict)  # name -> constants
    constants: dict = field(default_factory=dict)  # constant -> base name
    aliases: dict = field(default_factory=dict)  # name -> Type
    defs: dict = field(default_factory=dict)  # name -> (Type, Term)

    def names(self) -> set:
        return set(self.bases) | set(self.constants) | set(self.aliases) | set(self.defs)


def disjuncts(tope: Tope) -> list:
    """Disjunctive normal form as a list of conjunctions."""
    if isinstance(tope, Or):
        return disjuncts(tope.left) + disjuncts(tope.right)
    if isinstance(tope, And):
        return [conj(a, b) for a in disjuncts(tope.left) for b in disjuncts(tope.right)]
    return [tope]


class Kernel:
    def __init__(self, sig: Optional[Signature] = None):
        self.sig = sig or Signature()
        self.trace: list = []

    # --- helpers ---------------------------------------------------------

    def _note(self, rule, node):
        self.trace.append((rule, show(node)))

    def _cube(self, ctx) -> Cube:
        return Cube(ctx.cube)

    def entails(self, ctx: TriContext, tope: Tope) -> bool:
        self._scope_topes(ctx.cube, tope)
        return tope_entails(self._cube(ctx), ctx.tope, tope)

    def is_inconsistent(self, ctx) -> bool:
        return inconsistent(self._cube(ctx), ctx.tope)

    @staticmethod
    def _scope_topes(cube, *topes):
        for t in topes:
            extra = t.free_vars() - set(cube)
            if extra:
                raise KernelError("ScopeError", f"unbound cube variable(s) {sorted(extra)} in {t}")

    def _scope_points(self, ctx, points):
        for p in points:
            if isinstance(p, str) and p not in ctx.cube:
                raise KernelError("ScopeError", f"unbound cube variable {p}")
            if isinstance(p, int) and p not in (0, 1):
                raise KernelError("ScopeError", f"{p} is not an endpoint")

    def _fresh_var(self, ctx, base, *nodes) -> str:
        taken = {n for n, _ in ctx.types} | self.sig.names()
        for node in nodes:
            taken |= free_vars(node)
        return fresh_name(base if base != "_" else "x", taken)

    def _open_cube(self, ctx: TriContext, names, *extra_topes) -> tuple:
        """Fresh names for a cube binder relative to ``ctx``."""
        taken = set(ctx.cube)
        out = []
        for n in names:
            m = fresh_name(n, taken)
            taken.add(m)
            out.append(m)
        return tuple(out)

    def _with_cube(self, ctx: TriContext, names, tope) -> TriContext:
        return TriContext(ctx.cube + tuple(names), conj(ctx.tope, tope), ctx.types)

    def _with_tope(self, ctx, tope) -> TriContext:
        return TriContext(ctx.cube, tope, ctx.types)

    def unfold(self, ty: Type) -> Type:
        seen = set()
        while isinstance(ty, TConst) and ty.name in self.sig.aliases:
            if ty.name in seen:
                raise KernelError("ScopeError", f"cyclic type alias {ty.name}")
            seen.add(ty.name)
            ty = self.sig.aliases[ty.name]
        return ty

    def _instantiate_ext(self, ty: TExt, names) -> tuple:
        ren = dict(zip(ty.cube, names))
        return (ty.psi.subst(ren), subst_cube(ty.body, ren), ty.phi.subst(ren), subst_cube(ty.partial, ren))

    # --- contexts --------------------------------------------------------

    def check_context(self, ctx: TriContext) -> None:
        if len(set(ctx.cube)) != len(ctx.cube):
            raise KernelError("ScopeError", f"repeated cube variable in {ctx.cube}")
        self._scope_topes(ctx.cube, ctx.tope)
        prefix = TriContext(ctx.cube, ctx.tope, ())
        for name, ty in ctx.types:
            self._check_type(prefix, ty)
            prefix = prefix.extend(name, ty)

    # --- types -----------------------------------------------------------

    def _check_type(self, ctx: TriContext, ty: Type) -> None:
        if isinstance(ty, TConst):
            if ty.name not in self.sig.bases and ty.name not in self.sig.aliases:
                raise KernelError("ScopeError", f"unknown type {ty.name}")
            return
        if isinstance(ty, (TPi, TSigma)):
            left, right = (ty.dom, ty.cod) if isinstance(ty, TPi) else (ty.fst, ty.snd)
            self._check_type(ctx, left)
            self._check_type(ctx.extend(ty.var, left), right)
            self._note("Pi-Form" if isinstance(ty, TPi) else "Sigma-Form", ty)
            return
        if isinstance(ty, TShape):
            self._distinct(ty.cube)
            self._scope_topes(ty.cube, ty.tope)
            self._note("Shape-Form", ty)
            return
        if isinstance(ty, TExt):
            self._distinct(ty.cube)
            self._scope_topes(ty.cube, ty.psi, ty.phi)
            witness = entailment_witness(Cube(ty.cube), ty.phi, ty.psi)
            if witness is not None:
                err = NotAnInclusion(Cube(ty.cube), ty.phi, ty.psi, witness)
                raise KernelError("NotAnInclusion", str(err))
            names = self._open_cube(ctx, ty.cube)
            psi, body, phi, partial = self._instantiate_ext(ty, names)
            self._check_type(self._with_cube(ctx, names, psi), body)
            self._check(self._with_cube(ctx, names, phi), partial, body)
            self._note("Ext-Form", ty)
            return
        raise KernelError("TypeMismatch", f"not a type: {ty!r}")

    @staticmethod
    def _distinct(names):
        if len(set(names)) != len(names):
            raise KernelError("ScopeError", f"repeated cube variable in {names}")

    def type_equal(self, ctx: TriContext, a: Type, b: Type) -> bool:
        a, b = self.unfold(a), self.unfold(b)
        if type(a) is not type(b):
            return False
        if isinstance(a, TConst):
            return a.name == b.name
        if isinstance(a, (TPi, TSigma)):
            la, ra = (a.dom, a.cod) if isinstance(a, TPi) else (a.fst, a.snd)
            lb, rb = (b.dom, b.cod) if isinstance(b, TPi) else (b.fst, b.snd)
            if not self.type_equal(ctx, la, lb):
                return False
            z = self._fresh_var(ctx, a.var, ra, rb)
            return self.type_equal(ctx.extend(z, la), subst_term(ra, {a.var: Var(z)}),
                                    subst_term(rb, {b.var: Var(z)}))
        if isinstance(a, TShape):
            if len(a.cube) != len(b.cube):
                return False
            ren = dict(zip(b.cube, a.cube))
            return tope_equiv(Cube(a.cube), a.tope, b.tope.subst(ren))
        if isinstance(a, TExt):
            if len(a.cube) != len(b.cube):
                return False
            names = self._open_cube(ctx, a.cube)
            pa, ba, fa, xa = self._instantiate_ext(a, names)
            pb, bb, fb, xb = self._instantiate_ext(b, names)
            local = Cube(names)
            if not (tope_equiv(local, pa, pb) and tope_equiv(local, fa, fb)):
                return False
            return (self.type_equal(self._with_cube(ctx, names, pa), ba, bb)
                    and self.judg_equal_raw(self._with_cube(ctx, names, fa), xa, xb, ba))
        return False

    # --- inference and checking ------------------------------------------

    def _lookup(self, ctx, name) -> Type:
        ty = ctx.lookup(name)
        if ty is not None:
            return ty
        if name in self.sig.defs:
            return self.sig.defs[name][0]
        if name in self.sig.constants:
            return TConst(self.sig.constants[name])
        raise KernelError("ScopeError", f"unbound variable {name}")

    def _infer(self, ctx: TriContext, e) -> Type:
        if isinstance(e, Var):
            ty = self._lookup(ctx, e.name)
            self._note("Var", e)
            return ty
        if isinstance(e, App):
            fty = self.unfold(self._infer(ctx, e.fn))
            if not isinstance(fty, TPi):
                raise KernelError("TypeMismatch", f"{show(e.fn)} is applied but has type {show(fty)}")
            self._check(ctx, e.arg, fty.dom)
            self._note("Pi-Elim", e)
            return subst_term(fty.cod, {fty.var: e.arg})
        if isinstance(e, CApp):
            fty = self.unfold(self._infer(ctx, e.fn))
            if not isinstance(fty, TExt):
                raise KernelError("TypeMismatch", f"{show(e.fn)} is evaluated at a point but has type {show(fty)}")
            if len(e.points) != len(fty.cube):
                raise KernelError("TypeMismatch", f"{show(e)} expects {len(fty.cube)} coordinate(s)")
            self._scope_points(ctx, e.points)
            ren = dict(zip(fty.cube, e.points))
            psi = fty.psi.subst(ren)
            witness = entailment_witness(self._cube(ctx), ctx.tope, psi)
            if witness is not None:
                raise KernelError("ShapeMiss", f"{ctx.tope} does not entail {psi} at {show(e)}: "
                                  f"witness {witness}")
            self._note("Ext-Elim", e)
            return subst_cube(fty.body, ren)
        if isinstance(e, (Fst, Snd)):
            ty = self.unfold(self._infer(ctx, e.arg))
            if not isinstance(ty, TSigma):
                raise KernelError("TypeMismatch", f"projection from {show(e.arg)} of type {show(ty)}")
            self._note("Sigma-Elim", e)
            if isinstance(e, Fst):
                return ty.fst
            return subst_term(ty.snd, {ty.var: Fst(e.arg)})
        if isinstance(e, Anno):
            self._check_type(ctx, e.type)
            self._check(ctx, e.term, e.type)
            return e.type
        raise KernelError("TypeMismatch", f"cannot infer a type for {show(e)}; annotate it")

    def _check(self, ctx: TriContext, e, ty: Type) -> None:
        ty = self.unfold(ty)
        if isinstance(e, Empty):
            if not self.is_inconsistent(ctx):
                raise KernelError("TypeMismatch", f"() only inhabits types over an empty shape, "
                                  f"but {ctx.tope} is satisfiable")
            self._note("Ex-Falso", e)
            return
        if isinstance(e, Lam) and isinstance(ty, TPi):
            z = self._fresh_var(ctx, e.var, e.body, ty.cod)
            self._check(ctx.extend(z, ty.dom), subst_term(e.body, {e.var: Var(z)}),
                        subst_term(ty.cod, {ty.var: Var(z)}))
            self._note("Pi-Intro", e)
            return
        if isinstance(e, Pair) and isinstance(ty, TSigma):
            self._check(ctx, e.fst, ty.fst)
            self._check(ctx, e.snd, subst_term(ty.snd, {ty.var: e.fst}))
            self._note("Sigma-Intro", e)
            return
        if isinstance(e, Point) and isinstance(ty, TShape):
            if len(e.points) != len(ty.cube):
                raise KernelError("TypeMismatch", f"{show(e)} has the wrong number of coordinates")
            self._scope_points(ctx, e.points)
            tope = ty.tope.subst(dict(zip(ty.cube, e.points)))
            witness = entailment_witness(self._cube(ctx), ctx.tope, tope)
            if witness is not None:
                raise KernelError("ShapeMiss", f"{show(e)} does not satisfy {tope}: witness {witness}")
            self._note("Shape-Intro", e)
            return
        if isinstance(e, CLam) and isinstance(ty, TExt):
            self._check_ext_intro(ctx, e, ty)
            return
        if isinstance(e, (Lam, Pair, Point, CLam)):
            raise KernelError("TypeMismatch", f"{show(e)} cannot have type {show(ty)}")
        found = self._infer(ctx, e)
        if not self.type_equal(ctx, found, ty):
            raise KernelError("TypeMismatch", f"{show(e)} has type {show(found)}, expected {show(ty)}")

    def _check_ext_intro(self, ctx, e: CLam, ty: TExt) -> None:
        if len(e.cube) != len(ty.cube):
            raise KernelError("TypeMismatch", f"{show(e)} binds {len(e.cube)} variable(s), "
                              f"the type {len(ty.cube)}")
        self._distinct(e.cube)
        names = self._open_cube(ctx, e.cube)
        psi, body_ty, phi, partial = self._instantiate_ext(ty, names)
        ren = dict(zip(e.cube, names))
        lam_psi = e.psi.subst(ren)
        self._scope_topes(names, lam_psi)
        if not tope_equiv(Cube(names), lam_psi, psi):
            raise KernelError("TypeMismatch", f"abstraction over {e.psi} checked against shape {ty.psi}")
        body = subst_cube(e.body, ren)
        self._check(self._with_cube(ctx, names, psi), body, body_ty)
        boundary = self._with_cube(ctx, names, phi)
        if not self.judg_equal_raw(boundary, body, partial, body_ty):
            raise KernelError("BoundaryMismatch", f"body {show(body)} differs from {show(partial)} "
                              f"on {phi}")
        self._note("Ext-Intro", e)

    # --- normalization ---------------------------------------------------

    def _try_infer(self, ctx, e) -> Optional[Type]:
        saved = self.trace
        self.trace = []
        try:
            return self._infer(ctx, e)
        except KernelError:
            return None
        finally:
            self.trace = saved

    def whnf(self, ctx: TriContext, e):
        while True:
            if isinstance(e, Var):
                if ctx.lookup(e.name) is None and e.name in self.sig.defs:
                    e = self.sig.defs[e.name][1]
                    continue
                return e
            if isinstance(e, Anno):
                e = e.term
                continue
            if isinstance(e, App):
                fn = self.whnf(ctx, e.fn)
                if isinstance(fn, Lam):
                    self._note("Pi-Beta", e)
                    e = subst_term(fn.body, {fn.var: e.arg})
                    continue
                return App(fn, e.arg)
            if isinstance(e, (Fst, Snd)):
                arg = self.whnf(ctx, e.arg)
                if isinstance(arg, Pair):
                    self._note("Sigma-Beta", e)
                    e = arg.fst if isinstance(e, Fst) else arg.snd
                    continue
                return type(e)(arg)
            if isinstance(e, CApp):
                fty = self._try_infer(ctx, e.fn)
                fty = self.unfold(fty) if fty is not None else None
                if isinstance(fty, TExt) and len(fty.cube) == len(e.points):
                    ren = dict(zip(fty.cube, e.points))
                    if tope_entails(self._cube(ctx), ctx.tope, fty.phi.subst(ren)):
                        self._note("Ext-Comp", e)
                        e = subst_cube(fty.partial, ren)
                        continue
                fn = self.whnf(ctx, e.fn)
                if isinstance(fn, CLam) and len(fn.cube) == len(e.points):
                    self._note("Ext-Beta", e)
                    e = subst_cube(fn.body, dict(zip(fn.cube, e.points)))
                    continue
                return CApp(fn, e.points)
            return e

    # --- equality --------------------------------------------------------

    def judg_equal_raw(self, ctx: TriContext, a, b, ty: Type) -> bool:
        if self.is_inconsistent(ctx):
            self._note("Ex-Falso", a)
            return True
        ty = self.unfold(ty)
        if isinstance(ty, TPi):
            z = self._fresh_var(ctx, ty.var, a, b, ty.cod)
            return self.judg_equal_raw(ctx.extend(z, ty.dom), App(a, Var(z)), App(b, Var(z)),
                                       subst_term(ty.cod, {ty.var: Var(z)}))
        if isinstance(ty, TSigma):
            return (self.judg_equal_raw(ctx, Fst(a), Fst(b), ty.fst)
                    and self.judg_equal_raw(ctx, Snd(a), Snd(b), subst_term(ty.snd, {ty.var: Fst(a)})))
        if isinstance(ty, TExt):
            names = self._open_cube(ctx, ty.cube)
            psi, body_ty, _, _ = self._instantiate_ext(ty, names)
            if not (isinstance(a, CLam) and isinstance(b, CLam)):
                self._note("Ext-Eta", a if not isinstance(a, CLam) else b)
            return self.judg_equal_raw(self._with_cube(ctx, names, psi), CApp(a, names), CApp(b, names),
                                       body_ty)
        if self._compare_whnf(ctx, a, b, ty):
            return True
        cases = disjuncts(ctx.tope)
        if len(cases) > 1:
            return all(self.judg_equal_raw(self._with_tope(ctx, c), a, b, ty) for c in cases)
        return False

    def _compare_whnf(self, ctx, a, b, ty) -> bool:
        a, b = self.whnf(ctx, a), self.whnf(ctx, b)
        if isinstance(ty, TShape) and isinstance(a, Point) and isinstance(b, Point):
            return self._same_points(ctx, a.points, b.points)
        return self._neutral_equal(ctx, a, b)

    def _same_points(self, ctx, pa, pb) -> bool:
        return len(pa) == len(pb) and all(
            tope_entails(self._cube(ctx), ctx.tope, Eq(x, y)) for x, y in zip(pa, pb))

    def _neutral_equal(self, ctx, a, b) -> bool:
        if type(a) is not type(b):
            return False
        if isinstance(a, Var):
            return a.name == b.name
        if isinstance(a, App):
            if not self._neutral_equal(ctx, self.whnf(ctx, a.fn), self.whnf(ctx, b.fn)):
                return False
            fty = self._try_infer(ctx, a.fn)
            fty = self.unfold(fty) if fty is not None else None
            if not isinstance(fty, TPi):
                return alpha_eq(a.arg, b.arg)
            return self.judg_equal_raw(ctx, a.arg, b.arg, fty.dom)
        if isinstance(a, CApp):
            return (self._same_points(ctx, a.points, b.points)
                    and self._neutral_equal(ctx, self.whnf(ctx, a.fn), self.whnf(ctx, b.fn)))
        if isinstance(a, (Fst, Snd)):
            return self._neutral_equal(ctx, self.whnf(ctx, a.arg), self.whnf(ctx, b.arg))
        if isinstance(a, Point):
            return self._same_points(ctx, a.points, b.points)
        return alpha_eq(a, b)

    # --- public API ------------------------------------------------------

    def _run(self, thunk) -> CheckReport:
        self.trace = []
        try:
            thunk()
        except KernelError as err:
            return CheckReport(False, self.trace, err.reason, err.kind)
        except RecursionError:
            return CheckReport(False, self.trace, "normalization depth exceeded", "TypeMismatch")
        return CheckReport(True, self.trace)

    def check_type(self, ctx: TriContext, ty: Type) -> CheckReport:
        return self._run(lambda: (self.check_context(ctx), self._check_type(ctx, ty)))

    def check_term(self, ctx: TriContext, e, ty: Type) -> CheckReport:
        return self._run(lambda: (self.check_context(ctx), self._check_type(ctx, ty), self._check(ctx, e, ty)))

    def infer(self, ctx: TriContext, e) -> tuple:
        out = []
        report = self._run(lambda: (self.check_context(ctx), out.append(self._infer(ctx, e))))
        return (out[0] if out else None), report

    def judg_equal(self, ctx: TriContext, a, b, ty: Type) -> CheckReport:
        """Both sides are checked first, then compared."""
        def go():
            self.check_context(ctx)
            self._check_type(ctx, ty)
            self._check(ctx, a, ty)
            self._check(ctx, b, ty)
            mark = len(self.trace)
            same = self.judg_equal_raw(ctx, a, b, ty)
            fired.update(r for r, _ in self.trace[mark:])
            if not same:
                raise KernelError("NotEqual", f"{show(a)} and {show(b)} are not judgmentally equal")
        fired: set = set()
        report = self._run(go)
        report.conversion = fired
        return report

    def check_morphism(self, target: TriContext, ctx: TriContext, sigma: dict) -> CheckReport:
        """``sigma`` is a context morphism ``target -> ctx``."""
        def go():
            self.check_context(target)
            if not set(ctx.cube) <= set(target.cube) or not tope_entails(
                    Cube(target.cube), target.tope, ctx.tope):
                raise KernelError("TypeMismatch", "cube or tope context is not preserved")
            for name, ty in ctx.types:
                self._check(target, sigma.get(name, Var(name)), subst_term(ty, sigma))
        return self._run(go)

    def check_subst_stability(self, ctx: TriContext, e, ty: Type, sigma: dict,
                              target: Optional[TriContext] = None) -> bool:
        """Checking ``e : ty`` and checking its image under ``sigma`` agree,
        and every type former in ``ty`` commutes with ``sigma``."""
        target = target if target is not None else ctx
        before = self.check_term(ctx, e, ty).verdict
        after = self.check_term(target, subst_term(e, sigma), subst_term(ty, sigma)).verdict
        return before == after and formers_commute(ty, sigma)


def formers_commute(node, sigma: dict) -> bool:
    """Substituting into a type former equals the former of the substituted
    components, for every Π, Σ and extension node reachable without
    crossing a binder that captures ``sigma``."""
    live = set().union(*(free_vars(v) for v in sigma.values())) if sigma else set()
    live_cube = set().union(*(free_cube_vars(v) for v in sigma.values())) if sigma else set()

    def walk(n) -> bool:
        if isinstance(n, TExt):
            if set(n.cube) & live_cube:
                return True
            expected = TExt(n.cube, n.psi, subst_term(n.body, sigma), n.phi, subst_term(n.partial, sigma))
            return alpha_eq(subst_term(n, sigma), expected) and walk(n.body)
        if isinstance(n, (TPi, TSigma)):
            left, right = (n.dom, n.cod) if isinstance(n, TPi) else (n.fst, n.snd)
            if n.var in live or n.var in sigma:
                return walk(left)
            expected = type(n)(n.var, subst_term(left, sigma), subst_term(right, sigma))
            return alpha_eq(subst_term(n, sigma), expected) and walk(left) and walk(right)
        return True

    return walk(node)


# --- programs ------------------------------------------------------------


@dataclass
class DeclReport:
    decl: Decl
    report: CheckReport

    @property
    def verdict(self):
        return self.report.verdict


@dataclass
class ProgramReport:
    decls: list

    @property
    def verdict(self) -> bool:
        return all(d.verdict for d in self.decls)

    @property
    def first_failure(self) -> Optional[DeclReport]:
        return next((d for d in self.decls if not d.verdict), None)

    @property
    def rules(self) -> set:
        return set().union(*(d.report.rules for d in self.decls)) if self.decls else set()


def check_program(decls, kernel: Optional[Kernel] = None) -> ProgramReport:
    """Check declarations in order; failed definitions are not added."""
    k = kernel or Kernel()
    sig = k.sig
    out = []
    empty = TriContext()
    for d in decls:
        if isinstance(d, BaseDecl):
            clash = ({d.name} | set(d.constants)) & sig.names()
            if clash or len(set(d.constants)) != len(d.constants):
                rep = CheckReport(False, [], f"name(s) already declared: {sorted(clash) or d.constants}",
                                  "ScopeError")
            else:
                sig.bases[d.name] = d.constants
                for c in d.constants:
                    sig.constants[c] = d.name
                rep = CheckReport(True, [("Base-Form", d.name)])
        elif isinstance(d, TypeDecl):
            rep = k.check_type(empty, d.type)
            if rep and d.name in sig.names():
                rep = CheckReport(False, rep.trace, f"{d.name} already declared", "ScopeError")
            if rep:
                sig.aliases[d.name] = d.type
        elif isinstance(d, TermDecl):
            if d.type is None:
                ty, rep = k.infer(empty, d.term)
            else:
                ty, rep = d.type, k.check_term(empty, d.term, d.type)
            if rep and d.name in sig.names():
                rep = CheckReport(False, rep.trace, f"{d.name} already declared", "ScopeError")
            if rep:
                sig.defs[d.name] = (ty, d.term)
        elif isinstance(d, CheckDecl):
            rep = k.check_term(d.ctx, d.term, d.type)
        elif isinstance(d, EqualDecl):
            rep = k.judg_equal(d.ctx, d.lhs, d.rhs, d.type)
        elif isinstance(d, WfDecl):
            rep = k.check_type(d.ctx, d.type)
        else:
            raise TypeError(d)
        out.append(DeclReport(d, rep))
    return ProgramReport(out)


def check_source(text: str) -> ProgramReport:
    from .syntax import parse
    return check_program(parse(text))
