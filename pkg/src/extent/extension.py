"""Extension types in the presheaf model.

The former ``Ext_j`` reads, at a stage ``c`` and an element ``γ``, only
the restriction of ``⟨A, a⟩`` along ``y(c) × ψ``; its code has as fiber
over ``f: d -> c`` the sorted set of total sections extending ``a``.  The
Leibniz-cotensor pullback is built separately from exponentials and
pullbacks and serves as a cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .canon import cached
from .presheaf import (FinCat, FinPresheaf, PresheafMap, exponential, interval, pairing, product, pullback,
                       solve_sections, subpresheaf, yoneda)
from .topes import Cube, ShapeInclusion, mk_shape_inclusion
from .universe import (Family, LocalFamily, Universe, UniverseTotal, _bounded_families,
                       build_universe, comprehension, former_code, restrict_section)


class UnsupportedBase(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SemShape:
    """``⟦j: φ ↪ ψ⟧`` over a base: ``phi`` and ``psi`` are sub-presheaves of
    the cube, and ``j_mono`` is the subset inclusion."""

    inclusion: ShapeInclusion
    cat: FinCat
    cube_ps: FinPresheaf
    psi: FinPresheaf
    phi: FinPresheaf
    j_mono: PresheafMap
    phi_mask: tuple  # per object: is the ψ-element in φ

    def __repr__(self):
        return f"SemShape({self.inclusion}, {self.cat.name})"

    def __lt__(self, other):
        return id(self) < id(other)


def _cube_presheaf(cat: FinCat, n: int) -> FinPresheaf:
    I = interval(cat)
    import itertools
    reps = [list(itertools.product(I.labels[c], repeat=n)) for c in range(cat.n_objects)]
    return FinPresheaf.build(cat, reps, lambda m, xs: tuple(tuple(x[i] for i in cat.morphisms[m][2]) for x in xs),
                             site="local_elements", cap=None)


def _satisfies(cube: Cube, tope, dim: int, xs) -> bool:
    return all(tope.holds({v: x[k] for v, x in zip(cube.dims, xs)}) for k in range(dim + 1))


@cached()
def interpret_shape(j: ShapeInclusion, base: FinCat) -> SemShape:
    dims = getattr(base, "dims", None)
    if dims is None:
        raise UnsupportedBase(f"base {base.name} has no designated interval")
    cube = _cube_presheaf(base, len(j.cube))

    def holds(tope):
        return lambda c, x: _satisfies(j.cube, tope, dims[c], cube.labels[c][x])

    psi_sub, psi_inc = subpresheaf(cube, holds(j.upper))
    psi = FinPresheaf.build(base, [[cube.labels[c][x] for x in psi_sub.labels[c]] for c in range(base.n_objects)],
                            lambda m, xs: tuple(tuple(x[i] for i in base.morphisms[m][2]) for x in xs),
                            site="local_elements", cap=None)
    in_phi = holds(j.lower)
    mask = tuple(tuple(in_phi(c, cube.index_of(c, xs)) for xs in psi.labels[c]) for c in range(base.n_objects))
    phi_sub, j_mono = subpresheaf(psi, lambda c, x: mask[c][x])
    phi = FinPresheaf(base, phi_sub.sizes, phi_sub.restrict,
                      tuple(tuple(psi.labels[c][x] for x in phi_sub.labels[c]) for c in range(base.n_objects)))
    j_mono = PresheafMap(phi, psi, j_mono.tables)
    return SemShape(j, base, cube, psi, phi, j_mono, mask)


def shape_from_topes(base: FinCat, dims, lower, upper) -> SemShape:
    return interpret_shape(mk_shape_inclusion(Cube(tuple(dims)), lower, upper), base)


# --- stage data ----------------------------------------------------------


@dataclass(frozen=True, order=True)
class ExtDatum(LocalFamily):
    """An element of ``U^{Ext j}(c)``: codes over ``y(c) × ψ`` and the
    partial section over ``y(c) × φ`` (as fixed values)."""

    shape: SemShape = None

    def pact(self, m, g, p):
        return self.shape.psi.act(m, p)

    def _extra_reindex(self, f):
        return {"shape": self.shape}


@dataclass(frozen=True)
class ExtInput:
    """Instance data ``⟨A, a⟩ : Γ -> U^{Ext j}``.

    ``A`` is a family over ``Γ × ψ`` (labels ``(γ, p)``); ``a`` has one
    row per object, with a point for elements over ``φ`` and None elsewhere.
    """

    shape: SemShape
    gamma: FinPresheaf
    total: FinPresheaf  # Γ × ψ
    A: Family
    a: tuple

    def index(self, e: int, g: int, p: int) -> int:
        return self.total.index_of(e, (g, p))


def ext_input(shape: SemShape, gamma: FinPresheaf, codes, a) -> ExtInput:
    total, _, _ = product(gamma, shape.psi)
    return ExtInput(shape, gamma, total, Family.of(total, codes), tuple(tuple(r) for r in a))


def check_partial_section(inp: ExtInput) -> None:
    """``a`` is natural over ``Γ × φ`` and takes values in the fibers."""
    P, cat, mask = inp.total, inp.total.cat, inp.shape.phi_mask
    for c in range(cat.n_objects):
        for i, (g, p) in enumerate(P.labels[c]):
            v = inp.a[c][i]
            if (v is not None) != mask[c][p]:
                raise ValueError("partial section defined off φ or missing on φ")
            if v is None:
                continue
            if not 0 <= v < inp.A.code(c, i).point_count():
                raise ValueError("partial section value out of fiber")
            for m in cat.into(c):
                if inp.a[cat.src(m)][P.act(m, i)] != inp.A.code(c, i).act_id(m, v):
                    raise ValueError("partial section is not natural")


def ext_datum(inp: ExtInput, c: int, gamma: int) -> ExtDatum:
    cat, G, psi = inp.gamma.cat, inp.gamma, inp.shape.psi
    keys, codes, fixed = [], [], []
    for e in range(cat.n_objects):
        ks, cs, fs = [], [], []
        for g in cat.hom(e, c):
            ge = G.act(g, gamma)
            for p in range(psi.sizes[e]):
                i = inp.index(e, ge, p)
                ks.append((g, p))
                cs.append(inp.A.code(e, i))
                fs.append(inp.a[e][i])
        keys.append(tuple(ks))
        codes.append(tuple(cs))
        fixed.append(tuple(fs))
    return ExtDatum(cat, c, tuple(keys), tuple(codes), tuple(fixed), shape=inp.shape)


def reindex_input(inp: ExtInput, sigma: PresheafMap) -> ExtInput:
    """``⟨σ*A, σ*a⟩``: precomposition with ``σ × ψ``."""
    D, cat = sigma.src, sigma.src.cat
    total, _, _ = product(D, inp.shape.psi)
    src = [[inp.index(c, sigma.tables[c][d], p) for d, p in total.labels[c]] for c in range(cat.n_objects)]
    codes = [[inp.A.code(c, i) for i in row] for c, row in enumerate(src)]
    a = [[inp.a[c][i] for i in row] for c, row in enumerate(src)]
    return ExtInput(inp.shape, D, total, Family.of(total, codes, check=False), tuple(tuple(r) for r in a))


def reindex_section(inp: ExtInput, sigma: PresheafMap, b: tuple, new_total: FinPresheaf) -> tuple:
    """``σ*b`` for a section ``b`` over ``Γ × ψ``."""
    cat = sigma.src.cat
    return tuple(tuple(b[c][inp.index(c, sigma.tables[c][d], p)] for d, p in new_total.labels[c])
                 for c in range(cat.n_objects))


# --- formers -------------------------------------------------------------


def ext_code(datum: ExtDatum, use_cache: bool = True, limit: Optional[int] = None):
    """``Ext_j`` on one element of the generic context; returns ``(code, labels)``."""
    return former_code(datum, "ext_fiber", limit=limit, use_cache=use_cache)


def ext_former(inp: ExtInput, use_cache: bool = True) -> PresheafMap:
    """``Ext_j ∘ ⟨A, a⟩ : Γ -> U``."""
    G, cat = inp.gamma, inp.gamma.cat
    tables = tuple(tuple(ext_code(ext_datum(inp, c, g), use_cache)[0] for g in range(G.sizes[c]))
                   for c in range(cat.n_objects))
    return PresheafMap(G, Universe(cat), tables)


def local_section(inp: ExtInput, b: tuple, datum: ExtDatum, gamma: int) -> tuple:
    """Restriction of a section ``b`` over ``Γ × ψ`` along ``γ × ψ``."""
    G = inp.gamma
    out = []
    for e, keys in enumerate(datum.keys):
        for g, p in keys:
            out.append(b[e][inp.index(e, G.act(g, gamma), p)])
    return tuple(out)


def lambda_former(inp: ExtInput, b: tuple, use_cache: bool = True) -> PresheafMap:
    """``Λ_j ∘ ⟨A, a, b⟩ : Γ -> Ũ``: the point of the extension code naming ``b``."""
    G, cat = inp.gamma, inp.gamma.cat
    tables = []
    for c in range(cat.n_objects):
        row = []
        for g in range(G.sizes[c]):
            d = ext_datum(inp, c, g)
            code, labels = ext_code(d, use_cache)
            row.append((code, labels[cat.ident[c]].index(local_section(inp, b, d, g))))
        tables.append(tuple(row))
    return PresheafMap(G, UniverseTotal(cat), tuple(tables))


def app(inp: ExtInput, f: tuple, s: PresheafMap, use_cache: bool = True) -> tuple:
    """``ev ∘ ⟨f, s⟩``: ``f[c][γ]`` names a point of ``Ext_j(A, a)(γ)`` and
    ``s: Γ -> ψ``; the result is a section of ``A`` along ``⟨id, s⟩``."""
    G, cat = inp.gamma, inp.gamma.cat
    out = []
    for c in range(cat.n_objects):
        row = []
        for g in range(G.sizes[c]):
            d = ext_datum(inp, c, g)
            _, labels = ext_code(d, use_cache)
            b = labels[cat.ident[c]][f[c][g]]
            row.append(b[d.position(c, (cat.ident[c], s.tables[c][g]))])
        out.append(tuple(row))
    return tuple(out)


def total_sections(inp: ExtInput, *, rng=None, first: bool = False, limit: Optional[int] = None) -> list:
    """Sections ``b`` of ``A`` over ``Γ × ψ`` with ``b ∘ j = a`` (as row tables)."""
    P = inp.total
    fixed = {(c, i): v for c, row in enumerate(inp.a) for i, v in enumerate(row) if v is not None}
    flats = solve_sections(P, lambda c, i: inp.A.code(c, i).point_count(),
                           lambda m, c, i, v: inp.A.code(c, i).act_id(m, v), fixed,
                           rng=rng, first=first, limit=limit)
    out = []
    for flat in flats:
        pos, rows = 0, []
        for n in P.sizes:
            rows.append(tuple(flat[pos:pos + n]))
            pos += n
        out.append(tuple(rows))
    return out


# --- generic contexts ----------------------------------------------------


@dataclass(frozen=True)
class ExtGenericCtx:
    UExt: FinPresheaf  # labels: ExtDatum
    ULam: FinPresheaf  # labels: (ExtDatum, section)
    proj: PresheafMap


def generic_ext_context(shape: SemShape, k: int, cap: Optional[int] = None) -> ExtGenericCtx:
    """Enumerate ``U^{Ext j}`` and ``U^{Λ j}`` for codes bounded by ``k``."""
    cat = shape.cat
    U, _, _ = build_universe(cat, k, cap)
    choices = [list(U.labels[e]) for e in range(cat.n_objects)]
    stages = []
    for c in range(cat.n_objects):
        yc = yoneda(cat, c)
        gid = yc.index_of(c, cat.ident[c])
        data = []
        for codes in _bounded_families(product(yc, shape.psi)[0], choices, cap):
            inp0 = ext_input(shape, yc, codes, [[None] * len(r) for r in codes])
            for a in _partial_sections(inp0, cap):
                inp = ExtInput(shape, yc, inp0.total, inp0.A, a)
                data.append(ext_datum(inp, c, gid))
        stages.append(data)
    UExt = FinPresheaf.build(cat, stages, lambda m, d: d.reindex(m), site="code", cap=cap)
    lam_reps = [[(d, b) for d in ls for b in ext_code(d)[1][cat.ident[c]]] for c, ls in enumerate(UExt.labels)]

    def lam_act(m, rep):
        d, b = rep
        dm = d.reindex(m)
        return dm, restrict_section(d, b, dm, m)

    ULam = FinPresheaf.build(cat, lam_reps, lam_act, site="code", cap=None)
    proj = PresheafMap(ULam, UExt, tuple(tuple(UExt.index_of(c, d) for d, _ in ls)
                                          for c, ls in enumerate(ULam.labels)))
    return ExtGenericCtx(UExt, ULam, proj)


def _partial_sections(inp: ExtInput, cap):
    """All natural partial sections over ``Γ × φ`` of ``inp.A``."""
    P, mask = inp.total, inp.shape.phi_mask
    sub, inc = subpresheaf(P, lambda c, i: mask[c][P.labels[c][i][1]])
    flats = solve_sections(sub, lambda c, i: inp.A.code(c, inc.tables[c][i]).point_count(),
                           lambda m, c, i, v: inp.A.code(c, inc.tables[c][i]).act_id(m, v), limit=cap)
    for flat in flats:
        rows = [[None] * n for n in P.sizes]
        pos = 0
        for c, n in enumerate(sub.sizes):
            for i in range(n):
                rows[c][inc.tables[c][i]] = flat[pos]
                pos += 1
        yield tuple(tuple(r) for r in rows)


def generic_ext_former(ctx: ExtGenericCtx) -> PresheafMap:
    cat = ctx.UExt.cat
    return PresheafMap(ctx.UExt, Universe(cat), tuple(tuple(ext_code(d)[0] for d in ls) for ls in ctx.UExt.labels))


def generic_lambda_former(ctx: ExtGenericCtx) -> PresheafMap:
    cat = ctx.UExt.cat

    def point(c, d, b):
        code, labels = ext_code(d)
        return code, labels[cat.ident[c]].index(b)

    return PresheafMap(ctx.ULam, UniverseTotal(cat),
                       tuple(tuple(point(c, d, b) for d, b in ls) for c, ls in enumerate(ctx.ULam.labels)))


# --- the Leibniz-cotensor construction -----------------------------------


@cached(512)
def _exp_domain(cat, c, Y):
    D, _, _ = product(yoneda(cat, c), Y)
    return D


def _exp_element(E: FinPresheaf, Y: FinPresheaf, c: int, func) -> int:
    """Index in ``X^Y(c)`` of the map ``(e, g, y) ↦ func(e, g, y)``."""
    cat = E.cat
    D, yc = _exp_domain(cat, c, Y), yoneda(cat, c)
    flat = tuple(func(e, yc.labels[e][g], y) for e in range(cat.n_objects) for g, y in D.labels[e])
    return E.index_of(c, flat)


def _exp_map(src_exp, src_Y, dst_exp, dst_Y, func) -> PresheafMap:
    """Map between exponentials given pointwise on the underlying functions.

    ``func(t, e, g, y)`` evaluates the image of ``t`` (a dict on
    ``(e, g, y)``) at a point of the destination domain.
    """
    cat = src_exp.cat
    tables = []
    for c in range(cat.n_objects):
        D, yc = _exp_domain(cat, c, src_Y), yoneda(cat, c)
        keys = [(e, yc.labels[e][g], y) for e in range(cat.n_objects) for g, y in D.labels[e]]
        row = []
        for flat in src_exp.labels[c]:
            t = dict(zip(keys, flat))
            row.append(_exp_element(dst_exp, dst_Y, c, lambda e, g, y: func(t, e, g, y)))
        tables.append(tuple(row))
    return PresheafMap(src_exp, dst_exp, tuple(tables))


def leibniz_ext(inp: ExtInput, cap: Optional[int] = None):
    """Extension object as the pullback of the Leibniz cotensor along ``⟨a, η⟩``.

    Returns ``{(c, γ): sorted sections}``, each section a dict from
    ``(e, g, p)`` to a point of ``A`` at ``(γ·g, p)``.
    """
    shape, G, P, cat = inp.shape, inp.gamma, inp.total, inp.gamma.cat
    psi, phi, j = shape.psi, shape.phi, shape.j_mono
    sq = comprehension(inp.A)
    E, p = sq.total, sq.p
    Epsi, _ = exponential(E, psi, cap)
    Ephi, _ = exponential(E, phi, cap)
    Ppsi, _ = exponential(P, psi, cap)
    Pphi, _ = exponential(P, phi, cap)
    restrict_E = _exp_map(Epsi, psi, Ephi, phi, lambda t, e, g, y: t[e, g, j.tables[e][y]])
    post_E = _exp_map(Epsi, psi, Ppsi, psi, lambda t, e, g, y: p.tables[e][t[e, g, y]])
    post_Ephi = _exp_map(Ephi, phi, Pphi, phi, lambda t, e, g, y: p.tables[e][t[e, g, y]])
    restrict_P = _exp_map(Ppsi, psi, Pphi, phi, lambda t, e, g, y: t[e, g, j.tables[e][y]])
    Q, q1, q2 = pullback(post_Ephi, restrict_P)
    leib = pairing(restrict_E, post_E, Q)
    rows = []
    for c in range(cat.n_objects):
        row = []
        for gamma in range(G.sizes[c]):
            def a_hat(e, g, y):
                i = inp.index(e, G.act(g, gamma), j.tables[e][y])
                return E.index_of(e, (i, inp.a[e][i]))

            def eta(e, g, y):
                return inp.index(e, G.act(g, gamma), y)

            row.append(Q.index_of(c, (_exp_element(Ephi, phi, c, a_hat), _exp_element(Ppsi, psi, c, eta))))
        rows.append(tuple(row))
    a_eta = PresheafMap(G, Q, tuple(rows))
    X, x1, x2 = pullback(a_eta, leib)
    out = {}
    for c in range(cat.n_objects):
        D, yc = _exp_domain(cat, c, psi), yoneda(cat, c)
        keys = [(e, yc.labels[e][g], y) for e in range(cat.n_objects) for g, y in D.labels[e]]
        for gamma in range(G.sizes[c]):
            out[c, gamma] = []
        for gamma, t in X.labels[c]:
            fn = Epsi.labels[c][t]
            out[c, gamma].append({k: E.labels[k[0]][v][1] for k, v in zip(keys, fn)})
    return out
