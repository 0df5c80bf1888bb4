"""A split universe of bounded presheaf codes.

An element of ``U(c)`` is a *code*: a presheaf on the slice category
``C/c`` with canonically named carriers.  Restriction along ``m: c' -> c``
is precomposition with the slice functor ``f ↦ m ∘ f``, so the universe
is strictly functorial and substitution of a family ``A: Γ -> U`` along
``σ`` is literal composition of tables.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Optional

from .canon import canonical, register_cache
from .presheaf import (FinCat, FinPresheaf, NotNatural, PresheafMap, SizeLimit, carrier_cap,
                       solve_sections)


# --- slices and codes ----------------------------------------------------


class Slice:
    """Objects and non-identity morphisms of ``C/c``."""

    def __init__(self, cat: FinCat, c: int):
        self.cat, self.c = cat, c
        self.objs = cat.into(c)
        self.pos = {f: i for i, f in enumerate(self.objs)}
        self.mors = tuple((f, h) for f in self.objs for h in cat.into(cat.src(f)) if not cat.is_identity(h))
        self.mpos = {fh: i for i, fh in enumerate(self.mors)}


@functools.lru_cache(maxsize=None)
def slice_of(cat: FinCat, c: int) -> Slice:
    return Slice(cat, c)


@functools.lru_cache(maxsize=None)
def _reindex_plan(cat: FinCat, m: int):
    """Positions in the slice over ``dst(m)`` read by reindexing along ``m``."""
    new, old = slice_of(cat, cat.src(m)), slice_of(cat, cat.dst(m))
    size_src = tuple(old.pos[cat.compose(m, f)] for f in new.objs)
    table_src = tuple(old.mpos[cat.compose(m, f), h] for f, h in new.mors)
    return size_src, table_src


@dataclass(frozen=True)
class Code:
    """An element of the universe at stage ``c``.

    ``sizes[i]`` is the fiber over the i-th slice object ``f: d -> c``;
    ``tables[i]`` restricts along the i-th slice morphism ``h: f∘h -> f``.
    """

    cat: FinCat
    c: int
    sizes: tuple
    tables: tuple

    def __repr__(self):
        return f"Code(c={self.c}, sizes={self.sizes})"

    def __lt__(self, other):
        return (self.c, self.sizes, self.tables) < (other.c, other.sizes, other.tables)

    @property
    def slice(self) -> Slice:
        return slice_of(self.cat, self.c)

    def fiber(self, f: int) -> int:
        return self.sizes[self.slice.pos[f]]

    def point_count(self) -> int:
        """Size of the fiber over the identity slice object."""
        return self.fiber(self.cat.ident[self.c])

    def act(self, f: int, h: int, x: int) -> int:
        if self.cat.is_identity(h):
            return x
        return self.tables[self.slice.mpos[f, h]][x]

    def act_id(self, m: int, x: int) -> int:
        return self.act(self.cat.ident[self.c], m, x)

    def reindex(self, m: int) -> "Code":
        if self.cat.is_identity(m):
            return self
        size_src, table_src = _reindex_plan(self.cat, m)
        return Code(self.cat, self.cat.src(m), tuple(self.sizes[i] for i in size_src),
                    tuple(self.tables[i] for i in table_src))

    def check(self) -> "Code":
        cat, sl = self.cat, self.slice
        for (f, h), table in zip(sl.mors, self.tables):
            if len(table) != self.fiber(f) or any(not 0 <= v < self.fiber(cat.compose(f, h)) for v in table):
                raise NotNatural("code table out of range")
        for f in sl.objs:
            for h in cat.into(cat.src(f)):
                for k in cat.into(cat.src(h)):
                    for x in range(self.fiber(f)):
                        lhs = self.act(f, cat.compose(h, k), x)
                        rhs = self.act(cat.compose(f, h), k, self.act(f, h, x))
                        if lhs != rhs:
                            raise NotNatural("code is not functorial on the slice")
        return self

    @classmethod
    def build(cls, cat: FinCat, c: int, reps_by_obj: dict, act_rep, site: str = "code"):
        """Canonically named code from fibers of concrete representations.

        ``act_rep(f, h, rep)`` restricts ``rep`` over ``f`` to one over ``f∘h``.
        Returns the code and the per-object sorted representations.
        """
        sl = slice_of(cat, c)
        labels = {f: canonical(reps_by_obj[f], site) for f in sl.objs}
        index = {f: {r: i for i, r in enumerate(ls)} for f, ls in labels.items()}
        tables = tuple(tuple(index[cat.compose(f, h)][act_rep(f, h, r)] for r in labels[f])
                       for f, h in sl.mors)
        return cls(cat, c, tuple(len(labels[f]) for f in sl.objs), tables), labels


def constant_code(cat: FinCat, c: int, n: int) -> Code:
    sl = slice_of(cat, c)
    return Code(cat, c, (n,) * len(sl.objs), tuple(tuple(range(n)) for _ in sl.mors))


# --- the universe as a (large) presheaf ----------------------------------


@dataclass(frozen=True, eq=False)
class Universe:
    """``U``: all codes; only ``act`` is needed to be a presheaf target."""

    cat: FinCat

    def act(self, m: int, code: Code) -> Code:
        return code.reindex(m)


@dataclass(frozen=True, eq=False)
class UniverseTotal:
    """``Ũ``: pairs ``(code, x)`` with ``x`` a point of the code."""

    cat: FinCat

    def act(self, m: int, elem):
        code, x = elem
        return code.reindex(m), code.act_id(m, x)


def pi_projection(elem):
    return elem[0]


def enumerate_codes(cat: FinCat, c: int, k: int, cap: Optional[int] = None) -> list:
    """All codes over ``c`` with every fiber of size at most ``k``."""
    sl = slice_of(cat, c)
    limit = carrier_cap(cap)
    out = []
    # functoriality constraints between non-identity slice morphisms
    triples = []
    for i, (f, h) in enumerate(sl.mors):
        fh = cat.compose(f, h)
        for k2 in cat.into(cat.src(h)):
            if cat.is_identity(k2):
                continue
            hk = cat.compose(h, k2)
            triples.append((i, (fh, k2), (f, hk)))
    for sizes in itertools.product(range(k + 1), repeat=len(sl.objs)):
        size_of = dict(zip(sl.objs, sizes))
        tables: list = [None] * len(sl.mors)

        def get(f, h):
            if cat.is_identity(h):
                return tuple(range(size_of[f]))
            return tables[sl.mpos[f, h]]

        def consistent(upto):
            for i, second, composite in triples:
                j, l = sl.mpos[second], sl.mpos.get(composite)
                known = [t for t in (i, j) + ((l,) if l is not None else ()) if t > upto]
                if known:
                    continue
                first, then = tables[i], tables[j]
                whole = get(*composite)
                if any(then[first[x]] != whole[x] for x in range(len(first))):
                    return False
            return True

        def search(i):
            if i == len(sl.mors):
                out.append(Code(cat, c, sizes, tuple(tables)))
                if len(out) > limit:
                    raise SizeLimit(f"more than {limit} codes at stage {cat.objects[c]}")
                return
            f, h = sl.mors[i]
            src, dst = size_of[f], size_of[cat.compose(f, h)]
            for table in itertools.product(range(dst), repeat=src):
                tables[i] = table
                if consistent(i):
                    search(i + 1)
            tables[i] = None

        search(0)
    return sorted(out)


def build_universe(cat: FinCat, k: int, cap: Optional[int] = None):
    """Enumerated ``U``, ``Ũ`` and ``π`` for codes bounded by ``k``."""
    if k < 1:
        raise ValueError("bound k must be at least 1")
    codes = [enumerate_codes(cat, c, k, cap) for c in range(cat.n_objects)]
    U = FinPresheaf.build(cat, codes, lambda m, code: code.reindex(m), site="code", cap=carrier_cap(cap))
    points = [[(code, x) for code in cs for x in range(code.point_count())] for cs in codes]
    total = UniverseTotal(cat)
    Ut = FinPresheaf.build(cat, points, total.act, site="code", cap=None)
    pi = PresheafMap(Ut, U, tuple(tuple(U.index_of(c, code) for code, _ in Ut.labels[c])
                                  for c in range(cat.n_objects)))
    return U, Ut, pi


# --- families and comprehension ------------------------------------------


@dataclass(frozen=True)
class Family:
    """A family ``A: Γ -> U``."""

    base: FinPresheaf
    code_map: PresheafMap

    @classmethod
    def of(cls, base: FinPresheaf, tables, check: bool = True) -> "Family":
        cmap = PresheafMap(base, Universe(base.cat), tuple(tuple(row) for row in tables))
        if check:
            cmap.check()
        return cls(base, cmap)

    def code(self, c: int, x: int) -> Code:
        return self.code_map.tables[c][x]


@dataclass(frozen=True)
class DistinguishedSquare:
    total: FinPresheaf  # Γ.A, labels (γ, x)
    p: PresheafMap  # Γ.A -> Γ
    q: PresheafMap  # Γ.A -> Ũ


def comprehension(F: Family) -> DistinguishedSquare:
    G, cat = F.base, F.base.cat
    reps = [[(g, x) for g in range(G.sizes[c]) for x in range(F.code(c, g).point_count())]
            for c in range(cat.n_objects)]

    def act_rep(m, rep):
        g, x = rep
        return G.act(m, g), F.code(cat.dst(m), g).act_id(m, x)

    total = FinPresheaf.build(cat, reps, act_rep, site="comprehension", cap=None)
    p = PresheafMap(total, G, tuple(tuple(g for g, _ in ls) for ls in total.labels))
    q = PresheafMap(total, UniverseTotal(cat),
                    tuple(tuple((F.code(c, g), x) for g, x in ls) for c, ls in enumerate(total.labels)))
    return DistinguishedSquare(total, p, q)


def reindex(F: Family, sigma: PresheafMap) -> Family:
    """``σ*A = A ∘ σ``."""
    return Family(sigma.src, PresheafMap(sigma.src, F.code_map.dst,
                                         sigma.then(lambda c, g: F.code_map.tables[c][g])))


def q_sigma(square_B: DistinguishedSquare, square_A: DistinguishedSquare, sigma: PresheafMap) -> PresheafMap:
    """``Δ.σ*A -> Γ.A``, ``(δ, x) ↦ (σ(δ), x)``."""
    src, dst = square_B.total, square_A.total
    return PresheafMap(src, dst, tuple(tuple(dst.index_of(c, (sigma.tables[c][d], x)) for d, x in ls)
                                       for c, ls in enumerate(src.labels)))


def classify(p: PresheafMap) -> Family:
    """Code map of a display map ``p: E -> X``: the code at ``x`` has the
    fibers of ``p`` over the restrictions of ``x``."""
    E, X = p.src, p.dst
    cat = X.cat
    over = [{} for _ in range(cat.n_objects)]
    for d in range(cat.n_objects):
        for e in range(E.sizes[d]):
            over[d].setdefault(p.tables[d][e], []).append(e)
    tables = []
    for c in range(cat.n_objects):
        row = []
        for x in range(X.sizes[c]):
            reps = {f: over[cat.src(f)].get(X.act(f, x), []) for f in cat.into(c)}
            code, _ = Code.build(cat, c, reps, lambda f, h, e: E.act(h, e), site="code")
            row.append(code)
        tables.append(tuple(row))
    return Family.of(X, tables, check=False)


# --- local families over y(c) ---------------------------------------------


@dataclass(frozen=True, order=True)
class LocalFamily:
    """A family over a presheaf of pairs ``(g: e -> c, p)``, with some
    fiber values fixed.  This is the data a former reads at one stage: it
    depends only on the restrictions of the input, which is what makes
    the formers strictly stable.
    """

    cat: FinCat
    c: int
    keys: tuple  # per object e: sorted (g, p)
    codes: tuple  # aligned with keys: code over e
    fixed: tuple  # aligned with keys: forced point or None

    def pact(self, m: int, g: int, p):
        raise NotImplementedError

    def _extra_reindex(self, f: int) -> dict:
        return {}

    def reindex(self, f: int) -> "LocalFamily":
        cat = self.cat
        if cat.is_identity(f):
            return self
        d = cat.src(f)
        keys, codes, fixed = [], [], []
        for e in range(cat.n_objects):
            by_g = {}
            for i, (g, p) in enumerate(self.keys[e]):
                by_g.setdefault(g, []).append((p, i))
            ks, cs, fs = [], [], []
            for g2 in cat.hom(e, d):
                for p, i in by_g.get(cat.compose(f, g2), ()):
                    ks.append((g2, p))
                    cs.append(self.codes[e][i])
                    fs.append(self.fixed[e][i])
            order = sorted(range(len(ks)), key=lambda i: ks[i])
            keys.append(tuple(ks[i] for i in order))
            codes.append(tuple(cs[i] for i in order))
            fixed.append(tuple(fs[i] for i in order))
        return type(self)(cat, d, tuple(keys), tuple(codes), tuple(fixed), **self._extra_reindex(f))

    @functools.cached_property
    def presheaf(self) -> FinPresheaf:
        cat = self.cat
        return FinPresheaf.build(cat, self.keys,
                                 lambda m, k: (cat.compose(k[0], m), self.pact(m, k[0], k[1])),
                                 site="local_elements", cap=None)

    def sections(self, limit: Optional[int] = None) -> list:
        X = self.presheaf
        fixed = {(e, i): v for e, row in enumerate(self.fixed) for i, v in enumerate(row) if v is not None}
        return solve_sections(X, lambda e, i: self.codes[e][i].point_count(),
                              lambda m, e, i, v: self.codes[e][i].act_id(m, v), fixed, limit=limit)

    def position(self, e: int, key) -> int:
        X = self.presheaf
        return sum(X.sizes[:e]) + X.index_of(e, key)


def restrict_section(source: LocalFamily, b: tuple, target: LocalFamily, h: int) -> tuple:
    """Restrict a section over ``source`` along ``h`` to one over ``target``
    (``target = source.reindex(h)``)."""
    cat = source.cat
    out = []
    for e, keys in enumerate(target.keys):
        for g, p in keys:
            out.append(b[source.position(e, (cat.compose(h, g), p))])
    return tuple(out)


_former_cache: dict = {}
register_cache(_former_cache.clear)


def clear_caches():
    _former_cache.clear()


def former_code(datum: LocalFamily, site: str, limit: Optional[int] = None, use_cache: bool = True):
    """The code whose fiber over ``f: d -> c`` is the sorted set of sections
    of ``datum.reindex(f)``.  Returns ``(code, labels)``."""
    key = (site, datum)
    if use_cache and key in _former_cache:
        return _former_cache[key]
    cat, c = datum.cat, datum.c
    local = {f: datum.reindex(f) for f in cat.into(c)}
    reps = {f: local[f].sections(limit) for f in cat.into(c)}

    def act_rep(f, h, b):
        return restrict_section(local[f], b, local[cat.compose(f, h)], h)

    out = Code.build(cat, c, reps, act_rep, site=site)
    if use_cache:
        _former_cache[key] = out
    return out


# --- Π-structure ---------------------------------------------------------


@dataclass(frozen=True, order=True)
class PiDatum(LocalFamily):
    """Stage-``c`` input of the Π former: ``A`` restricted along ``y(c)``
    (``acodes`` per morphism into ``c``) and ``B`` over its comprehension."""

    acodes: tuple = ()

    def _acode(self, g):
        return self.acodes[self.cat.into(self.c).index(g)]

    def pact(self, m, g, x):
        return self._acode(g).act_id(m, x)

    def _extra_reindex(self, f):
        cat = self.cat
        return {"acodes": tuple(self._acode(cat.compose(f, g)) for g in cat.into(cat.src(f)))}


def pi_datum(A: Family, ext: DistinguishedSquare, B: Family, c: int, gamma: int) -> PiDatum:
    G, cat = A.base, A.base.cat
    keys, codes, fixed = [], [], []
    for e in range(cat.n_objects):
        ks, cs = [], []
        for g in cat.hom(e, c):
            ge = G.act(g, gamma)
            for x in range(A.code(e, ge).point_count()):
                ks.append((g, x))
                cs.append(B.code(e, ext.total.index_of(e, (ge, x))))
        keys.append(tuple(ks))
        codes.append(tuple(cs))
        fixed.append((None,) * len(ks))
    acodes = tuple(A.code(cat.src(g), G.act(g, gamma)) for g in cat.into(c))
    return PiDatum(cat, c, tuple(keys), tuple(codes), tuple(fixed), acodes=acodes)


def pi_code(datum: PiDatum, use_cache: bool = True) -> Code:
    return former_code(datum, "ext_fiber", use_cache=use_cache)[0]


def pi_former(A: Family, B: Family, use_cache: bool = True) -> PresheafMap:
    """``Π ∘ ⟨A, B⟩ : Γ -> U``."""
    G, cat = A.base, A.base.cat
    sq = comprehension(A)
    tables = tuple(tuple(pi_code(pi_datum(A, sq, B, c, g), use_cache) for g in range(G.sizes[c]))
                   for c in range(cat.n_objects))
    return PresheafMap(G, Universe(cat), tables)


def pi_structure(cat: FinCat, k: int, cap: Optional[int] = None):
    """Enumerated generic contexts ``U^Π`` and ``U^λ`` with maps ``Π`` and ``λ``.

    ``U^Π(c)`` consists of ``PiDatum`` values whose codes are bounded by
    ``k``; ``U^λ(c)`` of pairs ``(datum, t)`` with ``t`` a section.
    Returns ``(UPi, Pi, ULam, Lam, proj)``.
    """
    U, _, _ = build_universe(cat, k, cap)
    data = []
    for c in range(cat.n_objects):
        ys = FinPresheaf.build(cat, [cat.hom(e, c) for e in range(cat.n_objects)],
                               lambda m, g: cat.compose(g, m), site="local_elements")
        stage = []
        # A: y(c) -> U is a code over c; B ranges over bounded families on y(c).A
        for acode in U.labels[c]:
            Af = Family.of(ys, [[acode.reindex(g) for g in ys.labels[e]] for e in range(cat.n_objects)],
                           check=False)
            sq = comprehension(Af)
            choices = [[] for _ in range(cat.n_objects)]
            for e in range(cat.n_objects):
                choices[e] = list(U.labels[e])
            for bt in _bounded_families(sq.total, choices, cap):
                B = Family.of(sq.total, bt, check=False)
                stage.append(pi_datum(Af, sq, B, c, ys.index_of(c, cat.ident[c])))
        data.append(stage)
        if len(stage) > carrier_cap(cap):
            raise SizeLimit(f"|U^Π({cat.objects[c]})| exceeds cap")
    UPi = FinPresheaf.build(cat, data, lambda m, d: d.reindex(m), site="code", cap=cap)
    Pi = PresheafMap(UPi, Universe(cat), tuple(tuple(pi_code(d) for d in ls) for ls in UPi.labels))
    lam_reps = [[(d, t) for d in ls for t in d.sections(cap)] for ls in UPi.labels]

    def lam_act(m, rep):
        d, t = rep
        dm = d.reindex(m)
        return dm, restrict_section(d, t, dm, m)

    ULam = FinPresheaf.build(cat, lam_reps, lam_act, site="code", cap=cap)
    total = UniverseTotal(cat)

    def lam_point(d, t):
        code, labels = former_code(d, "ext_fiber")
        return code, labels[cat.ident[d.c]].index(t)

    Lam = PresheafMap(ULam, total, tuple(tuple(lam_point(d, t) for d, t in ls) for ls in ULam.labels))
    proj = PresheafMap(ULam, UPi, tuple(tuple(UPi.index_of(c, d) for d, _ in ls)
                                        for c, ls in enumerate(ULam.labels)))
    return UPi, Pi, ULam, Lam, proj


def _bounded_families(X: FinPresheaf, choices, cap):
    """All natural maps ``X -> U`` with values among ``choices[e]``."""
    cat = X.cat
    flats = solve_sections(X, lambda e, x: len(choices[e]),
                           lambda m, e, x, v: choices[cat.src(m)].index(choices[e][v].reindex(m)),
                           limit=cap)
    for flat in flats:
        pos, tables = 0, []
        for e, n in enumerate(X.sizes):
            tables.append([choices[e][v] for v in flat[pos:pos + n]])
            pos += n
        yield tables
