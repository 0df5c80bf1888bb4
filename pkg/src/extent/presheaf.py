"""Finite categories and finite-set-valued presheaves on them.

Carriers are initial segments ``0..n-1``; each carries the sorted concrete
representations (``labels``) it was built from.  Restriction along a
morphism ``m: d -> c`` is a table ``X(c) -> X(d)``.
"""

from __future__ import annotations

import functools
import itertools
import os
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional

from .canon import cached, canonical

DEFAULT_CAP = 64


class SizeLimit(RuntimeError):
    pass


class NotNatural(ValueError):
    pass


def carrier_cap(cap: Optional[int] = None) -> int:
    if cap is not None:
        return cap
    return int(os.environ.get("EXTENT_CARRIER_CAP", DEFAULT_CAP))


# --- finite categories ---------------------------------------------------


@dataclass(eq=False)
class FinCat:
    """A finite category given by tables.

    ``morphisms[i] = (src, dst, label)`` with objects as indices;
    ``comp[g, f]`` is the index of ``g ∘ f`` for ``f: a -> b``, ``g: b -> c``.
    """

    name: str
    objects: tuple
    morphisms: tuple
    comp: dict
    ident: tuple

    def __post_init__(self):
        n = len(self.morphisms)
        for c, i in enumerate(self.ident):
            if self.morphisms[i][:2] != (c, c):
                raise ValueError(f"identity of {self.objects[c]} is not an endomorphism")
        for f in range(n):
            a, b, _ = self.morphisms[f]
            if self.comp[self.ident[b], f] != f or self.comp[f, self.ident[a]] != f:
                raise ValueError(f"identity law fails at {self.morphisms[f]}")
        for f, g in itertools.product(range(n), repeat=2):
            if self.morphisms[f][1] != self.morphisms[g][0]:
                continue
            gf = self.comp[g, f]
            if self.morphisms[gf][:2] != (self.morphisms[f][0], self.morphisms[g][1]):
                raise ValueError("composite has wrong endpoints")
            for h in range(n):
                if self.morphisms[g][1] == self.morphisms[h][0]:
                    if self.comp[h, gf] != self.comp[self.comp[h, g], f]:
                        raise ValueError("associativity fails")
        self._into = tuple(tuple(m for m in range(n) if self.morphisms[m][1] == c)
                           for c in range(len(self.objects)))

    def __repr__(self):
        return f"FinCat({self.name!r})"

    @property
    def n_objects(self) -> int:
        return len(self.objects)

    def src(self, m: int) -> int:
        return self.morphisms[m][0]

    def dst(self, m: int) -> int:
        return self.morphisms[m][1]

    def compose(self, g: int, f: int) -> int:
        """``g ∘ f``."""
        return self.comp[g, f]

    def into(self, c: int) -> tuple:
        """Morphisms with codomain ``c``: the objects of the slice over ``c``."""
        return self._into[c]

    def hom(self, d: int, c: int) -> list:
        return [m for m in self._into[c] if self.src(m) == d]

    def is_identity(self, m: int) -> bool:
        return self.ident[self.src(m)] == m

    def object_order(self) -> list:
        """Objects from the top down, the order section search works in."""
        return list(reversed(range(self.n_objects)))


def _monotone_maps(m: int, n: int):
    """Monotone maps ``[m] -> [n]`` as tuples of images."""
    return [t for t in itertools.combinations_with_replacement(range(n + 1), m + 1)]


def simplex_category(name: str, dims: Iterable[int], keep=None) -> FinCat:
    """Full (or, via ``keep``, a wide) subcategory of the simplex category.

    ``keep(src_dim, dst_dim, images)`` filters non-identity maps; the kept
    set must be closed under composition.
    """
    dims = tuple(dims)
    morphisms = []
    for a, da in enumerate(dims):
        for b, db in enumerate(dims):
            for t in _monotone_maps(da, db):
                is_id = a == b and t == tuple(range(da + 1))
                if is_id or keep is None or keep(da, db, t):
                    morphisms.append((a, b, t))
    index = {(a, b, t): i for i, (a, b, t) in enumerate(morphisms)}
    comp = {}
    for f, (a, b, tf) in enumerate(morphisms):
        for g, (b2, c, tg) in enumerate(morphisms):
            if b2 == b:
                key = (a, c, tuple(tg[i] for i in tf))
                if key not in index:
                    raise ValueError("kept maps not closed under composition")
                comp[g, f] = index[key]
    ident = tuple(index[a, a, tuple(range(d + 1))] for a, d in enumerate(dims))
    cat = FinCat(name, tuple(f"[{d}]" for d in dims), tuple(morphisms), comp, ident)
    cat.dims = dims
    return cat


@functools.lru_cache(maxsize=None)
def get_base(name: str) -> FinCat:
    """Shipped bases, all subcategories of the simplex category."""
    key = {"δ1": "delta1", "δ2": "delta2", "Δ≤1": "delta1", "Δ≤2": "delta2", "𝟚": "arrow"}.get(name, name)
    if key == "terminal":
        return simplex_category("terminal", [0])
    if key == "arrow":
        # 0 -> 1 realised as the vertex-0 inclusion [0] -> [1]
        return simplex_category("arrow", [0, 1], keep=lambda a, b, t: (a, b, t) == (0, 1, (0,)))
    if key == "delta1":
        return simplex_category("delta1", [0, 1])
    if key == "delta2":
        return simplex_category("delta2", [0, 1, 2])
    raise KeyError(f"unknown base {name!r}")


BASES = ("terminal", "arrow", "delta1", "delta2")


def load_category(text: str, name: str = "custom") -> FinCat:
    """Read a category from the plain-text table format.

    ::

        objects a b
        morphism f a b
        compose g f h        # g ∘ f = h

    Identities are implicit (named ``id_<obj>``) and their compositions
    need not be listed.
    """
    objects, morphisms, triples = [], [], []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        word, *rest = line.split()
        if word == "objects":
            objects.extend(rest)
        elif word == "morphism":
            morphisms.append(tuple(rest))
        elif word == "compose":
            triples.append(tuple(rest))
        else:
            raise ValueError(f"unknown directive {word!r}")
    obj = {o: i for i, o in enumerate(objects)}
    mors = [(i, i, f"id_{o}") for i, o in enumerate(objects)]
    mors += [(obj[s], obj[t], n) for n, s, t in morphisms]
    idx = {m[2]: i for i, m in enumerate(mors)}
    comp = {}
    for f, (a, b, _) in enumerate(mors):
        comp[f, idx[f"id_{objects[a]}"]] = f
        comp[idx[f"id_{objects[b]}"], f] = f
    for g, f, h in triples:
        comp[idx[g], idx[f]] = idx[h]
    ident = tuple(idx[f"id_{o}"] for o in objects)
    for f, (a, b, _) in enumerate(mors):
        for g, (b2, _, _) in enumerate(mors):
            if b == b2 and (g, f) not in comp:
                raise ValueError(f"missing composite {mors[g][2]} ∘ {mors[f][2]}")
    return FinCat(name, tuple(objects), tuple(mors), comp, ident)


# --- presheaves ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FinPresheaf:
    cat: FinCat
    sizes: tuple
    restrict: tuple  # per morphism m: d -> c, table X(c) -> X(d)
    labels: Optional[tuple] = None
    _index: dict = field(default_factory=dict, repr=False, compare=False)

    def __eq__(self, other):
        return (isinstance(other, FinPresheaf) and self.cat is other.cat
                and self.sizes == other.sizes and self.restrict == other.restrict
                and self.labels == other.labels)

    def __hash__(self):
        return hash((self.sizes, self.restrict))

    def same_tables(self, other) -> bool:
        return self.cat is other.cat and self.sizes == other.sizes and self.restrict == other.restrict

    def act(self, m: int, x: int) -> int:
        return self.restrict[m][x]

    def __contains__(self, item):
        c, x = item
        return 0 <= x < self.sizes[c]

    def elements(self) -> Iterator[tuple[int, int]]:
        for c, n in enumerate(self.sizes):
            for x in range(n):
                yield c, x

    def label(self, c: int, x: int):
        return self.labels[c][x]

    def index_of(self, c: int, rep) -> int:
        table = self._index.get(c)
        if table is None:
            table = {r: i for i, r in enumerate(self.labels[c])}
            self._index[c] = table
        return table[rep]

    def total_size(self) -> int:
        return sum(self.sizes)

    def check(self) -> "FinPresheaf":
        cat = self.cat
        for m, (d, c, _) in enumerate(cat.morphisms):
            table = self.restrict[m]
            if len(table) != self.sizes[c] or any(not 0 <= v < self.sizes[d] for v in table):
                raise NotNatural(f"bad restriction table for morphism {m}")
            if cat.is_identity(m) and table != tuple(range(self.sizes[c])):
                raise NotNatural("restriction along an identity is not the identity")
        for (g, f), gf in cat.comp.items():
            # x·(g∘f) = (x·g)·f
            for x in range(self.sizes[cat.dst(g)]):
                if self.restrict[gf][x] != self.restrict[f][self.restrict[g][x]]:
                    raise NotNatural(f"functoriality fails for {g}∘{f}")
        return self

    @classmethod
    def build(cls, cat: FinCat, reps: Iterable[Iterable], act_rep: Callable, site: str = "code",
              cap: Optional[int] = None, check: bool = False) -> "FinPresheaf":
        """Canonically named presheaf from concrete representations.

        ``act_rep(m, rep)`` restricts a representation at ``dst(m)`` along
        ``m``; the result must be one of the representations at ``src(m)``.
        """
        limit = cap if cap is not None else float("inf")
        labels = []
        for c, items in enumerate(reps):
            items = canonical(items, site)
            if len(items) > limit:
                raise SizeLimit(f"carrier at {cat.objects[c]} has {len(items)} > {limit} elements")
            labels.append(tuple(items))
        index = [{r: i for i, r in enumerate(ls)} for ls in labels]
        restrict = []
        for m, (d, c, _) in enumerate(cat.morphisms):
            restrict.append(tuple(index[d][act_rep(m, r)] for r in labels[c]))
        out = cls(cat, tuple(len(ls) for ls in labels), tuple(restrict), tuple(labels))
        return out.check() if check else out


@dataclass(frozen=True)
class PresheafMap:
    """Natural transformation; ``tables[c][x]`` is the image of ``x ∈ src(c)``.

    ``dst`` may be any presheaf-like object with ``cat`` and ``act``
    (the universe objects are such), in which case table entries are
    values of that object rather than indices.
    """

    src: FinPresheaf
    dst: object
    tables: tuple

    def __call__(self, c: int, x: int):
        return self.tables[c][x]

    def check(self) -> "PresheafMap":
        cat = self.src.cat
        for m, (d, c, _) in enumerate(cat.morphisms):
            for x in range(self.src.sizes[c]):
                if self.dst.act(m, self.tables[c][x]) != self.tables[d][self.src.act(m, x)]:
                    raise NotNatural(f"naturality fails at morphism {m}, element {x}")
        return self

    def then(self, after: Callable) -> tuple:
        """Tables of ``after ∘ self`` for a per-stage function ``after(c, value)``."""
        return tuple(tuple(after(c, v) for v in row) for c, row in enumerate(self.tables))

    def compose(self, g: "PresheafMap") -> "PresheafMap":
        """``g ∘ self``."""
        return PresheafMap(self.src, g.dst, self.then(lambda c, v: g.tables[c][v]))


def identity(X: FinPresheaf) -> PresheafMap:
    return PresheafMap(X, X, tuple(tuple(range(n)) for n in X.sizes))


def terminal(cat: FinCat) -> FinPresheaf:
    return FinPresheaf.build(cat, [[()] for _ in cat.objects], lambda m, r: r)


def constant(cat: FinCat, n: int) -> FinPresheaf:
    return FinPresheaf.build(cat, [range(n) for _ in cat.objects], lambda m, r: r)


def to_terminal(X: FinPresheaf) -> PresheafMap:
    return PresheafMap(X, terminal(X.cat), tuple((0,) * n for n in X.sizes))


@cached()
def yoneda(cat: FinCat, c: int) -> FinPresheaf:
    """Representable presheaf; labels are morphism indices ``d -> c``."""
    return FinPresheaf.build(cat, [cat.hom(d, c) for d in range(cat.n_objects)],
                             lambda m, g: cat.compose(g, m), site="local_elements")


def yoneda_map(X, c: int, x) -> PresheafMap:
    """The map ``y(c) -> X`` classifying ``x ∈ X(c)``."""
    Y = yoneda(X.cat, c)
    return PresheafMap(Y, X, tuple(tuple(X.act(g, x) for g in Y.labels[d])
                                   for d in range(X.cat.n_objects)))


def product(X: FinPresheaf, Y: FinPresheaf):
    cat = X.cat
    P = FinPresheaf.build(cat, [itertools.product(range(X.sizes[c]), range(Y.sizes[c]))
                                for c in range(cat.n_objects)],
                          lambda m, r: (X.act(m, r[0]), Y.act(m, r[1])), site="pullback")
    p1 = PresheafMap(P, X, tuple(tuple(r[0] for r in ls) for ls in P.labels))
    p2 = PresheafMap(P, Y, tuple(tuple(r[1] for r in ls) for ls in P.labels))
    return P, p1, p2


def pairing(f: PresheafMap, g: PresheafMap, P: FinPresheaf) -> PresheafMap:
    """``⟨f, g⟩`` into a product or pullback ``P`` labelled by pairs."""
    return PresheafMap(f.src, P, tuple(tuple(P.index_of(c, (a, b)) for a, b in zip(f.tables[c], g.tables[c]))
                                       for c in range(f.src.cat.n_objects)))


def coproduct(parts: list) -> tuple:
    cat = parts[0].cat
    S = FinPresheaf.build(cat, [[(i, x) for i, X in enumerate(parts) for x in range(X.sizes[c])]
                                for c in range(cat.n_objects)],
                          lambda m, r: (r[0], parts[r[0]].act(m, r[1])), site="pullback")
    injections = [PresheafMap(X, S, tuple(tuple(S.index_of(c, (i, x)) for x in range(X.sizes[c]))
                                          for c in range(cat.n_objects)))
                  for i, X in enumerate(parts)]
    return S, injections


def pullback(f: PresheafMap, g: PresheafMap):
    """Canonical pullback of ``f: X -> Z`` and ``g: Y -> Z``.

    The carrier at ``c`` is the set of pairs ``(x, y)`` with
    ``f(x) = g(y)``, sorted lexicographically.
    """
    X, Y = f.src, g.src
    cat = X.cat
    reps = []
    for c in range(cat.n_objects):
        by_value = {}
        for y in range(Y.sizes[c]):
            by_value.setdefault(g.tables[c][y], []).append(y)
        reps.append([(x, y) for x in range(X.sizes[c]) for y in by_value.get(f.tables[c][x], ())])
    P = FinPresheaf.build(cat, reps, lambda m, r: (X.act(m, r[0]), Y.act(m, r[1])), site="pullback")
    p1 = PresheafMap(P, X, tuple(tuple(r[0] for r in ls) for ls in P.labels))
    p2 = PresheafMap(P, Y, tuple(tuple(r[1] for r in ls) for ls in P.labels))
    return P, p1, p2


def subpresheaf(X: FinPresheaf, keep: Callable[[int, int], bool]):
    """Sub-presheaf of elements satisfying ``keep``; must be restriction-closed."""
    cat = X.cat
    reps = [[x for x in range(X.sizes[c]) if keep(c, x)] for c in range(cat.n_objects)]
    for m, (d, c, _) in enumerate(cat.morphisms):
        for x in reps[c]:
            if not keep(d, X.act(m, x)):
                raise NotNatural("selected elements are not closed under restriction")
    S = FinPresheaf.build(cat, reps, lambda m, x: X.act(m, x), site="pullback")
    return S, PresheafMap(S, X, tuple(tuple(ls) for ls in S.labels))


def is_pullback_square(top: PresheafMap, left: PresheafMap, right: PresheafMap, bottom: PresheafMap) -> bool:
    """Check that ``P -top-> X``, ``P -left-> B`` over ``X -right-> Z <-bottom- B``
    commutes and that the gap map into the canonical pullback is bijective."""
    P = top.src
    for c in range(P.cat.n_objects):
        gap = set()
        for x in range(P.sizes[c]):
            t, l = top.tables[c][x], left.tables[c][x]
            if right.tables[c][t] != bottom.tables[c][l]:
                return False
            gap.add((l, t))
        if len(gap) != P.sizes[c]:
            return False
        expected = sum(1 for b in range(left.dst.sizes[c]) for t in range(top.dst.sizes[c])
                       if bottom.tables[c][b] == right.tables[c][t])
        if expected != len(gap):
            return False
    return True


# --- natural sections ----------------------------------------------------


def _flat_positions(X: FinPresheaf):
    offsets, pos = [], 0
    for n in X.sizes:
        offsets.append(pos)
        pos += n
    return offsets, pos


def solve_sections(X: FinPresheaf, fiber: Callable[[int, int], int],
                   transport: Callable[[int, int, int, int], int],
                   fixed: Optional[dict] = None, *, limit: Optional[int] = None,
                   rng=None, first: bool = False) -> list[tuple]:
    """Natural sections of a family over ``X``.

    ``fiber(c, x)`` is the size of the fiber over ``x ∈ X(c)``;
    ``transport(m, c, x, v)`` restricts ``v`` in that fiber along
    ``m: d -> c`` into the fiber over ``x·m``.  Sections are tuples in
    flat element order (objects ascending, elements ascending), returned
    sorted.  With ``rng`` the search order is shuffled; ``first`` stops at
    the first solution.
    """
    cat = X.cat
    offsets, total = _flat_positions(X)
    sizes, restr = [0] * total, [[] for _ in range(total)]
    where = [None] * total
    for c in range(cat.n_objects):
        for x in range(X.sizes[c]):
            p = offsets[c] + x
            where[p] = (c, x)
            sizes[p] = fiber(c, x)
            for m in cat.into(c):
                if not cat.is_identity(m):
                    d = cat.src(m)
                    restr[p].append((m, offsets[d] + X.act(m, x)))
    order = [offsets[c] + x for c in cat.object_order() for x in range(X.sizes[c])]
    val: list = [None] * total
    trail: list = []

    def assign(p, v):
        stack = [(p, v)]
        while stack:
            q, w = stack.pop()
            cur = val[q]
            if cur is not None:
                if cur != w:
                    return False
                continue
            if not 0 <= w < sizes[q]:
                return False
            val[q] = w
            trail.append(q)
            c, x = where[q]
            for m, r in restr[q]:
                stack.append((r, transport(m, c, x, w)))
        return True

    def undo(mark):
        while len(trail) > mark:
            val[trail.pop()] = None

    for (c, x), v in (fixed or {}).items():
        if not assign(offsets[c] + x, v):
            return []
    out = []
    cap = limit if limit is not None else float("inf")

    def search(i):
        while i < len(order) and val[order[i]] is not None:
            i += 1
        if i == len(order):
            out.append(tuple(val))
            if len(out) > cap:
                raise SizeLimit(f"more than {cap} sections")
            return first
        p = order[i]
        choices = list(range(sizes[p]))
        if rng is not None:
            rng.shuffle(choices)
        for v in choices:
            mark = len(trail)
            if assign(p, v) and search(i + 1):
                return True
            undo(mark)
        return False

    search(0)
    return sorted(out)


def section_to_tables(X: FinPresheaf, flat: tuple) -> tuple:
    offsets, _ = _flat_positions(X)
    return tuple(tuple(flat[offsets[c]:offsets[c] + n]) for c, n in enumerate(X.sizes))


def nat_transformations(X: FinPresheaf, Y: FinPresheaf, cap: Optional[int] = None) -> list[PresheafMap]:
    flats = solve_sections(X, lambda c, x: Y.sizes[c], lambda m, c, x, v: Y.act(m, v), limit=carrier_cap(cap))
    return [PresheafMap(X, Y, section_to_tables(X, f)) for f in flats]


def exponential(X: FinPresheaf, Y: FinPresheaf, cap: Optional[int] = None):
    """``E = X^Y`` with ``E(c) = Nat(y(c) × Y, X)`` and evaluation ``E × Y -> X``."""
    cat = X.cat
    stage_domains = []
    reps = []
    for c in range(cat.n_objects):
        D, _, _ = product(yoneda(cat, c), Y)
        stage_domains.append(D)
        flats = solve_sections(D, lambda d, z: X.sizes[d], lambda m, d, z, v: X.act(m, v), limit=carrier_cap(cap))
        reps.append(canonical(flats, "exponential"))
    flat_index = []
    for c, D in enumerate(stage_domains):
        yc = yoneda(cat, c)
        offsets, _ = _flat_positions(D)
        flat_index.append({(d, yc.labels[d][g], y): offsets[d] + D.index_of(d, (g, y))
                           for d in range(cat.n_objects) for g, y in D.labels[d]})

    def act_rep(m, t):
        d, c = cat.src(m), cat.dst(m)
        D = stage_domains[d]
        yd = yoneda(cat, d)
        return tuple(t[flat_index[c][e, cat.compose(m, yd.labels[e][g]), y]]
                     for e in range(cat.n_objects) for g, y in D.labels[e])

    E = FinPresheaf.build(cat, reps, act_rep, site="exponential", cap=carrier_cap(cap))
    EY, p1, p2 = product(E, Y)
    ev_tables = []
    for c in range(cat.n_objects):
        idc = cat.ident[c]
        row = []
        for e, y in EY.labels[c]:
            row.append(E.labels[c][e][flat_index[c][c, idc, y]])
        ev_tables.append(tuple(row))
    return E, PresheafMap(EY, X, tuple(ev_tables))


def pushforward(f: PresheafMap, X: FinPresheaf, cap: Optional[int] = None) -> FinPresheaf:
    """``P_f(X) = Σ_{a:A} X^{B_a}`` for ``f: B -> A``.

    At stage ``c`` an element is ``(a, t)`` with ``a ∈ A(c)`` and ``t`` a
    map into ``X`` from the fiber ``B_a = y(c) ×_A B``.
    """
    B, A = f.src, f.dst
    cat = B.cat
    fibers = {}

    def fiber_of(c, a):
        key = (c, a)
        if key not in fibers:
            Ba, p1, _ = pullback(yoneda_map(A, c, a), f)
            maps = solve_sections(Ba, lambda d, z: X.sizes[d], lambda m, d, z, v: X.act(m, v),
                                  limit=carrier_cap(cap))
            fibers[key] = (Ba, maps)
        return fibers[key]

    reps = []
    for c in range(cat.n_objects):
        reps.append([(a, t) for a in range(A.sizes[c]) for t in fiber_of(c, a)[1]])

    def act_rep(m, rep):
        a, t = rep
        d, c = cat.src(m), cat.dst(m)
        Bc, _ = fiber_of(c, a)
        Bd, _ = fiber_of(d, A.act(m, a))
        yc, yd = yoneda(cat, c), yoneda(cat, d)
        offsets, _ = _flat_positions(Bc)
        new = []
        for e in range(cat.n_objects):
            for g, b in Bd.labels[e]:
                h = yc.index_of(e, cat.compose(m, yd.labels[e][g]))
                new.append(t[offsets[e] + Bc.index_of(e, (h, b))])
        return A.act(m, a), tuple(new)

    return FinPresheaf.build(cat, reps, act_rep, site="exponential", cap=carrier_cap(cap))


@cached()
def interval(cat: FinCat) -> FinPresheaf:
    """The directed interval on a simplex-like base: monotone maps ``[n] -> [1]``."""
    dims = getattr(cat, "dims", None)
    if dims is None:
        raise ValueError(f"base {cat.name} has no designated interval")
    reps = [_monotone_maps(d, 1) for d in dims]
    return FinPresheaf.build(cat, reps, lambda m, x: tuple(x[i] for i in cat.morphisms[m][2]),
                             site="local_elements")
