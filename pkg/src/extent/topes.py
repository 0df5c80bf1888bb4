"""Cubes, topes and shape inclusions.

Entailment between topes is decided semantically: a cube with ``n``
variables has ``2**n`` points valued in the chain ``0 <= 1``, and
``phi |- psi`` holds when every point satisfying ``phi`` satisfies ``psi``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Union

# A cube term is a cube variable name or one of the endpoints 0 and 1.
CubeTerm = Union[str, int]
Point = Mapping[str, int]


class ScopeError(ValueError):
    pass


class NotAnInclusion(ValueError):
    """Raised when ``phi |- psi`` fails; carries a counterexample point."""

    def __init__(self, cube, lower, upper, witness):
        self.cube = cube
        self.lower = lower
        self.upper = upper
        self.witness = dict(witness)
        shown = ", ".join(f"{k}↦{v}" for k, v in self.witness.items()) or "⟨⟩"
        super().__init__(f"{lower} does not entail {upper}: witness {shown}")


@dataclass(frozen=True)
class Cube:
    dims: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(self.dims))
        if len(set(self.dims)) != len(self.dims):
            raise ValueError(f"cube variables not distinct: {self.dims}")

    def __len__(self):
        return len(self.dims)

    def __contains__(self, name):
        return name in self.dims

    def __str__(self):
        return "{" + " ".join(self.dims) + "}"


def fresh_name(name: str, taken) -> str:
    """Prime ``name`` until it avoids ``taken``."""
    while name in taken:
        name = name + "'"
    return name


def cube_product(i: Cube, j: Cube) -> tuple[Cube, dict[str, str]]:
    """Concatenate two cubes, renaming clashing variables of ``j``.

    Returns the product and the renaming applied to ``j``'s variables.
    """
    taken = set(i.dims)
    renaming = {}
    out = list(i.dims)
    for d in j.dims:
        new = fresh_name(d, taken | set(j.dims) - {d}) if d in taken else d
        taken.add(new)
        renaming[d] = new
        out.append(new)
    return Cube(tuple(out)), renaming


def tope_points(c: Cube) -> list[dict[str, int]]:
    return [dict(zip(c.dims, bits)) for bits in itertools.product((0, 1), repeat=len(c))]


# --- tope formulas -------------------------------------------------------


class Tope:
    def holds(self, point: Point) -> bool:
        raise NotImplementedError

    def free_vars(self) -> frozenset[str]:
        raise NotImplementedError

    def subst(self, mapping: Mapping[str, CubeTerm]) -> "Tope":
        raise NotImplementedError

    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)


@dataclass(frozen=True)
class Top(Tope):
    def holds(self, point):
        return True

    def free_vars(self):
        return frozenset()

    def subst(self, mapping):
        return self

    def __str__(self):
        return "TOP"


@dataclass(frozen=True)
class Bot(Tope):
    def holds(self, point):
        return False

    def free_vars(self):
        return frozenset()

    def subst(self, mapping):
        return self

    def __str__(self):
        return "BOT"


def _value(term: CubeTerm, point: Point) -> int:
    if isinstance(term, int):
        return term
    return point[term]


def _term_vars(*terms):
    return frozenset(t for t in terms if isinstance(t, str))


def _subst_term(term, mapping):
    if isinstance(term, str):
        return mapping.get(term, term)
    return term


@dataclass(frozen=True)
class Leq(Tope):
    lhs: CubeTerm
    rhs: CubeTerm

    def holds(self, point):
        return _value(self.lhs, point) <= _value(self.rhs, point)

    def free_vars(self):
        return _term_vars(self.lhs, self.rhs)

    def subst(self, mapping):
        return Leq(_subst_term(self.lhs, mapping), _subst_term(self.rhs, mapping))

    def __str__(self):
        return f"{self.lhs} <= {self.rhs}"


@dataclass(frozen=True)
class Eq(Tope):
    lhs: CubeTerm
    rhs: CubeTerm

    def holds(self, point):
        return _value(self.lhs, point) == _value(self.rhs, point)

    def free_vars(self):
        return _term_vars(self.lhs, self.rhs)

    def subst(self, mapping):
        return Eq(_subst_term(self.lhs, mapping), _subst_term(self.rhs, mapping))

    def __str__(self):
        return f"{self.lhs} == {self.rhs}"


@dataclass(frozen=True)
class And(Tope):
    left: Tope
    right: Tope

    def holds(self, point):
        return self.left.holds(point) and self.right.holds(point)

    def free_vars(self):
        return self.left.free_vars() | self.right.free_vars()

    def subst(self, mapping):
        return And(self.left.subst(mapping), self.right.subst(mapping))

    def __str__(self):
        return f"({self.left} /\\ {self.right})"


@dataclass(frozen=True)
class Or(Tope):
    left: Tope
    right: Tope

    def holds(self, point):
        return self.left.holds(point) or self.right.holds(point)

    def free_vars(self):
        return self.left.free_vars() | self.right.free_vars()

    def subst(self, mapping):
        return Or(self.left.subst(mapping), self.right.subst(mapping))

    def __str__(self):
        return f"({self.left} \\/ {self.right})"


TOP = Top()
BOT = Bot()


def conj(*topes: Tope) -> Tope:
    topes = [t for t in topes if t != TOP]
    if not topes:
        return TOP
    out = topes[0]
    for t in topes[1:]:
        out = And(out, t)
    return out


def check_scope(c: Cube, *topes: Tope) -> None:
    for tope in topes:
        unbound = tope.free_vars() - set(c.dims)
        if unbound:
            raise ScopeError(f"unbound cube variable(s) {sorted(unbound)} in {tope}")


def satisfying_points(c: Cube, phi: Tope) -> list[dict[str, int]]:
    check_scope(c, phi)
    return [p for p in tope_points(c) if phi.holds(p)]


def entailment_witness(c: Cube, phi: Tope, psi: Tope):
    """First point of ``c`` satisfying ``phi`` but not ``psi``, or None."""
    check_scope(c, phi, psi)
    for p in tope_points(c):
        if phi.holds(p) and not psi.holds(p):
            return p
    return None


def tope_entails(c: Cube, phi: Tope, psi: Tope) -> bool:
    return entailment_witness(c, phi, psi) is None


def tope_equiv(c: Cube, phi: Tope, psi: Tope) -> bool:
    return tope_entails(c, phi, psi) and tope_entails(c, psi, phi)


def inconsistent(c: Cube, phi: Tope) -> bool:
    return tope_entails(c, phi, BOT)


@dataclass(frozen=True)
class ShapeInclusion:
    """A certified inclusion ``j: phi ↪ psi`` of shapes over ``cube``."""

    cube: Cube
    lower: Tope
    upper: Tope
    certificate: tuple = field(default=(), compare=False)

    @property
    def is_identity(self) -> bool:
        return tope_equiv(self.cube, self.lower, self.upper)

    def __str__(self):
        return f"{self.cube} {self.lower} ↪ {self.upper}"


def mk_shape_inclusion(c: Cube, phi: Tope, psi: Tope) -> ShapeInclusion:
    witness = entailment_witness(c, phi, psi)
    if witness is not None:
        raise NotAnInclusion(c, phi, psi, witness)
    # the certificate records the points on which phi was checked
    checked = tuple(tuple(p[d] for d in c.dims) for p in tope_points(c) if phi.holds(p))
    return ShapeInclusion(c, phi, psi, checked)


def iter_topes(c: Cube, depth: int) -> Iterator[Tope]:
    """All topes over ``c`` up to the given connective depth (with repeats)."""
    terms: list[CubeTerm] = list(c.dims) + [0, 1]
    atoms: list[Tope] = [TOP, BOT]
    for x in c.dims:
        for y in terms:
            if x != y:
                atoms.append(Leq(x, y))
                atoms.append(Leq(y, x))
                atoms.append(Eq(x, y))
    level = list(dict.fromkeys(atoms))
    yield from level
    for _ in range(depth):
        new = []
        for a in level:
            for b in atoms:
                new.append(And(a, b))
                new.append(Or(a, b))
        yield from new
        level = new
