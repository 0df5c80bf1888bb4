"""Abstract syntax, parser and printer for ``.stt`` files.

A file is a list of declarations::

    type Bool := base {tt ff}
    type Arr := <{t} TOP | Bool ^ t == 0 -> tt>
    term f : Arr := \\t^{t|TOP}. tt
    check {s} | TOP | g : Arr |- g(s) : Bool
    equal {s} | s == 0 | g : Arr |- g(s) === tt : Bool
    wf |- <{t} TOP | Bool>

Extension types are written ``<{t} psi | A ^ phi -> a>``; ``<{t} psi | A>``
abbreviates ``<{t} psi | A ^ BOT -> ()>``.  Cube application ``f(s)``
requires the parenthesis to touch the function; ``f (s)`` is ordinary
application to the term ``s``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .topes import BOT, TOP, And, CubeTerm, Eq, Leq, Or, Tope, fresh_name

KEYWORDS = frozenset({"type", "term", "check", "equal", "wf", "base", "fst", "snd", "pt", "TOP", "BOT"})


# --- types ---------------------------------------------------------------


class Type:
    pass


class Term:
    pass


@dataclass(frozen=True)
class TConst(Type):
    name: str


@dataclass(frozen=True)
class TPi(Type):
    var: str  # "_" when non-dependent
    dom: Type
    cod: Type


@dataclass(frozen=True)
class TSigma(Type):
    var: str
    fst: Type
    snd: Type


@dataclass(frozen=True)
class TShape(Type):
    """The reflected shape ``[{t} phi]``: points of the cube satisfying ``phi``."""

    cube: tuple
    tope: Tope


@dataclass(frozen=True)
class TExt(Type):
    """``<{t} psi | A ^ phi -> a>``; ``cube`` binds in ``psi``, ``phi``, ``body`` and ``partial``."""

    cube: tuple
    psi: Tope
    body: Type
    phi: Tope
    partial: Term

    def inclusion(self):
        """The certificate ``phi |- psi``; raises ``NotAnInclusion``."""
        from .topes import Cube, mk_shape_inclusion
        return mk_shape_inclusion(Cube(self.cube), self.phi, self.psi)


# --- terms ---------------------------------------------------------------


@dataclass(frozen=True)
class Var(Term):
    name: str


@dataclass(frozen=True)
class Lam(Term):
    var: str
    body: Term


@dataclass(frozen=True)
class App(Term):
    fn: Term
    arg: Term


@dataclass(frozen=True)
class CLam(Term):
    """Extension abstraction ``\\t^{t|psi}. b``."""

    cube: tuple
    psi: Tope
    body: Term


@dataclass(frozen=True)
class CApp(Term):
    fn: Term
    points: tuple


@dataclass(frozen=True)
class Pair(Term):
    fst: Term
    snd: Term


@dataclass(frozen=True)
class Fst(Term):
    arg: Term


@dataclass(frozen=True)
class Snd(Term):
    arg: Term


@dataclass(frozen=True)
class Anno(Term):
    term: Term
    type: Type


@dataclass(frozen=True)
class Point(Term):
    """``pt(s, ...)``, an element of a reflected shape."""

    points: tuple


@dataclass(frozen=True)
class Empty(Term):
    """``()``, the unique section over an empty shape."""


EMPTY = Empty()


# --- declarations --------------------------------------------------------


@dataclass(frozen=True)
class TriContext:
    cube: tuple = ()
    tope: Tope = TOP
    types: tuple = ()  # ((name, Type), ...)

    def extend(self, name, ty) -> "TriContext":
        return TriContext(self.cube, self.tope, self.types + ((name, ty),))

    def lookup(self, name) -> Optional[Type]:
        for n, ty in reversed(self.types):
            if n == name:
                return ty
        return None


@dataclass(frozen=True)
class Decl:
    line: int = field(default=0, compare=False, kw_only=True)


@dataclass(frozen=True)
class BaseDecl(Decl):
    name: str
    constants: tuple


@dataclass(frozen=True)
class TypeDecl(Decl):
    name: str
    type: Type


@dataclass(frozen=True)
class TermDecl(Decl):
    name: str
    type: Optional[Type]
    term: Term


@dataclass(frozen=True)
class CheckDecl(Decl):
    ctx: TriContext
    term: Term
    type: Type


@dataclass(frozen=True)
class EqualDecl(Decl):
    ctx: TriContext
    lhs: Term
    rhs: Term
    type: Type


@dataclass(frozen=True)
class WfDecl(Decl):
    ctx: TriContext
    type: Type


Node = Union[Type, Term]


# --- tokens --------------------------------------------------------------


class ParseError(SyntaxError):
    def __init__(self, message: str, line: int, col: int, expected=()):
        self.line, self.col = line, col
        self.expected = frozenset(expected)
        exp = f" (expected {', '.join(sorted(self.expected))})" if self.expected else ""
        super().__init__(f"{line}:{col}: {message}{exp}")


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT, INT, SYM, EOF
    text: str
    line: int
    col: int
    spaced: bool  # whitespace or line start precedes the token


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+|--[^\n]*)
  | (?P<ident>[A-Za-z][A-Za-z0-9_']*)
  | (?P<int>[0-9]+)
  | (?P<sym>:=|===|\|-|->|<=|==|/\\|\\/|[\\^<>(){}\[\]|,:*.])
""", re.VERBOSE)


def tokenize(text: str) -> list[Token]:
    out, pos, line, line_start, spaced = [], 0, 1, 0, True
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind == "ws":
            spaced = True
            nl = chunk.count("\n")
            if nl:
                line += nl
                line_start = pos + chunk.rindex("\n") + 1
        else:
            out.append(Token(kind.upper(), chunk, line, col, spaced))
            spaced = False
        pos = m.end()
    out.append(Token("EOF", "", line, pos - line_start + 1, True))
    return out


# --- parser --------------------------------------------------------------


_TYPE_START = {"IDENT", "(", "<", "["}
_TERM_START = {"IDENT", "(", "\\", "fst", "snd", "pt"}


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k=1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *texts) -> bool:
        t = self.tok
        return t.kind in ("SYM", "IDENT", "INT") and t.text in texts

    def at_ident(self) -> bool:
        return self.tok.kind == "IDENT" and self.tok.text not in KEYWORDS

    def fail(self, message, expected=()):
        t = self.tok
        raise ParseError(message if t.kind != "EOF" else "unexpected end of input", t.line, t.col, expected)

    def expect(self, text) -> Token:
        if not self.at(text):
            self.fail(f"unexpected {self.tok.text!r}", {text})
        t = self.tok
        self.i += 1
        return t

    def ident(self) -> str:
        if not self.at_ident():
            self.fail(f"unexpected {self.tok.text!r}", {"identifier"})
        t = self.tok
        self.i += 1
        return t.text

    # declarations
    def program(self) -> list[Decl]:
        decls = []
        while self.tok.kind != "EOF":
            decls.append(self.decl())
        return decls

    def decl(self) -> Decl:
        line = self.tok.line
        if self.at("type"):
            self.i += 1
            name = self.ident()
            self.expect(":=")
            if self.at("base"):
                self.i += 1
                self.expect("{")
                consts = []
                while self.at_ident():
                    consts.append(self.ident())
                self.expect("}")
                return BaseDecl(name, tuple(consts), line=line)
            return TypeDecl(name, self.type_(), line=line)
        if self.at("term"):
            self.i += 1
            name = self.ident()
            ty = None
            if self.at(":"):
                self.i += 1
                ty = self.type_()
            self.expect(":=")
            return TermDecl(name, ty, self.term(), line=line)
        if self.at("check"):
            self.i += 1
            ctx = self.context()
            e = self.term()
            self.expect(":")
            return CheckDecl(ctx, e, self.type_(), line=line)
        if self.at("equal"):
            self.i += 1
            ctx = self.context()
            lhs = self.term()
            self.expect("===")
            rhs = self.term()
            self.expect(":")
            return EqualDecl(ctx, lhs, rhs, self.type_(), line=line)
        if self.at("wf"):
            self.i += 1
            ctx = self.context()
            return WfDecl(ctx, self.type_(), line=line)
        self.fail(f"unexpected {self.tok.text!r}", {"type", "term", "check", "equal", "wf"})

    def context(self) -> TriContext:
        cube, tope = (), TOP
        if self.at("{"):
            cube = self.cube_binder()
            self.expect("|")
            tope = self.tope()
            self.expect("|")
        binds = []
        if not self.at("|-"):
            while True:
                name = self.ident()
                self.expect(":")
                binds.append((name, self.type_()))
                if not self.at(","):
                    break
                self.i += 1
        self.expect("|-")
        return TriContext(cube, tope, tuple(binds))

    def cube_binder(self) -> tuple:
        self.expect("{")
        names = []
        while self.at_ident():
            names.append(self.ident())
        self.expect("}")
        return tuple(names)

    # topes
    def tope(self) -> Tope:
        out = self.tope_conj()
        while self.at("\\/"):
            self.i += 1
            out = Or(out, self.tope_conj())
        return out

    def tope_conj(self) -> Tope:
        out = self.tope_atom()
        while self.at("/\\"):
            self.i += 1
            out = And(out, self.tope_atom())
        return out

    def tope_atom(self) -> Tope:
        if self.at("TOP"):
            self.i += 1
            return TOP
        if self.at("BOT"):
            self.i += 1
            return BOT
        if self.at("("):
            self.i += 1
            out = self.tope()
            self.expect(")")
            return out
        lhs = self.cube_term({"TOP", "BOT", "("})
        if self.at("<="):
            self.i += 1
            return Leq(lhs, self.cube_term())
        if self.at("=="):
            self.i += 1
            return Eq(lhs, self.cube_term())
        self.fail(f"unexpected {self.tok.text!r}", {"<=", "=="})

    def cube_term(self, also=()) -> CubeTerm:
        if self.tok.kind == "INT" and self.tok.text in ("0", "1"):
            self.i += 1
            return int(self.toks[self.i - 1].text)
        if self.at_ident():
            return self.ident()
        self.fail(f"unexpected {self.tok.text!r}", {"identifier", "0", "1", *also})

    def cube_terms(self) -> tuple:
        self.expect("(")
        pts = [self.cube_term()]
        while self.at(","):
            self.i += 1
            pts.append(self.cube_term())
        self.expect(")")
        return tuple(pts)

    # types
    def type_(self) -> Type:
        if self.at("(") and self.peek().kind == "IDENT" and self.peek(2).text == ":" \
                and self.peek().text not in KEYWORDS:
            self.i += 1
            var = self.ident()
            self.expect(":")
            dom = self.type_()
            self.expect(")")
            if self.at("->"):
                self.i += 1
                return TPi(var, dom, self.type_())
            if self.at("*"):
                self.i += 1
                return TSigma(var, dom, self.type_())
            self.fail(f"unexpected {self.tok.text!r}", {"->", "*"})
        left = self.type_prod()
        if self.at("->"):
            self.i += 1
            return TPi("_", left, self.type_())
        return left

    def type_prod(self) -> Type:
        left = self.type_atom()
        if self.at("*"):
            self.i += 1
            return TSigma("_", left, self.type_prod())
        return left

    def type_atom(self) -> Type:
        if self.at_ident():
            return TConst(self.ident())
        if self.at("("):
            self.i += 1
            out = self.type_()
            self.expect(")")
            return out
        if self.at("["):
            self.i += 1
            cube = self.cube_binder()
            tope = self.tope()
            self.expect("]")
            return TShape(cube, tope)
        if self.at("<"):
            self.i += 1
            cube = self.cube_binder()
            psi = self.tope()
            self.expect("|")
            body = self.type_()
            if self.at(">"):
                self.i += 1
                return TExt(cube, psi, body, BOT, EMPTY)
            self.expect("^")
            phi = self.tope()
            self.expect("->")
            partial = self.term()
            self.expect(">")
            return TExt(cube, psi, body, phi, partial)
        self.fail(f"unexpected {self.tok.text!r}", {"identifier", "(", "<", "["})

    # terms
    def term(self) -> Term:
        if self.at("\\"):
            self.i += 1
            if self.at("("):
                self.i += 1
                names = [self.ident()]
                while self.at(","):
                    self.i += 1
                    names.append(self.ident())
                self.expect(")")
                return self.cube_lambda(tuple(names))
            name = self.ident()
            if self.at("^"):
                return self.cube_lambda((name,))
            self.expect(".")
            return Lam(name, self.term())
        out = self.unary()
        while self.tok.kind in ("IDENT", "SYM") and (self.at_ident() or self.at("(", "fst", "snd", "pt")):
            out = App(out, self.unary())
        return out

    def cube_lambda(self, names: tuple) -> Term:
        tok = self.tok
        self.expect("^")
        self.expect("{")
        declared = []
        while self.at_ident():
            declared.append(self.ident())
        if tuple(declared) != names:
            raise ParseError(f"binder {names} does not match shape variables {tuple(declared)}",
                             tok.line, tok.col)
        self.expect("|")
        psi = self.tope()
        self.expect("}")
        self.expect(".")
        return CLam(names, psi, self.term())

    def unary(self) -> Term:
        if self.at("fst"):
            self.i += 1
            return Fst(self.unary())
        if self.at("snd"):
            self.i += 1
            return Snd(self.unary())
        return self.postfix()

    def postfix(self) -> Term:
        out = self.atom()
        while self.at("(") and not self.tok.spaced:
            out = CApp(out, self.cube_terms())
        return out

    def atom(self) -> Term:
        if self.at_ident():
            return Var(self.ident())
        if self.at("pt"):
            self.i += 1
            if self.tok.spaced:
                self.fail("space before point coordinates", {"("})
            return Point(self.cube_terms())
        if self.at("("):
            self.i += 1
            if self.at(")"):
                self.i += 1
                return EMPTY
            inner = self.term()
            if self.at(","):
                self.i += 1
                second = self.term()
                self.expect(")")
                return Pair(inner, second)
            if self.at(":"):
                self.i += 1
                ty = self.type_()
                self.expect(")")
                return Anno(inner, ty)
            self.expect(")")
            return inner
        self.fail(f"unexpected {self.tok.text!r}", {"identifier", "(", "\\", "fst", "snd", "pt"})


def parse(text: str) -> list[Decl]:
    return Parser(text).program()


def _parse_whole(text, method):
    p = Parser(text)
    out = getattr(p, method)()
    if p.tok.kind != "EOF":
        p.fail(f"unexpected {p.tok.text!r}", {"end of input"})
    return out


def parse_type(text: str) -> Type:
    return _parse_whole(text, "type_")


def parse_term(text: str) -> Term:
    return _parse_whole(text, "term")


def parse_tope(text: str) -> Tope:
    return _parse_whole(text, "tope")


# --- printer -------------------------------------------------------------


def show_cube(names) -> str:
    return "{" + " ".join(names) + "}"


def show_type(t: Type, level: int = 0) -> str:
    """Levels: 0 arrow/dependent, 1 product, 2 atom."""
    if isinstance(t, TConst):
        return t.name
    if isinstance(t, TShape):
        return f"[{show_cube(t.cube)} {t.tope}]"
    if isinstance(t, TExt):
        return (f"<{show_cube(t.cube)} {t.psi} | {show_type(t.body)} ^ {t.phi} -> "
                f"{show_term(t.partial)}>")
    if isinstance(t, TPi):
        if t.var == "_":
            s = f"{show_type(t.dom, 1)} -> {show_type(t.cod)}"
        else:
            s = f"({t.var} : {show_type(t.dom)}) -> {show_type(t.cod)}"
        return s if level == 0 else f"({s})"
    if isinstance(t, TSigma):
        if t.var == "_":
            s = f"{show_type(t.fst, 2)} * {show_type(t.snd, 1)}"
            return s if level <= 1 else f"({s})"
        s = f"({t.var} : {show_type(t.fst)}) * {show_type(t.snd)}"
        return s if level == 0 else f"({s})"
    raise TypeError(f"not a type: {t!r}")


def _show_points(points) -> str:
    return "(" + ", ".join(str(p) for p in points) + ")"


def show_term(e: Term, level: int = 0) -> str:
    """Levels: 0 binder, 1 application, 2 prefix, 3 postfix/atom."""
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Empty):
        return "()"
    if isinstance(e, Point):
        return "pt" + _show_points(e.points)
    if isinstance(e, Pair):
        return f"({show_term(e.fst)}, {show_term(e.snd)})"
    if isinstance(e, Anno):
        return f"({show_term(e.term)} : {show_type(e.type)})"
    if isinstance(e, CApp):
        return show_term(e.fn, 3) + _show_points(e.points)
    if isinstance(e, (Lam, CLam)):
        if isinstance(e, Lam):
            s = f"\\{e.var}. {show_term(e.body)}"
        else:
            binder = e.cube[0] if len(e.cube) == 1 else "(" + ",".join(e.cube) + ")"
            s = f"\\{binder}^{{{' '.join(e.cube)}|{e.psi}}}. {show_term(e.body)}"
        return s if level == 0 else f"({s})"
    if isinstance(e, (Fst, Snd)):
        s = ("fst " if isinstance(e, Fst) else "snd ") + show_term(e.arg, 2)
        return s if level <= 2 else f"({s})"
    if isinstance(e, App):
        s = f"{show_term(e.fn, 1)} {show_term(e.arg, 3)}"
        return s if level <= 1 else f"({s})"
    raise TypeError(f"not a term: {e!r}")


def show_context(ctx: TriContext) -> str:
    parts = []
    if ctx.cube or ctx.tope != TOP:
        parts.append(f"{show_cube(ctx.cube)} | {ctx.tope} |")
    if ctx.types:
        parts.append(", ".join(f"{n} : {show_type(t)}" for n, t in ctx.types))
    parts.append("|-")
    return " ".join(parts)


def show_decl(d: Decl) -> str:
    if isinstance(d, BaseDecl):
        return f"type {d.name} := base {show_cube(d.constants)}"
    if isinstance(d, TypeDecl):
        return f"type {d.name} := {show_type(d.type)}"
    if isinstance(d, TermDecl):
        ann = f" : {show_type(d.type)}" if d.type is not None else ""
        return f"term {d.name}{ann} := {show_term(d.term)}"
    if isinstance(d, CheckDecl):
        return f"check {show_context(d.ctx)} {show_term(d.term)} : {show_type(d.type)}"
    if isinstance(d, EqualDecl):
        return (f"equal {show_context(d.ctx)} {show_term(d.lhs)} === {show_term(d.rhs)} : "
                f"{show_type(d.type)}")
    if isinstance(d, WfDecl):
        return f"wf {show_context(d.ctx)} {show_type(d.type)}"
    raise TypeError(f"not a declaration: {d!r}")


def show(node) -> str:
    if isinstance(node, Type):
        return show_type(node)
    if isinstance(node, Term):
        return show_term(node)
    if isinstance(node, Tope):
        return str(node)
    if isinstance(node, Decl):
        return show_decl(node)
    if isinstance(node, list):
        return "".join(show_decl(d) + "\n" for d in node)
    raise TypeError(f"cannot print {node!r}")


# --- free variables ------------------------------------------------------


def _tope_vars(tope: Tope) -> frozenset:
    return tope.free_vars()


def free_vars(node) -> frozenset:
    """Free term variables."""
    if isinstance(node, (Var,)):
        return frozenset({node.name})
    if isinstance(node, (TConst, TShape, Point, Empty)):
        return frozenset()
    if isinstance(node, Lam):
        return free_vars(node.body) - {node.var}
    if isinstance(node, TPi):
        return free_vars(node.dom) | (free_vars(node.cod) - {node.var})
    if isinstance(node, TSigma):
        return free_vars(node.fst) | (free_vars(node.snd) - {node.var})
    if isinstance(node, TExt):
        return free_vars(node.body) | free_vars(node.partial)
    if isinstance(node, CLam):
        return free_vars(node.body)
    if isinstance(node, CApp):
        return free_vars(node.fn)
    if isinstance(node, App):
        return free_vars(node.fn) | free_vars(node.arg)
    if isinstance(node, Pair):
        return free_vars(node.fst) | free_vars(node.snd)
    if isinstance(node, (Fst, Snd)):
        return free_vars(node.arg)
    if isinstance(node, Anno):
        return free_vars(node.term) | free_vars(node.type)
    raise TypeError(node)


def _pts_vars(points) -> frozenset:
    return frozenset(p for p in points if isinstance(p, str))


def free_cube_vars(node) -> frozenset:
    if isinstance(node, (Var, TConst, Empty)):
        return frozenset()
    if isinstance(node, Point):
        return _pts_vars(node.points)
    if isinstance(node, TShape):
        return node.tope.free_vars() - set(node.cube)
    if isinstance(node, TExt):
        inner = (node.psi.free_vars() | node.phi.free_vars() | free_cube_vars(node.body)
                 | free_cube_vars(node.partial))
        return inner - set(node.cube)
    if isinstance(node, CLam):
        return (node.psi.free_vars() | free_cube_vars(node.body)) - set(node.cube)
    if isinstance(node, CApp):
        return free_cube_vars(node.fn) | _pts_vars(node.points)
    if isinstance(node, Lam):
        return free_cube_vars(node.body)
    if isinstance(node, (TPi,)):
        return free_cube_vars(node.dom) | free_cube_vars(node.cod)
    if isinstance(node, TSigma):
        return free_cube_vars(node.fst) | free_cube_vars(node.snd)
    if isinstance(node, App):
        return free_cube_vars(node.fn) | free_cube_vars(node.arg)
    if isinstance(node, Pair):
        return free_cube_vars(node.fst) | free_cube_vars(node.snd)
    if isinstance(node, (Fst, Snd)):
        return free_cube_vars(node.arg)
    if isinstance(node, Anno):
        return free_cube_vars(node.term) | free_cube_vars(node.type)
    raise TypeError(node)


# --- substitution --------------------------------------------------------


def subst_term(node, sigma: dict):
    """Capture-avoiding substitution of terms for term variables."""
    return _subst(node, dict(sigma), {})


def subst_cube(node, mapping: dict):
    """Capture-avoiding substitution of cube terms for cube variables."""
    return _subst(node, {}, dict(mapping))


def _cube_images(csub) -> frozenset:
    return frozenset(v for v in csub.values() if isinstance(v, str))


def _bind_term(var, body_nodes, tsub, csub):
    """Drop ``var`` from ``tsub`` and rename it if an image would be captured."""
    tsub = {k: v for k, v in tsub.items() if k != var}
    if var == "_":
        return var, tsub
    live = [v for k, v in tsub.items() if any(k in free_vars(n) for n in body_nodes)]
    captured = any(var in free_vars(v) for v in live)
    if captured:
        taken = set().union(*(free_vars(v) for v in live), *(free_vars(n) for n in body_nodes))
        new = fresh_name(var, taken | set(tsub))
        tsub[var] = Var(new)
        return new, tsub
    return var, tsub


def _bind_cube(names, body_nodes, topes, tsub, csub):
    csub = {k: v for k, v in csub.items() if k not in names}
    body_fv = set().union(*(free_cube_vars(n) for n in body_nodes), *(t.free_vars() for t in topes))
    live_t = [v for k, v in tsub.items() if any(k in free_vars(n) for n in body_nodes)]
    danger = set(_cube_images({k: v for k, v in csub.items() if k in body_fv}))
    for v in live_t:
        danger |= free_cube_vars(v)
    new_names, renaming = [], {}
    taken = danger | body_fv | set(csub) | set(names)
    for n in names:
        if n in danger:
            fresh = fresh_name(n, taken)
            taken.add(fresh)
            renaming[n] = fresh
            new_names.append(fresh)
        else:
            new_names.append(n)
    csub.update(renaming)
    return tuple(new_names), csub


def _st(tope: Tope, csub) -> Tope:
    return tope.subst(csub) if csub else tope


def _sp(points, csub) -> tuple:
    return tuple(csub.get(p, p) if isinstance(p, str) else p for p in points)


def _subst(node, tsub, csub):
    if not tsub and not csub:
        return node
    if isinstance(node, Var):
        return tsub.get(node.name, node)
    if isinstance(node, (TConst, Empty)):
        return node
    if isinstance(node, Point):
        return Point(_sp(node.points, csub))
    if isinstance(node, CApp):
        return CApp(_subst(node.fn, tsub, csub), _sp(node.points, csub))
    if isinstance(node, App):
        return App(_subst(node.fn, tsub, csub), _subst(node.arg, tsub, csub))
    if isinstance(node, Pair):
        return Pair(_subst(node.fst, tsub, csub), _subst(node.snd, tsub, csub))
    if isinstance(node, Fst):
        return Fst(_subst(node.arg, tsub, csub))
    if isinstance(node, Snd):
        return Snd(_subst(node.arg, tsub, csub))
    if isinstance(node, Anno):
        return Anno(_subst(node.term, tsub, csub), _subst(node.type, tsub, csub))
    if isinstance(node, Lam):
        var, inner = _bind_term(node.var, [node.body], tsub, csub)
        return Lam(var, _subst(node.body, inner, csub))
    if isinstance(node, (TPi, TSigma)):
        cls = type(node)
        left, right = (node.dom, node.cod) if cls is TPi else (node.fst, node.snd)
        var, inner = _bind_term(node.var, [right], tsub, csub)
        return cls(var, _subst(left, tsub, csub), _subst(right, inner, csub))
    if isinstance(node, TShape):
        names, inner = _bind_cube(node.cube, [], [node.tope], {}, csub)
        return TShape(names, _st(node.tope, inner))
    if isinstance(node, TExt):
        names, inner = _bind_cube(node.cube, [node.body, node.partial], [node.psi, node.phi], tsub, csub)
        return TExt(names, _st(node.psi, inner), _subst(node.body, tsub, inner), _st(node.phi, inner),
                    _subst(node.partial, tsub, inner))
    if isinstance(node, CLam):
        names, inner = _bind_cube(node.cube, [node.body], [node.psi], tsub, csub)
        return CLam(names, _st(node.psi, inner), _subst(node.body, tsub, inner))
    raise TypeError(node)


def compose_subst(sigma: dict, tau: dict) -> dict:
    """``tau ∘ sigma``: apply ``sigma`` first, then ``tau``."""
    out = {k: subst_term(v, tau) for k, v in sigma.items()}
    for k, v in tau.items():
        out.setdefault(k, v)
    return out


# --- α-equivalence -------------------------------------------------------


def alpha_eq(a, b) -> bool:
    return _alpha(a, b, ({}, {}), ({}, {}), 0)


def _alpha(a, b, ma, mb, depth) -> bool:
    """``ma``/``mb`` are pairs (term renaming, cube renaming) to shared keys."""
    if type(a) is not type(b):
        return False
    (ta, ca), (tb, cb) = ma, mb
    if isinstance(a, Var):
        return ta.get(a.name, a.name) == tb.get(b.name, b.name)
    if isinstance(a, (TConst, Empty)):
        return a == b

    def pts(pa, pb):
        return len(pa) == len(pb) and all(
            (ca.get(x, x) if isinstance(x, str) else x) == (cb.get(y, y) if isinstance(y, str) else y)
            for x, y in zip(pa, pb))

    if isinstance(a, Point):
        return pts(a.points, b.points)
    if isinstance(a, CApp):
        return pts(a.points, b.points) and _alpha(a.fn, b.fn, ma, mb, depth)
    if isinstance(a, App):
        return _alpha(a.fn, b.fn, ma, mb, depth) and _alpha(a.arg, b.arg, ma, mb, depth)
    if isinstance(a, Pair):
        return _alpha(a.fst, b.fst, ma, mb, depth) and _alpha(a.snd, b.snd, ma, mb, depth)
    if isinstance(a, (Fst, Snd)):
        return _alpha(a.arg, b.arg, ma, mb, depth)
    if isinstance(a, Anno):
        return _alpha(a.term, b.term, ma, mb, depth) and _alpha(a.type, b.type, ma, mb, depth)
    key = f"#{depth}"
    if isinstance(a, Lam):
        return _alpha(a.body, b.body, ({**ta, a.var: key}, ca), ({**tb, b.var: key}, cb), depth + 1)
    if isinstance(a, (TPi, TSigma)):
        la, ra = (a.dom, a.cod) if isinstance(a, TPi) else (a.fst, a.snd)
        lb, rb = (b.dom, b.cod) if isinstance(b, TPi) else (b.fst, b.snd)
        if (a.var == "_") != (b.var == "_"):
            return False
        return (_alpha(la, lb, ma, mb, depth)
                and _alpha(ra, rb, ({**ta, a.var: key}, ca), ({**tb, b.var: key}, cb), depth + 1))
    if isinstance(a, (TShape, TExt, CLam)):
        if len(a.cube) != len(b.cube):
            return False
        ka = {**ca, **{x: f"{key}.{i}" for i, x in enumerate(a.cube)}}
        kb = {**cb, **{y: f"{key}.{i}" for i, y in enumerate(b.cube)}}
        na, nb = (ta, ka), (tb, kb)
        if isinstance(a, TShape):
            return a.tope.subst(ka) == b.tope.subst(kb)
        if isinstance(a, CLam):
            return a.psi.subst(ka) == b.psi.subst(kb) and _alpha(a.body, b.body, na, nb, depth + 1)
        return (a.psi.subst(ka) == b.psi.subst(kb) and a.phi.subst(ka) == b.phi.subst(kb)
                and _alpha(a.body, b.body, na, nb, depth + 1)
                and _alpha(a.partial, b.partial, na, nb, depth + 1))
    raise TypeError(a)
