"""Interpretation of checked ``.stt`` declarations in a presheaf model.

Closed extension types whose body is a base type are sent to their codes
over the terminal context: a base type with ``n`` constants is the
constant family with fiber ``n``, and the partial section is evaluated at
the vertices of each point of ``φ``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .extension import ExtInput, ext_code, ext_datum, interpret_shape, lambda_former
from .kernel import Kernel, check_program
from .presheaf import FinCat, product, terminal
from .syntax import CApp, TConst, TermDecl, TExt, TypeDecl, Var, WfDecl, show_type, subst_cube
from .topes import Cube, mk_shape_inclusion
from .universe import Family, constant_code


class Uninterpretable(ValueError):
    pass


@dataclass
class Interpretation:
    name: str
    type_text: str
    stage_sizes: tuple  # Ext point count at each object
    point: tuple = ()  # for terms: index of the named point at each object


def _constant(kernel: Kernel, term) -> str:
    from .syntax import TriContext
    nf = kernel.whnf(TriContext(), term)
    if isinstance(nf, Var) and nf.name in kernel.sig.constants:
        return nf.name
    raise Uninterpretable(f"{nf} does not evaluate to a constant")


def ext_input_of(kernel: Kernel, ty: TExt, base: FinCat, bound: int) -> ExtInput:
    body = kernel.unfold(ty.body)
    if not (isinstance(body, TConst) and body.name in kernel.sig.bases):
        raise Uninterpretable(f"body {show_type(body)} is not a base type")
    consts = kernel.sig.bases[body.name]
    if len(consts) > bound:
        raise Uninterpretable(f"{body.name} has {len(consts)} constants, above the bound {bound}")
    shape = interpret_shape(mk_shape_inclusion(Cube(ty.cube), ty.phi, ty.psi), base)
    gamma = terminal(base)
    total, _, _ = product(gamma, shape.psi)
    codes = [[constant_code(base, c, len(consts)) for _ in range(total.sizes[c])] for c in range(base.n_objects)]
    a = []
    for c in range(base.n_objects):
        row = []
        for _, p in total.labels[c]:
            if not shape.phi_mask[c][p]:
                row.append(None)
                continue
            values = {_constant(kernel, subst_cube(ty.partial, dict(zip(ty.cube, vertex))))
                      for vertex in _vertices(shape.psi.labels[c][p])}
            if len(values) != 1:
                raise Uninterpretable(f"partial section takes values {sorted(values)} on one simplex")
            row.append(consts.index(values.pop()))
        a.append(tuple(row))
    return ExtInput(shape, gamma, total, Family.of(total, codes), tuple(a))


def _vertices(label) -> list:
    """The vertices of a point of the cube given as per-coordinate image tuples."""
    return [tuple(x[k] for x in label) for k in range(len(label[0]))] if label else [()]


def interpret_program(text_or_decls, base: FinCat, bound: int) -> list:
    from .syntax import parse
    decls = parse(text_or_decls) if isinstance(text_or_decls, str) else text_or_decls
    kernel = Kernel()
    report = check_program(decls, kernel)
    failure = report.first_failure
    if failure is not None:
        raise Uninterpretable(f"line {failure.decl.line}: {failure.report.kind}: {failure.report.reason}")
    out = []
    for d in decls:
        if isinstance(d, TypeDecl):
            name, ty = d.name, d.type
        elif isinstance(d, TermDecl):
            name, ty = d.name, kernel.sig.defs[d.name][0]
        elif isinstance(d, WfDecl) and not d.ctx.types and not d.ctx.cube:
            name, ty = f"line {d.line}", d.type
        else:
            continue
        ty = kernel.unfold(ty)
        if not isinstance(ty, TExt):
            continue
        inp = ext_input_of(kernel, ty, base, bound)
        sizes = tuple(ext_code(ext_datum(inp, c, 0))[0].point_count() for c in range(base.n_objects))
        point = ()
        if isinstance(d, TermDecl):
            point = _term_point(kernel, d.name, ty, inp)
        out.append(Interpretation(name, show_type(ty), sizes, point))
    return out


def _term_point(kernel: Kernel, name: str, ty: TExt, inp: ExtInput) -> tuple:
    """Evaluate the term at the vertices of every point of ``ψ`` and name the
    resulting section by its point of the extension code."""
    consts = kernel.sig.bases[kernel.unfold(ty.body).name]
    psi, cat = inp.shape.psi, inp.gamma.cat
    b = []
    for c in range(cat.n_objects):
        row = []
        for _, p in inp.total.labels[c]:
            values = {_constant(kernel, CApp(Var(name), vertex)) for vertex in _vertices(psi.labels[c][p])}
            if len(values) != 1:
                raise Uninterpretable(f"{name} is not constant on a simplex")
            row.append(consts.index(values.pop()))
        b.append(tuple(row))
    lam = lambda_former(inp, tuple(b))
    return tuple(lam.tables[c][0][1] for c in range(cat.n_objects))
