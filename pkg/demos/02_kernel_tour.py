"""
A tour of the kernel
====================

Check a short program, print the rules applied, and watch one rejection.
"""

from extent import check_source
from extent.syntax import show_decl

PROGRAM = r"""
type Bool := base {tt ff}
type Arr := <{t} TOP | Bool ^ t == 0 -> tt>
term const : Arr := \t^{t|TOP}. tt
equal {s} | s == 0 | h : Arr |- h(s) === tt : Bool
equal h : Arr |- (\t^{t|TOP}. h(t)) === h : Arr
"""

report = check_source(PROGRAM)
for d in report.decls:
    print("ok " if d.verdict else "NO ", show_decl(d.decl))
    for rule, node in d.report.trace:
        print("      ", rule, node)

# equalities also record which computation rules fired
for d in report.decls:
    if d.report.conversion:
        print(sorted(d.report.conversion), "<-", show_decl(d.decl))

# a body that disagrees with the boundary at t = 0
BAD = r"""
type Bool := base {tt ff}
term wrong : <{t} TOP | Bool ^ t == 0 -> tt> := \t^{t|TOP}. ff
"""
failure = check_source(BAD).first_failure
print(failure.report.kind, "-", failure.report.reason)
