"""
Extension types over a fixed endpoint
=====================================

Maps out of the interval whose left endpoint is pinned, counted three ways.
"""

from extent import ext_former, ext_oracle, get_base, leibniz_ext, shape_from_topes
from extent.extension import ext_input
from extent.presheaf import terminal
from extent.topes import TOP, Eq
from extent.universe import constant_code

# the shape {t | t == 0} inside the full interval, over the one-object base
cat = get_base("terminal")
shape = shape_from_topes(cat, ("t",), Eq("t", 0), TOP)
print("points of ψ:", shape.psi.sizes, " points of φ:", shape.phi.sizes)

# a constant family with three points, pinned to point 1 at t = 0
codes = [[constant_code(cat, 0, 3)] * shape.psi.sizes[0]]
a = [[1 if shape.phi_mask[0][p] else None for p in range(shape.psi.sizes[0])]]
inp = ext_input(shape, terminal(cat), codes, a)

# code-pointwise former: one free choice at t = 1
print("pointwise:", ext_former(inp).tables[0][0].point_count())
# brute-force Σ over all sections agreeing with a
print("oracle:   ", len(ext_oracle(inp)[0, 0]))
# pullback of the Leibniz cotensor, built from exponentials
print("Leibniz:  ", len(leibniz_ext(inp)[0, 0]))

# on Δ≤1 the same data is constant along edges, so only one extension survives
cat = get_base("delta1")
shape = shape_from_topes(cat, ("t",), Eq("t", 0), TOP)
one = terminal(cat)
codes = [[constant_code(cat, c, 3)] * shape.psi.sizes[c] for c in range(cat.n_objects)]
a = [[1 if shape.phi_mask[c][p] else None for p in range(shape.psi.sizes[c])] for c in range(cat.n_objects)]
inp = ext_input(shape, one, codes, a)
print("Δ≤1 stages:", [ext_former(inp).tables[c][0].point_count() for c in range(cat.n_objects)])
