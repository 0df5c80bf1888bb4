import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extent.extension import (ExtInput, UnsupportedBase, app, check_partial_section, ext_code, ext_datum,
                              ext_former, ext_input, generic_ext_context, generic_ext_former,
                              generic_lambda_former, lambda_former, leibniz_ext, reindex_input,
                              reindex_section, shape_from_topes, total_sections)
from extent.harness import Config, decode_point, ext_oracle, gen_instance
from extent.presheaf import PresheafMap, SizeLimit, get_base, load_category, terminal
from extent.topes import BOT, TOP, Eq, Leq, Or
from extent.universe import constant_code


def _point_count(inp, c, g):
    return ext_former(inp).tables[c][g].point_count()


def endpoint_example(n=3, fixed=1):
    """Interval over the terminal base, the endpoint 0 fixed to ``fixed``,
    constant fiber of size ``n``."""
    cat = get_base("terminal")
    shape = shape_from_topes(cat, ("t",), Eq("t", 0), TOP)
    one = terminal(cat)
    codes = [[constant_code(cat, 0, n)] * shape.psi.sizes[0]]
    a = [[fixed if shape.phi_mask[0][p] else None for p in range(shape.psi.sizes[0])]]
    return ext_input(shape, one, codes, a)


def test_endpoint_example_has_one_extension_per_free_value():
    inp = endpoint_example()
    check_partial_section(inp)
    assert _point_count(inp, 0, 0) == 3
    assert len(ext_oracle(inp)[0, 0]) == 3
    assert len(leibniz_ext(inp)[0, 0]) == 3
    assert len(total_sections(inp)) == 3


def test_endpoint_example_computation_at_the_fixed_endpoint():
    inp = endpoint_example()
    psi = inp.shape.psi
    at0 = PresheafMap(inp.gamma, psi, ((psi.index_of(0, ((0,),)),),))
    for x in range(3):
        assert app(inp, ((x,),), at0) == ((1,),)


def test_partial_section_off_phi_is_rejected():
    inp = endpoint_example()
    bad = ExtInput(inp.shape, inp.gamma, inp.total, inp.A, ((1, 1),))
    with pytest.raises(ValueError):
        check_partial_section(bad)


@pytest.mark.parametrize("base,dims,upper,sizes", [
    ("terminal", ("s", "t"), Leq("s", "t"), (3,)),
    ("delta1", ("s", "t"), Leq("s", "t"), (3, 6)),
    ("delta1", ("t",), TOP, (2, 3)),
    ("delta2", ("t",), Eq("t", 1), (1, 1, 1)),
])
def test_shape_points_against_direct_count(base, dims, upper, sizes):
    shape = shape_from_topes(get_base(base), dims, BOT, upper)
    assert shape.psi.check().sizes == sizes
    cat = get_base(base)
    for c, d in enumerate(cat.dims):
        maps = [m for m in itertools.product((0, 1), repeat=d + 1) if list(m) == sorted(m)]
        count = sum(all(upper.holds(dict(zip(dims, (x[k] for x in xs)))) for k in range(d + 1))
                    for xs in itertools.product(maps, repeat=len(dims)))
        assert count == sizes[c]
    assert shape.phi.sizes == (0,) * cat.n_objects


def test_topes_are_read_at_vertices():
    # TOP and t == 0 \/ t == 1 entail each other at points, so they must name the same subobject
    boundary = Or(Eq("t", 0), Eq("t", 1))
    cat = get_base("delta1")
    shape = shape_from_topes(cat, ("t",), boundary, TOP)
    assert shape.phi.sizes == shape.psi.sizes == (2, 3)
    assert shape_from_topes(cat, ("t",), TOP, boundary).phi.sizes == (2, 3)


def test_shape_needs_an_interval():
    from extent.topes import Cube, mk_shape_inclusion
    from extent.extension import interpret_shape
    cat = load_category("objects a b\nmorphism f a b\n")
    with pytest.raises(UnsupportedBase):
        interpret_shape(mk_shape_inclusion(Cube(("t",)), TOP, TOP), cat)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_generic_context_over_endpoint(k):
    shape = shape_from_topes(get_base("terminal"), ("t",), Eq("t", 0), TOP)
    ctx = generic_ext_context(shape, k)
    # data: fiber n0 ≥ 1 over the endpoint with a point fixed there, any fiber n1 over the other end
    assert ctx.UExt.sizes == (sum(n0 for n0 in range(1, k + 1)) * (k + 1),)
    assert ctx.ULam.sizes == (sum(range(1, k + 1)) * sum(range(k + 1)),)


@pytest.mark.parametrize("base,k", [("terminal", 2), ("arrow", 1)])
def test_generic_pullback_law(base, k):
    """Over each generic datum, the λ-points are exactly the points of the
    extension code, each hit once."""
    shape = shape_from_topes(get_base(base), ("t",), Eq("t", 0), TOP)
    ctx = generic_ext_context(shape, k)
    ext, lam = generic_ext_former(ctx), generic_lambda_former(ctx)
    lam.check()
    ext.check()
    for c in range(ctx.UExt.cat.n_objects):
        over = {}
        for i, (code, x) in enumerate(lam.tables[c]):
            d = ctx.proj.tables[c][i]
            assert code == ext.tables[c][d]
            over.setdefault(d, set()).add(x)
        for d in range(ctx.UExt.sizes[c]):
            assert over.get(d, set()) == set(range(ext.tables[c][d].point_count()))


@pytest.mark.parametrize("base", ["terminal", "arrow", "delta1"])
def test_identity_inclusion_gives_singletons(base):
    cfg = Config(base=base)
    for seed in range(6):
        inst = gen_instance(seed, cfg, shape_name="id")
        ext = ext_former(inst.inp)
        assert all(code.point_count() == 1 for row in ext.tables for code in row)


@pytest.mark.parametrize("base", ["terminal", "arrow", "delta1"])
def test_empty_inclusion_counts_all_sections(base):
    cfg = Config(base=base)
    for seed in range(6):
        inst = gen_instance(seed, cfg, shape_name="empty")
        oracle = ext_oracle(inst)
        cat = inst.cat
        for c in range(cat.n_objects):
            for g in range(inst.gamma.sizes[c]):
                assert _point_count(inst.inp, c, g) == len(oracle[c, g])


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**5), st.sampled_from(["terminal", "arrow", "delta1"]))
def test_pointwise_former_agrees_with_oracle(seed, base):
    inst = gen_instance(seed, Config(base=base, bound_k=2))
    inp = inst.inp
    oracle = ext_oracle(inp)
    for c in range(inst.cat.n_objects):
        for g in range(inst.gamma.sizes[c]):
            ours = [decode_point(inp, c, g, x) for x in range(_point_count(inp, c, g))]
            assert sorted(ours, key=lambda d: sorted(d.items())) == oracle[c, g]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**5), st.sampled_from(["terminal", "arrow", "delta1"]))
def test_former_is_strictly_stable(seed, base):
    inst = gen_instance(seed, Config(base=base, bound_k=2))
    inp, sigma = inst.inp, inst.sigma
    moved = reindex_input(inp, sigma)
    ext = ext_former(inp)
    assert ext_former(moved).tables == sigma.then(lambda c, g: ext.tables[c][g])
    if inst.b is not None:
        lam = lambda_former(inp, inst.b)
        b2 = reindex_section(inp, sigma, inst.b, moved.total)
        assert lambda_former(moved, b2).tables == sigma.then(lambda c, g: lam.tables[c][g])


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**5), st.sampled_from(["terminal", "arrow"]))
def test_leibniz_construction_agrees(seed, base):
    inst = gen_instance(seed, Config(base=base, bound_k=2))
    try:
        lei = leibniz_ext(inst.inp, cap=4096)
    except SizeLimit:
        return
    oracle = ext_oracle(inst)
    for key, sections in oracle.items():
        assert sorted(lei[key], key=lambda d: sorted(d.items())) == sections


def test_code_labels_are_sorted():
    inst = gen_instance(3, Config(base="delta1", bound_k=2))
    cat = inst.cat
    for c in range(cat.n_objects):
        for g in range(inst.gamma.sizes[c]):
            _, labels = ext_code(ext_datum(inst.inp, c, g))
            for ls in labels.values():
                assert list(ls) == sorted(ls)
