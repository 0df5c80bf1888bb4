import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extent.harness import Config, Resample, check_pi_instance, map_from_generators, random_family, random_presheaf
from extent.presheaf import SizeLimit, get_base, is_pullback_square, terminal
from extent.universe import (Family, build_universe, classify, comprehension, constant_code, enumerate_codes,
                             pi_former, q_sigma, reindex)


def slice_presheaf_counts(cat, c, k):
    """Count presheaves on ``C/c`` with fibers ≤ k by trying every table.

    Returns (number of presheaves, sum over them of the fiber at the identity).
    """
    objs = [f for f in range(len(cat.morphisms)) if cat.dst(f) == c]
    # a slice morphism h: f -> g with g∘h = f acts X(g) -> X(f)
    arrows = [(f, g, h) for f in objs for g in objs for h in range(len(cat.morphisms))
              if cat.dst(h) == cat.src(g) and cat.src(h) == cat.src(f) and cat.compose(g, h) == f
              and not cat.is_identity(h)]
    count = points = 0
    for sizes in itertools.product(range(k + 1), repeat=len(objs)):
        n = dict(zip(objs, sizes))
        spaces = [list(itertools.product(range(n[f]), repeat=n[g])) for f, g, _ in arrows]
        for tables in itertools.product(*spaces):
            act = {(g, h): t for (f, g, h), t in zip(arrows, tables)}

            def run(g, h, x):
                return x if cat.is_identity(h) else act[g, h][x]

            ok = True
            for f, g, h in arrows:
                for f2, g2, h2 in arrows:
                    if g2 != f:
                        continue
                    # h2: f2 -> f, h: f -> g, composite h∘h2: f2 -> g
                    hh = cat.compose(h, h2)
                    for x in range(n[g]):
                        if run(f, h2, run(g, h, x)) != run(g, hh, x):
                            ok = False
                            break
                    if not ok:
                        break
                if not ok:
                    break
            if ok:
                count += 1
                points += n[cat.ident[c]]
    return count, points


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_terminal_universe_sizes(k):
    U, Ut, pi = build_universe(get_base("terminal"), k)
    assert U.sizes == (k + 1,)
    assert Ut.sizes == (k * (k + 1) // 2,)
    pi.check()


def test_arrow_universe_closed_form():
    U, Ut, _ = build_universe(get_base("arrow"), 3)
    # stage [1]: a fiber b over the identity, a over the vertex, and a map b -> a
    assert U.sizes[1] == sum(a ** b for a in range(4) for b in range(4)) == 60
    assert Ut.sizes[1] == sum(b * a ** b for a in range(4) for b in range(4)) == 142
    assert U.sizes[0] == 4 and Ut.sizes[0] == 6


@pytest.mark.parametrize("base,c,k", [("arrow", 1, 2), ("delta1", 0, 1), ("delta1", 0, 2), ("delta1", 1, 1),
                                      ("delta2", 0, 1)])
def test_codes_against_brute_force(base, c, k):
    cat = get_base(base)
    codes = enumerate_codes(cat, c, k, cap=10**6)
    count, points = slice_presheaf_counts(cat, c, k)
    assert len(codes) == count
    assert sum(code.point_count() for code in codes) == points
    for code in codes:
        code.check()


def test_delta1_universe_sizes():
    # stage [0] counts labelled reflexive graphs
    assert build_universe(get_base("delta1"), 1)[0].sizes == (2, 5)
    assert build_universe(get_base("delta1"), 2, cap=10**4)[0].sizes == (6, 206)


def test_universe_size_limit():
    with pytest.raises(SizeLimit):
        build_universe(get_base("delta1"), 3, cap=50)


def test_codes_reindex_functorially():
    cat = get_base("delta1")
    for code in enumerate_codes(cat, 1, 2, cap=10**4):
        for g, f in cat.comp:
            if cat.dst(g) == 1:
                assert code.reindex(g).reindex(f) == code.reindex(cat.compose(g, f))


def _setup(seed, base, k=2):
    rng = random.Random(seed)
    cat = get_base(base)
    for _ in range(200):
        try:
            G, _ = random_presheaf(rng, cat, 3)
            D, dgens = random_presheaf(rng, cat, 3)
            E, egens = random_presheaf(rng, cat, 3)
            if any(G.sizes[c] == 0 for c in dgens) or any(D.sizes[c] == 0 for c in egens):
                continue
            sigma = map_from_generators(D, dgens, G, [rng.randrange(G.sizes[c]) for c in dgens])
            tau = map_from_generators(E, egens, D, [rng.randrange(D.sizes[c]) for c in egens])
            return random_family(rng, G, k), sigma, tau
        except Resample:
            continue
    pytest.skip("no instance")


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["terminal", "arrow", "delta1"]))
def test_reindexing_is_strictly_functorial(seed, base):
    A, sigma, tau = _setup(seed, base)
    assert reindex(reindex(A, sigma), tau).code_map.tables == reindex(A, tau.compose(sigma)).code_map.tables
    assert reindex(A, tau.compose(sigma)).code_map.tables == tau.then(
        lambda c, d: reindex(A, sigma).code_map.tables[c][d])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["terminal", "arrow", "delta1"]))
def test_comprehension_squares_are_pullbacks(seed, base):
    A, sigma, _ = _setup(seed, base)
    sqA = comprehension(A)
    sqB = comprehension(reindex(A, sigma))
    sqA.total.check()
    qs = q_sigma(sqB, sqA, sigma).check()
    assert is_pullback_square(qs, sqB.p, sqA.p, sigma)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["terminal", "arrow", "delta1"]))
def test_classify_inverts_comprehension(seed, base):
    A, _, _ = _setup(seed, base)
    sq = comprehension(A)
    assert classify(sq.p).code_map.tables == A.code_map.tables
    again = comprehension(classify(sq.p))
    assert again.total.same_tables(sq.total) and again.p.tables == sq.p.tables


def test_pi_over_terminal_is_a_product_of_fibers():
    cat = get_base("terminal")
    one = terminal(cat)
    A = Family.of(one, [[constant_code(cat, 0, 3)]])
    sq = comprehension(A)
    for sizes in itertools.product(range(3), repeat=3):
        B = Family.of(sq.total, [[constant_code(cat, 0, n) for n in sizes]])
        expected = sizes[0] * sizes[1] * sizes[2]
        assert pi_former(A, B).tables[0][0].point_count() == expected


@pytest.mark.parametrize("base", ["terminal", "arrow", "delta1"])
def test_pi_is_strictly_stable(base):
    cfg = Config(base=base, bound_k=2)
    assert all(check_pi_instance(seed, cfg) for seed in range(12))


def test_small_worked_values():
    cat = get_base("terminal")
    U, Ut, _ = build_universe(cat, 1)
    assert (U.sizes, Ut.sizes) == ((2,), (1,))
    A = Family.of(terminal(cat), [[constant_code(cat, 0, 3)]])
    assert comprehension(A).total.sizes == (3,)
    two = constant_code(cat, 0, 2)
    A = Family.of(terminal(cat), [[two]])
    B = Family.of(comprehension(A).total, [[two, constant_code(cat, 0, 1)]])
    assert pi_former(A, B).tables[0][0].point_count() == 2
