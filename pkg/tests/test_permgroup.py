import json

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from bstrees import permgroup as pg
from bstrees.permgroup import Perm, PermGroup


def P(text, n):
    return Perm.parse(text, n)


def C3():
    return PermGroup(3, [P("(0 1 2)", 3)])


# ---------------------------------------------------------------- closure

def test_closure_sym3_order_6():
    assert pg.closure([P("(0 1 2)", 3), P("(0 1)", 3)], 3).order == 6


def test_closure_empty_is_trivial():
    G = pg.closure([], 4)
    assert G.order == 1 and G.identity.is_identity()


def test_closure_involution():
    assert pg.closure([P("(0 1)(2 3)", 4)], 4).order == 2


def test_closure_cap():
    with pytest.raises(pg.EnumerationLimitError):
        pg.closure([P("(0 1)", 8), P("(0 1 2 3 4 5 6 7)", 8)], 8, cap=100)


def test_perm_parse_composes_right_to_left():
    # (0 1)(1 2): apply (1 2) first
    p = P("(0 1)(1 2)", 3)
    assert p == P("(0 1)", 3) * P("(1 2)", 3)
    assert p(1) == 2 and p(2) == 0


@pytest.mark.parametrize("bad", ["(0 1", "0 1", "(0 0)", "(0 5)"])
def test_perm_parse_errors(bad):
    with pytest.raises(ValueError):
        P(bad, 3)


def test_perm_text_round_trip():
    for g in pg.symmetric_group(4).elements:
        assert P(str(g), 4) == g


# ---------------------------------------------------------------- stabilizers, transitivity

def test_stabilizer_examples():
    assert pg.stabilizer(pg.symmetric_group(3), 0).order == 2
    assert pg.stabilizer(PermGroup(2), 1).order == 1
    assert pg.stabilizer(pg.symmetric_group(2), 0).order == 1


def test_transitivity_examples():
    S3, S2 = pg.symmetric_group(3), pg.symmetric_group(2)
    assert pg.isTransitive(S3) and pg.is2Transitive(S3)
    # Sym(2): the stabilizer of a point is trivial but still transitive on the one remaining point
    assert pg.isTransitive(S2) and pg.is2Transitive(S2)
    assert not pg.isGeneratedByStabilizers(S2) and pg.is_sym2(S2)
    assert pg.isGeneratedByStabilizers(S3)
    assert not pg.is2Transitive(C3())


def test_cyclic_stabilizers_trivial_oracle():
    G = oracles.brute_group([oracles.parse_cycles("(0 1 2)", 3)], 3)
    assert all(len(oracles.brute_stabilizer(G, p)) == 1 for p in range(3))
    assert not oracles.brute_2_transitive(G, 3)


# ---------------------------------------------------------------- transversals

def test_transversal_c3_frozen():
    # unique coset representatives in C3, from the brute-force group
    G = oracles.brute_group([oracles.parse_cycles("(0 1 2)", 3)], 3)
    expect = {i: next(g for g in G if g[0] == i) for i in range(3)}
    got = {i: oracles.as_tuple(g) for i, g in pg.transversal(C3()).items()}
    assert got == expect == {0: (0, 1, 2), 1: (1, 2, 0), 2: (2, 0, 1)}


def test_transversal_trivial_group():
    T = pg.transversal(PermGroup(1))
    assert list(T) == [0] and T[0].is_identity()


def test_transversal_not_transitive():
    with pytest.raises(pg.MissingCosetError):
        pg.transversal(PermGroup(3, [P("(1 2)", 3)]))


def test_transversal_is_deterministic():
    a = pg.transversal(pg.symmetric_group(4))
    b = pg.transversal(pg.symmetric_group(4))
    assert a == b and a[0].is_identity()


# ---------------------------------------------------------------- abelianization

def test_abelianization_sym3_order_2_oracle():
    G = oracles.brute_group([oracles.parse_cycles("(0 1 2)", 3), oracles.parse_cycles("(0 1)", 3)], 3)
    D = oracles.brute_derived(G)
    assert len(D) == 3 and len(G) // len(D) == 2
    A = pg.abelianization(pg.symmetric_group(3))
    assert A.order == 2
    assert {oracles.as_tuple(g) for g in A.commutator.elements} == D


def test_abelianization_c3_injective():
    A = pg.abelianization(C3())
    assert A.order == 3
    assert len({A.project(g) for g in C3().elements}) == 3


def test_abelianization_sym2():
    assert pg.abelianization(pg.symmetric_group(2)).order == 2


def test_direct_product_pairs():
    G = pg.direct_product(pg.symmetric_group(2), pg.symmetric_group(3))
    assert G.order == 12 and G.domain_size == 5


def test_group_json_round_trip():
    G = pg.symmetric_group(4)
    data = json.loads(json.dumps(G.to_json()))
    H = PermGroup.from_json(data)
    assert set(H.elements) == set(G.elements) and H.basepoint == G.basepoint


# ---------------------------------------------------------------- properties

SMALL = [
    ("(0 1)", "(0 1 2)"), ("(0 1 2 3)",), ("(0 1)(2 3)", "(0 2)(1 3)"), ("(0 1 2)", "(1 2 3)"),
    ("(0 1)", "(0 1 2 3)"), ("(0 1 2 3 4)",), ("(0 1 2 3 4)", "(1 4)(2 3)"),
]


@st.composite
def small_groups(draw):
    gens = draw(st.sampled_from(SMALL))
    n = 1 + max(int(c) for g in gens for c in g if c.isdigit())
    return PermGroup(n, [P(g, n) for g in gens])


@settings(max_examples=40, deadline=None)
@given(small_groups(), st.integers(0, 4))
def test_orbit_stabilizer(G, p):
    p %= G.domain_size
    assert G.order == len(G.orbit(p)) * pg.stabilizer(G, p).order


@settings(max_examples=40, deadline=None)
@given(small_groups())
def test_closure_matches_brute_force(G):
    brute = oracles.brute_group([oracles.as_tuple(g) for g in G.generators], G.domain_size)
    assert {oracles.as_tuple(g) for g in G.elements} == brute


@settings(max_examples=25, deadline=None)
@given(small_groups())
def test_projection_homomorphism_exhaustive(G):
    A = pg.abelianization(G)
    assert A.is_abelian()
    for a in G.elements:
        for b in G.elements:
            assert A.project(a * b) == A.add(A.project(a), A.project(b))
    assert all(A.project(k) == 0 for k in A.commutator.elements)


@settings(max_examples=25, deadline=None)
@given(small_groups())
def test_transversal_property(G):
    if not pg.is_transitive(G):
        return
    T = pg.transversal(G)
    assert all(T[i](G.basepoint) == i for i in range(G.domain_size))
    assert T[G.basepoint].is_identity()


@settings(max_examples=25, deadline=None)
@given(small_groups())
def test_two_transitivity_matches_brute_force(G):
    brute = oracles.brute_group([oracles.as_tuple(g) for g in G.generators], G.domain_size)
    trans = len(oracles.brute_orbit(brute, 0)) == G.domain_size
    assert pg.is_2_transitive(G) == (trans and oracles.brute_2_transitive(brute, G.domain_size))
