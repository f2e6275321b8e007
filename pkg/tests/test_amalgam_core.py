import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from bstrees import amalgam_core as A
from bstrees import words
from bstrees.amalgam_core import GElem, genG, genH
from bstrees.permgroup import PermGroup, Perm, symmetric_group


@pytest.fixture(scope="module")
def fam(am3):
    return am3.fam


def side0(g):
    return A.to_side(g, 0)


# ---------------------------------------------------------------- params

def test_params_validation():
    with pytest.raises(ValueError):
        A.AmalgamParams(symmetric_group(2), symmetric_group(2))      # both stabilizers trivial
    with pytest.raises(ValueError):
        A.AmalgamParams(PermGroup(3, [Perm.parse("(1 2)", 3)]), symmetric_group(3))


def test_params_json_round_trip(fam):
    p = A.AmalgamParams.from_json(fam.params.to_json())
    assert [g.order for g in p.gammas] == [6, 6]


# ---------------------------------------------------------------- multiplication and generators

def test_g_product_is_g_of_product(fam):
    for s in symmetric_group(3).elements:
        for t in symmetric_group(3).elements:
            assert genG(fam, 0, s) * genG(fam, 0, t) == genG(fam, 0, s * t)


def test_inverse(fam):
    a = genG(fam, 0, "(0 1 2)") * side0(genH(fam, 1, [1, 2], "(1 2)")) * genH(fam, 0, [2], "(1 2)")
    assert (a * a.inverse()).is_identity()


def test_distinct_index_h_commute(fam):
    a, b = genH(fam, 0, [1], "(1 2)"), genH(fam, 0, [2], "(1 2)")
    assert a * b == b * a


def test_side_mismatch(fam):
    with pytest.raises(A.SideMismatchError):
        genG(fam, 0, "(0 1)") * genG(fam, 1, "(0 1)")


def test_index_rewrite_under_conjugation(fam):
    # h0(1; s) h0(1, 1; s') h0(1; s)^-1 = h0(1, s(1); s')
    s = Perm.parse("(1 2)", 3)
    a = genH(fam, 0, [1], s)
    b = genH(fam, 0, [1, 1], "(1 2)")
    assert a * b * a.inverse() == genH(fam, 0, [1, s(1)], "(1 2)")


def test_identity_label_h_is_trivial(fam):
    assert genH(fam, 1, [2, 1, 2], "()").is_identity()


def test_g_conjugation_switches_sides(fam):
    # sigma(i) = basepoint, path of length one
    s = Perm.parse("(0 1)", 3)
    lhs = genG(fam, 0, s) * genH(fam, 0, [1], "(1 2)") * genG(fam, 0, s).inverse()
    assert lhs == side0(genG(fam, 1, "(1 2)"))


@pytest.mark.parametrize("j,path,sigma,err", [
    (0, [0], "(1 2)", A.InvalidPathError),       # basepoint is not in I'
    (0, [1], "(0 1)", A.InvalidGeneratorError),  # label must fix the basepoint
    (0, [], "(1 2)", A.InvalidPathError),
])
def test_generator_validation(fam, j, path, sigma, err):
    with pytest.raises(err):
        genH(fam, j, path, sigma)


def test_portrait_json(fam):
    d = genH(fam, 0, [1, 2], "(1 2)").to_json()
    assert d == {"side": 0, "top": "()", "children": {"1": {"side": 1, "top": "()",
                                                            "children": {"2": {"side": 0, "top": "(1 2)"}}}}}


# ---------------------------------------------------------------- H and cosets

def test_coset_decompose_g(fam):
    for s in symmetric_group(3).elements:
        g = genG(fam, 0, s)
        i, h = A.cosetDecompose(g)
        if s(0) == 0:
            assert i is None and h == g
        else:
            assert i == s(0) and A.isInH(h)
            assert genG(fam, 0, fam.params.transversals[0][i]) * h == g


def test_coset_decompose_identity_and_h(fam):
    assert A.cosetDecompose(A.identity(fam, 0)) == (None, A.identity(fam, 0))
    h = genH(fam, 0, [1], "(1 2)")
    assert A.cosetDecompose(h) == (None, h)


def test_index_check_classes(fam):
    """Sampled G_0 elements fall into exactly #(I_0) cosets of H."""
    rng = random.Random(3)
    gens = [t for t in A.generator_tokens(fam, 2) if not (t.name == "g" and t.side == 1)]
    classes = set()
    for _ in range(300):
        toks = [rng.choice(gens) for _ in range(rng.randint(1, 5))]
        g = GElem(fam, fam.eval_tokens_n(toks, 0))
        i, h = A.cosetDecompose(g)
        classes.add(i)
        assert A.isInH(h)
    assert classes == {None, 1, 2}


def test_h_factor_examples(fam):
    g = genG(fam, 0, "(1 2)")
    q0, q1 = A.hFactor(g)
    assert q0.as_g() == g and q1.is_identity()
    e = A.identity(fam, 0)
    assert all(q.is_identity() for q in A.hFactor(e))
    prod = genH(fam, 0, [1], "(1 2)") * side0(genH(fam, 1, [2], "(1 2)"))
    q0, q1 = A.hFactor(prod)
    assert A.recompose(q0, q1, 0) == prod
    assert q0.as_g() == genH(fam, 0, [1], "(1 2)")


def test_h_factor_outside_h(fam):
    with pytest.raises(ValueError):
        A.hFactor(genG(fam, 0, "(0 1)"))


# ---------------------------------------------------------------- quasi-kernels

def test_quasi_kernel_examples(fam):
    assert A.quasiKernelMember(side0(genG(fam, 1, "(1 2)")), 0)
    assert not A.quasiKernelMember(genG(fam, 0, "(1 2)"), 0)
    e = A.identity(fam, 0)
    assert A.quasiKernelMember(e, 0) and A.quasiKernelMember(e, 1)


def test_cjn_examples(fam):
    g = genG(fam, 0, "(1 2)")
    assert A.cJnMember(g, 0, 0)
    assert not A.cJnMember(g, 0, 1)
    k = side0(genG(fam, 1, "(1 2)"))
    assert all(A.cJnMember(k, 0, n) for n in range(4))
    with pytest.raises(A.EnumerationLimitError):
        A.cJnMember(k, 0, A.MAX_CONJ_LENGTH + 1)
    with pytest.raises(A.NotInHError):
        A.cJnMember(genG(fam, 0, "(0 1)"), 0, 1)


def test_quasi_kernel_matches_conjugation_oracle_depth1(fam):
    for side in (0, 1):
        for a in A.enumerate_h(fam, 1, side):
            g = GElem(fam, a)
            for j in (0, 1):
                assert A.quasiKernelMember(g, j) == A.cJnMember(g, j, 3)


def test_k0_k1_commute_and_meet_trivially(fam):
    """K_0 = Q_1 and K_1 = Q_0 commute elementwise, depth <= 2."""
    f = fam.forest
    k1 = A.enumerate_q(fam, 0, 2)
    k0 = [fam.embed_q_n(q, 0) for q in A.enumerate_q(fam, 1, 2)]
    for a in k0:
        for b in k1:
            assert f.mul(a, b) == f.mul(b, a)
    assert set(k0) & set(k1) == {f.identity[0]}


def test_conjugated_quasi_kernels(am3):
    """Conjugates of K_j by distinct transversal sequences commute and meet only in 1.

    The side-j representative sits next to K_j, the later ones alternate outward.
    """
    fam, O = am3.fam, am3.oracle
    rng = random.Random(5)
    for j in (0, 1):
        ks = [q for q in A.enumerate_q(fam, 1 - j, 1) if q not in fam.forest.idset]
        sample = rng.sample(ks, 6)
        for n in (1, 2):
            seqs = list(itertools.product(*[fam.primes[(j + t) % 2] for t in range(n)]))
            for s, t in itertools.permutations(seqs, 2):
                def conj(seq, q):
                    pre = [tok for k, i in reversed(list(enumerate(seq)))
                           for tok in O.rep_tokens((j + k) % 2, i)]
                    return words.reduce(pre + fam.expand_n(q) + words.invert_tokens(pre), O)
                xs = [conj(s, q) for q in sample]
                ys = [conj(t, q) for q in sample]
                assert not set(xs) & set(ys)
                for x in xs:
                    for y in ys:
                        assert words.mul_word(x, y, O) == words.mul_word(y, x, O)


# ---------------------------------------------------------------- theta and N

def test_theta_examples(fam):
    assert A.thetaHom(fam, "g0[(0 1 2)]") == (0, 0)
    assert A.thetaHom(fam, "h0[1;(1 2)]") == (0, 1)          # path length 1 lands on side 1
    assert A.thetaHom(fam, "h0[1,2;(1 2)]") == (1, 0)
    assert A.nMember(fam, "g0[(0 1)] * g0[(1 2)]")
    assert not A.nMember(fam, "g1[(0 1)]")


def test_theta_foreign_generator(fam):
    with pytest.raises(words.UnknownGeneratorError):
        A.thetaHom(fam, "t")


def test_n_generators_in_kernel(fam):
    gens = A.n_generating_set(fam)
    assert len(gens) > 100
    assert all(A.nMember(fam, w) for w in gens)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_theta_multiplicative_on_normal_forms(am3, data):
    fam, O = am3.fam, am3.oracle
    gens = A.generator_tokens(fam, 2)
    w = data.draw(st.lists(st.sampled_from(gens), min_size=1, max_size=6))
    v = data.draw(st.lists(st.sampled_from(gens), min_size=1, max_size=6))
    nf = words.word_to_tokens(words.reduce(w + words.invert_tokens(v), O), O)
    assert A.thetaHom(fam, nf) == fam.theta_add(A.thetaHom(fam, w),
                                                tuple(fam.abel[k].neg(x) for k, x in
                                                      enumerate(A.thetaHom(fam, v))))


# ---------------------------------------------------------------- report

def test_cstar_report(fam):
    r = A.cstarReport(fam.params)
    assert r.uniqueTrace and not r.cstarSimple
    assert A.cstarReport(fam.params, {0: False}).cstarSimple
    assert A.cstarReport(fam.params, {1: False}).to_json()["cstarSimple"]


# ---------------------------------------------------------------- relations

def test_relation_suite_paths_up_to_2(fam):
    rep = A.relation_suite(fam, 2)
    assert rep.ok and rep.total > 500
    assert set(rep.counts) == {"R1", "R2", "R3", "R4", "R5", "R6"}


@settings(max_examples=50, deadline=None)
@given(st.data())
def test_expand_round_trip(am3, data):
    fam = am3.fam
    side = data.draw(st.sampled_from([0, 1]))
    gens = [t for t in A.generator_tokens(fam, 2) if t.name == "h" or t.side == side]
    toks = data.draw(st.lists(st.sampled_from(gens), max_size=6))
    a = fam.eval_tokens_n(toks, side)
    assert fam.eval_tokens_n(fam.expand_n(a), side) == a
