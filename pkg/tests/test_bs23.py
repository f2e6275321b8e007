import pytest

import oracles
from bstrees import bs23, words
from bstrees.words import Token

O = bs23.oracle()

FIXED_CHAIN = [
    "b^6 * t * b * t^-1 * b * t * b * t^-1",
    "t * b^9 * b * t^-1 * b * t * b * t^-1",
    "t * b * t^-1 * b^6 * b * t * b * t^-1",
    "t * b * t^-1 * b * t * b^9 * b * t^-1",
    "t * b * t^-1 * b * t * b * t^-1 * b^6",
    "t * b * t^-1 * b * t * b * t^-1 <b>",
]

MOVED_CHAIN = [
    "b^6 * t * b * t^-1 * b * t * b * t^-1 * b * t * t",
    "t * b^9 * b * t^-1 * b * t * b * t^-1 * b * t * t",
    "t * b * t^-1 * b^6 * b * t * b * t^-1 * b * t * t",
    "t * b * t^-1 * b * t * b^9 * b * t^-1 * b * t * t",
    "t * b * t^-1 * b * t * b * t^-1 * b^6 * b * t * t",
    "t * b * t^-1 * b * t * b * t^-1 * b * t * b^9 * t",
    "t * b * t^-1 * b * t * b * t^-1 * b * t * b * b^8 * t",
    "t * b * t^-1 * b * t * b * t^-1 * b * t * b * t * b^12",
    "t * b * t^-1 * b * t * b * t^-1 * b * t * b * t <b>",
]


def nf(text):
    return words.reduce(text, O)


# ---------------------------------------------------------------- oracle

def test_edge_groups():
    assert O.in_h(4, -1) and not O.in_h(3, -1)
    assert O.in_h(9, 1) and not O.in_h(4, 1)
    assert O.rep_indices(-1) == (1,) and O.rep_indices(1) == (1, 2)


def test_decompose_b5():
    assert O.decompose(-1, 5) == (1, 4)
    assert O.decompose(1, 5) == (2, 3)
    assert O.decompose(1, -1) == (2, -3)


def test_tau_conjugation():
    assert nf("t^-1 * b^4 * t") == nf("b^6")
    assert nf("t * b^9 * t^-1") == nf("b^6")
    assert O.conj(9, 1) == 6 and O.conj(4, -1) == 6
    with pytest.raises(bs23.BrittonPinchError):
        O.conj(5, 1)


def test_foreign_generator():
    with pytest.raises(words.UnknownGeneratorError):
        nf("g0[(0 1)]")


@pytest.mark.parametrize("text", ["t^-1 * b^4 * t", "t * b^9 * t^-1", "b^6 * t * b * t^-1", "t^2 * b^-5 * t^-1 * b"])
def test_normal_form_matches_affine_oracle(text):
    w = nf(text)
    assert oracles.bs23_affine(words.word_to_tokens(w, O)) == oracles.bs23_affine(words.parse_word(text))


# ---------------------------------------------------------------- the line fixed by b^6

def test_linear_subtree():
    line = bs23.linearSubtree(3)
    assert len(line) == 7
    texts = {bs23.vertex_text(v) for v in line}
    assert {"<b>", "t <b>", "t * b * t^-1 <b>", "t * b * t^-1 * b * t <b>", "t^-1 * b * t <b>"} <= texts
    with pytest.raises(ValueError):
        bs23.linearSubtree(9)


def test_line_is_a_path():
    line = bs23.linearSubtree(6)
    for v in line:
        if v:
            assert v[:-1] in line
    ends = [v for v in line if len(v) == 6]
    assert len(ends) == 2


def test_b6_fixes_base_vertex():
    assert words.act_on_vertex(nf("b^6"), (), O) == ()


def test_b6_fixes_line_and_moves_neighbours():
    rep = bs23.verifyB6(6)
    assert rep.ok
    assert len(rep.fixed) == 13 and len(rep.moved) == 6
    for v, img, ok in rep.fixed:
        assert v == img and ok
    for v, img, ok in rep.moved:
        assert v != img and ok


def test_fixed_chain_golden():
    rep = bs23.verifyB6(6)
    assert rep.traces["t * b * t^-1 * b * t * b * t^-1 <b>"] == FIXED_CHAIN


def test_moved_chain_golden():
    rep = bs23.verifyB6(6)
    assert rep.traces["t * b * t^-1 * b * t * b * t^-1 * b * t * t <b>"] == MOVED_CHAIN
    (entry,) = [m for m in rep.moved if m[0] == "t * b * t^-1 * b * t * b * t^-1 * b * t * t <b>"]
    assert entry[1] == "t * b * t^-1 * b * t * b * t^-1 * b * t * b * t <b>"


def test_traces_agree_with_engine():
    """The last state of every trace is the vertex computed by the word engine."""
    rep = bs23.verifyB6(6)
    for v, img, _ in rep.fixed + rep.moved:
        assert rep.traces[v][-1] == img


def test_push_trace_without_regrouping():
    assert bs23.push_trace(6, ((0, 1),)) == ["b^6 * t", "t * b^9", "t <b>"]


def test_report_json():
    d = bs23.verifyB6(2).to_json()
    assert d["ok"] and d["fixed"][0] == {"vertex": "<b>", "image": "<b>", "ok": True}


def test_b6_moved_image_has_matching_t_exponent():
    """w^-1 b^6 v has slope one in the affine image, a necessary condition for it to lie in <b>."""
    v = ((1, 1), (0, 1))
    img = words.act_on_vertex(nf("b^6"), v, O)
    assert img != v
    pv = bs23.vertex_tokens(v)
    pw = bs23.vertex_tokens(img)
    s, _ = oracles.bs23_affine(words.invert_tokens(pw) + [Token("b", power=6)] + pv)
    assert s == 1
