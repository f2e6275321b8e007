"""BS(2,3) = <t, b | t^-1 b^2 t = b^3> as an HNN extension of Z = <b>.

Base elements are integers (the exponent of b). The edge subgroups are 2Z
(pushed through t) and 3Z (pushed through t^-1); coset representatives are the
smallest nonnegative exponents, so vertex labels read like t b t^-1 <b>.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from . import words
from .words import Token, UnknownGeneratorError

# modulus of the subgroup H_e: H_-1 = 2Z, H_1 = 3Z
MOD = {-1: 2, 1: 3}


class BrittonPinchError(ValueError):
    pass


class IntBase:
    """Base oracle for the word engine; elements are exponents of b."""

    family = "hnn"

    def identity(self):
        return 0

    def mul(self, a, b):
        return a + b

    def inv(self, a):
        return -a

    def basepoint(self, eps):
        return 0

    def decompose(self, eps, g):
        i = g % MOD[eps]
        return i, g - i

    def rep(self, eps, i):
        return i

    def rep_indices(self, eps):
        return tuple(range(1, MOD[eps]))

    def in_h(self, g, eps):
        return g % MOD[eps] == 0

    def conj(self, h, eps):
        """t^eps b^h t^-eps: b^3k -> b^2k for eps=1, b^2k -> b^3k for eps=-1."""
        if h % MOD[eps]:
            raise BrittonPinchError(f"b^{h} is not in H_{eps}")
        return h // 3 * 2 if eps == 1 else h // 2 * 3

    def letters(self, tok: Token):
        if tok.side is not None or tok.path or tok.perm is not None:
            raise UnknownGeneratorError(f"{tok.to_text()} is not a BS(2,3) generator")
        if tok.name == "t":
            return [("t", tok.power)]
        if tok.name == "b":
            return [("g", tok.power)]
        raise UnknownGeneratorError(f"{tok.to_text()} is not a BS(2,3) generator")

    def rep_tokens(self, eps, i):
        return [Token("b", power=i)] if i else []

    def rep_text(self, eps, i):
        return words.format_word(self.rep_tokens(eps, i))

    def tail_tokens(self, g):
        return [Token("b", power=g)] if g else []

    def tail_text(self, g):
        return words.format_word(self.tail_tokens(g))


def oracle() -> IntBase:
    return IntBase()


def vertex_tokens(vertex) -> list[Token]:
    out: list[Token] = []
    for i, e in vertex:
        if i:
            out.append(Token("b", power=i))
        out.append(Token("t", power=e))
    return out


def vertex_text(vertex) -> str:
    return words.format_word(vertex_tokens(vertex)) + " <b>" if vertex else "<b>"


def linearSubtree(n: int) -> list[tuple]:
    """The line through <b> alternating t b t^-1 b ... and t^-1 b t b ..., up to n stable letters each way."""
    if n > 8:
        raise ValueError("n is capped at 8")
    out = [()]
    for first in (1, -1):
        v: tuple = ()
        for k in range(n):
            e = first if k % 2 == 0 else -first
            v = v + ((0 if k == 0 else 1, e),)
            out.append(v)
    return sorted(out, key=lambda v: (len(v), v))


def push_trace(power: int, vertex) -> list[str]:
    """Move b^power through the vertex word one syllable at a time.

    Each state is printed as ``done * b^k * rest``. When the exponent has to be
    regrouped in front of a stable letter, the regrouping is its own state.
    The last entry is the image vertex.
    """
    base = IntBase()
    done: list[Token] = []
    image: list = []
    k = power

    def b(x):
        return [Token("b", power=x)] if x else []

    states = [words.format_word(b(k) + vertex_tokens(vertex))]
    for pos, (s, e) in enumerate(vertex):
        rest = vertex_tokens(vertex[pos + 1:])
        r, h = base.decompose(-e, k + s)
        if r != s:
            states.append(words.format_word(done + b(r) + b(h) + [Token("t", power=e)] + rest))
        k = base.conj(h, -e)
        done += b(r) + [Token("t", power=e)]
        image.append((r, e))
        states.append(words.format_word(done + b(k) + rest))
    states.append(vertex_text(tuple(image)))
    return states


@dataclass
class B6Report:
    fixed: list = field(default_factory=list)       # (vertex text, image text, ok)
    moved: list = field(default_factory=list)       # (neighbour text, image text, ok)
    traces: dict = field(default_factory=dict)      # vertex text -> push trace

    @property
    def ok(self) -> bool:
        return all(x[2] for x in self.fixed) and all(x[2] for x in self.moved)

    def to_json(self) -> dict:
        return {"ok": self.ok,
                "fixed": [{"vertex": v, "image": w, "ok": ok} for v, w, ok in self.fixed],
                "moved": [{"vertex": v, "image": w, "ok": ok} for v, w, ok in self.moved],
                "traces": self.traces}


def verifyB6(n: int = 6) -> B6Report:
    """b^6 fixes the line pointwise, and moves the outward neighbour of every line
    vertex that starts and ends with the same power of t."""
    O = IntBase()
    g = words.reduce([Token("b", power=6)], O)
    rep = B6Report()
    for v in linearSubtree(n):
        img = words.act_on_vertex(g, v, O)
        trace = push_trace(6, v)
        same = img == v and trace[-1] == vertex_text(v)
        rep.fixed.append((vertex_text(v), vertex_text(img), same))
        rep.traces[vertex_text(v)] = trace
        if len(v) % 2 == 1:
            nb = v + ((0, v[-1][1]),)
            img = words.act_on_vertex(g, nb, O)
            trace = push_trace(6, nb)
            moved = img != nb and trace[-1] == vertex_text(img)
            rep.moved.append((vertex_text(nb), vertex_text(img), moved))
            rep.traces[vertex_text(nb)] = trace
    return rep
