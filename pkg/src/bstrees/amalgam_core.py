"""Portraits for the amalgam family G[Gamma_0, Gamma_1] = G_0 *_H G_1.

An element of G_j is stored as a node of *side* j: a label in Gamma_j and
children keyed by points of I_j, each child a node of side 1-j. Children below
the root are always elements of the smaller groups Q: their labels fix the
basepoint and they have no child at the basepoint, so Q_j is the wreath
product of Q_{1-j} over I'_j with top group Gamma'_j.

An element of H = <Q_0, Q_1> has a label fixing iota_j; its Q_j part is the
label with the non-basepoint children and its Q_{1-j} part is the child at
iota_j. Reading the same element from side 1-j swaps the two roles.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import words
from ._forest import Forest
from .permgroup import AbelQuotient, Perm, PermGroup, abelianization, stabilizer, transversal
from .permgroup import is_transitive
from .words import Token, UnknownGeneratorError


class InvalidGeneratorError(ValueError):
    pass


class InvalidPathError(ValueError):
    pass


class SideMismatchError(TypeError):
    pass


class NotInHError(ValueError):
    pass


class EnumerationLimitError(RuntimeError):
    pass


MAX_CONJ_LENGTH = 6


class AmalgamParams:
    def __init__(self, gamma0: PermGroup, gamma1: PermGroup):
        self.gammas = (gamma0, gamma1)
        for j, g in enumerate(self.gammas):
            if not is_transitive(g):
                raise ValueError(f"Gamma_{j} is not transitive")
        self.bases = tuple(g.basepoint for g in self.gammas)
        self.stabs = tuple(stabilizer(g, g.basepoint) for g in self.gammas)
        if all(s.order == 1 for s in self.stabs):
            raise ValueError("the two point stabilizers must not both be trivial")
        self.primes = tuple(tuple(i for i in range(g.domain_size) if i != g.basepoint)
                            for g in self.gammas)
        self.transversals = tuple(transversal(g) for g in self.gammas)

    @classmethod
    def from_json(cls, data: dict) -> "AmalgamParams":
        return cls(PermGroup.from_json(data["gamma0"], "Gamma0"),
                   PermGroup.from_json(data["gamma1"], "Gamma1"))

    def to_json(self) -> dict:
        return {"family": "amalgam", "gamma0": self.gammas[0].to_json(),
                "gamma1": self.gammas[1].to_json()}


class Amalgam:
    """One instance of the family; owns the node store for its portraits."""

    def __init__(self, params: AmalgamParams):
        self.params = params
        P = params
        self.forest = Forest([g.tables() for g in P.gammas], lambda kind, key: 1 - kind)
        self.base = P.bases
        self.primes = P.primes
        self.stab_ids = tuple(frozenset(P.gammas[j].index(s) for s in P.stabs[j].elements)
                              for j in (0, 1))
        self.trans_ids = tuple({i: P.gammas[j].index(t) for i, t in P.transversals[j].items()}
                               for j in (0, 1))
        self._abel = None

    @classmethod
    def from_groups(cls, gamma0: PermGroup, gamma1: PermGroup) -> "Amalgam":
        return cls(AmalgamParams(gamma0, gamma1))

    # ---- raw node level

    def identity_n(self, side: int) -> int:
        return self.forest.identity[side]

    def perm_id(self, side: int, sigma: Perm | str) -> int:
        G = self.params.gammas[side]
        if isinstance(sigma, str):
            sigma = Perm.parse(sigma, G.domain_size)
        if sigma not in G:
            raise InvalidGeneratorError(f"{sigma} is not in Gamma_{side}")
        return G.index(sigma)

    def g_node(self, side: int, sigma) -> int:
        return self.forest.make(side, self.perm_id(side, sigma), ())

    def h_node(self, side: int, path: Sequence[int], sigma) -> int:
        if not path:
            raise InvalidPathError("h-generators need a nonempty path")
        for t, i in enumerate(path):
            s = (side + t) % 2
            if i not in self.primes[s]:
                raise InvalidPathError(f"index {i} at position {t} is not in I'_{s}")
        last = (side + len(path)) % 2
        lab = self.perm_id(last, sigma)
        if lab not in self.stab_ids[last]:
            raise InvalidGeneratorError(f"{sigma} does not fix the basepoint of I_{last}")
        f = self.forest
        node = f.make(last, lab, ())
        for t in range(len(path) - 1, -1, -1):
            s = (side + t) % 2
            node = f.build(s, 0, {path[t]: node})
        return node

    def rep_n(self, side: int, i: int) -> int:
        return self.forest.make(side, self.trans_ids[side][i], ())

    def in_h_n(self, a: int) -> bool:
        f = self.forest
        side = f.kind[a]
        return f.label[a] in self.stab_ids[side]

    def to_side_n(self, a: int, side: int) -> int:
        """The same element of H read from the other factor."""
        f = self.forest
        j = f.kind[a]
        if j == side:
            return a
        if f.label[a] not in self.stab_ids[j]:
            raise NotInHError("element is not in H")
        b = self.base[j]
        own = f.make(j, f.label[a], tuple(kc for kc in f.kids[a] if kc[0] != b))
        other = f.child(a, b)
        kids = dict(f.kids[other])
        kids[self.base[side]] = own
        return f.build(side, f.label[other], kids)

    def embed_q_n(self, q: int, side: int) -> int:
        """A Q-node of side 1-side placed at the basepoint child of side ``side``."""
        return self.forest.build(side, 0, {self.base[side]: q})

    def decompose_n(self, a: int):
        f = self.forest
        j = f.kind[a]
        i = self.params.gammas[j].elements[f.label[a]](self.base[j])
        if i == self.base[j]:
            return None, a
        return i, f.mul(f.inv(self.rep_n(j, i)), a)

    def q_parts_n(self, a: int):
        f = self.forest
        j = f.kind[a]
        if f.label[a] not in self.stab_ids[j]:
            raise NotInHError("element is not in H")
        b = self.base[j]
        own = f.make(j, f.label[a], tuple(kc for kc in f.kids[a] if kc[0] != b))
        return own, f.child(a, b)

    def is_q_n(self, a: int) -> bool:
        f = self.forest
        j = f.kind[a]
        return f.label[a] in self.stab_ids[j] and self.base[j] not in f.kidmap[a]

    def act_vertex_n(self, a: int, vertex):
        """Direct portrait action of a side-j node on an amalgam vertex."""
        f = self.forest
        s = f.kind[a]
        j, path = vertex
        if j == s and not path:
            return vertex
        if j == s:
            branch, rest = path[0], path[1:]
        else:
            branch, rest = self.base[s], path
        t = f.tables[s][2][f.label[a]][branch]
        c = f.kidmap[a].get(t)
        img = rest if c is None else f.act_word(c, rest)
        if t == self.base[s]:
            return (1 - s, img)
        return (s, (t,) + img)

    # ---- token evaluation

    def token_node(self, tok: Token, side: int | None = None) -> int:
        """Portrait of one generator (with its power) as an element of G_side."""
        if tok.name == "g":
            node = self.g_node(tok.side, tok.perm)
            home = tok.side
        elif tok.name == "h" and tok.side is not None:
            node = self.h_node(tok.side, tok.path, tok.perm)
            home = tok.side
        else:
            raise UnknownGeneratorError(f"{tok.to_text()} is not an amalgam generator")
        if side is not None and side != home:
            node = self.to_side_n(node, side)
            home = side
        f = self.forest
        p = tok.power
        base = node if p > 0 else f.inv(node)
        out = f.identity[home]
        for _ in range(abs(p)):
            out = f.mul(out, base)
        return out

    def eval_tokens_n(self, tokens: Iterable[Token], side: int) -> int:
        f = self.forest
        out = f.identity[side]
        for tok in tokens:
            out = f.mul(out, self.token_node(tok, side))
        return out

    def expand_n(self, a: int) -> list[Token]:
        """Generator word for a node: placed children first, then the top."""
        f = self.forest
        j = f.kind[a]
        out: list[Token] = []
        for k, c in f.kids[a]:
            sub = self.expand_n(c)
            if k == self.base[j]:
                out.extend(sub)
            else:
                for t in sub:
                    path = (k,) if t.name == "g" else (k,) + t.path
                    out.append(Token("h", j, path, t.perm))
        if f.label[a] != 0:
            out.append(Token("g", j, (), str(self.params.gammas[j].elements[f.label[a]])))
        return out

    def perm_of(self, a: int) -> Perm:
        f = self.forest
        return self.params.gammas[f.kind[a]].elements[f.label[a]]

    # ---- abelianization / theta

    @property
    def abel(self) -> tuple[AbelQuotient, AbelQuotient]:
        if self._abel is None:
            self._abel = tuple(abelianization(g) for g in self.params.gammas)
        return self._abel

    def theta_token(self, tok: Token) -> tuple[int, int]:
        if tok.name == "g":
            comp = tok.side
            G = self.params.gammas[comp]
            sigma = Perm.parse(tok.perm, G.domain_size)
            if sigma not in G:
                raise InvalidGeneratorError(f"{sigma} is not in Gamma_{comp}")
        elif tok.name == "h" and tok.side is not None:
            self.h_node(tok.side, tok.path, tok.perm)   # validates the signature
            comp = (tok.side + len(tok.path)) % 2
            sigma = Perm.parse(tok.perm, self.params.gammas[comp].domain_size)
        else:
            raise UnknownGeneratorError(f"{tok.to_text()} is not an amalgam generator")
        A = self.abel[comp]
        x = A.project(sigma)
        if tok.power < 0:
            x = A.neg(x)
        val = A.identity
        for _ in range(abs(tok.power)):
            val = A.add(val, x)
        return (val, 0) if comp == 0 else (0, val)

    def theta_add(self, a, b):
        A0, A1 = self.abel
        return (A0.add(a[0], b[0]), A1.add(a[1], b[1]))


# ---------------------------------------------------------------- element values

class _Portrait:
    __slots__ = ("fam", "nid")

    def __init__(self, fam: Amalgam, nid: int):
        self.fam = fam
        self.nid = nid

    @property
    def side(self) -> int:
        return self.fam.forest.kind[self.nid]

    @property
    def top(self) -> Perm:
        return self.fam.perm_of(self.nid)

    @property
    def children(self) -> dict:
        f = self.fam.forest
        return {k: QElem(self.fam, c) for k, c in f.kids[self.nid]}

    @property
    def depth(self) -> int:
        return self.fam.forest.depth[self.nid]

    def is_identity(self) -> bool:
        return self.nid in self.fam.forest.idset

    def __eq__(self, other) -> bool:
        return (type(self) is type(other) and self.fam is other.fam and self.nid == other.nid)

    def __hash__(self) -> int:
        return hash((type(self).__name__, self.nid))

    def to_json(self) -> dict:
        d = {"side": self.side, "top": str(self.top)}
        ch = self.children
        if ch:
            d["children"] = {str(k): v.to_json() for k, v in ch.items()}
        return d

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.to_json()})"


class GElem(_Portrait):
    """Element of G_j."""

    def __mul__(self, other: "GElem") -> "GElem":
        return mul(self, other)

    def inverse(self) -> "GElem":
        return inv(self)


class QElem(_Portrait):
    """Element of Q_j (label fixes the basepoint, no basepoint child)."""

    def __init__(self, fam: Amalgam, nid: int):
        super().__init__(fam, nid)
        if not fam.is_q_n(nid):
            raise ValueError("portrait is not in Q")

    def __mul__(self, other: "QElem") -> "QElem":
        return mulQ(self, other)

    def inverse(self) -> "QElem":
        return invQ(self)

    def as_g(self) -> GElem:
        return GElem(self.fam, self.nid)


def _check_sides(a: _Portrait, b: _Portrait):
    if a.fam is not b.fam or a.side != b.side:
        raise SideMismatchError("portraits live on different sides")


def mul(a: GElem, b: GElem) -> GElem:
    _check_sides(a, b)
    return GElem(a.fam, a.fam.forest.mul(a.nid, b.nid))


def inv(a: GElem) -> GElem:
    return GElem(a.fam, a.fam.forest.inv(a.nid))


def mulQ(a: QElem, b: QElem) -> QElem:
    _check_sides(a, b)
    return QElem(a.fam, a.fam.forest.mul(a.nid, b.nid))


def invQ(a: QElem) -> QElem:
    return QElem(a.fam, a.fam.forest.inv(a.nid))


def identity(fam: Amalgam, side: int) -> GElem:
    return GElem(fam, fam.identity_n(side))


def genG(fam: Amalgam, j: int, sigma) -> GElem:
    return GElem(fam, fam.g_node(j, sigma))


def genH(fam: Amalgam, j: int, path: Sequence[int], sigma) -> GElem:
    return GElem(fam, fam.h_node(j, tuple(path), sigma))


def to_side(h: GElem, side: int) -> GElem:
    return GElem(h.fam, h.fam.to_side_n(h.nid, side))


def isInH(g: GElem) -> bool:
    return g.fam.in_h_n(g.nid)


def cosetDecompose(g: GElem):
    """(i, h) with g = gamma^i h, or (None, g) when g is already in H."""
    i, h = g.fam.decompose_n(g.nid)
    return i, GElem(g.fam, h)


def hFactor(h: GElem) -> tuple[QElem, QElem]:
    own, other = h.fam.q_parts_n(h.nid)
    parts = {h.side: QElem(h.fam, own), 1 - h.side: QElem(h.fam, other)}
    return parts[0], parts[1]


def recompose(q0: QElem, q1: QElem, side: int = 0) -> GElem:
    fam = q0.fam
    f = fam.forest
    mine, other = (q0, q1) if side == 0 else (q1, q0)
    return GElem(fam, f.mul(mine.nid, fam.embed_q_n(other.nid, side)))


def quasiKernelMember(h: GElem, j: int) -> bool:
    """Membership in K_j, which is the group Q_{1-j}."""
    parts = hFactor(h)
    return parts[j].is_identity()


def cJnMember(h: GElem, j: int, n: int) -> bool:
    """Whether g^-1 h g lies in H for every product g of n transversal letters starting in G_j."""
    if not isInH(h):
        raise NotInHError("element is not in H")
    if n > MAX_CONJ_LENGTH:
        raise EnumerationLimitError(f"conjugator length {n} over bound {MAX_CONJ_LENGTH}")
    return _cjn(h.fam, h.nid, j, n)


def _cjn(fam: Amalgam, a: int, side: int, n: int) -> bool:
    if n == 0:
        return True
    f = fam.forest
    x = fam.to_side_n(a, side)
    for i in fam.primes[side]:
        y = f.conj(x, fam.rep_n(side, i))
        if not fam.in_h_n(y):
            return False
        if not _cjn(fam, y, 1 - side, n - 1):
            return False
    return True


def depth(g: _Portrait) -> int:
    return g.depth


# ---------------------------------------------------------------- theta

def thetaHom(fam: Amalgam, w) -> tuple[int, int]:
    """Value in Gamma_0^ab x Gamma_1^ab, computed from the generator string."""
    tokens = words.parse_word(w) if isinstance(w, str) else w
    val = (0, 0)
    for tok in tokens:
        val = fam.theta_add(val, fam.theta_token(tok))
    return val


def nMember(fam: Amalgam, w) -> bool:
    return thetaHom(fam, w) == (0, 0)


def n_generating_set(fam: Amalgam, max_n: int = 2) -> list[list[Token]]:
    """All members of the four generator families of the kernel of theta, paths up to max_n+1."""
    P = fam.params
    out: list[list[Token]] = []
    for k in (0, 1):
        for s in P.gammas[k].elements:
            if fam.abel[k].project(s) == 0:
                out.append([Token("g", k, (), str(s))])
    for k in (0, 1):
        for s in P.stabs[k].elements:
            for i in P.primes[1 - k]:
                out.append([Token("g", k, (), str(s)), Token("h", 1 - k, (i,), str(s.inverse()))])
    for n in range(1, max_n + 1):
        comp = (n + 1) % 2
        for s in P.stabs[comp].elements:
            for ip in _paths(fam, 0, n + 1):
                for sp in _paths(fam, 1, n):
                    out.append([Token("h", 0, ip, str(s)), Token("h", 1, sp, str(s.inverse()))])
        comp = n % 2
        for s in P.stabs[comp].elements:
            for ip in _paths(fam, 0, n):
                for sp in _paths(fam, 1, n + 1):
                    out.append([Token("h", 0, ip, str(s)), Token("h", 1, sp, str(s.inverse()))])
    return out


def _paths(fam: Amalgam, side: int, length: int):
    return itertools.product(*[fam.primes[(side + t) % 2] for t in range(length)])


# ---------------------------------------------------------------- report

@dataclass(frozen=True)
class CstarReport:
    uniqueTrace: bool
    cstarSimple: bool
    quasiKernelAmenable: dict

    def to_json(self) -> dict:
        return {"uniqueTrace": self.uniqueTrace, "cstarSimple": self.cstarSimple,
                "quasiKernelAmenable": dict(self.quasiKernelAmenable)}


def cstarReport(params: AmalgamParams, amenable: dict | None = None) -> CstarReport:
    """Criterion logic only. ``amenable`` maps 0/1 to the flag for Gamma'_0/Gamma'_1;
    finite stabilizers default to amenable."""
    flags = {0: True, 1: True}
    if amenable:
        flags.update({int(k): bool(v) for k, v in amenable.items()})
    both = flags[0] and flags[1]
    return CstarReport(True, not both, {"Q0": both, "Q1": both})


# ---------------------------------------------------------------- enumeration helpers

def enumerate_q(fam: Amalgam, side: int, max_depth: int) -> list[int]:
    """All Q_side node ids of depth at most ``max_depth``."""
    f = fam.forest
    labels = sorted(fam.stab_ids[side])
    if max_depth == 0:
        return [f.make(side, lab, ()) for lab in labels]
    below = enumerate_q(fam, 1 - side, max_depth - 1)
    keys = fam.primes[side]
    out = []
    for lab in labels:
        for combo in itertools.product(below, repeat=len(keys)):
            out.append(f.build(side, lab, dict(zip(keys, combo))))
    return out


def enumerate_h(fam: Amalgam, max_depth: int, side: int = 0) -> list[int]:
    """All H elements whose two Q parts have depth at most ``max_depth``, read from ``side``."""
    f = fam.forest
    own = enumerate_q(fam, side, max_depth)
    other = enumerate_q(fam, 1 - side, max_depth)
    b = fam.base[side]
    out = []
    for q in own:
        for r in other:
            kids = dict(f.kids[q])
            if r not in f.idset:
                kids[b] = r
            out.append(f.build(side, f.label[q], kids))
    return out


def generator_tokens(fam: Amalgam, max_depth: int = 2) -> list[Token]:
    """Every non-trivial g_j(σ) and h_j(path; σ') with path length at most ``max_depth``."""
    P = fam.params
    out = []
    for j in (0, 1):
        G = P.gammas[j]
        out += [Token("g", j, (), str(s)) for s in G.elements if not s.is_identity()]
    for m in range(1, max_depth + 1):
        for j in (0, 1):
            last = (j + m) % 2
            sig = [P.gammas[last].elements[k] for k in sorted(fam.stab_ids[last]) if k != 0]
            for path in itertools.product(*(fam.primes[(j + t) % 2] for t in range(m))):
                out += [Token("h", j, path, str(s)) for s in sig]
    return out


# ---------------------------------------------------------------- oracle for the word engine

class AmalgamOracle:
    """Base oracle over portraits; edge-group tails are stored as side-0 nodes."""

    family = "amalgam"

    def __init__(self, fam: Amalgam):
        self.fam = fam
        self.f = fam.forest

    def identity(self):
        return self.f.identity[0]

    def lift(self, side, h):
        return self.fam.to_side_n(h, side)

    def mul(self, side, a, b):
        return self.f.mul(a, b)

    def inv(self, side, a):
        return self.f.inv(a)

    def equal(self, side, a, b):
        return a == b

    def decompose(self, side, g):
        i, h = self.fam.decompose_n(g)
        return i, self.fam.to_side_n(h, 0)

    def rep(self, side, i):
        return self.fam.rep_n(side, i)

    def rep_indices(self, side):
        return self.fam.primes[side]

    def basepoint(self, side):
        return self.fam.base[side]

    def letters(self, tok: Token):
        if tok.name == "g":
            return [(tok.side, self.fam.token_node(tok))]
        if tok.name == "h" and tok.side is not None:
            return [(tok.side, self.fam.token_node(tok))]
        raise UnknownGeneratorError(f"{tok.to_text()} is not an amalgam generator")

    def rep_tokens(self, side, i):
        return [Token("g", side, (), str(self.fam.params.transversals[side][i]))]

    def rep_text(self, side, i):
        return words.format_word(self.rep_tokens(side, i))

    def tail_tokens(self, h):
        return self.fam.expand_n(h)

    def tail_text(self, h):
        return words.format_word(self.tail_tokens(h))


# ---------------------------------------------------------------- relation suite

@dataclass
class RelationReport:
    counts: dict
    failures: list

    @property
    def ok(self) -> bool:
        return not self.failures

    @property
    def total(self) -> int:
        return sum(self.counts.values())


def relation_instances(fam: Amalgam, max_path: int = 3):
    """Yield (relation, side, lhs tokens, rhs tokens) for every defining relation
    with paths of length at most ``max_path``."""
    P = fam.params

    def g(j, s, p=1):
        return Token("g", j, (), str(s), p)

    def h(j, path, s, p=1):
        return Token("h", j, tuple(path), str(s), p)

    def stab(k):
        return P.stabs[k % 2].elements

    def paths(j, lo=1):
        for n in range(lo, max_path + 1):
            yield from _paths(fam, j, n)

    q_gens = {j: [[g(j, s)] for s in stab(j)] +
                 [[h(j, p, s)] for p in paths(j) for s in stab(j + len(p))] for j in (0, 1)}
    for a in q_gens[0]:
        for b in q_gens[1]:
            yield "R1", 0, a + b, b + a
    for j in (0, 1):
        for n in range(1, max_path + 1):
            for ip in _paths(fam, j, n):
                for m in range(1, n + 1):
                    for sp in _paths(fam, j, m):
                        if tuple(ip[:m]) == tuple(sp):
                            continue
                        for s in stab(j + m):
                            for t in stab(j + n):
                                yield ("R2", j, [h(j, sp, s), h(j, ip, t)], [h(j, ip, t), h(j, sp, s)])
                for m in range(1, n):
                    pre = ip[:m]
                    for s in stab(j + m):
                        moved = list(ip)
                        moved[m] = s(ip[m])
                        for t in stab(j + n):
                            yield ("R3", j, [h(j, pre, s), h(j, ip, t), h(j, pre, s, -1)], [h(j, moved, t)])
                last = stab(j + n)
                for s in last:
                    if s.is_identity():
                        yield "R4", j, [h(j, ip, s)], []
                    yield "R4", j, [h(j, ip, s, -1)], [h(j, ip, s.inverse())]
                    for t in last:
                        yield "R4", j, [h(j, ip, t), h(j, ip, s)], [h(j, ip, t * s)]
        for s in P.gammas[j].elements:
            if s.is_identity():
                yield "R5", j, [g(j, s)], []
            yield "R5", j, [g(j, s, -1)], [g(j, s.inverse())]
            for t in P.gammas[j].elements:
                yield "R5", j, [g(j, s), g(j, t)], [g(j, s * t)]
        b = fam.base[j]
        for s in P.gammas[j].elements:
            for ip in paths(j):
                for t in stab(j + len(ip)):
                    lhs = [g(j, s), h(j, ip, t), g(j, s, -1)]
                    if s(ip[0]) == b and len(ip) == 1:
                        rhs = [g(1 - j, t)]
                    elif s(ip[0]) == b:
                        rhs = [h(1 - j, ip[1:], t)]
                    else:
                        rhs = [h(j, (s(ip[0]),) + tuple(ip[1:]), t)]
                    yield "R6", j, lhs, rhs


def relation_suite(fam: Amalgam, max_path: int = 3) -> RelationReport:
    """Check every relation instance by portrait multiplication."""
    cache: dict = {}

    def node(tok: Token, side: int) -> int:
        key = (tok, side)
        r = cache.get(key)
        if r is None:
            r = cache[key] = fam.token_node(tok, side)
        return r

    f = fam.forest
    counts: dict = {}
    failures = []
    for rel, side, lhs, rhs in relation_instances(fam, max_path):
        counts[rel] = counts.get(rel, 0) + 1
        a = f.identity[side]
        for t in lhs:
            a = f.mul(a, node(t, side))
        b = f.identity[side]
        for t in rhs:
            b = f.mul(b, node(t, side))
        if a != b:
            failures.append((rel, words.format_word(lhs), words.format_word(rhs)))
    return RelationReport(counts, failures)
