"""Portraits for the HNN family Lambda[Sigma_-1, Sigma_1] = HNN(G, H, theta).

Gamma = Sigma_-1 x Sigma_1 acts on the disjoint union I_-1 + I_1, numbered
with I_-1 first. A path step ``(i, e)`` has ``i`` in I_{-e}; its *key* is the
position of ``i`` in the union, so the sign of a step can be read off its key
and the root label permutes keys directly.

Every node is a Gamma-labelled node of one forest. A node reached by a step of
sign e (its *context*) has a label in Gamma_e and no child at the back-step
``(iota_e, -e)``, whose key is the union position of iota_e. The base group G
is exactly the set of such finite portraits, and H_e consists of the portraits
whose root label fixes iota_e.

Conjugation by the stable letter re-roots the portrait: the child at the
back-step becomes the new root and the old root is hung below it.

Permutations of Gamma are written either on the union (``"(0 1)(2 3)"``) or as
a pair ``"(0 1)|()"`` of a Sigma_-1 part and a Sigma_1 part.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import words
from ._forest import Forest
from .permgroup import (AbelQuotient, Perm, PermGroup, abelianization, direct_product,
                        is_transitive, stabilizer, transversal)
from .words import Token, UnknownGeneratorError


class InvalidGeneratorError(ValueError):
    pass


class InvalidPathError(ValueError):
    pass


class BrittonPinchError(ValueError):
    """Stable-letter conjugation asked of an element outside the edge group."""


class EnumerationLimitError(RuntimeError):
    pass


SIGNS = (-1, 1)
MAX_ORACLE_LENGTH = 4


class HnnParams:
    def __init__(self, sigmaM: PermGroup, sigmaP: PermGroup):
        self.sigmas = {-1: sigmaM, 1: sigmaP}
        for e, s in self.sigmas.items():
            if not is_transitive(s):
                raise ValueError(f"Sigma_{e} is not transitive")
        self.sigmaM, self.sigmaP = sigmaM, sigmaP
        self.n_minus = sigmaM.domain_size
        self.gamma = direct_product(sigmaM, sigmaP, "Gamma")
        self.bases = {e: s.basepoint for e, s in self.sigmas.items()}
        self.sizes = {e: s.domain_size for e, s in self.sigmas.items()}
        self.primes = {e: tuple(i for i in range(self.sizes[e]) if i != self.bases[e]) for e in SIGNS}
        self.gammaEps = {e: stabilizer(self.gamma, self.union(e, self.bases[e])) for e in SIGNS}
        # lambda_e^i = h(mu_e^i), lifted to Gamma
        self.transversals = {e: {i: self.lift(e, mu) for i, mu in transversal(s).items()}
                             for e, s in self.sigmas.items()}

    def union(self, e: int, i: int) -> int:
        """Position of the point ``i`` of I_e inside the disjoint union."""
        return i if e == -1 else self.n_minus + i

    def lift(self, e: int, g: Perm) -> Perm:
        n, m = self.n_minus, self.sizes[1]
        if e == -1:
            return Perm(list(g.images) + list(range(n, n + m)))
        return Perm(list(range(n)) + [n + x for x in g.images])

    def split(self, g: Perm) -> tuple[Perm, Perm]:
        n = self.n_minus
        return Perm(g.images[:n]), Perm(x - n for x in g.images[n:])

    def parse_perm(self, text: str) -> Perm:
        if "|" in text:
            a, b = text.split("|", 1)
            return self.lift(-1, Perm.parse(a, self.n_minus)) * self.lift(1, Perm.parse(b, self.sizes[1]))
        return Perm.parse(text, self.gamma.domain_size)

    def format_perm(self, g: Perm) -> str:
        a, b = self.split(g)
        return f"{a}|{b}"

    @classmethod
    def from_json(cls, data: dict) -> "HnnParams":
        return cls(PermGroup.from_json(data["sigmaM"], "Sigma_-1"),
                   PermGroup.from_json(data["sigmaP"], "Sigma_1"))

    def to_json(self) -> dict:
        return {"family": "hnn", "sigmaM": self.sigmaM.to_json(), "sigmaP": self.sigmaP.to_json()}


class Hnn:
    """One instance of the family; owns the node store for its portraits."""

    def __init__(self, params: HnnParams):
        self.params = P = params
        self.gamma = P.gamma
        self.forest = Forest([P.gamma.tables()], lambda kind, key: 0)
        self.n_minus = P.n_minus
        self.base = P.bases
        self.primes = P.primes
        # union key of iota_e; also the key of the back-step excluded below a sign-e step
        self.bkey = {e: P.union(e, P.bases[e]) for e in SIGNS}
        self.stab_ids = {e: frozenset(P.gamma.index(g) for g in P.gammaEps[e].elements) for e in SIGNS}
        self.trans_ids = {e: {i: P.gamma.index(g) for i, g in P.transversals[e].items()} for e in SIGNS}
        self.nkeys = P.gamma.domain_size
        self._abel = None

    @classmethod
    def from_groups(cls, sigmaM: PermGroup, sigmaP: PermGroup) -> "Hnn":
        return cls(HnnParams(sigmaM, sigmaP))

    # ---- steps and keys

    def key(self, i: int, e: int) -> int:
        if e not in SIGNS:
            raise InvalidPathError(f"step sign must be +-1, got {e}")
        side = -e
        if not 0 <= i < self.params.sizes[side]:
            raise InvalidPathError(f"index {i} is not in I_{side}")
        return self.params.union(side, i)

    def step(self, key: int) -> tuple[int, int]:
        return (key, 1) if key < self.n_minus else (key - self.n_minus, -1)

    def sign_of_key(self, key: int) -> int:
        return 1 if key < self.n_minus else -1

    # ---- raw node level

    @property
    def identity_n(self) -> int:
        return self.forest.identity[0]

    def perm_id(self, sigma) -> int:
        if isinstance(sigma, str):
            sigma = self.params.parse_perm(sigma)
        if sigma not in self.gamma:
            raise InvalidGeneratorError(f"{sigma} is not in Gamma")
        return self.gamma.index(sigma)

    def perm_of(self, a: int) -> Perm:
        return self.gamma.elements[self.forest.label[a]]

    def top_node(self, sigma) -> int:
        return self.forest.make(0, self.perm_id(sigma), ())

    def check_path(self, path: Sequence[tuple[int, int]]) -> list[int]:
        keys = []
        prev = None
        for t, (i, e) in enumerate(path):
            k = self.key(i, e)
            if prev is not None and k == self.bkey[prev]:
                raise InvalidPathError(f"step {t} ({i},{e}) turns back along ({self.base[prev]},{-prev})")
            keys.append(k)
            prev = e
        return keys

    def path_node(self, path: Sequence[tuple[int, int]], sigma) -> int:
        if not path:
            return self.top_node(sigma)
        keys = self.check_path(path)
        last = path[-1][1]
        lab = self.perm_id(sigma)
        if lab not in self.stab_ids[last]:
            raise InvalidGeneratorError(f"{sigma} is not in Gamma_{last}")
        f = self.forest
        node = f.make(0, lab, ())
        for k in reversed(keys):
            node = f.build(0, 0, {k: node})
        return node

    def rep_n(self, e: int, i: int) -> int:
        return self.forest.make(0, self.trans_ids[e][i], ())

    def in_h_n(self, a: int, e: int) -> bool:
        return self.forest.label[a] in self.stab_ids[e]

    def decompose_n(self, e: int, a: int) -> tuple[int, int]:
        """(i, h) with a = lambda_e^i * h and h in H_e; i == iota_e when a is in H_e."""
        f = self.forest
        k = self.gamma.elements[f.label[a]](self.bkey[e])
        i = k if e == -1 else k - self.n_minus
        if i == self.base[e]:
            return i, a
        return i, f.mul(f.inv(self.rep_n(e, i)), a)

    def conj_tau_n(self, a: int, e: int) -> int:
        """tau^e * a * tau^-e for a in H_e."""
        f = self.forest
        if f.label[a] not in self.stab_ids[e]:
            raise BrittonPinchError(f"element is not in H_{e}")
        back = self.bkey[e]
        c = f.child(a, back)
        kids = dict(f.kids[c])
        kids[self.bkey[-e]] = f.make(0, f.label[a], tuple(kc for kc in f.kids[a] if kc[0] != back))
        return f.build(0, f.label[c], kids)

    def k_eps_member_n(self, a: int, e: int) -> bool:
        f = self.forest
        return f.label[a] == 0 and all(k == self.bkey[-e] for k, _ in f.kids[a])

    def lambda_bar_member_n(self, a: int, e: int) -> bool:
        f = self.forest
        return f.label[a] in self.stab_ids[-e] and self.bkey[-e] not in f.kidmap[a]

    def is_valid_n(self, a: int, context: int | None = None) -> bool:
        """Check the canonical-portrait constraints below a node of the given context."""
        f = self.forest
        if context is not None:
            if f.label[a] not in self.stab_ids[context] or self.bkey[context] in f.kidmap[a]:
                return False
        return all(self.is_valid_n(c, self.sign_of_key(k)) for k, c in f.kids[a])

    def act_vertex_n(self, a: int, vertex: Sequence[tuple[int, int]]) -> tuple:
        """Direct portrait action on a tree vertex given as its step tuple."""
        keys = [self.key(i, e) for i, e in vertex]
        return tuple(self.step(k) for k in self.forest.act_word(a, keys))

    # ---- tokens

    def token_node(self, tok: Token) -> int:
        if tok.name != "h" or tok.side is not None:
            raise UnknownGeneratorError(f"{tok.to_text()} is not a base-group generator")
        node = self.path_node(tok.path, tok.perm)
        f = self.forest
        base = node if tok.power > 0 else f.inv(node)
        out = f.identity[0]
        for _ in range(abs(tok.power)):
            out = f.mul(out, base)
        return out

    def eval_tokens_n(self, tokens: Iterable[Token]) -> int:
        f = self.forest
        out = f.identity[0]
        for tok in tokens:
            out = f.mul(out, self.token_node(tok))
        return out

    def expand_n(self, a: int) -> list[Token]:
        """Generator word for a node: placed children first, then the top."""
        f = self.forest
        out: list[Token] = []
        for k, c in f.kids[a]:
            st = self.step(k)
            for t in self.expand_n(c):
                out.append(Token("h", None, (st,) + t.path, t.perm))
        if f.label[a] != 0:
            out.append(Token("h", None, (), self.params.format_perm(self.perm_of(a))))
        return out

    # ---- abelianization / eta

    @property
    def abel(self) -> AbelQuotient:
        if self._abel is None:
            self._abel = abelianization(self.gamma)
        return self._abel

    def eta_token(self, tok: Token) -> "WreathZElem":
        A = self.abel
        if tok.name == "t" and tok.side is None:
            return WreathZElem(tok.power, {})
        if tok.name != "h" or tok.side is not None:
            raise UnknownGeneratorError(f"{tok.to_text()} is not a generator of this family")
        self.path_node(tok.path, tok.perm)                # validates the signature
        cls = A.project(self.params.parse_perm(tok.perm))
        pos = sum(e for _, e in tok.path)
        one = WreathZElem(0, {pos: cls} if cls else {}, A)
        out = WreathZElem(0, {}, A)
        step = one if tok.power > 0 else one.inverse()
        for _ in range(abs(tok.power)):
            out = out * step
        return out


# ---------------------------------------------------------------- wreath Z

@dataclass(frozen=True)
class WreathZElem:
    """(labels, shift) in (Gamma/[Gamma,Gamma]) wr Z; labels is a finite-support map."""
    shift: int = 0
    labels: dict = field(default_factory=dict)
    abel: AbelQuotient | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "labels", {k: v for k, v in self.labels.items() if v})

    def _group(self, other=None) -> AbelQuotient:
        A = self.abel or (other.abel if other is not None else None)
        if A is None and (self.labels or (other is not None and other.labels)):
            raise ValueError("wreath element without an abelian table")
        return A

    def __mul__(self, other: "WreathZElem") -> "WreathZElem":
        A = self._group(other)
        out = dict(self.labels)
        for k, v in other.labels.items():
            t = k + self.shift
            out[t] = A.add(out.get(t, 0), v)
        return WreathZElem(self.shift + other.shift, out, A)

    def inverse(self) -> "WreathZElem":
        A = self._group()
        return WreathZElem(-self.shift, {k - self.shift: A.neg(v) for k, v in self.labels.items()}, A)

    def is_identity(self) -> bool:
        return self.shift == 0 and not self.labels

    def __eq__(self, other) -> bool:
        return isinstance(other, WreathZElem) and self.shift == other.shift and self.labels == other.labels

    def __hash__(self) -> int:
        return hash((self.shift, tuple(sorted(self.labels.items()))))

    def to_json(self) -> dict:
        return {"shift": self.shift, "labels": {str(k): v for k, v in sorted(self.labels.items())}}


def etaHom(fam: Hnn, w) -> WreathZElem:
    """Value in (Gamma^ab) wr Z, evaluated generator by generator on the given word."""
    tokens = words.parse_word(w) if isinstance(w, str) else w
    out = WreathZElem(0, {}, fam.abel)
    for tok in tokens:
        out = out * fam.eta_token(tok)
    return out


def xiMember(fam: Hnn, w) -> bool:
    return etaHom(fam, w).is_identity()


# ---------------------------------------------------------------- element values

class HnnElem:
    """An element of the base group G as a canonical portrait."""

    __slots__ = ("fam", "nid")

    def __init__(self, fam: Hnn, nid: int):
        self.fam = fam
        self.nid = nid

    @property
    def top(self) -> Perm:
        return self.fam.perm_of(self.nid)

    @property
    def children(self) -> dict:
        f = self.fam.forest
        return {self.fam.step(k): HnnElem(self.fam, c) for k, c in f.kids[self.nid]}

    @property
    def depth(self) -> int:
        return self.fam.forest.depth[self.nid]

    def is_identity(self) -> bool:
        return self.nid == self.fam.identity_n

    def __mul__(self, other: "HnnElem") -> "HnnElem":
        return mulNode(self, other)

    def inverse(self) -> "HnnElem":
        return invNode(self)

    def __eq__(self, other) -> bool:
        return isinstance(other, HnnElem) and self.fam is other.fam and self.nid == other.nid

    def __hash__(self) -> int:
        return hash(self.nid)

    def to_json(self) -> dict:
        return {"top": self.fam.params.format_perm(self.top),
                "children": [{"step": list(s), **c.to_json()} for s, c in self.children.items()]}

    def __repr__(self) -> str:
        return f"HnnElem({words.format_word(self.fam.expand_n(self.nid))})"


def mulNode(a: HnnElem, b: HnnElem) -> HnnElem:
    return HnnElem(a.fam, a.fam.forest.mul(a.nid, b.nid))


def invNode(a: HnnElem) -> HnnElem:
    return HnnElem(a.fam, a.fam.forest.inv(a.nid))


def identity(fam: Hnn) -> HnnElem:
    return HnnElem(fam, fam.identity_n)


def genTop(fam: Hnn, sigma) -> HnnElem:
    return HnnElem(fam, fam.top_node(sigma))


def genPath(fam: Hnn, path: Sequence[tuple[int, int]], sigma) -> HnnElem:
    return HnnElem(fam, fam.path_node(tuple(tuple(s) for s in path), sigma))


def isInHeps(g: HnnElem, eps: int) -> bool:
    return g.fam.in_h_n(g.nid, eps)


def cosetDecomposeEps(g: HnnElem, eps: int) -> tuple[int | None, HnnElem]:
    i, h = g.fam.decompose_n(eps, g.nid)
    return (None if i == g.fam.base[eps] else i), HnnElem(g.fam, h)


def conjugateByTau(g: HnnElem, eps: int) -> HnnElem:
    """tau^eps * g * tau^-eps; g must lie in H_eps."""
    return HnnElem(g.fam, g.fam.conj_tau_n(g.nid, eps))


def kEpsMember(g: HnnElem, eps: int) -> bool:
    """Read off the portrait: trivial root label and support only below the step
    (iota_-eps, eps), i.e. below the vertex tau^eps G."""
    return g.fam.k_eps_member_n(g.nid, eps)


def lambdaBarMember(g: HnnElem, eps: int) -> bool:
    return g.fam.lambda_bar_member_n(g.nid, eps)


def kEpsOracle(g: HnnElem, eps: int, L: int) -> bool:
    """Check r^-1 g r in H for every normal form r of at most L syllables that does not
    start with tau^eps. Conjugation is done one syllable at a time; a conjugate that
    leaves the edge group before a stable letter can never return to G."""
    if L > MAX_ORACLE_LENGTH:
        raise EnumerationLimitError(f"syllable bound {L} exceeds {MAX_ORACLE_LENGTH}")
    return _k_oracle(g.fam, g.nid, eps, L)


def _k_oracle(fam: Hnn, a: int, eps: int, L: int) -> bool:
    f = fam.forest
    lam = [fam.rep_n(-1, i) for i in range(fam.params.sizes[-1])]
    steps = [(i, e) for e in SIGNS for i in range(fam.params.sizes[-e])]
    forbidden = (fam.base[-eps], eps)

    def ok(x: int, depth: int, last: int | None) -> bool:
        for r in lam:
            if not fam.in_h_n(f.conj(x, r), -1):
                return False
        if depth == L:
            return True
        for i, e in steps:
            if last is None and (i, e) == forbidden:
                continue
            if last == -e and i == fam.base[-e]:
                continue          # not a normal form
            z = f.conj(x, fam.rep_n(-e, i))
            if not fam.in_h_n(z, -e):
                return False
            if not ok(fam.conj_tau_n(z, -e), depth + 1, e):
                return False
        return True

    return ok(a, 0, None)


def depth(g: HnnElem) -> int:
    return g.depth


# ---------------------------------------------------------------- Xi generators

def _paths(fam: Hnn, length: int, signs: Sequence[int] | None = None, prev: int | None = None):
    """All admissible step tuples of the given length (optionally with fixed signs)."""
    if length == 0:
        yield ()
        return
    for e in (SIGNS if signs is None else (signs[0],)):
        for i in range(fam.params.sizes[-e]):
            if prev == -e and i == fam.base[-e]:
                continue
            for rest in _paths(fam, length - 1, None if signs is None else signs[1:], e):
                yield ((i, e),) + rest


def _admissible(fam: Hnn, path) -> bool:
    try:
        fam.check_path(path)
    except InvalidPathError:
        return False
    return True


def xi_generating_set(fam: Hnn, max_len: int = 2) -> list[list[Token]]:
    """Members of the seven generator families of the kernel of eta, with path
    lengths bounded by ``max_len`` (plus the fixed extra steps each family adds)."""
    P = fam.params
    A = fam.abel
    G = fam.gamma
    fmt = P.format_perm

    def h(path, s, p=1):
        return Token("h", None, tuple(path), fmt(s), p)

    def t(p):
        return Token("t", power=p)

    def gam(e):
        return P.gammaEps[e].elements

    out: list[list[Token]] = []
    # 1: same signs, different indices, cancelling labels
    for n in range(1, max_len + 1):
        for signs in itertools.product(SIGNS, repeat=n):
            ps = list(_paths(fam, n, signs))
            for p, q in itertools.permutations(ps, 2):
                for s in gam(signs[-1]):
                    if not s.is_identity():
                        out.append([h(p, s), h(q, s.inverse())])
    # 2: a detour (-eps, eps) inserted after the first step
    for e in SIGNS:
        for n in range(1, max_len):
            for tail in _paths(fam, n, None, e):
                for i in range(P.sizes[-e]):
                    for i0 in P.primes[e]:
                        for i1 in P.primes[-e]:
                            long = ((i, e), (i0, -e), (i1, e)) + tail
                            for ib in range(P.sizes[-e]):
                                short = ((ib, e),) + tail
                                if not (_admissible(fam, long) and _admissible(fam, short)):
                                    continue
                                for s in gam(tail[-1][1]):
                                    if not s.is_identity():
                                        out.append([h(long, s), h(short, s.inverse())])
    # 3: a top against a back-and-forth pair of steps
    for e in SIGNS:
        for s in gam(e):
            if s.is_identity():
                continue
            for ie in range(P.sizes[e]):
                for im in P.primes[-e]:
                    out.append([h((), s), h(((ie, -e), (im, e)), s.inverse())])
    # 4: two orders of an opposite pair of steps, common head and tail
    for e in SIGNS:
        for m in range(0, max_len):
            for head in _paths(fam, m):
                for tail_len in range(0, max_len - m):
                    for i, j, i2, j2 in itertools.product(range(P.sizes[-e]), range(P.sizes[e]),
                                                          range(P.sizes[-e]), range(P.sizes[e])):
                        for tail in _paths(fam, tail_len):
                            a = head + ((i, e), (j, -e)) + tail
                            b = head + ((j2, -e), (i2, e)) + tail
                            if not (_admissible(fam, a) and _admissible(fam, b)):
                                continue
                            for s in G.elements:
                                if s.is_identity():
                                    continue
                                if fam.perm_id(s) in fam.stab_ids[a[-1][1]] and \
                                        fam.perm_id(s) in fam.stab_ids[b[-1][1]]:
                                    out.append([h(a, s), h(b, s.inverse())])
    # 5: a shifted top against the straight path it equals
    for e in SIGNS:
        for n in range(1, max_len + 1):
            for s in gam(e):
                if s.is_identity():
                    continue
                straight = tuple((P.bases[-e], e) for _ in range(n))
                out.append([t(e * n), h((), s), t(-e * n), h(straight, s.inverse())])
    # 6: shifted tops with label in the commutator subgroup of Gamma
    for e in SIGNS:
        for n in range(0, max_len + 1):
            for s in gam(-e):
                if not s.is_identity() and A.project(s) == 0:
                    out.append([t(e * n), h((), s), t(-e * n)] if n else [h((), s)])
    # 7: tops in the commutator subgroup
    for s in G.elements:
        if not s.is_identity() and A.project(s) == 0:
            out.append([h((), s)])
    return out


# ---------------------------------------------------------------- report

@dataclass(frozen=True)
class CstarReportHnn:
    uniqueTrace: bool
    cstarSimple: bool
    quasiKernelAmenable: dict

    def to_json(self) -> dict:
        return {"uniqueTrace": self.uniqueTrace, "cstarSimple": self.cstarSimple,
                "quasiKernelAmenable": dict(self.quasiKernelAmenable)}


def cstarReportHnn(params: HnnParams, amenable: dict | None = None) -> CstarReportHnn:
    """Criterion logic only. ``amenable`` maps -1/1 to the flag for Sigma_-1/Sigma_1;
    finite groups default to amenable."""
    flags = {-1: True, 1: True}
    if amenable:
        flags.update({int(k): bool(v) for k, v in amenable.items()})
    both = flags[-1] and flags[1]
    return CstarReportHnn(True, not both, {"K-1": both, "K1": both})


# ---------------------------------------------------------------- enumeration

def enumerate_nodes(fam: Hnn, max_depth: int, context: int | None = None,
                    cap: int = 2_000_000) -> list[int]:
    """All canonical portraits of depth at most ``max_depth`` below a node of the given
    context (None for the root)."""
    f = fam.forest
    if context is None:
        labels = list(range(fam.gamma.order))
        keys = list(range(fam.nkeys))
    else:
        labels = sorted(fam.stab_ids[context])
        keys = [k for k in range(fam.nkeys) if k != fam.bkey[context]]
    if max_depth == 0:
        return [f.make(0, lab, ()) for lab in labels]
    below = {k: enumerate_nodes(fam, max_depth - 1, fam.sign_of_key(k), cap) for k in keys}
    total = len(labels)
    for k in keys:
        total *= len(below[k])
    if total > cap:
        raise EnumerationLimitError(f"{total} portraits exceed the cap {cap}")
    out = []
    for lab in labels:
        for combo in itertools.product(*(below[k] for k in keys)):
            out.append(f.build(0, lab, dict(zip(keys, combo))))
    return out


def random_node(fam: Hnn, rng: random.Random, max_depth: int, context: int | None = None,
                density: float = 0.5) -> int:
    f = fam.forest
    if context is None:
        lab = rng.randrange(fam.gamma.order)
        keys = range(fam.nkeys)
    else:
        lab = rng.choice(sorted(fam.stab_ids[context]))
        keys = [k for k in range(fam.nkeys) if k != fam.bkey[context]]
    kids = {}
    if max_depth > 0:
        for k in keys:
            if rng.random() < density:
                kids[k] = random_node(fam, rng, max_depth - 1, fam.sign_of_key(k), density)
    return f.build(0, lab, kids)


def generator_tokens(fam: Hnn, max_depth: int = 2, with_t: bool = True) -> list[Token]:
    """Non-trivial h(σ), h(path; σ) with at most ``max_depth`` steps, and optionally t."""
    P = fam.params
    out = [Token("h", None, (), P.format_perm(g)) for g in P.gamma.elements if not g.is_identity()]
    for m in range(1, max_depth + 1):
        for keys in itertools.product(range(fam.nkeys), repeat=m):
            path = tuple(fam.step(k) for k in keys)
            try:
                fam.check_path(path)
            except InvalidPathError:
                continue
            last = path[-1][1]
            for k in sorted(fam.stab_ids[last]):
                if k:
                    out.append(Token("h", None, path, P.format_perm(P.gamma.elements[k])))
    if with_t:
        out.append(Token("t"))
    return out


# ---------------------------------------------------------------- oracle for the word engine

class HnnOracle:
    """Base oracle over portraits for the normal-form engine."""

    family = "hnn"

    def __init__(self, fam: Hnn):
        self.fam = fam
        self.f = fam.forest

    def identity(self):
        return self.f.identity[0]

    def mul(self, a, b):
        return self.f.mul(a, b)

    def inv(self, a):
        return self.f.inv(a)

    def basepoint(self, eps):
        return self.fam.base[eps]

    def decompose(self, eps, g):
        return self.fam.decompose_n(eps, g)

    def rep(self, eps, i):
        return self.fam.rep_n(eps, i)

    def rep_indices(self, eps):
        return self.fam.primes[eps]

    def conj(self, h, eps):
        return self.fam.conj_tau_n(h, eps)

    def letters(self, tok: Token):
        if tok.name == "t" and tok.side is None:
            return [("t", tok.power)]
        return [("g", self.fam.token_node(tok))]

    def rep_tokens(self, eps, i):
        if i == self.fam.base[eps]:
            return []
        return [Token("h", None, (), self.fam.params.format_perm(self.fam.params.transversals[eps][i]))]

    def rep_text(self, eps, i):
        return words.format_word(self.rep_tokens(eps, i))

    def tail_tokens(self, g):
        return self.fam.expand_n(g)

    def tail_text(self, g):
        return words.format_word(self.tail_tokens(g))


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


def relation_instances(fam: Hnn, max_path: int = 3):
    """Yield (relation, lhs, rhs) for every defining relation with paths of length at
    most ``max_path``. Sides are token lists; ``t`` tokens are conjugations by tau."""
    P = fam.params
    fmt = P.format_perm
    G = fam.gamma

    def h(path, s, p=1):
        return Token("h", None, tuple(path), fmt(s), p)

    def t(p):
        return Token("t", power=p)

    def gam(e):
        return P.gammaEps[e].elements

    allpaths = {n: list(_paths(fam, n)) for n in range(1, max_path + 1)}
    for a in P.sigmaM.elements:
        for b in P.sigmaP.elements:
            sa, sb = P.lift(-1, a), P.lift(1, b)
            yield "R1", [h((), sa), h((), sb)], [h((), sb), h((), sa)]
    for n in range(2, max_path + 1):
        for q in allpaths[n]:
            for m in range(1, n):
                for p in allpaths[m]:
                    if p == q[:m]:
                        continue
                    for s in gam(p[-1][1]):
                        for u in gam(q[-1][1]):
                            yield "R2", [h(p, s), h(q, u)], [h(q, u), h(p, s)]
                pre = q[:m]
                i, e = q[m]
                for s in gam(pre[-1][1]):
                    k = s(P.union(-e, i))
                    moved = pre + ((k if e == 1 else k - P.n_minus, e),) + q[m + 1:]
                    for u in gam(q[-1][1]):
                        yield "R3", [h(pre, s), h(q, u), h(pre, s, -1)], [h(moved, u)]
    for n in range(1, max_path + 1):
        for q in allpaths[n]:
            last = gam(q[-1][1])
            for s in last:
                if s.is_identity():
                    yield "R4", [h(q, s)], []
                yield "R4", [h(q, s, -1)], [h(q, s.inverse())]
                for u in last:
                    yield "R4", [h(q, s), h(q, u)], [h(q, s * u)]
    for s in G.elements:
        if s.is_identity():
            yield "R5", [h((), s)], []
        yield "R5", [h((), s, -1)], [h((), s.inverse())]
        for u in G.elements:
            yield "R5", [h((), s), h((), u)], [h((), s * u)]
    for s in G.elements:
        for n in range(1, max_path + 1):
            for q in allpaths[n]:
                i, e = q[0]
                k = s(P.union(-e, i))
                moved = ((k if e == 1 else k - P.n_minus, e),) + q[1:]
                for u in gam(q[-1][1]):
                    yield "R6", [h((), s), h(q, u), h((), s, -1)], [h(moved, u)]
    for e in SIGNS:
        for s in gam(e):
            yield "R7", [t(e), h((), s), t(-e)], [h(((P.bases[-e], e),), s)]
        for n in range(1, max_path + 1):
            for q in allpaths[n]:
                if q[0][1] != e:
                    continue
                for u in gam(q[-1][1]):
                    yield "R8", [t(e), h(q, u), t(-e)], [h(((P.bases[-e], e),) + q, u)]
                    if q[0][0] == P.bases[-e]:
                        rhs = [h(q[1:], u)] if n > 1 else [h((), u)]
                    else:
                        rhs = [h(((P.bases[e], -e),) + q, u)]
                    yield "R9", [t(-e), h(q, u), t(e)], rhs


def _eval_side(fam: Hnn, tokens: Sequence[Token], node) -> int:
    """Evaluate a relation side; ``t^e X t^-e`` is applied as conjugation by tau."""
    f = fam.forest
    if tokens and tokens[0].name == "t":
        e = tokens[0].power
        inner = f.identity[0]
        for tok in tokens[1:-1]:
            inner = f.mul(inner, node(tok))
        return fam.conj_tau_n(inner, e)
    out = f.identity[0]
    for tok in tokens:
        out = f.mul(out, node(tok))
    return out


def relation_suite(fam: Hnn, max_path: int = 3, batch: int = 100_000) -> RelationReport:
    """Check every relation instance by portrait arithmetic."""
    cache: dict = {}

    def node(tok: Token) -> int:
        r = cache.get(tok)
        if r is None:
            r = cache[tok] = fam.token_node(tok)
        return r

    f = fam.forest
    counts: dict = {}
    failures = []
    mark = f.mark()
    for done, (rel, lhs, rhs) in enumerate(relation_instances(fam, max_path), 1):
        counts[rel] = counts.get(rel, 0) + 1
        a = _eval_side(fam, lhs, node)
        b = _eval_side(fam, rhs, node)
        if a != b:
            failures.append((rel, words.format_word(lhs), words.format_word(rhs)))
        if done % batch == 0:
            # forget scratch products so memory stays flat on the large instances
            f.release(mark)
            cache.clear()
    f.release(mark)
    return RelationReport(counts, failures)
