"""Normal forms for amalgams and HNN extensions over a pluggable base group.

The engine never looks inside base-group elements. A base oracle supplies
multiplication, inversion, coset decomposition against fixed transversals
and (for HNN extensions) conjugation by the stable letter. Normal forms are
built left to right by peeling coset representatives off the tail.

Amalgam normal form: ``s_1 ... s_n * h`` with ``s_k`` non-trivial coset
representatives alternating between the two factors and ``h`` in the edge
group. HNN normal form: ``s_1 t^e_1 ... s_n t^e_n * g`` where ``s_k``
represents a coset of the subgroup that may be pushed through ``t^e_k``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Hashable, Iterable, Protocol, Sequence


class WordSyntaxError(ValueError):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos


class UnknownGeneratorError(ValueError):
    pass


class OracleContractError(RuntimeError):
    pass


# ---------------------------------------------------------------- parsing

@dataclass(frozen=True)
class Token:
    """One generator with an integer power.

    ``name`` is ``g``, ``h``, ``t`` or ``b``. ``side`` is the subscript of an
    amalgam generator (None otherwise). ``path`` holds amalgam indices or HNN
    ``(index, sign)`` steps. ``perm`` is the cycle-notation text.
    """
    name: str
    side: int | None = None
    path: tuple = ()
    perm: str | None = None
    power: int = 1

    def inverse(self) -> "Token":
        return Token(self.name, self.side, self.path, self.perm, -self.power)

    def to_text(self) -> str:
        s = self.name + ("" if self.side is None else str(self.side))
        if self.name in ("g", "h"):
            if self.path and isinstance(self.path[0], tuple):
                p = ",".join(f"({i},{e})" for i, e in self.path)
            else:
                p = ",".join(map(str, self.path))
            s += f"[{p};{self.perm}]" if self.path else f"[{self.perm}]"
        if self.power != 1:
            s += f"^{self.power}"
        return s

    def to_json(self) -> dict:
        d: dict[str, Any] = {"gen": self.name}
        if self.side is not None:
            d["side"] = self.side
        if self.path:
            d["path"] = [list(p) if isinstance(p, tuple) else p for p in self.path]
        if self.perm is not None:
            d["perm"] = self.perm
        if self.power != 1:
            d["power"] = self.power
        return d

    @classmethod
    def from_json(cls, d: dict) -> "Token":
        path = tuple(tuple(p) if isinstance(p, list) else p for p in d.get("path", ()))
        return cls(d["gen"], d.get("side"), path, d.get("perm"), d.get("power", 1))


_NAME = re.compile(r"([a-zA-Z_]+)(\d*)")
_POWER = re.compile(r"\s*\^\s*([+-]?\d+)")
_STEP = re.compile(r"\s*\(\s*(\d+)\s*,\s*([+-]?1)\s*\)\s*(,|$)")


def parse_word(text: str) -> list[Token]:
    """Parse a generator expression into tokens.

    >>> [t.to_text() for t in parse_word("t^-1 * b^2 * t")]
    ['t^-1', 'b^2', 't']
    """
    toks: list[Token] = []
    pos, n = 0, len(text)
    while True:
        while pos < n and (text[pos].isspace() or text[pos] == "*"):
            pos += 1
        if pos >= n:
            break
        if text[pos] == "1" and (pos + 1 == n or not text[pos + 1].isdigit()):
            pos += 1      # the empty word may be written as 1
            continue
        m = _NAME.match(text, pos)
        if not m:
            raise WordSyntaxError(f"unexpected character {text[pos]!r}", pos)
        name, sub = m.group(1), m.group(2)
        start = pos
        pos = m.end()
        side = int(sub) if sub else None
        path: tuple = ()
        perm = None
        if name in ("g", "h"):
            if pos >= n or text[pos] != "[":
                raise WordSyntaxError("expected '['", pos)
            close = text.find("]", pos)
            if close < 0:
                raise WordSyntaxError("unterminated '['", pos)
            body = text[pos + 1:close]
            path, perm = _parse_body(body, pos + 1)
            pos = close + 1
            if name == "g" and (side not in (0, 1) or path):
                raise UnknownGeneratorError(f"bad g-generator at position {start}")
            if name == "h" and side is not None and side not in (0, 1):
                raise UnknownGeneratorError(f"bad h-generator subscript at position {start}")
            if name == "h" and side is not None and not path:
                raise WordSyntaxError("amalgam h-generator needs a path", start)
        elif name in ("t", "b"):
            if sub:
                raise UnknownGeneratorError(f"unknown generator {name + sub!r} at position {start}")
        else:
            raise UnknownGeneratorError(f"unknown generator {name + sub!r} at position {start}")
        power = 1
        pm = _POWER.match(text, pos)
        if pm:
            power = int(pm.group(1))
            pos = pm.end()
        if power != 0:
            toks.append(Token(name, side, path, perm, power))
    return toks


def _parse_body(body: str, offset: int):
    if ";" not in body:
        return (), body.strip()
    head, perm = body.split(";", 1)
    head = head.strip()
    if head.startswith("("):
        steps = []
        p = 0
        while p < len(head):
            m = _STEP.match(head, p)
            if not m:
                raise WordSyntaxError("bad step list", offset + p)
            steps.append((int(m.group(1)), int(m.group(2))))
            p = m.end()
        return tuple(steps), perm.strip()
    try:
        idx = tuple(int(x) for x in head.split(",")) if head else ()
    except ValueError:
        raise WordSyntaxError("bad index list", offset) from None
    return idx, perm.strip()


def format_word(tokens: Sequence[Token]) -> str:
    return " * ".join(t.to_text() for t in tokens) or "1"


def invert_tokens(tokens: Sequence[Token]) -> list[Token]:
    return [t.inverse() for t in reversed(tokens)]


# ---------------------------------------------------------------- oracles

class AmalgamBase(Protocol):
    family: str  # "amalgam"

    def identity(self) -> Hashable: ...
    def lift(self, side: int, h: Hashable) -> Any: ...
    def mul(self, side: int, a: Any, b: Any) -> Any: ...
    def inv(self, side: int, a: Any) -> Any: ...
    def decompose(self, side: int, g: Any) -> tuple[int | None, Hashable]: ...
    def rep(self, side: int, i: int) -> Any: ...
    def rep_indices(self, side: int) -> Sequence[int]: ...
    def letters(self, token: Token) -> list[tuple[int, Any]]: ...
    def equal(self, side: int, a: Any, b: Any) -> bool: ...


class HnnBase(Protocol):
    family: str  # "hnn"

    def identity(self) -> Hashable: ...
    def mul(self, a: Any, b: Any) -> Any: ...
    def inv(self, a: Any) -> Any: ...
    def basepoint(self, eps: int) -> int: ...
    def decompose(self, eps: int, g: Any) -> tuple[int, Any]: ...
    def rep(self, eps: int, i: int) -> Any: ...
    def rep_indices(self, eps: int) -> Sequence[int]: ...
    def conj(self, h: Any, eps: int) -> Any: ...
    def letters(self, token: Token) -> list[tuple[str, Any]]: ...


# ---------------------------------------------------------------- words

@dataclass(frozen=True)
class AmalgamWord:
    syllables: tuple = ()      # ((side, rep index), ...), sides alternate
    tail: Hashable = None      # edge-group element in the oracle's canonical form

    def __len__(self) -> int:
        return len(self.syllables)


@dataclass(frozen=True)
class HnnWord:
    syllables: tuple = ()      # ((rep index, sign), ...)
    tail: Hashable = None      # base-group element

    def __len__(self) -> int:
        return len(self.syllables)


@dataclass(frozen=True)
class Elliptic:
    witness: Any               # a vertex fixed by the element
    core: Any = field(default=None, compare=False)
    conjugator: Any = field(default=None, compare=False)


@dataclass(frozen=True)
class Hyperbolic:
    core: Any = field(default=None, compare=False)
    conjugator: Any = field(default=None, compare=False)


def identity_word(oracle):
    if oracle.family == "amalgam":
        return AmalgamWord((), oracle.identity())
    return HnnWord((), oracle.identity())


# amalgam letters are (side, element of that factor);
# hnn letters are ("t", sign) or ("g", base element)

def _amalgam_push(oracle, syl: list, tail, side: int, x, check: bool):
    if syl and syl[-1][0] == side:
        j, i = syl.pop()
        t = oracle.mul(side, oracle.rep(side, i), oracle.mul(side, oracle.lift(side, tail), x))
    else:
        t = oracle.mul(side, oracle.lift(side, tail), x)
    i, h = oracle.decompose(side, t)
    if check:
        back = oracle.lift(side, h) if i is None else oracle.mul(side, oracle.rep(side, i), oracle.lift(side, h))
        if not oracle.equal(side, back, t):
            raise OracleContractError("coset decomposition does not recompose")
    if i is not None:
        syl.append((side, i))
    return h


def _hnn_push_t(oracle, syl: list, tail, eps: int, check: bool):
    i, h = oracle.decompose(-eps, tail)
    if check and oracle.mul(oracle.rep(-eps, i), h) != tail:
        raise OracleContractError("coset decomposition does not recompose")
    moved = oracle.conj(h, -eps)
    if i == oracle.basepoint(-eps) and syl and syl[-1][1] == -eps:
        j, _ = syl.pop()
        return oracle.mul(oracle.rep(eps, j), moved)
    syl.append((i, eps))
    return moved


def apply_letters(oracle, word, letters: Iterable, check: bool = False):
    """Right-multiply a normal form by a sequence of letters."""
    syl = list(word.syllables)
    tail = word.tail
    if oracle.family == "amalgam":
        for side, x in letters:
            tail = _amalgam_push(oracle, syl, tail, side, x, check)
        return AmalgamWord(tuple(syl), tail)
    for kind, x in letters:
        if kind == "t":
            step = 1 if x > 0 else -1
            for _ in range(abs(x)):
                tail = _hnn_push_t(oracle, syl, tail, step, check)
        else:
            tail = oracle.mul(tail, x)
    return HnnWord(tuple(syl), tail)


def letters_of(oracle, word) -> list:
    if oracle.family == "amalgam":
        out = [(j, oracle.rep(j, i)) for j, i in word.syllables]
        out.append((0, oracle.lift(0, word.tail)))
        return out
    out = []
    for i, e in word.syllables:
        out.append(("g", oracle.rep(-e, i)))
        out.append(("t", e))
    out.append(("g", word.tail))
    return out


def inverse_letters(oracle, letters: Sequence) -> list:
    if oracle.family == "amalgam":
        return [(j, oracle.inv(j, x)) for j, x in reversed(letters)]
    return [(k, -x) if k == "t" else (k, oracle.inv(x)) for k, x in reversed(letters)]


def token_letters(oracle, tokens: Sequence[Token]) -> list:
    out = []
    for tok in tokens:
        out.extend(oracle.letters(tok))
    return out


def reduce(raw, oracle, check: bool = False):
    """Normal form of a word given as text, tokens, or an existing normal form."""
    if isinstance(raw, str):
        raw = parse_word(raw)
    if isinstance(raw, (AmalgamWord, HnnWord)):
        raw_letters = letters_of(oracle, raw)
    else:
        raw_letters = token_letters(oracle, raw)
    return apply_letters(oracle, identity_word(oracle), raw_letters, check)


def mul_word(a, b, oracle):
    return apply_letters(oracle, a, letters_of(oracle, b))


def inv_word(a, oracle):
    return apply_letters(oracle, identity_word(oracle), inverse_letters(oracle, letters_of(oracle, a)))


def is_identity_word(w, oracle) -> bool:
    return not w.syllables and w == identity_word(oracle)


def syllable_word(oracle, syllable):
    """The normal form consisting of one syllable and a trivial tail."""
    if oracle.family == "amalgam":
        return AmalgamWord((syllable,), oracle.identity())
    return HnnWord((syllable,), oracle.identity())


def cyclic_reduce(w, oracle):
    """Return (core, conjugator) with ``w = conjugator * core * conjugator^-1``."""
    conj = identity_word(oracle)
    core = w
    while True:
        syl = core.syllables
        n = len(syl)
        if oracle.family == "amalgam":
            if n < 2 or syl[0][0] != syl[-1][0]:
                break
            x = syllable_word(oracle, syl[0])
            core = mul_word(mul_word(inv_word(x, oracle), core, oracle), x, oracle)
            conj = mul_word(conj, x, oracle)
        else:
            if n < 1 or syl[0][1] != -syl[-1][1]:
                break
            x = syllable_word(oracle, syl[0])
            cand = mul_word(mul_word(inv_word(x, oracle), core, oracle), x, oracle)
            if len(cand.syllables) >= n:
                break
            core = cand
            conj = mul_word(conj, x, oracle)
    return core, conj


def classify(w, oracle):
    core, conj = cyclic_reduce(w, oracle)
    if oracle.family == "amalgam":
        if len(core.syllables) <= 1:
            side = core.syllables[0][0] if core.syllables else 0
            return Elliptic(amalgam_vertex(oracle, conj, side), core, conj)
        return Hyperbolic(core, conj)
    if not core.syllables:
        return Elliptic(hnn_vertex(conj), core, conj)
    return Hyperbolic(core, conj)


# ---------------------------------------------------------------- vertices
#
# Amalgam vertex: (first side j, (i_1, ..., i_n)) standing for the coset
# s_1 ... s_n G_{j+n mod 2} with s_k a representative from factor j+k-1.
# The empty path (j, ()) is the vertex G_j itself.
# HNN vertex: the tuple of syllables ((i_1, e_1), ..., (i_n, e_n)).

def amalgam_vertex(oracle, word: AmalgamWord, side: int):
    """Vertex ``word * G_side``."""
    syl = list(word.syllables)
    if syl and syl[-1][0] == side:
        syl.pop()
    if not syl:
        return (side, ())
    return (syl[0][0], tuple(i for _, i in syl))


def amalgam_vertex_group(vertex) -> int:
    j, path = vertex
    return (j + len(path)) % 2


def amalgam_prefix(oracle, vertex) -> AmalgamWord:
    j, path = vertex
    return AmalgamWord(tuple(((j + t) % 2, i) for t, i in enumerate(path)), oracle.identity())


def hnn_vertex(word: HnnWord):
    return tuple(word.syllables)


def act_on_vertex(g, vertex, oracle):
    """Image of a vertex under left multiplication by the normal form ``g``."""
    if oracle.family == "amalgam":
        w = mul_word(g, amalgam_prefix(oracle, vertex), oracle)
        return amalgam_vertex(oracle, w, amalgam_vertex_group(vertex))
    w = mul_word(g, HnnWord(tuple(vertex), oracle.identity()), oracle)
    return hnn_vertex(w)


# ---------------------------------------------------------------- printing

def word_to_text(w, oracle) -> str:
    parts = []
    if oracle.family == "amalgam":
        for j, i in w.syllables:
            parts.append(oracle.rep_text(j, i))
        t = oracle.tail_text(w.tail)
        if t != "1" or not parts:
            parts.append(t)
        return " * ".join(parts)
    for i, e in w.syllables:
        r = oracle.rep_text(-e, i)
        if r != "1":
            parts.append(r)
        parts.append("t" if e == 1 else "t^-1")
    t = oracle.tail_text(w.tail)
    if t != "1" or not parts:
        parts.append(t)
    return " * ".join(parts)


def word_to_tokens(w, oracle) -> list[Token]:
    """A generator word whose value is the normal form ``w``."""
    out: list[Token] = []
    if oracle.family == "amalgam":
        for j, i in w.syllables:
            out.extend(oracle.rep_tokens(j, i))
        out.extend(oracle.tail_tokens(w.tail))
        return out
    for i, e in w.syllables:
        out.extend(oracle.rep_tokens(-e, i))
        out.append(Token("t", power=e))
    out.extend(oracle.tail_tokens(w.tail))
    return out


parseWord = parse_word
mulWord = mul_word
invWord = inv_word
cyclicReduce = cyclic_reduce
