"""Finite permutation groups on a pointed domain {0, ..., n-1}.

Everything is done by full enumeration; groups are small (desk scale) and
the element list doubles as a canonical ordering used for transversals.
"""
from __future__ import annotations

import json
import re
from collections import deque
from typing import Iterable, Sequence

DEFAULT_CAP = 10_000


class EnumerationLimitError(RuntimeError):
    pass


class MissingCosetError(ValueError):
    pass


class Perm:
    """Bijection of {0..n-1}; ``(a * b)(x) == a(b(x))``."""

    __slots__ = ("images", "_hash")

    def __init__(self, images: Iterable[int]):
        images = tuple(images)
        if sorted(images) != list(range(len(images))):
            raise ValueError(f"not a bijection: {images}")
        self.images = images
        self._hash = hash(images)

    @classmethod
    def identity(cls, n: int) -> "Perm":
        return cls(range(n))

    @classmethod
    def parse(cls, text: str, n: int) -> "Perm":
        """Parse cycle notation such as ``"(0 1 2)(3 4)"``; ``"()"`` is the identity."""
        text = text.strip()
        if not re.fullmatch(r"(\(\s*[\d\s,]*\))+", text):
            raise ValueError(f"bad cycle notation: {text!r}")
        img = list(range(n))
        # cycles compose right to left, like functions
        for body in reversed(re.findall(r"\(([^)]*)\)", text)):
            pts = [int(t) for t in re.split(r"[\s,]+", body.strip()) if t]
            if len(set(pts)) != len(pts):
                raise ValueError(f"repeated point in cycle: {body!r}")
            for p in pts:
                if not 0 <= p < n:
                    raise ValueError(f"point {p} outside domain of size {n}")
            cyc_img = list(range(n))
            for a, b in zip(pts, pts[1:] + pts[:1]):
                cyc_img[a] = b
            img = [cyc_img[x] for x in img]
        return cls(img)

    def __call__(self, x: int) -> int:
        return self.images[x]

    def __mul__(self, other: "Perm") -> "Perm":
        if len(self.images) != len(other.images):
            raise ValueError("domain size mismatch")
        return Perm(self.images[x] for x in other.images)

    def inverse(self) -> "Perm":
        inv = [0] * len(self.images)
        for x, y in enumerate(self.images):
            inv[y] = x
        return Perm(inv)

    def is_identity(self) -> bool:
        return all(x == y for x, y in enumerate(self.images))

    @property
    def size(self) -> int:
        return len(self.images)

    def fixes(self, x: int) -> bool:
        return self.images[x] == x

    def cycles(self) -> list[tuple[int, ...]]:
        seen, out = set(), []
        for start in range(len(self.images)):
            if start in seen or self.images[start] == start:
                continue
            cyc, x = [], start
            while x not in seen:
                seen.add(x)
                cyc.append(x)
                x = self.images[x]
            out.append(tuple(cyc))
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, Perm) and self.images == other.images

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "Perm") -> bool:
        return self.images < other.images

    def __str__(self) -> str:
        cs = self.cycles()
        return "".join("(" + " ".join(map(str, c)) + ")" for c in cs) or "()"

    def __repr__(self) -> str:
        return f"Perm({str(self)!r})"


class PermGroup:
    """A materialized permutation group.

    ``elements`` is in BFS order from the identity, multiplying on the right by
    the generators in the order given. That order fixes every later choice
    (transversals, coset ids), so all derived data is deterministic.
    """

    def __init__(self, domain_size: int, generators: Sequence[Perm] = (), basepoint: int = 0,
                 name: str = "", cap: int = DEFAULT_CAP, _elements: Sequence[Perm] | None = None):
        if not 0 <= basepoint < max(domain_size, 1):
            raise ValueError("basepoint outside domain")
        for g in generators:
            if g.size != domain_size:
                raise ValueError(f"generator {g} does not act on {domain_size} points")
        self.domain_size = domain_size
        self.basepoint = basepoint
        self.generators = tuple(generators)
        self.name = name
        if _elements is None:
            _elements = _bfs_closure(domain_size, self.generators, cap)
        self.elements: tuple[Perm, ...] = tuple(_elements)
        self._index = {g: k for k, g in enumerate(self.elements)}
        self._tables = None

    @classmethod
    def from_elements(cls, domain_size: int, elements: Sequence[Perm], basepoint: int = 0,
                      name: str = "") -> "PermGroup":
        """Wrap an already closed element list, picking a small generating set greedily."""
        gens: list[Perm] = []
        span = {Perm.identity(domain_size)}
        for g in elements:
            if g not in span:
                gens.append(g)
                span = set(_bfs_closure(domain_size, gens, DEFAULT_CAP))
        if len(span) != len(set(elements)):
            raise ValueError("element list is not a group")
        return cls(domain_size, gens, basepoint, name)

    @classmethod
    def from_json(cls, data: dict | str, name: str = "") -> "PermGroup":
        if isinstance(data, str):
            data = json.loads(data)
        n = int(data["domain"])
        gens = [Perm.parse(s, n) for s in data.get("generators", [])]
        return cls(n, gens, int(data.get("basepoint", 0)), data.get("name", name))

    def to_json(self) -> dict:
        return {"domain": self.domain_size, "basepoint": self.basepoint,
                "generators": [str(g) for g in self.generators]}

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def order(self) -> int:
        return len(self.elements)

    def __contains__(self, g: Perm) -> bool:
        return g in self._index

    def __iter__(self):
        return iter(self.elements)

    def index(self, g: Perm) -> int:
        return self._index[g]

    @property
    def identity(self) -> Perm:
        return self.elements[0]

    def tables(self):
        """Integer tables (mul, inv, act) indexed by position in ``elements``."""
        if self._tables is None:
            els = self.elements
            idx = self._index
            mul = [[idx[a * b] for b in els] for a in els]
            inv = [idx[a.inverse()] for a in els]
            act = [a.images for a in els]
            self._tables = (mul, inv, act)
        return self._tables

    def orbit(self, point: int) -> list[int]:
        seen = {point}
        order = [point]
        for x in order:
            for g in self.generators:
                y = g(x)
                if y not in seen:
                    seen.add(y)
                    order.append(y)
        return order

    def __repr__(self) -> str:
        label = self.name or "PermGroup"
        return f"<{label} order={self.order} on {self.domain_size} points>"


def _bfs_closure(n: int, gens: Sequence[Perm], cap: int) -> list[Perm]:
    ident = Perm.identity(n)
    seen = {ident}
    out = [ident]
    queue = deque([ident])
    while queue:
        g = queue.popleft()
        for s in gens:
            h = g * s
            if h not in seen:
                seen.add(h)
                out.append(h)
                if len(out) > cap:
                    raise EnumerationLimitError(f"group exceeds enumeration cap {cap}")
                queue.append(h)
    return out


def closure(generators: Sequence[Perm], domain_size: int, cap: int = DEFAULT_CAP,
            basepoint: int = 0, name: str = "") -> PermGroup:
    return PermGroup(domain_size, generators, basepoint, name, cap)


def symmetric_group(n: int, basepoint: int = 0) -> PermGroup:
    if n == 1:
        return PermGroup(1, [], basepoint, "Sym(1)")
    gens = [Perm.parse("(0 1)", n)]
    if n > 2:
        gens.append(Perm.parse("(" + " ".join(map(str, range(n))) + ")", n))
    return PermGroup(n, gens, basepoint, f"Sym({n})")


def cyclic_group(n: int, basepoint: int = 0) -> PermGroup:
    gens = [Perm([(k + 1) % n for k in range(n)])] if n > 1 else []
    return PermGroup(n, gens, basepoint, f"C{n}")


def stabilizer(G: PermGroup, point: int) -> PermGroup:
    if not 0 <= point < G.domain_size:
        raise ValueError("point outside domain")
    els = [g for g in G.elements if g(point) == point]
    sub = PermGroup.from_elements(G.domain_size, els, point, f"{G.name or 'G'}_{point}")
    return sub


def is_transitive(G: PermGroup) -> bool:
    return len(G.orbit(G.basepoint)) == G.domain_size


def is_2_transitive(G: PermGroup) -> bool:
    if not is_transitive(G):
        return False
    for p in range(G.domain_size):
        st = stabilizer(G, p)
        rest = [q for q in range(G.domain_size) if q != p]
        if rest and len(st.orbit(rest[0])) != len(rest):
            return False
    return True


def is_sym2(G: PermGroup) -> bool:
    return G.domain_size == 2 and G.order == 2


def is_generated_by_stabilizers(G: PermGroup) -> bool:
    """True iff the point stabilizers together generate G (Sym(2) is reported by ``is_sym2``)."""
    gens = []
    for p in range(G.domain_size):
        gens.extend(stabilizer(G, p).generators)
    return len(_bfs_closure(G.domain_size, gens, DEFAULT_CAP)) == G.order


def transversal(G: PermGroup, basepoint: int | None = None) -> dict[int, Perm]:
    """First element (in the group's enumeration order) sending the basepoint to each point."""
    b = G.basepoint if basepoint is None else basepoint
    reps: dict[int, Perm] = {}
    for g in G.elements:
        reps.setdefault(g(b), g)
    missing = [i for i in range(G.domain_size) if i not in reps]
    if missing:
        raise MissingCosetError(f"group is not transitive: no element maps {b} to {missing}")
    return dict(sorted(reps.items()))


def commutator_subgroup(G: PermGroup) -> PermGroup:
    comms = {a.inverse() * b.inverse() * a * b for a in G.elements for b in G.elements}
    gens = sorted(comms)
    return PermGroup(G.domain_size, gens, G.basepoint, f"[{G.name or 'G'},{G.name or 'G'}]")


class AbelQuotient:
    """G/[G,G] as a finite table. Elements are coset ids; 0 is the identity."""

    def __init__(self, G: PermGroup):
        self.group = G
        self.commutator = commutator_subgroup(G)
        K = set(self.commutator.elements)
        self._proj: dict[Perm, int] = {}
        self.reps: list[Perm] = []
        for g in G.elements:
            if g in self._proj:
                continue
            cid = len(self.reps)
            self.reps.append(g)
            for k in K:
                self._proj[g * k] = cid
        n = len(self.reps)
        self.table = [[self._proj[self.reps[a] * self.reps[b]] for b in range(n)] for a in range(n)]
        self.inverse_table = [self._proj[r.inverse()] for r in self.reps]

    @property
    def order(self) -> int:
        return len(self.reps)

    identity = 0

    def project(self, g: Perm) -> int:
        return self._proj[g]

    def add(self, a: int, b: int) -> int:
        return self.table[a][b]

    def neg(self, a: int) -> int:
        return self.inverse_table[a]

    def is_abelian(self) -> bool:
        n = self.order
        return all(self.table[a][b] == self.table[b][a] for a in range(n) for b in range(n))

    def __repr__(self) -> str:
        return f"<AbelQuotient of order {self.order}>"


def abelianization(G: PermGroup) -> AbelQuotient:
    return AbelQuotient(G)


def direct_product(A: PermGroup, B: PermGroup, name: str = "") -> PermGroup:
    """A x B acting on the disjoint union, A's points first."""
    n, m = A.domain_size, B.domain_size

    def lift_a(g: Perm) -> Perm:
        return Perm(list(g.images) + list(range(n, n + m)))

    def lift_b(g: Perm) -> Perm:
        return Perm(list(range(n)) + [n + x for x in g.images])

    els = [lift_a(a) * lift_b(b) for a in A.elements for b in B.elements]
    gens = [lift_a(g) for g in A.generators] + [lift_b(g) for g in B.generators]
    return PermGroup(n + m, gens, A.basepoint, name, _elements=els)


# camelCase names used by configs and reports
isTransitive = is_transitive
is2Transitive = is_2_transitive
isGeneratedByStabilizers = is_generated_by_stabilizers
