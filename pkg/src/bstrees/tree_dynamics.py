"""Bounded pieces of the Bass-Serre tree and what an element does on them.

Vertices are the canonical coset labels produced by ``words``:
amalgam vertices are ``(first side, indices)`` and HNN vertices are tuples of
``(index, sign)`` syllables. The base vertex (G_0, resp. G) is the root; every
other vertex hangs below its prefix, so the root-to-vertex geodesic is the
chain of prefixes.

The action of an element on many vertices is computed incrementally: if
``g * W`` is in normal form, then the image of a neighbour ``W * s`` only needs
one more syllable pushed onto that normal form.

Lengths reported for Psi/Upsilon are in units of the first barycentric
subdivision, so one edge of the tree counts as 2.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Sequence

from . import words
from .words import AmalgamWord, Elliptic, HnnWord, Token

DEFAULT_CAP = 8
HALF = Fraction(1, 2)


class CapExceededError(ValueError):
    pass


class DomainError(ValueError):
    pass


class ClassificationError(ValueError):
    pass


class InconclusiveFledgeError(RuntimeError):
    def __init__(self, msg: str, diameters: dict):
        super().__init__(msg)
        self.diameters = diameters


# ---------------------------------------------------------------- tree geometry

class Tree:
    """The Bass-Serre tree of one group instance, seen through its base oracle."""

    def __init__(self, oracle, generators: Sequence[Sequence[Token]] = (), cap: int = DEFAULT_CAP,
                 name: str = ""):
        self.oracle = oracle
        self.family = oracle.family
        self.generators = [list(g) for g in generators]
        self.cap = cap
        self.name = name
        self.root = (0, ()) if self.family == "amalgam" else ()
        if self.family == "amalgam":
            self._all = {k: (oracle.basepoint(k),) + tuple(oracle.rep_indices(k)) for k in (0, 1)}
        else:
            self._all = {e: (oracle.basepoint(e),) + tuple(oracle.rep_indices(e)) for e in (-1, 1)}

    # ---- words

    def word(self, w):
        """Normal form of text, tokens, or an existing normal form."""
        if isinstance(w, (AmalgamWord, HnnWord)):
            return w
        return words.reduce(w, self.oracle)

    # ---- vertex combinatorics

    def group_of(self, v) -> int:
        return words.amalgam_vertex_group(v) if self.family == "amalgam" else 0

    def depth(self, v) -> int:
        if self.family == "amalgam":
            return v[0] + len(v[1])
        return len(v)

    def parent(self, v):
        if self.family == "amalgam":
            j, path = v
            if path:
                return (j, path[:-1])
            return (0, ()) if j == 1 else None
        return v[:-1] if v else None

    def children(self, v) -> list:
        """Neighbours one step further from the root, with the letters that reach them."""
        O = self.oracle
        out = []
        if self.family == "amalgam":
            j, path = v
            k = self.group_of(v)
            if v == (0, ()):
                out.append(((1, ()), [], 1))
            for i in O.rep_indices(k):
                w = (j, path + (i,)) if path else (k, (i,))
                out.append((w, [(k, O.rep(k, i))], 1 - k))
            return out
        last = v[-1][1] if v else None
        for e in (-1, 1):
            for i in self._all[-e]:
                if last == -e and i == O.basepoint(-e):
                    continue
                out.append((v + ((i, e),), [("g", O.rep(-e, i)), ("t", e)], 0))
        return out

    def parent_step(self, v):
        """(parent, letters from v's prefix to the parent's prefix, parent group)."""
        O = self.oracle
        if self.family == "amalgam":
            j, path = v
            if not path:
                return ((0, ()), [], 0) if j == 1 else None
            k = 1 - self.group_of(v)
            return ((j, path[:-1]), [(k, O.inv(k, O.rep(k, path[-1])))], k)
        if not v:
            return None
        i, e = v[-1]
        return (v[:-1], [("t", -e), ("g", O.inv(O.rep(-e, i)))], 0)

    def neighbors(self, v) -> list:
        out = [w for w, _, _ in self.children(v)]
        p = self.parent(v)
        if p is not None:
            out.insert(0, p)
        return out

    def degree(self, v) -> int:
        return len(self.neighbors(v))

    def ancestors(self, v) -> list:
        chain = [v]
        while True:
            p = self.parent(chain[-1])
            if p is None:
                break
            chain.append(p)
        chain.reverse()
        return chain

    def dist(self, u, v) -> int:
        a, b = self.ancestors(u), self.ancestors(v)
        common = 0
        for x, y in zip(a, b):
            if x != y:
                break
            common += 1
        return len(a) + len(b) - 2 * common

    def geodesic(self, u, v) -> list:
        a, b = self.ancestors(u), self.ancestors(v)
        common = 0
        for x, y in zip(a, b):
            if x != y:
                break
            common += 1
        return a[common - 1:][::-1] + b[common:] if common else a[::-1] + b

    def prefix_word(self, v):
        """Normal form whose coset (by the vertex group) is ``v``, with trivial tail."""
        if self.family == "amalgam":
            return words.amalgam_prefix(self.oracle, v)
        return HnnWord(tuple(v), self.oracle.identity())

    def vertex_of(self, nf, group: int):
        if self.family == "amalgam":
            return words.amalgam_vertex(self.oracle, nf, group)
        return words.hnn_vertex(nf)

    def vertex_text(self, v) -> str:
        O = self.oracle
        if self.family == "amalgam":
            j, path = v
            k = self.group_of(v)
            parts = [O.rep_text((j + t) % 2, i) for t, i in enumerate(path)]
            return " * ".join(parts + [f"G{k}"])
        parts = []
        for i, e in v:
            r = O.rep_text(-e, i)
            if r != "1":
                parts.append(r)
            parts.append("t" if e == 1 else "t^-1")
        return " * ".join(parts + ["G"])


def actOnVertex(g, v, tree: Tree):
    """Image of a vertex under left multiplication."""
    return words.act_on_vertex(tree.word(g), v, tree.oracle)


# ---------------------------------------------------------------- balls

@dataclass
class Ball:
    center: Any
    radius: int
    vertices: list                      # BFS order from the center
    dist: dict                          # vertex -> distance from the center
    adjacency: dict                     # vertex -> neighbour list (inside the ball)

    def __contains__(self, v) -> bool:
        return v in self.dist

    def __len__(self) -> int:
        return len(self.vertices)

    def edges(self) -> list:
        out = []
        for v in self.vertices:
            for w in self.adjacency[v]:
                if self.dist[w] > self.dist[v]:
                    out.append(canonical_edge(v, w))
        return out


def _check_cap(tree: Tree, R: int):
    if R < 0:
        raise ValueError("radius must be nonnegative")
    if R > tree.cap:
        raise CapExceededError(f"radius {R} exceeds the cap {tree.cap}")


def ball(R: int, tree: Tree) -> Ball:
    """The ball of radius R around the base vertex."""
    _check_cap(tree, R)
    order = [tree.root]
    dist = {tree.root: 0}
    adj: dict = {tree.root: []}
    for v in order:
        if dist[v] == R:
            continue
        for w, _, _ in tree.children(v):
            dist[w] = dist[v] + 1
            order.append(w)
            adj[w] = [v]
            adj[v].append(w)
    return Ball(tree.root, R, order, dist, adj)


def ball_images(g, tree: Tree, R: int | None = None, stop_at_fixed: bool = False) -> dict:
    """g·v for every vertex of the radius-R ball, by incremental normal forms."""
    g = tree.word(g)
    R = tree.cap if R is None else R
    _check_cap(tree, R)
    O = tree.oracle
    root_group = tree.group_of(tree.root)
    images = {tree.root: tree.vertex_of(g, root_group)}
    if stop_at_fixed and images[tree.root] == tree.root:
        return images
    queue = deque([(tree.root, g, 0)])
    while queue:
        v, nf, d = queue.popleft()
        if d == R:
            continue
        for w, letters, grp in tree.children(v):
            nf2 = words.apply_letters(O, nf, letters)
            img = tree.vertex_of(nf2, grp)
            images[w] = img
            if stop_at_fixed and img == w:
                return images
            queue.append((w, nf2, d + 1))
    return images


# ---------------------------------------------------------------- refined points

@dataclass(frozen=True)
class RefinedPoint:
    """A vertex of T, or the point at ``quarter`` along a canonically oriented edge."""
    kind: str                     # "vertex" or "edge"
    where: Any
    quarter: Fraction | None = None

    @classmethod
    def at_vertex(cls, v) -> "RefinedPoint":
        return cls("vertex", v, None)

    @classmethod
    def on_edge(cls, u, v, quarter: Fraction = HALF) -> "RefinedPoint":
        if quarter not in (Fraction(1, 4), HALF, Fraction(3, 4)):
            raise ValueError("quarter must be 1/4, 1/2 or 3/4")
        if _key(v) < _key(u):
            u, v, quarter = v, u, 1 - quarter
        return cls("edge", (u, v), quarter)

    def moved_by(self, g, tree: Tree) -> "RefinedPoint":
        if self.kind == "vertex":
            return RefinedPoint.at_vertex(actOnVertex(g, self.where, tree))
        u, v = self.where
        return RefinedPoint.on_edge(actOnVertex(g, u, tree), actOnVertex(g, v, tree), self.quarter)

    def to_json(self, tree: Tree | None = None) -> dict:
        show = (lambda x: tree.vertex_text(x)) if tree else repr
        if self.kind == "vertex":
            return {"vertex": show(self.where)}
        return {"edge": [show(self.where[0]), show(self.where[1])], "at": str(self.quarter)}


def _key(v):
    return repr(v)


def canonical_edge(u, v) -> tuple:
    return (u, v) if _key(u) <= _key(v) else (v, u)


@dataclass(frozen=True)
class RayPrefix:
    """The first vertices of the geodesic ray from the base vertex to an end."""
    vertices: tuple

    def to_json(self, tree: Tree | None = None) -> dict:
        show = (lambda x: tree.vertex_text(x)) if tree else repr
        return {"ray": [show(v) for v in self.vertices]}


# ---------------------------------------------------------------- fixed points and Psi

@dataclass
class FixedData:
    """Fixed vertices of an elliptic element inside a ball, with their moved neighbours."""
    radius: int
    fixed: set = field(default_factory=set)
    moved_nbr: dict = field(default_factory=dict)   # fixed vertex -> has a non-fixed neighbour

    def edges(self, tree: Tree) -> set:
        out = set()
        for v in self.fixed:
            p = tree.parent(v)
            if p is not None and p in self.fixed:
                out.add(canonical_edge(p, v))
        return out


def _elliptic(tree: Tree, g) -> Elliptic | None:
    c = words.classify(g, tree.oracle)
    return c if isinstance(c, Elliptic) else None


def fixed_data(g, tree: Tree, R: int) -> FixedData:
    """Explore the fixed subtree of g inside the radius-R ball, starting from the classifier's
    witness and walking towards the root while still fixed."""
    _check_cap(tree, R)
    g = tree.word(g)
    O = tree.oracle
    out = FixedData(R)
    ell = _elliptic(tree, g)
    if ell is None:
        return out
    w = ell.witness
    nf = words.mul_word(g, tree.prefix_word(w), O)
    if tree.vertex_of(nf, tree.group_of(w)) != w:
        raise words.OracleContractError("classifier witness is not fixed")
    while tree.depth(w) > R:
        step = tree.parent_step(w)
        p, letters, grp = step
        nf2 = words.apply_letters(O, nf, letters)
        if tree.vertex_of(nf2, grp) != p:
            return out                 # fixed subtree does not reach the ball
        w, nf = p, nf2
    stack = [(w, nf)]
    seen = {w}
    while stack:
        v, nfv = stack.pop()
        out.fixed.add(v)
        moved = False
        steps = list(tree.children(v))
        ps = tree.parent_step(v)
        if ps is not None:
            steps.append(ps)
        for u, letters, grp in steps:
            nfu = words.apply_letters(O, nfv, letters)
            if tree.vertex_of(nfu, grp) != u:
                moved = True
            elif u not in seen and tree.depth(u) <= R:
                seen.add(u)
                stack.append((u, nfu))
        out.moved_nbr[v] = moved
    return out


def fixedSet(g, b: Ball, tree: Tree) -> set:
    """Fixed points in the first subdivision: vertices and edge midpoints."""
    fd = fixed_data(g, tree, b.radius)
    pts = {RefinedPoint.at_vertex(v) for v in fd.fixed}
    pts |= {RefinedPoint.on_edge(u, v) for u, v in fd.edges(tree)}
    return pts


@dataclass
class PsiResult:
    points: set                       # determined Psi vertices
    undetermined: set                 # fixed frontier vertices


def psi_from(fd: FixedData, tree: Tree, r: int) -> PsiResult:
    pts, und = set(), set()
    for v in fd.fixed:
        d = tree.depth(v)
        if d < r and fd.moved_nbr[v]:
            pts.add(v)
        elif d == r:
            und.add(v)
    return PsiResult(pts, und)


def psiSet(g, b: Ball, tree: Tree) -> PsiResult:
    """Fixed points with a non-fixed neighbour, asserted only away from the frontier.

    Edge midpoints never qualify: the action has no inversions, so a fixed
    midpoint has both ends fixed.
    """
    g = tree.word(g)
    if words.is_identity_word(g, tree.oracle):
        raise DomainError("Psi is defined for non-trivial elements only")
    return psi_from(fixed_data(g, tree, b.radius), tree, b.radius)


@dataclass
class Hull:
    vertices: set
    edges: set
    diameter: int | None              # in subdivision units
    ends: tuple | None = None         # a diametral pair


def upsilonHull(points: Iterable, tree: Tree) -> Hull:
    """Smallest subtree containing the given vertices."""
    pts = set(points)
    if not pts:
        return Hull(set(), set(), None)
    chains = [tree.ancestors(p) for p in pts]
    lca_len = min(len(c) for c in chains)
    for k in range(lca_len):
        if len({c[k] for c in chains}) > 1:
            lca_len = k
            break
    verts = set()
    for c in chains:
        verts.update(c[lca_len - 1:])
    edges = {canonical_edge(tree.parent(v), v) for v in verts if v != chains[0][lca_len - 1]}
    a = next(iter(sorted(pts, key=_key)))
    far = max(sorted(pts, key=_key), key=lambda p: tree.dist(a, p))
    other = max(sorted(pts, key=_key), key=lambda p: tree.dist(far, p))
    return Hull(verts, edges, 2 * tree.dist(far, other), (far, other))


def tree_center(nodes: Iterable, adj: dict):
    """Center of a finite tree by repeated leaf stripping: ('node', x) or ('edge', (x, y))."""
    alive = set(nodes)
    if not alive:
        raise ValueError("empty tree")
    deg = {v: sum(1 for w in adj.get(v, ()) if w in alive) for v in alive}
    leaves = [v for v in alive if deg[v] <= 1]
    while len(alive) > 2:
        nxt = []
        for v in leaves:
            alive.discard(v)
            for w in adj.get(v, ()):
                if w in alive:
                    deg[w] -= 1
                    if deg[w] == 1:
                        nxt.append(w)
        leaves = nxt
    rest = sorted(alive, key=_key)
    return ("node", rest[0]) if len(rest) == 1 else ("edge", tuple(rest))


def centerOf(h: Hull, tree: Tree) -> RefinedPoint:
    if not h.vertices:
        raise DomainError("empty hull has no center")
    adj: dict = {v: [] for v in h.vertices}
    for u, v in h.edges:
        adj[u].append(v)
        adj[v].append(u)
    kind, x = tree_center(h.vertices, adj)
    if kind == "node":
        return RefinedPoint.at_vertex(x)
    return RefinedPoint.on_edge(x[0], x[1], HALF)


# ---------------------------------------------------------------- fledgedness

@dataclass
class FledgeReport:
    diameterPerRadius: dict
    verdict: str
    centers: dict = field(default_factory=dict)

    def to_json(self, tree: Tree | None = None) -> dict:
        return {"diameterPerRadius": {str(r): d for r, d in self.diameterPerRadius.items()},
                "verdict": self.verdict,
                "centers": {str(r): c.to_json(tree) for r, c in self.centers.items()}}


def fledgeReport(g, radii: Sequence[int], tree: Tree) -> FledgeReport:
    g = tree.word(g)
    O = tree.oracle
    if words.is_identity_word(g, O):
        raise DomainError("fledgedness is defined for non-trivial elements only")
    if _elliptic(tree, g) is None:
        raise ClassificationError("element is hyperbolic")
    radii = sorted(set(radii))
    if not radii or radii[0] < 2:
        raise ValueError("radii must be >= 2")
    fd = fixed_data(g, tree, radii[-1])
    diam, centers = {}, {}
    for r in radii:
        h = upsilonHull(psi_from(fd, tree, r).points, tree)
        diam[r] = h.diameter
        if h.vertices:
            centers[r] = centerOf(h, tree)
    vals = [diam[r] for r in radii]
    top = vals[len(vals) // 2:]
    if None in vals:
        verdict = "inconclusive"
    elif len(vals) > 1 and all(a < b for a, b in zip(vals, vals[1:])):
        verdict = "growingWitness"
    elif len(set(top)) == 1:
        verdict = "boundedWitness"
    else:
        verdict = "inconclusive"
    return FledgeReport(diam, verdict, centers)


# ---------------------------------------------------------------- delta

def translation_length(g, tree: Tree) -> int:
    core, _ = words.cyclic_reduce(tree.word(g), tree.oracle)
    return len(core.syllables)


def attracting_ray(g, tree: Tree, length: int, max_iter: int = 64) -> RayPrefix:
    """First ``length`` steps of the ray from the base vertex to lim g^n (base vertex)."""
    g = tree.word(g)
    O = tree.oracle
    v0 = tree.root
    grp = tree.group_of(v0)
    cur = tree.prefix_word(v0)
    prev_chain = None
    for _ in range(max_iter):
        cur = words.mul_word(g, cur, O)
        chain = tree.ancestors(tree.vertex_of(cur, grp))
        if prev_chain is not None:
            common = []
            for x, y in zip(prev_chain, chain):
                if x != y:
                    break
                common.append(x)
            if len(common) > length:
                return RayPrefix(tuple(common[:length + 1]))
        prev_chain = chain
    raise InconclusiveFledgeError("attracting ray did not stabilise", {})


def deltaMap(g, R: int, tree: Tree):
    """Center of Upsilon for elliptic g; prefix of the attracting ray for hyperbolic g."""
    g = tree.word(g)
    O = tree.oracle
    if words.is_identity_word(g, O):
        raise DomainError("delta is defined for non-trivial elements only")
    if _elliptic(tree, g) is None:
        return attracting_ray(g, tree, R)
    # growth can come in steps of two radii (BS(2,3) powers of b), so a short
    # plateau is not enough: ask for a constant diameter over four radii
    radii = list(range(max(2, R - 3), R + 1))
    rep = fledgeReport(g, radii, tree)
    vals = set(rep.diameterPerRadius.values())
    if len(radii) < 4 or len(vals) != 1 or None in vals:
        raise InconclusiveFledgeError(f"diameter not constant on radii {radii}", rep.diameterPerRadius)
    return rep.centers[radii[-1]]


def ray_agrees(r1: RayPrefix, r2: RayPrefix, tree: Tree, skip: int) -> bool:
    """Two ray prefixes from possibly different starts agree beyond depth ``skip``."""
    n = min(max(tree.depth(v) for v in r1.vertices), max(tree.depth(v) for v in r2.vertices))
    a = {v for v in r1.vertices if skip < tree.depth(v) <= n}
    b = {v for v in r2.vertices if skip < tree.depth(v) <= n}
    return a == b and bool(a)


# ---------------------------------------------------------------- transverse pairs

def axis_in_ball(g, tree: Tree, R: int) -> set:
    g = tree.word(g)
    ell = translation_length(g, tree)
    imgs = ball_images(g, tree, R)
    return {v for v, w in imgs.items() if tree.dist(v, w) == ell}


def _products(gens, n_max):
    for n in range(1, n_max + 1):
        for combo in itertools.product(gens, repeat=n):
            yield [t for part in combo for t in part]


def transverseWitness(tree: Tree, R: int = 6, max_tokens: int = 3):
    """Two hyperbolic words whose axes meet the ball and are disjoint there (so
    disjoint everywhere, the ball being convex).

    Short cyclically reduced words tend to share the base edge, so the second
    word is searched among conjugates ``x g x^-1`` of the first by products of
    up to ``max_tokens`` generators.
    """
    O = tree.oracle
    gens = tree.generators + [words.invert_tokens(g) for g in tree.generators]
    hyper = []
    for toks in _products(gens, 2):
        if _elliptic(tree, words.reduce(toks, O)) is None:
            hyper.append(toks)
    seen = set()
    for g in hyper[:4]:
        ax = axis_in_ball(g, tree, R)
        if not ax:
            continue
        for x in _products(gens, max_tokens):
            h = x + g + words.invert_tokens(x)
            w = words.reduce(h, O)
            if w in seen:
                continue
            seen.add(w)
            hax = axis_in_ball(w, tree, R)
            if hax and not (ax & hax):
                return g, h
    return None


# ---------------------------------------------------------------- DOT export

def to_dot(b: Ball, tree: Tree, g=None) -> str:
    """Graphviz text; with an element, fixed/moved/Psi/hull vertices are coloured."""
    colour = {}
    if g is not None:
        g = tree.word(g)
        imgs = ball_images(g, tree, b.radius)
        fixed = {v for v, w in imgs.items() if v == w}
        psi, hull = set(), set()
        if _elliptic(tree, g) is not None and not words.is_identity_word(g, tree.oracle):
            pr = psi_from(fixed_data(g, tree, b.radius), tree, b.radius)
            psi = pr.points
            hull = upsilonHull(psi, tree).vertices
        for v in b.vertices:
            colour[v] = ("red" if v in psi else "orange" if v in hull else
                         "palegreen" if v in fixed else "lightgrey")
    ids = {v: f"v{k}" for k, v in enumerate(b.vertices)}
    lines = ["graph ball {", "  node [shape=box, style=filled, fontsize=9];"]
    for v in b.vertices:
        label = tree.vertex_text(v).replace('"', "'")
        lines.append(f'  {ids[v]} [label="{label}", fillcolor="{colour.get(v, "white")}"];')
    for u, v in b.edges():
        lines.append(f"  {ids[u]} -- {ids[v]};")
    lines.append("}")
    return "\n".join(lines) + "\n"
