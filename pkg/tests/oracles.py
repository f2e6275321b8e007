"""Independent reference computations used to check the package.

Nothing here calls the code under test for the quantity being checked: group
closures are brute force over tuples, BS(2,3) words are evaluated in an affine
representation, ball sizes come from the degree sequence, and fixed-point
hulls are rebuilt from a full scan of the ball with plain graph searches.
"""
from __future__ import annotations

import itertools
from fractions import Fraction


# ---------------------------------------------------------------- permutation groups

def compose(a: tuple, b: tuple) -> tuple:
    """(a*b)(x) = a(b(x))."""
    return tuple(a[x] for x in b)


def parse_cycles(text: str, n: int) -> tuple:
    img = list(range(n))
    for cyc in text.replace(" ", ",").split(")"):
        cyc = cyc.strip("(, ")
        if not cyc:
            continue
        pts = [int(x) for x in cyc.split(",") if x]
        for a, b in zip(pts, pts[1:] + pts[:1]):
            img[a] = b
    return tuple(img)


def brute_group(gens: list[tuple], n: int) -> set:
    """All products of generators, by naive saturation."""
    ident = tuple(range(n))
    group = {ident}
    changed = True
    while changed:
        changed = False
        for a in list(group):
            for g in gens:
                c = compose(a, g)
                if c not in group:
                    group.add(c)
                    changed = True
    return group


def brute_stabilizer(group: set, p: int) -> set:
    return {g for g in group if g[p] == p}


def brute_orbit(group: set, p: int) -> set:
    return {g[p] for g in group}


def brute_inverse(a: tuple) -> tuple:
    out = [0] * len(a)
    for i, x in enumerate(a):
        out[x] = i
    return tuple(out)


def brute_derived(group: set) -> set:
    n = len(next(iter(group)))
    comms = [compose(compose(brute_inverse(a), brute_inverse(b)), compose(a, b))
             for a in group for b in group]
    return brute_group(comms, n)


def brute_2_transitive(group: set, n: int) -> bool:
    """Transitive on ordered pairs of distinct points."""
    if n < 2:
        return False
    return len({(g[0], g[1]) for g in group}) == n * (n - 1)


def as_tuple(perm) -> tuple:
    return tuple(perm.images)


# ---------------------------------------------------------------- BS(2,3)

def bs23_affine(tokens) -> tuple[Fraction, Fraction]:
    """Image of a word under b -> x+1, t -> (2/3)x, as (slope, offset) of x -> slope*x + offset.

    This is a homomorphism from BS(2,3) (t^-1 b^2 t = b^3 holds), so equal
    elements have equal images.
    """
    slope, off = Fraction(1), Fraction(0)
    for tok in tokens:
        if tok.name == "b":
            s, o = Fraction(1), Fraction(tok.power)
        elif tok.name == "t":
            s, o = Fraction(2, 3) ** tok.power, Fraction(0)
        else:
            raise ValueError(tok)
        # (current) o (s, o): x -> slope*(s*x + o) + off
        slope, off = slope * s, slope * o + off
    return slope, off


# ---------------------------------------------------------------- tree counts

def ball_size_biregular(d0: int, d1: int, R: int) -> int:
    """Vertices within R of a degree-d0 vertex in the (d0, d1)-biregular tree."""
    total, layer, deg = 1, d0, (d1, d0)
    for r in range(1, R + 1):
        total += layer
        layer *= deg[(r - 1) % 2] - 1
    return total


def ball_size_regular(d: int, R: int) -> int:
    return 1 + sum(d * (d - 1) ** (r - 1) for r in range(1, R + 1))


# ---------------------------------------------------------------- fixed points and hulls

def full_scan_fixed(images: dict) -> set:
    return {v for v, w in images.items() if v == w}


def adjacency_from_ball(b) -> dict:
    return {v: list(ns) for v, ns in b.adjacency.items()}


def psi_by_scan(fixed: set, adj: dict, dist: dict, r: int) -> set:
    """Fixed vertices strictly inside radius r with a moved neighbour."""
    return {v for v in fixed if dist[v] < r and any(w not in fixed for w in adj[v])}


def hull_diameter(points: set, adj: dict, dist: dict) -> int | None:
    """Diameter, in half-edges, of the smallest subtree containing ``points``.

    ``dist`` is the distance from the ball's center; parents are recovered
    from it, and tree distances come from climbing to the common ancestor.
    """
    if not points:
        return None
    parent = {}
    for v, ns in adj.items():
        for w in ns:
            if dist[w] == dist[v] - 1:
                parent[v] = w

    def path_up(v):
        out = [v]
        while out[-1] in parent:
            out.append(parent[out[-1]])
        return out

    def d(a, b):
        pa, pb = path_up(a), path_up(b)
        sb = set(pb)
        for k, x in enumerate(pa):
            if x in sb:
                return k + pb.index(x)
        raise ValueError("disconnected")

    best = 0
    for a, b in itertools.combinations(list(points), 2):
        best = max(best, d(a, b))
    return 2 * best
