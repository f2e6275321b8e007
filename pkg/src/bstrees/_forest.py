"""Hash-consed labelled trees with wreath multiplication.

A node carries a label from a finite permutation group (given as integer
tables) and a sparse map ``key -> child``. The label permutes the keys, and
children are indexed by the *target* of that permutation:

    (a * b).label        = a.label o b.label
    (a * b).child[i]     = a.child[i] * b.child[a.label^-1(i)]

Acting on a word ``(k, *rest)`` a node sends it to
``(label(k), *child[label(k)](rest))``. Identity children are never stored, so
every element has exactly one node id and equality is integer equality.
"""
from __future__ import annotations

from typing import Callable, Sequence


class Forest:
    def __init__(self, tables: Sequence[tuple], child_kind: Callable[[int, int], int]):
        # tables[kind] = (mul, inv, act) over label ids; label 0 is the identity
        self.tables = list(tables)
        self.child_kind = child_kind
        self.kind: list[int] = []
        self.label: list[int] = []
        self.kids: list[tuple] = []
        self.kidmap: list[dict] = []
        self.depth: list[int] = []
        self._intern: dict = {}
        self._mul: dict = {}
        self._inv: dict = {}
        self.identity = [self.make(k, 0, ()) for k in range(len(self.tables))]
        self.idset = frozenset(self.identity)

    def make(self, kind: int, label: int, kids) -> int:
        key = (kind, label, kids)
        nid = self._intern.get(key)
        if nid is None:
            nid = len(self.kind)
            self._intern[key] = nid
            self.kind.append(kind)
            self.label.append(label)
            self.kids.append(kids)
            self.kidmap.append(dict(kids))
            self.depth.append(1 + max(self.depth[c] for _, c in kids) if kids else 0)
        return nid

    def build(self, kind: int, label: int, kids: dict) -> int:
        idset = self.idset
        return self.make(kind, label, tuple(sorted((k, c) for k, c in kids.items() if c not in idset)))

    def mul(self, a: int, b: int) -> int:
        idset = self.idset
        if a in idset:
            return b
        if b in idset:
            return a
        memo = self._mul
        r = memo.get((a, b))
        if r is not None:
            return r
        kind = self.kind[a]
        mul, _, act = self.tables[kind]
        la = self.label[a]
        res = dict(self.kids[a])
        acta = act[la]
        for k, c in self.kids[b]:
            t = acta[k]
            prev = res.get(t)
            if prev is None:
                res[t] = c
            else:
                p = self.mul(prev, c)
                if p in idset:
                    del res[t]
                else:
                    res[t] = p
        r = self.make(kind, mul[la][self.label[b]], tuple(sorted(res.items())))
        memo[(a, b)] = r
        return r

    def inv(self, a: int) -> int:
        if a in self.idset:
            return a
        r = self._inv.get(a)
        if r is not None:
            return r
        kind = self.kind[a]
        _, inv, act = self.tables[kind]
        li = inv[self.label[a]]
        acti = act[li]
        kids = tuple(sorted((acti[k], self.inv(c)) for k, c in self.kids[a]))
        r = self.make(kind, li, kids)
        self._inv[a] = r
        self._inv[r] = a
        return r

    def conj(self, a: int, g: int) -> int:
        """g^-1 a g"""
        return self.mul(self.mul(self.inv(g), a), g)

    def child(self, a: int, key: int) -> int:
        c = self.kidmap[a].get(key)
        if c is None:
            return self.identity[self.child_kind(self.kind[a], key)]
        return c

    def act_word(self, a: int, word: Sequence[int]) -> tuple:
        out = []
        node = a
        idset = self.idset
        for pos, k in enumerate(word):
            if node in idset:
                out.extend(word[pos:])
                break
            t = self.tables[self.kind[node]][2][self.label[node]][k]
            out.append(t)
            node = self.kidmap[node].get(t)
            if node is None:
                out.extend(word[pos + 1:])
                break
        return tuple(out)

    def __len__(self) -> int:
        return len(self.kind)

    def mark(self) -> int:
        return len(self.kind)

    def release(self, mark: int) -> None:
        """Forget every node created after ``mark`` (and products touching them)."""
        if len(self.kind) <= mark:
            return
        for nid in range(mark, len(self.kind)):
            del self._intern[(self.kind[nid], self.label[nid], self.kids[nid])]
        for lst in (self.kind, self.label, self.kids, self.kidmap, self.depth):
            del lst[mark:]
        self._mul = {k: v for k, v in self._mul.items() if v < mark and k[0] < mark and k[1] < mark}
        self._inv = {k: v for k, v in self._inv.items() if v < mark and k < mark}
