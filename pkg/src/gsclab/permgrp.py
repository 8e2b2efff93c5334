"""Permutation groups: composition, closure, and Schreier-Sims order/membership.

Permutations are tuples ``p`` with ``p[i]`` the image of point ``i``.
Composition follows the gate convention: ``compose(a, b)`` applies ``b``
first, so that permutations standing for quantum gates multiply like
operators, ``(AB)|x> = A(B|x>)``.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from gsclab.errors import CapExceeded, InvalidGenerators

Perm = tuple[int, ...]


def identity_perm(degree: int) -> Perm:
    return tuple(range(degree))


def compose(a: Perm, b: Perm) -> Perm:
    """a after b: (a*b)[i] = a[b[i]]."""
    return tuple(a[x] for x in b)


def invert(p: Perm) -> Perm:
    out = [0] * len(p)
    for i, x in enumerate(p):
        out[x] = i
    return tuple(out)


def check_perm(p: Sequence[int], degree: int) -> Perm:
    tp = tuple(int(x) for x in p)
    if len(tp) != degree or sorted(tp) != list(range(degree)):
        raise InvalidGenerators(f"not a bijection on 0..{degree - 1}: {p!r}")
    return tp


def cycle_notation(p: Perm) -> str:
    seen = [False] * len(p)
    parts = []
    for i in range(len(p)):
        if seen[i] or p[i] == i:
            seen[i] = True
            continue
        cyc = [i]
        seen[i] = True
        j = p[i]
        while j != i:
            cyc.append(j)
            seen[j] = True
            j = p[j]
        parts.append("(" + " ".join(str(x) for x in cyc) + ")")
    return "".join(parts) if parts else "()"


def parse_cycles(text: str, degree: int) -> Perm:
    """Parse cycle notation like "(0 1 2)(3 4)" into a permutation."""
    img = list(range(degree))
    body = text.strip()
    if body in ("", "()"):
        return tuple(img)
    if not body.startswith("("):
        raise InvalidGenerators(f"bad cycle string: {text!r}")
    for chunk in body.strip(")").split(")"):
        pts = [int(t) for t in chunk.replace("(", " ").replace(",", " ").split()]
        if not pts:
            continue
        if len(set(pts)) != len(pts) or max(pts) >= degree or min(pts) < 0:
            raise InvalidGenerators(f"bad cycle {chunk!r} for degree {degree}")
        for a, b in zip(pts, pts[1:]):
            img[a] = b
        img[pts[-1]] = pts[0]
    return check_perm(img, degree)


def closure(generators: Iterable[Perm], degree: int, cap: int | None = None) -> list[Perm]:
    """BFS closure containing the identity; deterministic element order."""
    gens = [check_perm(g, degree) for g in generators]
    ident = identity_perm(degree)
    seen = {ident}
    order = [ident]
    frontier = [ident]
    while frontier:
        nxt = []
        for p in frontier:
            for g in gens:
                q = compose(g, p)
                if q not in seen:
                    seen.add(q)
                    nxt.append(q)
                    if cap is not None and len(seen) > cap:
                        raise CapExceeded(f"closure exceeded cap {cap}")
        nxt.sort()
        order.extend(nxt)
        frontier = nxt
    return order


class PermGroup:
    """Stabilizer-chain (Schreier-Sims) representation of a permutation group.

    Supports exact order computation and membership testing without
    enumerating elements, so it scales to groups far beyond the dense
    multiplication-table cap.
    """

    def __init__(self, degree: int, generators: Iterable[Sequence[int]]):
        self.degree = degree
        self.generators = [check_perm(g, degree) for g in generators]
        self._base: list[int] = []
        self._chain_gens: list[list[Perm]] = []
        self._transversals: list[dict[int, Perm]] = []
        self._build()

    # -- Schreier-Sims ---------------------------------------------------

    def _orbit_transversal(self, point: int, gens: list[Perm]) -> dict[int, Perm]:
        trans = {point: identity_perm(self.degree)}
        frontier = [point]
        while frontier:
            nxt = []
            for b in frontier:
                for g in gens:
                    c = g[b]
                    if c not in trans:
                        trans[c] = compose(g, trans[b])
                        nxt.append(c)
            frontier = nxt
        return trans

    def _strip(self, p: Perm, start: int) -> tuple[Perm, int]:
        h = p
        for i in range(start, len(self._base)):
            b = self._base[i]
            target = h[b]
            trans = self._transversals[i]
            if target not in trans:
                return h, i
            h = compose(invert(trans[target]), h)
        return h, len(self._base)

    def _extend_base(self, p: Perm) -> None:
        for i in range(self.degree):
            if p[i] != i:
                self._base.append(i)
                self._chain_gens.append([])
                self._transversals.append({i: identity_perm(self.degree)})
                return
        raise AssertionError("identity passed to _extend_base")

    def _add_strong_generator(self, p: Perm, level: int) -> None:
        # p fixes base points before `level`
        h, j = self._strip(p, level)
        if h == identity_perm(self.degree):
            return
        if j == len(self._base):
            self._extend_base(h)
        for i in range(level, j + 1):
            self._chain_gens[i].append(h)
            self._transversals[i] = self._orbit_transversal(self._base[i], self._chain_gens[i])
        # closure of Schreier generators at the affected levels
        for i in range(j, level - 1, -1):
            self._close_level(i)

    def _close_level(self, i: int) -> None:
        changed = True
        while changed:
            changed = False
            trans = self._transversals[i]
            gens = list(self._chain_gens[i])
            for b, tb in list(trans.items()):
                for g in gens:
                    schreier = compose(invert(trans[g[b]]), compose(g, tb))
                    h, j = self._strip(schreier, i + 1)
                    if h != identity_perm(self.degree):
                        if j == len(self._base):
                            self._extend_base(h)
                        for lvl in range(i + 1, j + 1):
                            self._chain_gens[lvl].append(h)
                            self._transversals[lvl] = self._orbit_transversal(
                                self._base[lvl], self._chain_gens[lvl]
                            )
                        for lvl in range(j, i, -1):
                            self._close_level(lvl)
                        changed = True

    def _build(self) -> None:
        for g in self.generators:
            if g == identity_perm(self.degree):
                continue
            h, j = self._strip(g, 0)
            if h == identity_perm(self.degree):
                continue
            if j == len(self._base):
                self._extend_base(h)
            for i in range(0, j + 1):
                self._chain_gens[i].append(h)
                self._transversals[i] = self._orbit_transversal(self._base[i], self._chain_gens[i])
        for i in range(len(self._base) - 1, -1, -1):
            self._close_level(i)

    # -- public API ------------------------------------------------------

    @property
    def order(self) -> int:
        n = 1
        for t in self._transversals:
            n *= len(t)
        return n

    def contains(self, p: Sequence[int]) -> bool:
        tp = check_perm(p, self.degree)
        h, j = self._strip(tp, 0)
        return h == identity_perm(self.degree) and j == len(self._base)


def perm_group_order(degree: int, generators: Iterable[Sequence[int]]) -> int:
    """Exact order of the permutation group generated on 0..degree-1."""
    return PermGroup(degree, generators).order
