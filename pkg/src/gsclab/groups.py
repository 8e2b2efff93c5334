"""Finite-group engine: tables, subgroups, classes, automorphisms, knit products.

Elements are dense indices ``0..|G|-1`` with the identity at index 0; the
multiplication and inverse tables make every group operation an O(1)
lookup. Construction goes through :class:`GroupSpec`, which covers the
named groups the protocols need (dihedral presentations, ``G_CCX``,
``G_CnX``) as well as generic permutation-generated groups.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from gsclab import permgrp
from gsclab.errors import (
    InvalidGenerators,
    NotAHomomorphism,
    NotAKnitProduct,
    NotBijective,
    OrderCapExceeded,
)

DEFAULT_ORDER_CAP = 4096
_ASSOC_EXHAUSTIVE_MAX = 64
_ASSOC_SAMPLES = 100_000


# ---------------------------------------------------------------------------
# specs


@dataclass(frozen=True)
class GroupSpec:
    """Declarative description of a finite group; serializes to JSON."""

    variant: str
    params: tuple = ()

    @staticmethod
    def cyclic(n: int) -> "GroupSpec":
        return GroupSpec("cyclic", (int(n),))

    @staticmethod
    def direct_product(*specs: "GroupSpec") -> "GroupSpec":
        return GroupSpec("direct_product", tuple(specs))

    @staticmethod
    def dihedral(n: int) -> "GroupSpec":
        return GroupSpec("dihedral", (int(n),))

    @staticmethod
    def symmetric(n: int) -> "GroupSpec":
        return GroupSpec("symmetric", (int(n),))

    @staticmethod
    def alternating(n: int) -> "GroupSpec":
        return GroupSpec("alternating", (int(n),))

    @staticmethod
    def perm_generated(degree: int, generators: Sequence[Sequence[int]]) -> "GroupSpec":
        gens = tuple(tuple(int(x) for x in g) for g in generators)
        return GroupSpec("perm_generated", (int(degree), gens))

    @staticmethod
    def named(name: str) -> "GroupSpec":
        return GroupSpec("named", (str(name),))

    def to_json(self) -> dict:
        if self.variant == "direct_product":
            return {"variant": self.variant, "params": [s.to_json() for s in self.params]}
        if self.variant == "perm_generated":
            degree, gens = self.params
            return {"variant": self.variant, "params": [degree, [list(g) for g in gens]]}
        return {"variant": self.variant, "params": list(self.params)}

    @staticmethod
    def from_json(obj: dict) -> "GroupSpec":
        variant = obj["variant"]
        params = obj["params"]
        if variant == "direct_product":
            return GroupSpec.direct_product(*(GroupSpec.from_json(p) for p in params))
        if variant == "perm_generated":
            return GroupSpec.perm_generated(params[0], params[1])
        if variant in ("cyclic", "dihedral", "symmetric", "alternating"):
            return GroupSpec(variant, (int(params[0]),))
        if variant == "named":
            return GroupSpec.named(params[0])
        raise ValueError(f"unknown GroupSpec variant {variant!r}")


# ---------------------------------------------------------------------------
# tables


@dataclass
class GroupTable:
    """A finite group as index tables; immutable after construction."""

    order: int
    mult: np.ndarray  # (order, order) int
    inv: np.ndarray  # (order,) int
    names: list[str]
    spec: GroupSpec | None = None
    identity: int = 0
    _name_index: dict[str, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.mult = np.asarray(self.mult, dtype=np.int32)
        self.inv = np.asarray(self.inv, dtype=np.int32)
        self.mult.setflags(write=False)
        self.inv.setflags(write=False)
        if not self._name_index:
            self._name_index = {n: i for i, n in enumerate(self.names)}

    # plain int accessors keep call sites free of numpy scalar leakage
    def mul(self, a: int, b: int) -> int:
        return int(self.mult[a, b])

    def invert(self, a: int) -> int:
        return int(self.inv[a])

    def conj(self, g: int, h: int) -> int:
        """h g h-bar."""
        return int(self.mult[self.mult[h, g], self.inv[h]])

    def elements(self) -> range:
        return range(self.order)

    def element_index(self, name: str) -> int:
        return self._name_index[name]

    def element_order(self, g: int) -> int:
        n, x = 1, g
        while x != self.identity:
            x = self.mul(x, g)
            n += 1
        return n

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.mult, self.mult.T))

    def word(self, indices: Iterable[int]) -> int:
        out = self.identity
        for g in indices:
            out = self.mul(out, g)
        return out

    def export_json(self) -> dict:
        return {
            "order": self.order,
            "names": list(self.names),
            "mult": self.mult.tolist(),
            "spec": self.spec.to_json() if self.spec is not None else None,
        }

    def __eq__(self, other) -> bool:
        return self is other or (
            isinstance(other, GroupTable)
            and self.order == other.order
            and np.array_equal(self.mult, other.mult)
        )

    def __hash__(self):
        return hash((self.order, self.names[min(1, self.order - 1)]))


def multiply(G: GroupTable, a: int, b: int) -> int:
    return G.mul(a, b)


def inverse(G: GroupTable, a: int) -> int:
    return G.invert(a)


def conjugate(G: GroupTable, g: int, h: int) -> int:
    """h g h-bar."""
    return G.conj(g, h)


def validate_group_table(G: GroupTable, rng_seed: int = 0xD1C5) -> None:
    """Identity, inverse, Latin-square, and associativity checks.

    Associativity is exhaustive up to order 64 and randomized above; the
    constructions are proofs, this is a regression tripwire.
    """
    n = G.order
    ident = G.identity
    if not (np.array_equal(G.mult[ident], np.arange(n)) and np.array_equal(G.mult[:, ident], np.arange(n))):
        raise InvalidGenerators("identity law fails")
    if not np.array_equal(G.mult[np.arange(n), G.inv], np.full(n, ident)):
        raise InvalidGenerators("inverse law fails")
    full = np.arange(n)
    for i in range(n):
        if not (np.array_equal(np.sort(G.mult[i]), full) and np.array_equal(np.sort(G.mult[:, i]), full)):
            raise InvalidGenerators("multiplication table is not a Latin square")
    if n <= _ASSOC_EXHAUSTIVE_MAX:
        m = G.mult
        left = m[m, :]  # left[a,b,c] = (ab)c
        right = m[:, m]  # right[a,b,c] = a(bc)
        if not np.array_equal(left, right):
            raise InvalidGenerators("associativity fails")
    else:
        rng = np.random.default_rng(rng_seed)
        a, b, c = (rng.integers(0, n, _ASSOC_SAMPLES) for _ in range(3))
        if not np.array_equal(G.mult[G.mult[a, b], c], G.mult[a, G.mult[b, c]]):
            raise InvalidGenerators("associativity fails on sampled triples")


# ---------------------------------------------------------------------------
# constructions


def _table_from_perms(perms: list[permgrp.Perm], names: list[str], spec: GroupSpec) -> GroupTable:
    index = {p: i for i, p in enumerate(perms)}
    n = len(perms)
    mult = np.empty((n, n), dtype=np.int32)
    inv = np.empty(n, dtype=np.int32)
    for i, p in enumerate(perms):
        for j, q in enumerate(perms):
            mult[i, j] = index[permgrp.compose(p, q)]
        inv[i] = index[permgrp.invert(p)]
    return GroupTable(order=n, mult=mult, inv=inv, names=names, spec=spec)


def _build_cyclic(n: int, spec: GroupSpec) -> GroupTable:
    idx = np.arange(n)
    mult = (idx[:, None] + idx[None, :]) % n
    inv = (-idx) % n
    names = ["1"] + [f"g^{k}" if k > 1 else "g" for k in range(1, n)]
    return GroupTable(order=n, mult=mult, inv=inv, names=names, spec=spec)


def _build_dihedral(n: int, spec: GroupSpec) -> GroupTable:
    """Order 2n, r^n = s^2 = 1, srs = r^(n-1); index = p*n + q for r^q s^p."""
    order = 2 * n
    mult = np.empty((order, order), dtype=np.int32)
    inv = np.empty(order, dtype=np.int32)

    def enc(q: int, p: int) -> int:
        return p * n + q % n

    for q1, p1, q2, p2 in itertools.product(range(n), range(2), range(n), range(2)):
        q = (q1 + (q2 if p1 == 0 else -q2)) % n
        mult[enc(q1, p1), enc(q2, p2)] = enc(q, (p1 + p2) % 2)
    for q, p in itertools.product(range(n), range(2)):
        inv[enc(q, p)] = enc((-q) % n if p == 0 else q, p)
    names = []
    for p in range(2):
        for q in range(n):
            if q == 0 and p == 0:
                names.append("1")
            else:
                rpart = "" if q == 0 else ("r" if q == 1 else f"r^{q}")
                spart = "s" if p == 1 else ""
                names.append((rpart + (" " if rpart and spart else "") + spart) or "1")
    return GroupTable(order=order, mult=mult, inv=inv, names=names, spec=spec)


def _build_direct_product(tables: list[GroupTable], spec: GroupSpec) -> GroupTable:
    cur = tables[0]
    mult, inv, names = cur.mult, cur.inv, list(cur.names)
    for t in tables[1:]:
        n1, n2 = len(names), t.order
        a1, b1 = np.divmod(np.arange(n1 * n2)[:, None], n2)
        a2, b2 = np.divmod(np.arange(n1 * n2)[None, :], n2)
        mult = mult[a1, a2] * n2 + t.mult[b1, b2]
        inv = inv[np.arange(n1 * n2) // n2] * n2 + t.inv[np.arange(n1 * n2) % n2]
        names = [f"({x},{y})" for x in names for y in t.names]
    return GroupTable(order=len(names), mult=mult, inv=inv, names=names, spec=spec)


def _perm_elements_symmetric(n: int, even_only: bool) -> list[permgrp.Perm]:
    def parity(p):
        seen, par = [False] * len(p), 0
        for i in range(len(p)):
            if not seen[i]:
                j, clen = i, 0
                while not seen[j]:
                    seen[j] = True
                    j = p[j]
                    clen += 1
                par ^= (clen - 1) & 1
        return par

    perms = [p for p in itertools.permutations(range(n))]
    if even_only:
        perms = [p for p in perms if parity(p) == 0]
    return perms


def _build_d4_abc(spec: GroupSpec) -> GroupTable:
    """D4 with a^2 = b^2 = c^2 = 1, cac = ab, b central; index = 4a + 2b + c."""
    mult = np.empty((8, 8), dtype=np.int32)
    inv = np.empty(8, dtype=np.int32)
    for a1, b1, c1, a2, b2, c2 in itertools.product(range(2), repeat=6):
        a, b, c = (a1 + a2) % 2, (b1 + b2 + c1 * a2) % 2, (c1 + c2) % 2
        mult[a1 * 4 + b1 * 2 + c1, a2 * 4 + b2 * 2 + c2] = a * 4 + b * 2 + c
    for g in range(8):
        for h in range(8):
            if mult[g, h] == 0:
                inv[g] = h
    names = [f"a^{a} b^{b} c^{c}" for a in range(2) for b in range(2) for c in range(2)]
    return GroupTable(order=8, mult=mult, inv=inv, names=names, spec=spec)


def _xor_perm(nq: int, flips: int) -> permgrp.Perm:
    return tuple(x ^ flips for x in range(1 << nq))


def _controlled_x_perm(nq: int, controls: Sequence[int], target: int) -> permgrp.Perm:
    """Qubit 1 is the most significant bit; controls/targets are 1-based."""
    cmask = 0
    for c in controls:
        cmask |= 1 << (nq - c)
    tmask = 1 << (nq - target)
    return tuple(x ^ tmask if (x & cmask) == cmask else x for x in range(1 << nq))


def gccx_generator_perms() -> dict[str, permgrp.Perm]:
    """The six generators a..f of G_CCX as permutations of 3-bit strings."""
    return {
        "a": _xor_perm(3, 0b100),
        "b": _xor_perm(3, 0b010),
        "c": _xor_perm(3, 0b001),
        "d": _controlled_x_perm(3, [1], 3),
        "e": _controlled_x_perm(3, [2], 3),
        "f": _controlled_x_perm(3, [1, 2], 3),
    }


def _build_gccx(spec: GroupSpec) -> GroupTable:
    gens = gccx_generator_perms()
    letters = "abcdef"
    perms, names = [], []
    for bits in itertools.product(range(2), repeat=6):
        p = permgrp.identity_perm(8)
        for letter, e in zip(letters, bits):
            if e:
                p = permgrp.compose(p, gens[letter])
        perms.append(p)
        names.append(" ".join(f"{letter}^{e}" for letter, e in zip(letters, bits)))
    if len(set(perms)) != 64:
        raise InvalidGenerators("G_CCX normal form is not unique")
    return _table_from_perms(perms, names, spec)


def gcnx_generator_perms(n: int) -> list[permgrp.Perm]:
    """Generators X_1..X_n and C^n X of G_CnX on n+1 qubits."""
    nq = n + 1
    gens = [_xor_perm(nq, 1 << (nq - 1 - i)) for i in range(n)]
    gens.append(_controlled_x_perm(nq, list(range(1, n + 1)), n + 1))
    return gens


def _build_gcnx(n: int, spec: GroupSpec, cap: int) -> GroupTable:
    order = 2 ** (2**n + n)
    if order > cap:
        raise OrderCapExceeded(f"|G_C{n}X| = {order} exceeds table cap {cap}")
    gens = gcnx_generator_perms(n)
    perms = permgrp.closure(gens, 1 << (n + 1), cap=cap)
    names = [permgrp.cycle_notation(p) for p in perms]
    return _table_from_perms(perms, names, spec)


def build_group(spec: GroupSpec, cap: int = DEFAULT_ORDER_CAP) -> GroupTable:
    """Build a validated GroupTable from a spec; full tables are capped."""
    if spec.variant == "cyclic":
        (n,) = spec.params
        if n < 1:
            raise InvalidGenerators("cyclic order must be >= 1")
        if n > cap:
            raise OrderCapExceeded(f"order {n} exceeds cap {cap}")
        table = _build_cyclic(n, spec)
    elif spec.variant == "dihedral":
        (n,) = spec.params
        if 2 * n > cap:
            raise OrderCapExceeded(f"order {2 * n} exceeds cap {cap}")
        table = _build_dihedral(n, spec)
    elif spec.variant == "direct_product":
        tables = [build_group(s, cap) for s in spec.params]
        order = int(np.prod([t.order for t in tables]))
        if order > cap:
            raise OrderCapExceeded(f"order {order} exceeds cap {cap}")
        table = _build_direct_product(tables, spec)
    elif spec.variant in ("symmetric", "alternating"):
        (n,) = spec.params
        import math

        order = math.factorial(n) // (1 if spec.variant == "symmetric" else 2)
        if order > cap:
            raise OrderCapExceeded(f"order {order} exceeds cap {cap}")
        perms = _perm_elements_symmetric(n, spec.variant == "alternating")
        table = _table_from_perms(perms, [permgrp.cycle_notation(p) for p in perms], spec)
    elif spec.variant == "perm_generated":
        degree, gens = spec.params
        perms = permgrp.closure([permgrp.check_perm(g, degree) for g in gens], degree, cap=cap)
        table = _table_from_perms(perms, [permgrp.cycle_notation(p) for p in perms], spec)
    elif spec.variant == "named":
        (name,) = spec.params
        if name == "D4_abc":
            table = _build_d4_abc(spec)
        elif name == "GCCX":
            table = _build_gccx(spec)
        elif name.startswith("GCnX(") and name.endswith(")"):
            table = _build_gcnx(int(name[5:-1]), spec, cap)
        else:
            raise InvalidGenerators(f"unknown named group {name!r}")
    else:
        raise InvalidGenerators(f"unknown spec variant {spec.variant!r}")
    validate_group_table(table)
    return table


# ---------------------------------------------------------------------------
# subgroups


@dataclass
class Subgroup:
    """A subgroup given by its member indices in the parent group."""

    parent: GroupTable
    members: tuple[int, ...]  # sorted, members[0] == identity
    project: dict[int, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.project:
            self.project = {g: i for i, g in enumerate(self.members)}

    @property
    def order(self) -> int:
        return len(self.members)

    def embed(self, local: int) -> int:
        return self.members[local]

    def contains(self, g: int) -> bool:
        return g in self.project

    def as_group_table(self, label: str | None = None) -> GroupTable:
        """Standalone table with local indices (identity stays at 0)."""
        n = self.order
        mult = np.empty((n, n), dtype=np.int32)
        inv = np.empty(n, dtype=np.int32)
        for i, g in enumerate(self.members):
            inv[i] = self.project[self.parent.invert(g)]
            for j, h in enumerate(self.members):
                mult[i, j] = self.project[self.parent.mul(g, h)]
        names = [self.parent.names[g] for g in self.members]
        return GroupTable(order=n, mult=mult, inv=inv, names=names, spec=None)


def subgroup_closure(G: GroupTable, generators: Sequence[int]) -> Subgroup:
    """Smallest subgroup containing the generators (breadth-first closure)."""
    seen = {G.identity}
    frontier = [G.identity]
    gens = [int(g) for g in generators]
    while frontier:
        nxt = []
        for h in frontier:
            for g in gens:
                x = G.mul(h, g)
                if x not in seen:
                    seen.add(x)
                    nxt.append(x)
        frontier = nxt
    return Subgroup(parent=G, members=tuple(sorted(seen)))


def conjugacy_classes(G: GroupTable) -> list[tuple[int, ...]]:
    """Disjoint conjugacy classes, each sorted, ordered by smallest member."""
    remaining = set(G.elements())
    classes = []
    while remaining:
        g = min(remaining)
        cls = {G.conj(g, h) for h in G.elements()}
        classes.append(tuple(sorted(cls)))
        remaining -= cls
    classes.sort(key=lambda c: c[0])
    return classes


def class_of(classes: list[tuple[int, ...]], g: int) -> int:
    for i, c in enumerate(classes):
        if g in c:
            return i
    raise ValueError(f"element {g} in no class")


# ---------------------------------------------------------------------------
# knit products


@dataclass
class KnitDecomposition:
    """Unique-factorization tables for G = H |x| K (Zappa-Szep product)."""

    G: GroupTable
    H: Subgroup
    K: Subgroup
    factor_hk: np.ndarray  # (|G|, 2) local (h, k) with g = h k
    factor_kh: np.ndarray  # (|G|, 2) local (k, h) with g = k h
    commute_kh: np.ndarray  # (|K|, |H|, 2) local (h', k') with k h = h' k'
    transversal: tuple[int, ...]  # left transversal of H in G (the K members)

    def hk_of(self, g: int) -> tuple[int, int]:
        h, k = self.factor_hk[g]
        return int(h), int(k)

    def kh_of(self, g: int) -> tuple[int, int]:
        k, h = self.factor_kh[g]
        return int(k), int(h)

    def merge_hk(self, h_local: int, k_local: int) -> int:
        return self.G.mul(self.H.embed(h_local), self.K.embed(k_local))

    def merge_kh(self, k_local: int, h_local: int) -> int:
        return self.G.mul(self.K.embed(k_local), self.H.embed(h_local))


def knit_decompose(G: GroupTable, H: Subgroup, K: Subgroup) -> KnitDecomposition:
    """Verify the three knit-product conditions and build the factor tables."""
    inter = set(H.members) & set(K.members)
    if inter != {G.identity}:
        raise NotAKnitProduct("intersection", f"|H intersect K| = {len(inter)}")
    if H.order * K.order != G.order:
        raise NotAKnitProduct("order_product", f"{H.order}*{K.order} != {G.order}")
    factor_hk = np.full((G.order, 2), -1, dtype=np.int32)
    factor_kh = np.full((G.order, 2), -1, dtype=np.int32)
    for i, h in enumerate(H.members):
        for j, k in enumerate(K.members):
            g = G.mul(h, k)
            if factor_hk[g, 0] >= 0:
                raise NotAKnitProduct("uniqueness", f"element {G.names[g]} factors twice as hk")
            factor_hk[g] = (i, j)
            g2 = G.mul(k, h)
            if factor_kh[g2, 0] >= 0:
                raise NotAKnitProduct("uniqueness", f"element {G.names[g2]} factors twice as kh")
            factor_kh[g2] = (j, i)
    if (factor_hk < 0).any() or (factor_kh < 0).any():
        raise NotAKnitProduct("uniqueness", "some element has no factorization")
    commute = np.empty((K.order, H.order, 2), dtype=np.int32)
    for j, k in enumerate(K.members):
        for i, h in enumerate(H.members):
            commute[j, i] = factor_hk[G.mul(k, h)]
    return KnitDecomposition(
        G=G,
        H=H,
        K=K,
        factor_hk=factor_hk,
        factor_kh=factor_kh,
        commute_kh=commute,
        transversal=tuple(K.members),
    )


# ---------------------------------------------------------------------------
# automorphisms


@dataclass
class Automorphism:
    """A validated automorphism as a permutation of element indices."""

    G: GroupTable
    perm: np.ndarray
    is_inner: int | None = None

    def __post_init__(self):
        self.perm = np.asarray(self.perm, dtype=np.int32)

    def __call__(self, g: int) -> int:
        return int(self.perm[g])

    def compose(self, other: "Automorphism") -> "Automorphism":
        return validate_automorphism(self.G, self.perm[other.perm])

    def inverse(self) -> "Automorphism":
        inv = np.empty_like(self.perm)
        inv[self.perm] = np.arange(len(self.perm))
        return validate_automorphism(self.G, inv)


def validate_automorphism(G: GroupTable, perm: Sequence[int], is_inner: int | None = None) -> Automorphism:
    p = np.asarray(perm, dtype=np.int32)
    if sorted(p.tolist()) != list(range(G.order)):
        raise NotBijective("candidate automorphism is not a bijection")
    if p[G.identity] != G.identity:
        raise NotAHomomorphism("identity not fixed")
    if not np.array_equal(p[G.mult], G.mult[p[:, None], p[None, :]]):
        raise NotAHomomorphism("phi(ab) != phi(a)phi(b)")
    return Automorphism(G=G, perm=p, is_inner=is_inner)


def automorphism_from_images(G: GroupTable, images: dict[int, int]) -> Automorphism:
    """Extend generator images to all of G by word rewriting, then validate."""
    phi = {G.identity: G.identity}
    frontier = [G.identity]
    gens = {int(g): int(img) for g, img in images.items()}
    while frontier:
        nxt = []
        for w in frontier:
            for g, img in gens.items():
                x = G.mul(w, g)
                fx = G.mul(phi[w], img)
                if x in phi:
                    if phi[x] != fx:
                        raise NotAHomomorphism(f"inconsistent image for {G.names[x]}")
                else:
                    phi[x] = fx
                    nxt.append(x)
        frontier = nxt
    if len(phi) != G.order:
        raise NotAHomomorphism("images given on a non-generating set")
    perm = np.array([phi[g] for g in G.elements()], dtype=np.int32)
    return validate_automorphism(G, perm)


def inner_automorphism(G: GroupTable, g: int) -> Automorphism:
    perm = np.array([G.conj(h, g) for h in G.elements()], dtype=np.int32)
    return validate_automorphism(G, perm, is_inner=g)


def spec_to_json_str(spec: GroupSpec) -> str:
    return json.dumps(spec.to_json(), sort_keys=True)
