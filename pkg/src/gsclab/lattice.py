"""GSC lattice geometry, stabilizer data, gauge fixing, and code states.

The patch has rough boundaries left and right (dangling horizontal edges)
and smooth boundaries top and bottom. Horizontal edges point right,
vertical edges point up. A lattice with ``vx`` vertex columns and ``vy``
vertex rows has

    E = 2*vx*vy + vy - vx,   V = vx*vy,   P = (vx + 1)*(vy - 1),

so E - P - V = 1 and the code space dimension is |G|.

Plaquette cycles run counterclockwise from the plaquette's base vertex;
an edge whose orientation opposes the path enters the flux product
inverted. Boundary plaquettes have three edges.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from gsclab.errors import CapExceeded, FluxPresentWarning, NotFluxFree, TooSmall
from gsclab.groups import GroupTable
from gsclab.states import SparseState

CODE_STATE_AMPLITUDE_CAP = 10_000_000


@dataclass(frozen=True)
class Edge:
    index: int
    kind: str  # "h" or "v"
    row: int
    col: int  # horizontal: 0..vx (0 = left dangling, vx = right dangling)
    tail: int | None  # vertex the edge leaves (None at a rough boundary)
    head: int | None  # vertex the edge enters


@dataclass(frozen=True)
class Plaquette:
    index: int
    row: int  # row pair (row, row+1)
    col: int  # 0 = left boundary, vx = right boundary, else interior
    base_vertex: int
    cycle: tuple[tuple[int, bool], ...]  # (edge index, inverted?) counterclockwise


@dataclass
class Lattice:
    vx: int
    vy: int
    edges: list[Edge] = field(default_factory=list)
    plaquettes: list[Plaquette] = field(default_factory=list)
    out_edges: list[list[int]] = field(default_factory=list)
    in_edges: list[list[int]] = field(default_factory=list)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_vertices(self) -> int:
        return self.vx * self.vy

    @property
    def n_plaquettes(self) -> int:
        return len(self.plaquettes)

    def vertex(self, row: int, col: int) -> int:
        return row * self.vx + col

    def h_edge(self, row: int, col: int) -> int:
        return row * (self.vx + 1) + col

    def v_edge(self, row: int, col: int) -> int:
        return self.vy * (self.vx + 1) + row * self.vx + col

    def plaquette(self, row: int, col: int) -> Plaquette:
        return self.plaquettes[row * (self.vx + 1) + col]

    def left_dangling(self) -> list[int]:
        return [self.h_edge(r, 0) for r in range(self.vy)]

    def right_dangling(self) -> list[int]:
        return [self.h_edge(r, self.vx) for r in range(self.vy)]

    def export_json(self) -> dict:
        return {
            "vx": self.vx,
            "vy": self.vy,
            "edges": [
                {"index": e.index, "kind": e.kind, "row": e.row, "col": e.col, "tail": e.tail, "head": e.head}
                for e in self.edges
            ],
            "plaquettes": [
                {"index": p.index, "row": p.row, "col": p.col, "cycle": [[e, int(inv)] for e, inv in p.cycle]}
                for p in self.plaquettes
            ],
        }


def build_lattice(vx: int, vy: int) -> Lattice:
    if vx < 1 or vy < 2:
        raise TooSmall(f"need vx >= 1 and vy >= 2, got ({vx}, {vy})")
    lat = Lattice(vx=vx, vy=vy)
    for r in range(vy):
        for c in range(vx + 1):
            tail = lat.vertex(r, c - 1) if c > 0 else None
            head = lat.vertex(r, c) if c < vx else None
            lat.edges.append(Edge(lat.h_edge(r, c), "h", r, c, tail, head))
    for r in range(vy - 1):
        for c in range(vx):
            lat.edges.append(Edge(lat.v_edge(r, c), "v", r, c, lat.vertex(r, c), lat.vertex(r + 1, c)))
    lat.out_edges = [[] for _ in range(lat.n_vertices)]
    lat.in_edges = [[] for _ in range(lat.n_vertices)]
    for e in lat.edges:
        if e.tail is not None:
            lat.out_edges[e.tail].append(e.index)
        if e.head is not None:
            lat.in_edges[e.head].append(e.index)
    for r in range(vy - 1):
        for c in range(vx + 1):
            if c == 0:
                # left boundary: up the vertical, back along the top dangling,
                # forward along the bottom dangling
                cycle = ((lat.v_edge(r, 0), False), (lat.h_edge(r + 1, 0), True), (lat.h_edge(r, 0), False))
                base = lat.vertex(r, 0)
            elif c == vx:
                # right boundary, base at the bottom vertex of the vertical
                cycle = ((lat.h_edge(r, vx), False), (lat.h_edge(r + 1, vx), True), (lat.v_edge(r, vx - 1), True))
                base = lat.vertex(r, vx - 1)
            else:
                cycle = (
                    (lat.h_edge(r, c), False),
                    (lat.v_edge(r, c), False),
                    (lat.h_edge(r + 1, c), True),
                    (lat.v_edge(r, c - 1), True),
                )
                base = lat.vertex(r, c - 1)
            lat.plaquettes.append(Plaquette(len(lat.plaquettes), r, c, base, cycle))
    assert lat.n_edges == 2 * vx * vy + vy - vx
    assert lat.n_plaquettes == (vx + 1) * (vy - 1)
    assert lat.n_edges - lat.n_plaquettes - lat.n_vertices == 1
    return lat


# ---------------------------------------------------------------------------
# configurations (classical group-label assignments)


def plaquette_flux(lat: Lattice, p: int, config: np.ndarray, G: GroupTable) -> int:
    flux = G.identity
    for e, inverted in lat.plaquettes[p].cycle:
        x = int(config[e])
        flux = G.mul(flux, G.invert(x) if inverted else x)
    return flux


def all_fluxes(lat: Lattice, config: np.ndarray, G: GroupTable) -> list[int]:
    return [plaquette_flux(lat, p, config, G) for p in range(lat.n_plaquettes)]


def is_flux_free(lat: Lattice, config: np.ndarray, G: GroupTable) -> bool:
    return all(f == G.identity for f in all_fluxes(lat, config, G))


def apply_gauge(lat: Lattice, config: np.ndarray, v: int, g: int, G: GroupTable) -> np.ndarray:
    """A_v^g on a classical configuration: left on outgoing, right-inverse on incoming."""
    out = config.copy()
    for e in lat.out_edges[v]:
        out[e] = G.mul(g, int(out[e]))
    for e in lat.in_edges[v]:
        out[e] = G.mul(int(out[e]), G.invert(g))
    return out


def holonomy(lat: Lattice, config: np.ndarray, G: GroupTable, row: int = 0, check: bool = True) -> int:
    """Left-to-right product of the horizontal edges of one row."""
    def row_product(r: int) -> int:
        out = G.identity
        for c in range(lat.vx + 1):
            out = G.mul(out, int(config[lat.h_edge(r, c)]))
        return out

    h = row_product(row)
    if check:
        for r in range(lat.vy):
            if row_product(r) != h:
                raise FluxPresentWarning("holonomy is row-dependent; configuration carries flux")
    return h


def canonical_config(lat: Lattice, G: GroupTable, g: int) -> np.ndarray:
    """The left-gauge representative: g on every leftmost edge, 1 elsewhere."""
    config = np.zeros(lat.n_edges, dtype=np.int64)
    for e in lat.left_dangling():
        config[e] = g
    return config


def left_gauge_reduce(lat: Lattice, config: np.ndarray, G: GroupTable) -> tuple[np.ndarray, int, list[tuple[int, int]]]:
    """Map a flux-free configuration to the left gauge.

    Returns (canonical configuration, logical label, gauge word). The word
    is a list of (vertex, element) such that applying A_v^g in order to the
    canonical configuration recovers the input.
    """
    if not is_flux_free(lat, config, G):
        raise NotFluxFree("left_gauge_reduce requires a flux-free configuration")
    work = config.copy()
    applied: list[tuple[int, int]] = []
    for r in range(lat.vy - 1, -1, -1):
        for c in range(lat.vx - 1, -1, -1):
            v = lat.vertex(r, c)
            right_edge = lat.h_edge(r, c + 1)
            k = G.invert(int(work[right_edge]))  # A_v^k maps the right edge to 1
            if k != G.identity:
                work = apply_gauge(lat, work, v, k, G)
                applied.append((v, k))
    label = int(work[lat.h_edge(0, 0)])
    expect = canonical_config(lat, G, label)
    if not np.array_equal(work, expect):
        raise NotFluxFree("row sweep did not reach the left gauge; flux inconsistency")
    word = [(v, G.invert(k)) for v, k in reversed(applied)]
    return work, label, word


# ---------------------------------------------------------------------------
# patches: a lattice plus per-edge groups plus a sparse state


@dataclass
class Patch:
    """One GSC patch; edge e of the lattice is register reg0 + e of the state."""

    lattice: Lattice
    groups: list[GroupTable]  # per edge
    state: SparseState
    reg0: int = 0  # register offset inside a shared SparseState

    def group(self) -> GroupTable:
        g = self.groups[0]
        assert all(h is g for h in self.groups), "patch has mixed edge alphabets"
        return g

    def edge_reg(self, e: int) -> int:
        return self.reg0 + e


def gauge_orbit(lat: Lattice, G: GroupTable, config: np.ndarray, cap: int = CODE_STATE_AMPLITUDE_CAP) -> np.ndarray:
    """Packed keys of the gauge orbit of a configuration (BFS closure)."""
    sizes = tuple([G.order] * lat.n_edges)
    strides = np.ones(len(sizes), dtype=np.int64)
    for i in range(len(sizes) - 2, -1, -1):
        strides[i] = strides[i + 1] * sizes[i + 1]

    def pack(cfg) -> int:
        return int((cfg * strides).sum())

    seen = {pack(config)}
    frontier = [config]
    while frontier:
        nxt = []
        for cfg in frontier:
            for v in range(lat.n_vertices):
                for g in range(1, G.order):
                    new = apply_gauge(lat, cfg, v, g, G)
                    key = pack(new)
                    if key not in seen:
                        seen.add(key)
                        nxt.append(new)
                        if len(seen) > cap:
                            raise CapExceeded(f"gauge orbit exceeded {cap} configurations")
        frontier = nxt
    return np.array(sorted(seen), dtype=np.int64)


def code_state(G: GroupTable, lat: Lattice, g: int, cap: int = CODE_STATE_AMPLITUDE_CAP) -> Patch:
    """|g>_L: uniform superposition over the gauge orbit of the left-gauge rep."""
    if G.order**lat.n_vertices > cap:
        raise CapExceeded("code state support exceeds the amplitude cap")
    keys = gauge_orbit(lat, G, canonical_config(lat, G, g), cap)
    state = SparseState.uniform(tuple([G.order] * lat.n_edges), keys)
    return Patch(lattice=lat, groups=[G] * lat.n_edges, state=state)


def code_basis(G: GroupTable, lat: Lattice) -> list[Patch]:
    return [code_state(G, lat, g) for g in G.elements()]


def count_gauge_orbits_of_flux_free(G: GroupTable, lat: Lattice, cap: int = 200_000) -> int:
    """Oracle: enumerate flux-free configurations and count gauge orbits."""
    n = lat.n_edges
    if G.order**n > cap:
        raise CapExceeded(f"enumeration {G.order}^{n} exceeds {cap}")
    total = G.order**n
    digits = np.arange(total, dtype=np.int64)
    cols = []
    for e in range(n):
        stride = G.order ** (n - 1 - e)
        cols.append((digits // stride) % G.order)
    flux_ok = np.ones(total, dtype=bool)
    for p in lat.plaquettes:
        flux = np.zeros(total, dtype=np.int64)
        for e, inverted in p.cycle:
            val = G.inv[cols[e]] if inverted else cols[e]
            flux = G.mult[flux, val]
        flux_ok &= flux == G.identity
    flux_keys = digits[flux_ok]
    remaining = set(flux_keys.tolist())
    orbits = 0
    while remaining:
        key = min(remaining)
        cfg = np.array([(key // G.order ** (n - 1 - e)) % G.order for e in range(n)], dtype=np.int64)
        orbit = gauge_orbit(lat, G, cfg)
        remaining -= set(orbit.tolist())
        orbits += 1
    return orbits


def render_config(lat: Lattice, config: np.ndarray, G: GroupTable) -> str:
    """ASCII picture of a configuration, row by row from the top."""
    lines = []
    for r in range(lat.vy - 1, -1, -1):
        row = []
        for c in range(lat.vx + 1):
            row.append(f"-[{G.names[int(config[lat.h_edge(r, c)])]}]-")
            if c < lat.vx:
                row.append("*")
        lines.append("".join(row))
        if r > 0:
            vs = "      ".join(f"|{G.names[int(config[lat.v_edge(r - 1, c)])]}|" for c in range(lat.vx))
            lines.append("   " + vs)
    return "\n".join(lines)
