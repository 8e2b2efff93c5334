"""Edge operators, stabilizer measurement channels, detectors, and movement.

Plaquette and vertex measurements are implemented as the Kraus channels
induced by the ancilla circuits (ancilla in |1> with controlled
multiplications for plaquettes; ancilla in |+> with controlled group
action, read out in the irrep basis, for vertices). The explicit-ancilla
circuit is retained as a reference path and is equality-tested against
the Kraus path.

The vertex Kraus family is

    K_{R,i,j} = (sqrt(d_R) / |G|) sum_g conj(R(g)_ij) A_v^g,

normalized so that sum K^dag K = 1; outcome probabilities reduce to
overlaps m(u) = <psi| A_v^u |psi> via Schur orthogonality, which is what
makes the no-ancilla path cheap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from gsclab.errors import (
    AlphabetMismatch,
    BoundaryBlocked,
    CapExceeded,
    MaxAttemptsExceeded,
    PostselectionFailed,
)
from gsclab.groups import Automorphism, GroupTable
from gsclab.lattice import Lattice, Patch
from gsclab.reptheory import Irrep, irrep_matrices
from gsclab.states import Rng, SparseState

TRIVIAL = "__trivial__"  # sentinel irrep label comparison uses real labels


# ---------------------------------------------------------------------------
# single-edge operators


def apply_left(patch: Patch, e: int, g: int) -> SparseState:
    G = patch.groups[e]
    if not (0 <= g < G.order):
        raise AlphabetMismatch(f"element {g} not in the edge group (order {G.order})")
    return patch.state.apply_perm(patch.edge_reg(e), G.mult[g])


def apply_right(patch: Patch, e: int, g: int) -> SparseState:
    G = patch.groups[e]
    if not (0 <= g < G.order):
        raise AlphabetMismatch(f"element {g} not in the edge group (order {G.order})")
    return patch.state.apply_perm(patch.edge_reg(e), G.mult[:, G.invert(g)])


def apply_auto(patch: Patch, e: int, phi: Automorphism) -> SparseState:
    if phi.G is not patch.groups[e]:
        raise AlphabetMismatch("automorphism group differs from the edge group")
    return patch.state.apply_perm(patch.edge_reg(e), phi.perm)


def apply_diag(patch: Patch, e: int, rep: Irrep, i: int, j: int) -> tuple[SparseState, float]:
    """Z^{R*_ij} = sum_g conj(R(g)_ij) |g><g|; returns (state, post norm^2)."""
    weights = np.conj(rep.matrices[:, i, j])
    out = patch.state.apply_weights(patch.edge_reg(e), weights)
    return out, out.norm_sq()


CONTROLLED_KINDS = ("CL", "CLbar", "CR", "CRbar")


def controlled_table(G: GroupTable, kind: str, embed: np.ndarray | None = None) -> np.ndarray:
    """Table T[c, t] for |c, t> -> |c, T[c, t]>; `embed` maps ctrl values into G."""
    ctrl = np.arange(G.order) if embed is None else np.asarray(embed)
    if kind == "CL":
        return G.mult[ctrl][:, :]
    if kind == "CLbar":
        return G.mult[G.inv[ctrl]][:, :]
    if kind == "CR":
        return G.mult[:, G.inv[ctrl]].T
    if kind == "CRbar":
        return G.mult[:, ctrl].T
    raise ValueError(f"unknown controlled kind {kind!r}")


def apply_controlled(patch: Patch, ctrl_edge: int, target_edge: int, kind: str,
                     embed: np.ndarray | None = None) -> SparseState:
    """CL/CLbar/CR/CRbar with control on ctrl_edge and target on target_edge."""
    Gt = patch.groups[target_edge]
    Gc = patch.groups[ctrl_edge]
    if embed is None and Gc is not Gt:
        raise AlphabetMismatch("control and target edge groups differ; pass an embedding")
    table = controlled_table(Gt, kind, embed)
    return patch.state.apply_pair_table(patch.edge_reg(ctrl_edge), patch.edge_reg(target_edge), table)


def measure_group_basis(patch: Patch, e: int, rng: Rng) -> tuple[int, SparseState]:
    return patch.state.measure(patch.edge_reg(e), rng)


# ---------------------------------------------------------------------------
# vertex gauge action


def vertex_edge_roles(lat: Lattice, v: int) -> list[tuple[int, bool]]:
    """Incident edges of v as (edge, outgoing?)."""
    return [(e, True) for e in lat.out_edges[v]] + [(e, False) for e in lat.in_edges[v]]


def apply_vertex_gauge(patch: Patch, v: int, g: int,
                       vertex_group: GroupTable | None = None,
                       embeds: dict[int, np.ndarray] | None = None) -> SparseState:
    """A_v^g: left action on outgoing edges, right ghat-inverse on incoming."""
    state = patch.state
    for e, outgoing in vertex_edge_roles(patch.lattice, v):
        Ge = patch.groups[e]
        ge = g if embeds is None or e not in embeds else int(embeds[e][g])
        perm = Ge.mult[ge] if outgoing else Ge.mult[:, Ge.invert(ge)]
        state = state.apply_perm(patch.edge_reg(e), perm)
    return state


def _gauge_rekey_deltas(patch: Patch, v: int, vertex_group: GroupTable,
                        embeds: dict[int, np.ndarray] | None) -> list[tuple[int, np.ndarray]]:
    """Per incident edge, the value permutation for every vertex-group element."""
    out = []
    for e, outgoing in vertex_edge_roles(patch.lattice, v):
        Ge = patch.groups[e]
        if embeds is not None and e in embeds:
            emb = np.asarray(embeds[e])
        else:
            if Ge.order != vertex_group.order:
                raise AlphabetMismatch(f"edge {e} group differs from vertex group; pass embeds")
            emb = np.arange(vertex_group.order)
        perms = Ge.mult[emb] if outgoing else Ge.mult[:, Ge.inv[emb]].T
        out.append((patch.edge_reg(e), perms))  # perms[g] is the value map for A_v^g
    return out


def _gauge_orbit_keys(patch: Patch, v: int, vertex_group: GroupTable,
                      embeds: dict[int, np.ndarray] | None) -> np.ndarray:
    """keys_out[g] = keys of A_v^g |psi> aligned with the input key order."""
    state = patch.state
    n = vertex_group.order
    keys = np.repeat(state.keys[None, :], n, axis=0)
    for reg, perms in _gauge_rekey_deltas(patch, v, vertex_group, embeds):
        digits = (state.keys // state.strides[reg]) % state.sizes[reg]
        newdig = perms[:, digits]  # (n, N)
        keys += (newdig - digits[None, :]) * state.strides[reg]
    return keys


def gauge_overlaps(patch: Patch, v: int, vertex_group: GroupTable,
                   embeds: dict[int, np.ndarray] | None = None) -> np.ndarray:
    """m(u) = <psi| A_v^u |psi> for all u in the vertex group."""
    state = patch.state
    orbit = _gauge_orbit_keys(patch, v, vertex_group, embeds)
    m = np.empty(vertex_group.order, dtype=np.complex128)
    for u in range(vertex_group.order):
        idx = np.searchsorted(state.keys, orbit[u])
        idx_c = np.clip(idx, 0, len(state.keys) - 1)
        hit = state.keys[idx_c] == orbit[u]
        m[u] = np.sum(np.conj(state.amps[idx_c[hit]]) * state.amps[hit])
    return m


def _combine_gauge(patch: Patch, v: int, coeffs: np.ndarray, vertex_group: GroupTable,
                   embeds: dict[int, np.ndarray] | None) -> SparseState:
    """sum_g coeffs[g] A_v^g |psi> as a canonical sparse state."""
    state = patch.state
    orbit = _gauge_orbit_keys(patch, v, vertex_group, embeds)
    nz = np.nonzero(np.abs(coeffs) > 1e-16)[0]
    keys = orbit[nz].ravel()
    amps = (coeffs[nz][:, None] * state.amps[None, :]).ravel()
    return SparseState(state.sizes, keys, amps)


def project_vertex_trivial(patch: Patch, v: int, vertex_group: GroupTable | None = None,
                           embeds: dict[int, np.ndarray] | None = None) -> tuple[float, SparseState]:
    """Measure A_v^G with forced trivial outcome: (weight, renormalized state)."""
    Gv = vertex_group or patch.group()
    coeffs = np.full(Gv.order, 1.0 / Gv.order, dtype=np.complex128)
    out = _combine_gauge(patch, v, coeffs, Gv, embeds)
    w = out.norm_sq()
    if w > 0:
        out.normalize()
    return w, out


# ---------------------------------------------------------------------------
# measurement frames (irrep basis choices)


@dataclass
class MeasurementFrame:
    """Irrep matrices used for vertex measurements, with optional rotations.

    ``rotations`` maps an irrep label to a unitary U; the measurement then
    uses U R U^dag, i.e. internal states are reported in the rotated basis.
    """

    rotations: dict[str, np.ndarray] = field(default_factory=dict)
    _cache: dict[int, list[Irrep]] = field(default_factory=dict, repr=False)

    def irreps(self, G: GroupTable) -> list[Irrep]:
        key = id(G)
        if key not in self._cache:
            reps = []
            for rep in irrep_matrices(G):
                U = self.rotations.get(rep.label)
                reps.append(rep if U is None else rep.rotated(U))
            self._cache[key] = reps
        return self._cache[key]


def s3_plus_frame() -> MeasurementFrame:
    """Measure the 2-dim S3 charge in the |1>+|2>, |1>-|2> internal basis."""
    H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
    return MeasurementFrame(rotations={"C": H})


DEFAULT_FRAME = MeasurementFrame()


# ---------------------------------------------------------------------------
# plaquette measurement


def flux_values(patch: Patch, p: int) -> np.ndarray:
    """Group-valued flux of plaquette p for every configuration in the support."""
    lat = patch.lattice
    state = patch.state
    G = patch.groups[lat.plaquettes[p].cycle[0][0]]
    flux = np.zeros(state.support, dtype=np.int64)
    for e, inverted in lat.plaquettes[p].cycle:
        Ge = patch.groups[e]
        if Ge is not G:
            raise AlphabetMismatch("plaquette spans edges with different groups")
        d = state.digits(patch.edge_reg(e))
        flux = G.mult[flux, G.inv[d] if inverted else d]
    return flux


def plaquette_measure(patch: Patch, p: int, rng: Rng) -> tuple[int, SparseState]:
    """Sample the group-valued flux m_p and project onto that flux sector."""
    state = patch.state
    G = patch.groups[patch.lattice.plaquettes[p].cycle[0][0]]
    flux = flux_values(patch, p)
    probs = np.zeros(G.order)
    np.add.at(probs, flux, np.abs(state.amps) ** 2)
    m_p = rng.choice(probs)
    mask = flux == m_p
    out = SparseState(state.sizes, state.keys[mask], state.amps[mask].copy(), canonical=True)
    out.normalize()
    return m_p, out


def plaquette_measure_ancilla(patch: Patch, p: int, rng: Rng) -> tuple[int, SparseState]:
    """Reference path: ancilla at |1>, controlled multiplications, group-basis readout."""
    lat = patch.lattice
    G = patch.groups[lat.plaquettes[p].cycle[0][0]]
    state = patch.state.add_register(G.order, np.eye(G.order)[G.identity])
    anc = len(state.sizes) - 1
    for e, inverted in lat.plaquettes[p].cycle:
        # accumulate anc <- anc * g_e^(+/-1): control on the edge, target the ancilla
        ctrl_vals = G.inv[np.arange(G.order)] if inverted else np.arange(G.order)
        table = G.mult[:, ctrl_vals].T  # T[c, t] = t * c'
        state = state.apply_pair_table(patch.edge_reg(e), anc, table)
    m_p, state = state.measure(anc, rng)
    return m_p, state.remove_register(anc)


# ---------------------------------------------------------------------------
# vertex measurement


@dataclass
class VertexOutcome:
    label: str
    i: int
    j: int
    dim: int

    @property
    def trivial(self) -> bool:
        return self.dim == 1 and self.i == 0 and self.j == 0 and self.label in ("1", "A")

    def as_tuple(self) -> tuple[str, int, int]:
        return (self.label, self.i, self.j)


def vertex_outcome_list(G: GroupTable, frame: MeasurementFrame) -> list[VertexOutcome]:
    out = []
    for rep in frame.irreps(G):
        for i in range(rep.dim):
            for j in range(rep.dim):
                out.append(VertexOutcome(rep.label, i, j, rep.dim))
    return out


def vertex_measure(patch: Patch, v: int, rng: Rng,
                   vertex_group: GroupTable | None = None,
                   embeds: dict[int, np.ndarray] | None = None,
                   frame: MeasurementFrame = DEFAULT_FRAME) -> tuple[VertexOutcome, SparseState]:
    """Kraus-path vertex measurement; outcome labels an irrep matrix element."""
    Gv = vertex_group or patch.group()
    reps = frame.irreps(Gv)
    m = gauge_overlaps(patch, v, Gv, embeds)
    outcomes = []
    probs = []
    for rep in reps:
        # p(R, i, j) = (1/|G|) sum_u m(u) conj(R(u)_jj), independent of i
        pj = np.einsum("u,ujj->j", m, np.conj(rep.matrices)).real / Gv.order
        for i in range(rep.dim):
            for j in range(rep.dim):
                outcomes.append((rep, i, j))
                probs.append(max(pj[j], 0.0))
    pick = rng.choice(np.array(probs))
    rep, i, j = outcomes[pick]
    coeffs = (np.sqrt(rep.dim) / Gv.order) * np.conj(rep.matrices[:, i, j])
    out = _combine_gauge(patch, v, coeffs, Gv, embeds)
    out.normalize()
    return VertexOutcome(rep.label, i, j, rep.dim), out


def vertex_measure_ancilla(patch: Patch, v: int, rng: Rng,
                           vertex_group: GroupTable | None = None,
                           embeds: dict[int, np.ndarray] | None = None,
                           frame: MeasurementFrame = DEFAULT_FRAME) -> tuple[VertexOutcome, SparseState]:
    """Reference path: |+> ancilla, controlled group action, irrep-basis readout."""
    Gv = vertex_group or patch.group()
    n = Gv.order
    state = patch.state.add_register(n, np.full(n, 1.0 / np.sqrt(n), dtype=np.complex128))
    anc = len(state.sizes) - 1
    for e, outgoing in vertex_edge_roles(patch.lattice, v):
        Ge = patch.groups[e]
        emb = embeds[e] if embeds is not None and e in embeds else np.arange(n)
        ctrl_vals = np.asarray(emb)
        if outgoing:
            table = Ge.mult[ctrl_vals][:, :]  # T[c, t] = emb(c) * t
        else:
            table = Ge.mult[:, Ge.inv[ctrl_vals]].T  # T[c, t] = t * emb(c)^-1
        state = state.apply_pair_table(anc, patch.edge_reg(e), table)
    # rotate the ancilla into the irrep basis, then read it out
    cols = []
    outcome_labels = []
    for rep in frame.irreps(Gv):
        scale = np.sqrt(rep.dim / n)
        for i in range(rep.dim):
            for j in range(rep.dim):
                cols.append(scale * rep.matrices[:, i, j])
                outcome_labels.append(VertexOutcome(rep.label, i, j, rep.dim))
    U = np.stack(cols, axis=1)  # columns are |R; i, j>
    state = _rotate_register(state, anc, U.conj().T)
    pick, state = state.measure(anc, rng)
    out = outcome_labels[pick]
    return out, state.remove_register(anc)


def _rotate_register(state: SparseState, reg: int, M: np.ndarray) -> SparseState:
    """Apply a dense unitary M to one register of a sparse state."""
    size = state.sizes[reg]
    stride = state.strides[reg]
    digit = state.digits(reg)
    residual = state.keys - digit * stride
    uniq, inv = np.unique(residual, return_inverse=True)
    block = np.zeros((len(uniq), size), dtype=np.complex128)
    block[inv, digit] = state.amps
    block = block @ M.T  # new_amp[r, a] = sum_b M[a, b] old[r, b]
    rr, aa = np.nonzero(np.abs(block) > 1e-15)
    keys = uniq[rr] + aa * stride
    return SparseState(state.sizes, keys, block[rr, aa])


# ---------------------------------------------------------------------------
# detection rounds


@dataclass
class SyndromeRecord:
    round_index: int
    plaquette_outcomes: dict[int, int] = field(default_factory=dict)
    vertex_outcomes: dict[int, tuple[str, int, int]] = field(default_factory=dict)
    policy: str = "sample"

    def nontrivial(self, G: GroupTable) -> bool:
        if any(m != G.identity for m in self.plaquette_outcomes.values()):
            return True
        return any(not _is_trivial_label(o) for o in self.vertex_outcomes.values())

    def export_json(self) -> dict:
        return {
            "round": self.round_index,
            "plaquettes": {str(k): int(v) for k, v in self.plaquette_outcomes.items()},
            "vertices": {str(k): list(v) for k, v in self.vertex_outcomes.items()},
            "policy": self.policy,
        }


def _is_trivial_label(outcome: tuple[str, int, int]) -> bool:
    return outcome[0] in ("1", "A") and outcome[1] == 0 and outcome[2] == 0


def detection_round(patch: Patch, rng: Rng, policy: str = "sample",
                    round_index: int = 0, frame: MeasurementFrame = DEFAULT_FRAME) -> tuple[SyndromeRecord, SparseState]:
    """All plaquettes then all vertices, fixed raster order."""
    assert policy in ("sample", "postselect_trivial")
    record = SyndromeRecord(round_index=round_index, policy=policy)
    G = patch.group()
    state = patch.state
    for p in range(patch.lattice.n_plaquettes):
        live = Patch(patch.lattice, patch.groups, state, patch.reg0)
        m_p, state = plaquette_measure(live, p, rng)
        record.plaquette_outcomes[p] = m_p
        if policy == "postselect_trivial" and m_p != G.identity:
            raise PostselectionFailed(f"plaquette {p} outcome {G.names[m_p]}", record)
    for v in range(patch.lattice.n_vertices):
        live = Patch(patch.lattice, patch.groups, state, patch.reg0)
        outcome, state = vertex_measure(live, v, rng, frame=frame)
        record.vertex_outcomes[v] = outcome.as_tuple()
        if policy == "postselect_trivial" and not outcome.trivial:
            raise PostselectionFailed(f"vertex {v} outcome {outcome.as_tuple()}", record)
    return record, state


# ---------------------------------------------------------------------------
# movement


_DIRECTIONS = ("left", "right", "up", "down")


def _shared_edge(lat: Lattice, p: int, direction: str) -> tuple[int, int | None]:
    """(edge to act on, destination plaquette or None for a smooth exit)."""
    pl = lat.plaquettes[p]
    j, k = pl.row, pl.col
    if direction == "up":
        edge = lat.h_edge(j + 1, k)
        dest = lat.plaquette(j + 1, k).index if j + 1 <= lat.vy - 2 else None
    elif direction == "down":
        edge = lat.h_edge(j, k)
        dest = lat.plaquette(j - 1, k).index if j - 1 >= 0 else None
    elif direction == "right":
        if k == lat.vx:
            raise BoundaryBlocked("flux cannot exit through the right rough boundary")
        edge = lat.v_edge(j, k)
        dest = lat.plaquette(j, k + 1).index
    elif direction == "left":
        if k == 0:
            raise BoundaryBlocked("flux cannot exit through the left rough boundary")
        edge = lat.v_edge(j, k - 1)
        dest = lat.plaquette(j, k - 1).index
    else:
        raise ValueError(f"direction must be one of {_DIRECTIONS}")
    return edge, dest


def move_flux(patch: Patch, p: int, direction: str, m_p: int) -> tuple[SparseState, int | None]:
    """Deterministically move the flux m_p off plaquette p toward `direction`.

    Acts on the shared edge with the feedforward multiplication conjugated
    by the partial cycle product, so the source plaquette flux becomes the
    identity; the destination (None if the flux exits through a smooth
    boundary) picks up a flux in the class of m_p.
    """
    lat = patch.lattice
    G = patch.group()
    state = patch.state
    edge, dest = _shared_edge(lat, p, direction)
    if m_p == G.identity:
        return state, dest
    cycle = lat.plaquettes[p].cycle
    pos = [e for e, _ in cycle].index(edge)
    prefix = np.zeros(state.support, dtype=np.int64)
    for e, inverted in cycle[:pos]:
        d = state.digits(patch.edge_reg(e))
        prefix = G.mult[prefix, G.inv[d] if inverted else d]
    inverted = cycle[pos][1]
    factor = G.mult[G.inv[prefix], G.mult[G.invert(m_p) if not inverted else m_p, prefix]]
    d = state.digits(patch.edge_reg(edge))
    new_d = G.mult[factor, d] if not inverted else G.mult[d, factor]
    return state.rekey(patch.edge_reg(edge), new_d), dest


@dataclass
class MoveReport:
    attempts: list[dict] = field(default_factory=list)
    success: bool = False
    final_outcome: tuple[str, int, int] | None = None

    def export_json(self) -> dict:
        return {"attempts": self.attempts, "success": self.success, "final": self.final_outcome}


def _direction_edge_from_vertex(lat: Lattice, v: int, direction: str) -> int:
    r, c = divmod(v, lat.vx)
    if direction == "left":
        return lat.h_edge(r, c)
    if direction == "right":
        return lat.h_edge(r, c + 1)
    if direction == "up":
        if r == lat.vy - 1:
            raise BoundaryBlocked("no vertex above the top smooth boundary")
        return lat.v_edge(r, c)
    if direction == "down":
        if r == 0:
            raise BoundaryBlocked("no vertex below the bottom smooth boundary")
        return lat.v_edge(r - 1, c)
    raise ValueError(f"direction must be one of {_DIRECTIONS}")


def _vacuum_column(G: GroupTable, rep: Irrep):
    """Trivial-irrep channel of rep (x) rep, reshaped to (d, d)."""
    from gsclab.reptheory import clebsch_gordan

    fd = clebsch_gordan(G, rep, rep)
    cols = [m for m, (lab, _, _) in enumerate(fd.column_index) if lab in ("1", "A")]
    if not cols:
        return None
    return fd.cg[:, cols[0]].reshape(rep.dim, rep.dim)


def charge_move_success_probability(G: GroupTable, frame: MeasurementFrame,
                                    label: str, internal: int, source_index: int) -> float:
    """CG-weight oracle: per-attempt vacuum probability at the source vertex.

    The source fuses |internal> with the ribbon end |source_index> through
    the trivial channel of R (x) R; the success probability is the squared
    vacuum amplitude.
    """
    rep = {r.label: r for r in frame.irreps(G)}[label]
    vac = _vacuum_column(G, rep)
    if vac is None:
        return 0.0
    return float(abs(vac[internal, source_index]) ** 2)


def move_charge(patch: Patch, v: int, direction: str, last_outcome: VertexOutcome,
                rng: Rng, strategy: str = "internal_match", max_attempts: int = 64,
                frame: MeasurementFrame = DEFAULT_FRAME,
                vertex_group: GroupTable | None = None,
                embeds: dict[int, np.ndarray] | None = None,
                fixed_indices: tuple[int, int] | None = None) -> tuple[SparseState, MoveReport]:
    """Repeat-until-success charge movement by diagonal feedforward.

    Applies Z^{conj(R')_{i'j'}} on the edge toward `direction` (R' the dual
    of the measured irrep), re-measures the source vertex, and succeeds
    when the source reads trivial. The index facing the source vertex
    fuses with the measured internal state via the vacuum channel of
    R (x) R. Strategies: ``internal_match`` (pick the index with the
    largest vacuum amplitude; in the S3 plus-basis frame this also
    suppresses B byproducts), ``uniform_random``, and ``fixed``.
    """
    Gv = vertex_group or patch.group()
    reps = {r.label: r for r in frame.irreps(Gv)}
    report = MoveReport()
    state = patch.state
    outcome = last_outcome
    edge = _direction_edge_from_vertex(patch.lattice, v, direction)
    outgoing = patch.lattice.edges[edge].tail == v
    for attempt in range(max_attempts):
        if outcome.trivial:
            report.success = True
            break
        rep = reps[outcome.label]
        if strategy == "fixed":
            i_r, j_r = fixed_indices if fixed_indices is not None else (0, 0)
        elif strategy == "uniform_random":
            i_r, j_r = rng.integers(0, rep.dim), rng.integers(0, rep.dim)
        elif strategy == "internal_match":
            vac = _vacuum_column(Gv, rep)
            if vac is None:
                src = outcome.i
            else:
                src = int(np.argmax(np.abs(vac[outcome.i])))
            i_r, j_r = src, src
        else:
            raise ValueError(f"unknown strategy {strategy!r}")
        # source-side slot: j on incoming edges (plain matrix elements),
        # i on outgoing edges (conjugated); both fuse as R (x) R at the source
        if outgoing:
            weights = np.conj(rep.matrices[:, i_r, j_r])
        else:
            weights = rep.matrices[:, i_r, j_r]
        live = Patch(patch.lattice, patch.groups, state, patch.reg0)
        attempted = live.state.apply_weights(patch.edge_reg(edge), weights)
        if attempted.norm_sq() < 1e-20:
            report.attempts.append(
                {"attempt": attempt, "indices": [int(i_r), int(j_r)], "outcome": "annihilated"}
            )
            continue
        attempted.normalize()
        live = Patch(patch.lattice, patch.groups, attempted, patch.reg0)
        outcome, state = vertex_measure(live, v, rng, vertex_group=Gv, embeds=embeds, frame=frame)
        report.attempts.append(
            {"attempt": attempt, "indices": [int(i_r), int(j_r)], "outcome": list(outcome.as_tuple())}
        )
        if outcome.trivial:
            report.success = True
            break
    report.final_outcome = outcome.as_tuple()
    if not report.success:
        raise MaxAttemptsExceeded(f"charge still present after {max_attempts} attempts", report)
    return state, report


# ---------------------------------------------------------------------------
# dense oracle


def code_projector_oracle(G: GroupTable, lat: Lattice, cap: int = 200_000) -> np.ndarray:
    """Dense product of all B_p and A_v^G projectors (test oracle)."""
    n = lat.n_edges
    total = G.order**n
    if total > cap:
        raise CapExceeded(f"dense oracle needs {total} > cap {cap} basis states")
    digits = np.arange(total, dtype=np.int64)
    cols = [((digits // G.order ** (n - 1 - e)) % G.order) for e in range(n)]
    mask = np.ones(total, dtype=bool)
    for p in lat.plaquettes:
        flux = np.zeros(total, dtype=np.int64)
        for e, inverted in p.cycle:
            val = G.inv[cols[e]] if inverted else cols[e]
            flux = G.mult[flux, val]
        mask &= flux == G.identity
    proj = np.diag(mask.astype(np.complex128))
    for v in range(lat.n_vertices):
        A = np.zeros((total, total), dtype=np.complex128)
        for g in range(G.order):
            newcols = list(cols)
            for e in lat.out_edges[v]:
                newcols[e] = G.mult[g, cols[e]]
            for e in lat.in_edges[v]:
                newcols[e] = G.mult[cols[e], G.invert(g)]
            newkeys = np.zeros(total, dtype=np.int64)
            for e in range(n):
                newkeys += newcols[e] * G.order ** (n - 1 - e)
            A[newkeys, digits] += 1.0 / G.order
        proj = A @ proj
    return proj
