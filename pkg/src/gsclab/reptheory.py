"""Representation theory of finite groups over the complex numbers.

Character tables come from the Burnside-Dixon class-sum method with a
deterministic pseudo-random combination (seed 0xD1C50) so tables are
reproducible. Unitary irrep matrices are extracted from the regular
representation by twirling a random Hermitian inside each isotypic
component; any basis works for the simulator, except that the
two-dimensional irrep of S3 is pinned to the matrices

    C(r) = diag(w, w^2),  C(s) = [[0, 1], [1, 0]],  w = exp(2 pi i / 3),

because the internal-state bookkeeping of charge condensation quotes
those entries literally.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from gsclab.errors import CapExceeded, NumericalDegeneracy
from gsclab.groups import GroupTable, Subgroup, conjugacy_classes

TOL = 1e-10
_DIXON_SEED = 0xD1C50
IRREP_ORDER_CAP = 256


@dataclass
class CharacterTable:
    group: GroupTable
    classes: list[tuple[int, ...]]
    chars: np.ndarray  # (#irreps, #classes) complex
    dims: tuple[int, ...]
    labels: tuple[str, ...]

    def class_index(self) -> np.ndarray:
        """Map element -> conjugacy class index."""
        idx = np.empty(self.group.order, dtype=np.int64)
        for ci, cls in enumerate(self.classes):
            for g in cls:
                idx[g] = ci
        return idx

    def char_values(self, row: int) -> np.ndarray:
        """Character of irrep `row` as a length-|G| vector."""
        return self.chars[row][self.class_index()]

    def inner(self, values_a: np.ndarray, values_b: np.ndarray) -> complex:
        """(1/|G|) sum_g a(g) conj(b(g))."""
        return complex(np.vdot(values_b, values_a) / self.group.order)

    def export_json(self) -> dict:
        return {
            "order": self.group.order,
            "class_reps": [c[0] for c in self.classes],
            "class_sizes": [len(c) for c in self.classes],
            "labels": list(self.labels),
            "dims": list(self.dims),
            "chars": [[[z.real, z.imag] for z in row] for row in self.chars],
        }


@dataclass
class Irrep:
    label: str
    dim: int
    matrices: np.ndarray  # (|G|, d, d) complex unitary

    def mat(self, g: int) -> np.ndarray:
        return self.matrices[g]

    def character(self) -> np.ndarray:
        return np.einsum("gii->g", self.matrices)

    def conjugate(self) -> "Irrep":
        """The dual irrep realized by entrywise conjugation."""
        return Irrep(label=self.label + "*", dim=self.dim, matrices=self.matrices.conj())

    def rotated(self, U: np.ndarray) -> "Irrep":
        """Same irrep in the basis U: matrices U R U^dagger."""
        return Irrep(label=self.label, dim=self.dim, matrices=U @ self.matrices @ U.conj().T)


def _class_sum_matrices(G: GroupTable, classes) -> np.ndarray:
    k = len(classes)
    cls_idx = np.empty(G.order, dtype=np.int64)
    for ci, cls in enumerate(classes):
        for g in cls:
            cls_idx[g] = ci
    M = np.zeros((k, k, k), dtype=np.float64)  # M[i][j][l] = c_ijl
    for i, ci in enumerate(classes):
        for j, cj in enumerate(classes):
            prod = G.mult[np.ix_(list(ci), list(cj))].ravel()
            counts = np.bincount(cls_idx[prod], minlength=k).astype(np.float64)
            # c_ijl counts pairs mapping onto a FIXED element of class l
            M[i, j] = counts / np.array([len(classes[l]) for l in range(k)])
    return M


def character_table(G: GroupTable, seed: int = _DIXON_SEED, retries: int = 8) -> CharacterTable:
    """Burnside-Dixon character table via a random class-sum combination."""
    classes = conjugacy_classes(G)
    k = len(classes)
    sizes = np.array([len(c) for c in classes], dtype=np.float64)
    M = _class_sum_matrices(G, classes)
    rng = np.random.default_rng(seed)
    last_gap = 0.0
    for _ in range(retries):
        coeffs = rng.standard_normal(k)
        A = np.tensordot(coeffs, M, axes=(0, 0))  # A[j,l] = sum_i t_i c_ijl
        evals, evecs = np.linalg.eig(A)  # right eigenvectors: sum_l A[j,l] w_l = lam w_j
        if k > 1:
            dist = np.abs(evals[:, None] - evals[None, :]) + np.eye(k)
            gap = float(dist.min())
        else:
            gap = 1.0
        last_gap = max(last_gap, gap)
        if k > 1 and gap < 1e-7:
            continue
        chars = np.empty((k, k), dtype=np.complex128)
        dims = []
        ok = True
        for m in range(k):
            w = evecs[:, m]
            if abs(w[0]) < 1e-12:
                ok = False
                break
            w = w / w[0]  # identity class has omega = 1
            d_sq = G.order / np.sum(np.abs(w) ** 2 / sizes)
            d = int(round(np.sqrt(d_sq.real)))
            if d < 1 or abs(np.sqrt(d_sq.real) - d) > 1e-6:
                ok = False
                break
            dims.append(d)
            chars[m] = d * w / sizes
        if not ok:
            continue
        # trivial irrep first, then ascending dimension; deterministic tiebreak
        def sort_key(m):
            row = chars[m]
            trivial = np.allclose(row, 1.0, atol=1e-8)
            return (0 if trivial else 1, dims[m], np.round(row.real, 6).tolist(), np.round(row.imag, 6).tolist())

        perm = sorted(range(k), key=sort_key)
        chars = chars[perm]
        dims = [dims[m] for m in perm]
        table = CharacterTable(
            group=G,
            classes=classes,
            chars=chars,
            dims=tuple(dims),
            labels=_irrep_labels(G, dims),
            )
        if _orthogonality_ok(table, sizes):
            return table
    raise NumericalDegeneracy(f"character solver failed after {retries} tries (best gap {last_gap:.2e})")


def _irrep_labels(G: GroupTable, dims) -> tuple[str, ...]:
    # S3 keeps the paper's A/B/C names; otherwise chi0, chi1, ...
    if G.order == 6 and len(dims) == 3:
        return ("A", "B", "C")
    return tuple("1" if i == 0 else f"chi{i}" for i in range(len(dims)))


def _orthogonality_ok(table: CharacterTable, sizes: np.ndarray) -> bool:
    n = table.group.order
    weighted = table.chars * sizes
    gram = weighted @ table.chars.conj().T / n
    if not np.allclose(gram, np.eye(len(table.dims)), atol=TOL):
        return False
    return int(sum(d * d for d in table.dims)) == n


# ---------------------------------------------------------------------------
# irrep matrices


def _regular_rep_perm(G: GroupTable) -> np.ndarray:
    # Reg(g)|h> = |gh>; stored as index arrays rather than dense matrices
    return G.mult  # mult[g, h] = gh


def _s3_shape(G: GroupTable) -> tuple[int, int] | None:
    """Return (r, s) with r^3 = s^2 = 1, srs = r^2 if G is S3-shaped."""
    if G.order != 6:
        return None
    rs = [g for g in G.elements() if G.element_order(g) == 3]
    ss = [g for g in G.elements() if G.element_order(g) == 2]
    for r in rs:
        for s in ss:
            if G.conj(r, s) == G.mul(r, r):
                return r, s
    return None


def _s3_two_dim_irrep(G: GroupTable, r: int, s: int) -> np.ndarray:
    w = np.exp(2j * np.pi / 3)
    Cr = np.diag([w, w**2])
    Cs = np.array([[0, 1], [1, 0]], dtype=np.complex128)
    mats = np.zeros((6, 2, 2), dtype=np.complex128)
    seen = {}
    for q in range(3):
        for p in range(2):
            g = G.mul(pow_el(G, r, q), pow_el(G, s, p))
            seen[g] = np.linalg.matrix_power(Cr, q) @ np.linalg.matrix_power(Cs, p)
    for g in G.elements():
        mats[g] = seen[g]
    return mats


def pow_el(G: GroupTable, g: int, n: int) -> int:
    out = G.identity
    for _ in range(n):
        out = G.mul(out, g)
    return out


@lru_cache(maxsize=None)
def _irreps_cached(key):
    raise RuntimeError("placeholder, never called")


_IRREP_CACHE: dict[int, list[Irrep]] = {}
_CHAR_CACHE: dict[int, CharacterTable] = {}


def character_table_cached(G: GroupTable) -> CharacterTable:
    key = id(G)
    if key not in _CHAR_CACHE:
        _CHAR_CACHE[key] = character_table(G)
    return _CHAR_CACHE[key]


def irrep_matrices(G: GroupTable, cap: int = IRREP_ORDER_CAP, seed: int = _DIXON_SEED) -> list[Irrep]:
    """One unitary matrix irrep per character row (deterministic basis)."""
    key = id(G)
    if key in _IRREP_CACHE:
        return _IRREP_CACHE[key]
    if G.order > cap:
        raise CapExceeded(f"irrep matrices capped at order {cap}, got {G.order}")
    table = character_table_cached(G)
    cls_idx = table.class_index()
    rng = np.random.default_rng(seed ^ 0xABCD)
    n = G.order
    irreps: list[Irrep] = []
    s3 = _s3_shape(G)
    for row, (label, d) in enumerate(zip(table.labels, table.dims)):
        if d == 1:
            vals = table.chars[row][cls_idx]
            irreps.append(Irrep(label=label, dim=1, matrices=vals.reshape(n, 1, 1)))
            continue
        if s3 is not None and d == 2:
            irreps.append(Irrep(label=label, dim=2, matrices=_s3_two_dim_irrep(G, *s3)))
            continue
        chi = table.chars[row][cls_idx]
        # isotypic projector onto this irrep inside the regular representation
        P = np.zeros((n, n), dtype=np.complex128)
        for g in G.elements():
            P[G.mult[g], np.arange(n)] += (d / n) * np.conj(chi[g])
        H0 = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        H0 = H0 + H0.conj().T
        PH = P @ H0 @ P.conj().T
        # twirl so the operator commutes with the G-action
        T = np.zeros((n, n), dtype=np.complex128)
        for g in G.elements():
            perm = G.mult[g]
            T[np.ix_(perm, perm)] += PH
        T /= n
        T = (T + T.conj().T) / 2
        evals, evecs = np.linalg.eigh(T)
        # pick a nonzero eigenvalue whose eigenspace is a single irrep copy
        basis = None
        i = 0
        while i < n:
            lam = evals[i]
            j = i
            while j < n and abs(evals[j] - lam) < 1e-8:
                j += 1
            if abs(lam) > 1e-8 and j - i == d:
                basis = evecs[:, i:j]
                break
            i = j
        if basis is None:
            raise NumericalDegeneracy(f"no clean {d}-dim eigenspace for irrep {label}")
        mats = np.empty((n, d, d), dtype=np.complex128)
        for g in G.elements():
            Rg = np.zeros((n, n), dtype=np.complex128)
            Rg[G.mult[g], np.arange(n)] = 1.0
            mats[g] = basis.conj().T @ Rg @ basis
        # polar-unitarize to strip numerical dust
        for g in G.elements():
            u, _, vh = np.linalg.svd(mats[g])
            mats[g] = u @ vh
        irreps.append(Irrep(label=label, dim=d, matrices=mats))
    for rep, d in zip(irreps, table.dims):
        _check_irrep(G, rep, table.chars[irreps.index(rep)][cls_idx])
    _IRREP_CACHE[key] = irreps
    return irreps


def _check_irrep(G: GroupTable, rep: Irrep, chi: np.ndarray) -> None:
    mats = rep.matrices
    eye = np.eye(rep.dim)
    assert np.allclose(mats[G.identity], eye, atol=TOL)
    assert np.max(np.abs(np.einsum("gij,gkj->gik", mats, mats.conj()) - eye)) < TOL
    assert np.max(np.abs(np.einsum("gii->g", mats) - chi)) < 1e-8
    sample = np.random.default_rng(1).integers(0, G.order, size=(min(G.order**2, 2048), 2))
    a, b = sample[:, 0], sample[:, 1]
    assert np.max(np.abs(mats[G.mult[a, b]] - np.einsum("nij,njk->nik", mats[a], mats[b]))) < 1e-8


# ---------------------------------------------------------------------------
# irrep basis states


def irrep_basis_states(G: GroupTable) -> tuple[np.ndarray, list[tuple[str, int, int]]]:
    """Orthonormal vectors |R;i,j> = sqrt(d/|G|) sum_g R(g)_ij |g>.

    Returns (U, labels) where column m of U is the state labeled
    labels[m] = (irrep label, i, j); U is unitary by Schur orthogonality.
    """
    irreps = irrep_matrices(G)
    n = G.order
    cols = []
    labels = []
    for rep in irreps:
        scale = np.sqrt(rep.dim / n)
        for i in range(rep.dim):
            for j in range(rep.dim):
                cols.append(scale * rep.matrices[:, i, j])
                labels.append((rep.label, i, j))
    return np.stack(cols, axis=1), labels


# ---------------------------------------------------------------------------
# restriction / induction multiplicities


def _round_multiplicity(x: complex) -> int:
    n = int(round(x.real))
    if abs(x - n) > 1e-6:
        raise NumericalDegeneracy(f"multiplicity {x} is not an integer")
    return n


def restrict_multiplicities(G: GroupTable, H: Subgroup, rep_label: str) -> dict[str, int]:
    """Multiplicities of H-irreps in Res_H of a G-irrep, by character sums."""
    tG = character_table_cached(G)
    Htab = H.as_group_table()
    tH = character_table_cached(Htab)
    row = list(tG.labels).index(rep_label)
    chiG = tG.char_values(row)
    chi_on_H = np.array([chiG[g] for g in H.members])
    out = {}
    for hrow, hlabel in enumerate(tH.labels):
        chiH = tH.char_values(hrow)
        out[hlabel] = _round_multiplicity(np.vdot(chiH, chi_on_H) / H.order)
    total = sum(out[l] * d for l, d in zip(tH.labels, tH.dims))
    assert total == tG.dims[row]
    return out


def induced_trivial_multiplicities(G: GroupTable, H: Subgroup) -> dict[str, int]:
    """n_i = <Res(R_i), 1_H> for every G-irrep R_i (Frobenius reciprocity)."""
    tG = character_table_cached(G)
    out = {}
    for row, label in enumerate(tG.labels):
        chiG = tG.char_values(row)
        n_i = _round_multiplicity(sum(chiG[g] for g in H.members) / H.order)
        out[label] = n_i
    total = sum(out[l] * d for l, d in zip(tG.labels, tG.dims))
    assert total == G.order // H.order
    return out


def coset_permutation_character(G: GroupTable, H: Subgroup) -> np.ndarray:
    """Character of the G-action on left cosets gH (the Ind(1_H) character)."""
    members = set(H.members)
    # coset reps by greedy sweep
    reps = []
    assigned = set()
    for g in G.elements():
        if g not in assigned:
            reps.append(g)
            coset = {G.mul(g, h) for h in members}
            assigned |= coset
    chi = np.zeros(G.order, dtype=np.complex128)
    for x in G.elements():
        fixed = 0
        for t in reps:
            # x t H == t H  iff  t^-1 x t in H
            if G.mul(G.mul(G.invert(t), x), t) in members:
                fixed += 1
        chi[x] = fixed
    return chi


# ---------------------------------------------------------------------------
# isotypic projectors and Clebsch-Gordan


def isotypic_projector(rep_mats: np.ndarray, W: Irrep, alpha: int, beta: int, G: GroupTable) -> np.ndarray:
    """Pi^W_{alpha beta} = (d_W/|G|) sum_g conj(W(g)_{alpha beta}) R^V(g)."""
    coeffs = np.conj(W.matrices[:, alpha, beta]) * (W.dim / G.order)
    return np.einsum("g,gij->ij", coeffs, rep_mats)


@dataclass
class FusionDecomposition:
    """R1 (x) R2 = (+)_mu nu_mu R_mu with an explicit unitary CG basis."""

    labels: tuple[str, str]
    summands: list[tuple[str, int]]  # (irrep label, multiplicity), canonical order
    cg: np.ndarray  # (d1*d2, d1*d2) unitary; columns ordered (mu, nu, kappa)
    column_index: list[tuple[str, int, int]]  # (label, nu, kappa) per column

    def column(self, label: str, nu: int, kappa: int) -> np.ndarray:
        return self.cg[:, self.column_index.index((label, nu, kappa))]

    def vacuum_amplitude(self, vec: np.ndarray, trivial_label: str) -> complex:
        """Overlap of a product-internal state with the (unique) vacuum channel."""
        cols = [m for m, (lab, _, _) in enumerate(self.column_index) if lab == trivial_label]
        if not cols:
            return 0.0
        return complex(self.cg[:, cols[0]].conj() @ vec)

    def export_json(self) -> dict:
        return {
            "labels": list(self.labels),
            "summands": [[l, m] for l, m in self.summands],
            "layout": [[l, nu, kappa] for l, nu, kappa in self.column_index],
            "cg_flat": [[z.real, z.imag] for z in self.cg.T.ravel()],
        }


def clebsch_gordan(G: GroupTable, rep1: Irrep, rep2: Irrep) -> FusionDecomposition:
    """Decompose R1 (x) R2 by isotypic projectors; CG matrix is unitary."""
    irreps = irrep_matrices(G)
    prod = np.einsum("gij,gkl->gikjl", rep1.matrices, rep2.matrices).reshape(
        G.order, rep1.dim * rep2.dim, rep1.dim * rep2.dim
    )
    summands = []
    cols = []
    col_idx = []
    for W in irreps:
        P11 = isotypic_projector(prod, W, 0, 0, G)
        mult = _round_multiplicity(np.trace(P11))
        if mult == 0:
            continue
        summands.append((W.label, mult))
        # orthonormal basis of image(P11): the kappa=0 slots of each copy
        evals, evecs = np.linalg.eigh(P11 @ P11.conj().T)
        u = evecs[:, evals > 0.5]
        assert u.shape[1] == mult, (W.label, u.shape, mult)
        # re-project and orthonormalize for numerical hygiene
        u = P11 @ u
        u, _ = np.linalg.qr(u)
        for nu in range(mult):
            for kappa in range(W.dim):
                Pk1 = isotypic_projector(prod, W, kappa, 0, G)
                vec = Pk1 @ u[:, nu]
                cols.append(vec / np.linalg.norm(vec))
                col_idx.append((W.label, nu, kappa))
    cg = np.stack(cols, axis=1)
    dsum = sum(
        mult * next(r.dim for r in irreps if r.label == lab) for lab, mult in summands
    )
    assert dsum == rep1.dim * rep2.dim
    assert np.max(np.abs(cg.conj().T @ cg - np.eye(cg.shape[1]))) < 1e-9
    return FusionDecomposition(
        labels=(rep1.label, rep2.label), summands=summands, cg=cg, column_index=col_idx
    )
