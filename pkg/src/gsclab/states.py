"""Sparse amplitude maps over mixed-radix registers, numpy-backed.

A state is a sorted array of packed keys with complex amplitudes; each
register (lattice edge, or a temporary ancilla) contributes one mixed-radix
digit. All operations are vectorized and leave the state in a canonical
sorted, pruned form, which makes runs bitwise reproducible for a fixed
seed and operation order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gsclab.errors import ZeroWeight

PRUNE_TOL = 1e-14


@dataclass
class Rng:
    """Deterministic random stream: same seed + draw order -> same outcomes."""

    seed: int
    counter: int = 0

    def __post_init__(self):
        self._gen = np.random.default_rng(np.random.SeedSequence(self.seed))

    def choice(self, probs: np.ndarray) -> int:
        self.counter += 1
        p = np.clip(probs.real, 0.0, None)
        p = p / p.sum()
        return int(self._gen.choice(len(p), p=p))

    def integers(self, low: int, high: int) -> int:
        self.counter += 1
        return int(self._gen.integers(low, high))

    def spawn(self, index: int) -> "Rng":
        return Rng(seed=int(np.random.SeedSequence(entropy=self.seed, spawn_key=(index,)).entropy) % (2**63))


def _strides(sizes: tuple[int, ...]) -> np.ndarray:
    s = np.ones(len(sizes), dtype=np.int64)
    for i in range(len(sizes) - 2, -1, -1):
        s[i] = s[i + 1] * sizes[i + 1]
    return s


class SparseState:
    """Sparse complex vector over a tensor product of finite registers."""

    __slots__ = ("sizes", "strides", "keys", "amps")

    def __init__(self, sizes, keys, amps, canonical: bool = False):
        self.sizes = tuple(int(s) for s in sizes)
        self.strides = _strides(self.sizes)
        self.keys = np.asarray(keys, dtype=np.int64)
        self.amps = np.asarray(amps, dtype=np.complex128)
        if not canonical:
            self._canonicalize()

    # -- construction ------------------------------------------------------

    @staticmethod
    def basis_state(sizes, values) -> "SparseState":
        key = 0
        strides = _strides(tuple(sizes))
        for v, st in zip(values, strides):
            key += int(v) * int(st)
        return SparseState(sizes, np.array([key]), np.array([1.0 + 0j]), canonical=True)

    @staticmethod
    def uniform(sizes, keys) -> "SparseState":
        n = len(keys)
        return SparseState(sizes, np.asarray(keys), np.full(n, 1.0 / np.sqrt(n), dtype=np.complex128))

    def copy(self) -> "SparseState":
        return SparseState(self.sizes, self.keys.copy(), self.amps.copy(), canonical=True)

    # -- bookkeeping ---------------------------------------------------------

    def _canonicalize(self) -> None:
        if len(self.keys) == 0:
            return
        uniq, inverse = np.unique(self.keys, return_inverse=True)
        merged = np.zeros(len(uniq), dtype=np.complex128)
        np.add.at(merged, inverse, self.amps)
        keep = np.abs(merged) > PRUNE_TOL
        self.keys = uniq[keep]
        self.amps = merged[keep]

    @property
    def support(self) -> int:
        return len(self.keys)

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))

    def normalize(self) -> float:
        """Normalize in place; returns the pre-normalization weight."""
        w = self.norm_sq()
        if w < PRUNE_TOL**2:
            raise ZeroWeight("state weight vanished")
        self.amps = self.amps / np.sqrt(w)
        return w

    def inner(self, other: "SparseState") -> complex:
        """<self|other> on the common support."""
        idx = np.searchsorted(self.keys, other.keys)
        idx_c = np.clip(idx, 0, len(self.keys) - 1)
        hit = np.zeros(len(other.keys), dtype=bool)
        if len(self.keys):
            hit = self.keys[idx_c] == other.keys
        return complex(np.sum(np.conj(self.amps[idx_c[hit]]) * other.amps[hit]))

    def digits(self, reg: int) -> np.ndarray:
        return (self.keys // self.strides[reg]) % self.sizes[reg]

    def rekey(self, reg: int, new_digits: np.ndarray) -> "SparseState":
        delta = (new_digits.astype(np.int64) - self.digits(reg)) * self.strides[reg]
        return SparseState(self.sizes, self.keys + delta, self.amps.copy())

    # -- unitary-ish register operations --------------------------------------

    def apply_perm(self, reg: int, perm: np.ndarray) -> "SparseState":
        """Permute register values: |v> -> |perm[v]>."""
        return self.rekey(reg, np.asarray(perm, dtype=np.int64)[self.digits(reg)])

    def apply_pair_table(self, ctrl: int, targ: int, table: np.ndarray) -> "SparseState":
        """|c, t> -> |c, table[c, t]>; table rows must be permutations."""
        new_t = np.asarray(table, dtype=np.int64)[self.digits(ctrl), self.digits(targ)]
        return self.rekey(targ, new_t)

    def apply_weights(self, reg: int, weights: np.ndarray) -> "SparseState":
        """Diagonal operator sum_v weights[v] |v><v|; may be non-unitary."""
        out = SparseState(self.sizes, self.keys.copy(), self.amps * np.asarray(weights)[self.digits(reg)])
        return out

    # -- measurement -----------------------------------------------------------

    def marginal(self, reg: int) -> np.ndarray:
        probs = np.zeros(self.sizes[reg])
        np.add.at(probs, self.digits(reg), np.abs(self.amps) ** 2)
        return probs

    def measure(self, reg: int, rng: Rng) -> tuple[int, "SparseState"]:
        probs = self.marginal(reg)
        outcome = rng.choice(probs)
        _, state = self.project(reg, outcome)
        return outcome, state

    def project(self, reg: int, value: int) -> tuple[float, "SparseState"]:
        mask = self.digits(reg) == value
        out = SparseState(self.sizes, self.keys[mask], self.amps[mask].copy(), canonical=True)
        w = out.normalize()
        return w, out

    def measure_classified(self, reg: int, classes: np.ndarray, rng: Rng) -> tuple[int, "SparseState"]:
        """Partial measurement: project onto {v : classes[v] == outcome}."""
        classes = np.asarray(classes, dtype=np.int64)
        d = self.digits(reg)
        probs = np.zeros(int(classes.max()) + 1)
        np.add.at(probs, classes[d], np.abs(self.amps) ** 2)
        outcome = rng.choice(probs)
        mask = classes[d] == outcome
        out = SparseState(self.sizes, self.keys[mask], self.amps[mask].copy(), canonical=True)
        out.normalize()
        return outcome, out

    # -- register surgery ------------------------------------------------------

    def add_register(self, size: int, amplitudes: np.ndarray) -> "SparseState":
        """Append a register in the given (possibly sparse) single-register state."""
        vec = np.asarray(amplitudes, dtype=np.complex128)
        nz = np.nonzero(np.abs(vec) > PRUNE_TOL)[0]
        new_sizes = self.sizes + (int(size),)
        keys = (self.keys[:, None] * size + nz[None, :]).ravel()
        amps = (self.amps[:, None] * vec[nz][None, :]).ravel()
        return SparseState(new_sizes, keys, amps)

    def remove_register(self, reg: int) -> "SparseState":
        """Drop a register whose value is constant across the support."""
        d = self.digits(reg)
        if len(d) and (d != d[0]).any():
            raise ValueError("register not constant; measure it first")
        hi = self.keys // (self.strides[reg] * self.sizes[reg])
        lo = self.keys % self.strides[reg]
        new_sizes = self.sizes[:reg] + self.sizes[reg + 1 :]
        keys = hi * self.strides[reg] + lo
        return SparseState(new_sizes, keys, self.amps.copy())

    def relabel_register(self, reg: int, value_map: np.ndarray, new_size: int) -> "SparseState":
        """Injective value relabeling, possibly changing the register size."""
        cols = [self.digits(i) for i in range(len(self.sizes))]
        cols[reg] = np.asarray(value_map, dtype=np.int64)[cols[reg]]
        new_sizes = list(self.sizes)
        new_sizes[reg] = int(new_size)
        return SparseState.from_columns(new_sizes, cols, self.amps.copy())

    def split_register(self, reg: int, part_a: np.ndarray, part_b: np.ndarray, size_a: int, size_b: int) -> "SparseState":
        """Replace register `reg` by two registers via value maps v -> (a, b)."""
        cols = [self.digits(i) for i in range(len(self.sizes))]
        v = cols[reg]
        cols = cols[:reg] + [np.asarray(part_a)[v], np.asarray(part_b)[v]] + cols[reg + 1 :]
        new_sizes = list(self.sizes[:reg]) + [int(size_a), int(size_b)] + list(self.sizes[reg + 1 :])
        return SparseState.from_columns(new_sizes, cols, self.amps.copy())

    def merge_registers(self, reg_a: int, reg_b: int, table: np.ndarray, new_size: int) -> "SparseState":
        """Fuse adjacent registers (a, b) -> table[a, b]; b must be reg_a + 1."""
        assert reg_b == reg_a + 1
        cols = [self.digits(i) for i in range(len(self.sizes))]
        fused = np.asarray(table, dtype=np.int64)[cols[reg_a], cols[reg_b]]
        cols = cols[:reg_a] + [fused] + cols[reg_b + 1 :]
        new_sizes = list(self.sizes[:reg_a]) + [int(new_size)] + list(self.sizes[reg_b + 1 :])
        return SparseState.from_columns(new_sizes, cols, self.amps.copy())

    def permute_registers(self, order: list[int]) -> "SparseState":
        cols = [self.digits(i) for i in order]
        new_sizes = [self.sizes[i] for i in order]
        return SparseState.from_columns(new_sizes, cols, self.amps.copy())

    @staticmethod
    def from_columns(sizes, columns, amps) -> "SparseState":
        strides = _strides(tuple(sizes))
        keys = np.zeros(len(amps), dtype=np.int64)
        for col, st in zip(columns, strides):
            keys += col.astype(np.int64) * st
        return SparseState(sizes, keys, amps)

    # -- dense interop (test oracles) -----------------------------------------

    def to_dense(self) -> np.ndarray:
        total = int(np.prod(self.sizes))
        out = np.zeros(total, dtype=np.complex128)
        out[self.keys] = self.amps
        return out

    @staticmethod
    def from_dense(sizes, vec: np.ndarray) -> "SparseState":
        keys = np.nonzero(np.abs(vec) > PRUNE_TOL)[0]
        return SparseState(sizes, keys, vec[keys])

    def __repr__(self):
        return f"SparseState(sizes={self.sizes}, support={self.support})"
