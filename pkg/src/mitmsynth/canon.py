"""Canonical representatives of unitaries under relabeling, inversion, phase.

Phase is removed with the reference-element trick: multiply the matrix by
the conjugate of its first nonzero entry (row-major scan).  The result
stays inside the ring but is intentionally not magnitude-normalized, which
keeps every comparison exact.  The class representative is the
lexicographically least phase-normalized variant over all qubit
relabelings, optionally combined with inversion; enumeration order is
non-inverted first, permutations in lexicographic order, first minimum
wins.

`CanonContext` provides the batched version used by database generation
and search probing: it resolves the lex-minimum variant in stages (first
entry, then one row at a time) so that full per-entry normalization only
runs for surviving variants, and digests the winner into a 128-bit key.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import kernels
from .gates import Circuit
from .matrix import RingMatrix, permutation_indices
from .ring import RingScalar


@dataclass(frozen=True)
class ClassTransform:
    """(perm, inverted) mapping a unitary onto its class representative.

    `phase` is a reserved slot for aligning two unitary members of one
    class by a power of w; canonical_rep itself always records 0 since the
    representative is defined through phase normalization.
    """

    perm: tuple[int, ...]
    inverted: bool = False
    phase: int = 0

    @staticmethod
    def identity(n: int) -> "ClassTransform":
        return ClassTransform(tuple(range(n)), False, 0)


def first_nonzero_entry(U: RingMatrix) -> RingScalar:
    nz = (U.comps != 0).any(axis=0).reshape(-1)
    pos = np.nonzero(nz)[0]
    if len(pos) == 0:
        raise ValueError("all-zero matrix has no reference element")
    r, c = divmod(int(pos[0]), U.dim)
    return U.entry(r, c)


def phase_normalize(U: RingMatrix) -> RingMatrix:
    """conj(m0) * U for the first nonzero entry m0; phase-class invariant."""
    m0 = first_nonzero_entry(U)
    s = m0.conj()
    comps = kernels.scalar_mat_mul(
        np.array([s.num.a, s.num.b, s.num.c, s.num.d], dtype=np.int64), U.comps
    )
    return RingMatrix(U.n_qubits, comps, U.k + s.sde)


def variant_matrix(U: RingMatrix, perm, inverted: bool) -> RingMatrix:
    """permute(adjoint^inverted(U), perm); matches apply_transform on circuits."""
    V = U.adjoint() if inverted else U
    return V.permute_qubits(perm)


def class_variants(n: int) -> list[tuple[tuple[int, ...], bool]]:
    perms = list(itertools.permutations(range(n)))
    return [(p, False) for p in perms] + [(p, True) for p in perms]


def canonical_rep(U: RingMatrix) -> tuple[RingMatrix, ClassTransform]:
    """Lex-least phase-normalized variant and the transform producing it."""
    best = None
    best_t = None
    for perm, inv in class_variants(U.n_qubits):
        cand = phase_normalize(variant_matrix(U, perm, inv))
        if best is None or cand.lex_cmp(best) < 0:
            best = cand
            best_t = ClassTransform(perm, inv, 0)
    return best, best_t


def apply_transform(c: Circuit, t: ClassTransform) -> Circuit:
    """Relabel then (if flagged) invert; preserves depth."""
    out = c.relabel(t.perm)
    if t.inverted:
        out = out.inverse()
    return out


# (H Pdg)^3 applied after a circuit multiplies its unitary by w^-1.
_PHASE_FIX_GATES = [("PDG", (0,)), ("H", (0,)), ("PDG", (0,)), ("H", (0,)), ("PDG", (0,)), ("H", (0,))]


def exact_phase_fix(c: Circuit, j: int) -> Circuit:
    """Append j copies of the 6-gate identity-up-to-phase sequence on wire 0.

    The result implements w^-j times the original unitary, so passing the
    phase exponent of a search witness yields an exactly phase-1 circuit.
    """
    from .gates import schedule

    j %= 8
    if j == 0:
        return c
    fix = schedule(c.n_qubits, _PHASE_FIX_GATES * j)
    return c.concat(fix)


def phase_between(a: RingMatrix, b: RingMatrix) -> int | None:
    """Exponent j with a = w^j * b, or None; both matrices exact."""
    for j in range(8):
        if a == b.scale_phase(j):
            return j
    return None


class CanonContext:
    """Batched canonical keys for matrices carried as shared-exponent blocks."""

    def __init__(self, n: int, classed: bool = True):
        self.n = n
        dim = 1 << n
        self.dim = dim
        self.variants = class_variants(n) if classed else [(tuple(range(n)), False)]
        V = len(self.variants)
        self.n_variants = V
        self.inv_flags = np.array([1 if inv else 0 for _, inv in self.variants], dtype=np.int64)
        # Gather maps: variant flat entry p reads source flat entry idx[v, p],
        # from the conjugated plane when the variant includes inversion.
        self.idx = np.zeros((V, dim * dim), dtype=np.int64)
        for vi, (perm, inv) in enumerate(self.variants):
            gather = permutation_indices(n, perm)
            rows = np.repeat(gather, dim)
            cols = np.tile(gather, dim)
            if inv:
                self.idx[vi] = cols * dim + rows
            else:
                self.idx[vi] = rows * dim + cols

    def keys(self, comps: np.ndarray, k: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Canonical 128-bit keys and winning variant index per matrix.

        comps: (B, 4, N, N) int64, k: (B,) shared exponents.
        """
        B = comps.shape[0]
        dim = self.dim
        nsq = dim * dim
        V = self.n_variants
        flat = comps.reshape(B, 4, nsq)
        # cc[b, f] is the component row for plain (f=0) / conjugated (f=1) entries.
        cc = np.stack([flat, kernels.conj_comps(flat, axis=1)], axis=1)
        cc = np.moveaxis(cc, 2, 3)  # (B, 2, nsq, 4)

        nz = (flat != 0).any(axis=1)  # (B, nsq)
        if not nz.any(axis=1).all():
            raise ValueError("all-zero matrix in canonicalization batch")
        nz_v = nz[:, self.idx]  # (B, V, nsq)
        first_pos = np.argmax(nz_v, axis=2)  # (B, V)
        src0 = self.idx[np.arange(V)[None, :], first_pos]  # (B, V)
        bidx = np.arange(B)[:, None]
        fidx = self.inv_flags[None, :]
        m0 = cc[bidx, fidx, src0]  # (B, V, 4)
        m0c = kernels.conj_comps(m0, axis=-1)
        k2 = (2 * np.asarray(k, dtype=np.int64))[:, None]  # (B, 1)

        if V == 1:
            winner = np.zeros(B, dtype=np.int64)
        else:
            winner = self._resolve_lexmin(cc, m0c, k2)

        # Full normalization of the winning variant only.
        wsrc = self.idx[winner]  # (B, nsq)
        went = cc[np.arange(B)[:, None], self.inv_flags[winner][:, None], wsrc]  # (B, nsq, 4)
        wm0c = m0c[np.arange(B), winner]  # (B, 4)
        vals = kernels.scalar_mul(wm0c[:, None, :], went)  # (B, nsq, 4)
        sde, norm = kernels.normalize_entries(vals, k2)
        fields = np.concatenate([sde[:, :, None], norm], axis=2).reshape(B, nsq * 5)
        header = np.full((B, 1), self.n, dtype=np.int64)
        h1, h2 = kernels.digest_rows(np.concatenate([header, fields], axis=1))
        return kernels.make_keys(h1, h2), winner

    def _resolve_lexmin(self, cc, m0c, k2) -> np.ndarray:
        """Stage the variant comparison: a short first block, then row blocks."""
        B = cc.shape[0]
        dim = self.dim
        nsq = dim * dim
        V = self.n_variants
        bidx = np.arange(B)[:, None]
        fidx = self.inv_flags[None, :]

        big = np.iinfo(np.int64).max
        tied = np.ones((B, V), dtype=bool)
        pos = 0
        width = 4  # small first block; ties usually break within a few entries
        while pos < nsq:
            width = min(width, nsq - pos)
            multi = tied.sum(axis=1) > 1
            if not multi.any():
                break
            rows_c, rows_v = np.nonzero(tied & multi[:, None])
            src = self.idx[rows_v, pos : pos + width]  # (W, width)
            ent = cc[rows_c[:, None], self.inv_flags[rows_v][:, None], src]
            m = m0c[rows_c, rows_v][:, None, :]
            bl1, bl2 = self._entry_lanes(m, ent, k2[rows_c, 0, None])
            for col in range(width):
                for lane in (bl1[:, col], bl2[:, col]):
                    dense = np.full((B, V), big, dtype=np.int64)
                    dense[rows_c, rows_v] = lane
                    cur = np.where(tied, dense, big).min(axis=1, keepdims=True)
                    refined = tied & (dense == cur)
                    tied = np.where(multi[:, None], refined, tied)
            pos += width
            width = dim
        # First tied variant wins (enumeration order is fixed).
        return np.argmax(tied, axis=1)

    @staticmethod
    def _entry_lanes(m0c, entries, k2):
        vals = kernels.scalar_mul(m0c, entries)
        sde, norm = kernels.normalize_entries(vals, k2)
        return kernels.pack_entry_lanes(sde, norm)

    def transform(self, variant_index: int) -> ClassTransform:
        perm, inv = self.variants[int(variant_index)]
        return ClassTransform(perm, inv, 0)


def matrix_key(U: RingMatrix, classed: bool = True) -> np.ndarray:
    """Canonical class key of one matrix (structured uint64 pair)."""
    ctx = CanonContext(U.n_qubits, classed)
    keys, _ = ctx.keys(U.comps[None], np.array([U.k], dtype=np.int64))
    return keys[0]
