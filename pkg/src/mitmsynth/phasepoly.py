"""Phase polynomials of {CNOT, T} circuits and ancilla T-parallelization.

A {CNOT, T} circuit on n wires acts on basis states as
|x> -> w^t(x) |g(x)| with g an invertible GF(2) map and t a sum of linear
Boolean functionals, one per T gate.  Functionals are bitmasks over the
inputs (bit j = coefficient of x_j); GF(2) matrices are lists of row
masks.

Parallelization packs the T terms into stages: a stage of size s needs
s <= ancillas + rank(stage), realized by a CNOT network that places the
stage's functionals on distinct wires (basis members on data wires,
dependents and duplicates on ancillas), one parallel T layer, and an
uncompute.  Stage count is bounded by ceil(k / (ancillas + 1)).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .gates import (
    CTRL_CODE,
    Circuit,
    I_CODE,
    P_CODE,
    PDG_CODE,
    T_CODE,
    TDG_CODE,
    TGT_CODE,
    schedule,
)


@dataclass
class PhasePolynomial:
    n: int
    terms: list[int]  # functional masks, one per T gate (multiset)
    g: list[int]  # output map: wire w computes parity(g[w] & x)

    @property
    def t_count(self) -> int:
        return len(self.terms)


def extract(c: Circuit) -> PhasePolynomial:
    """Wire-state simulation over GF(2); only CNOT and T gates allowed."""
    rows = [1 << w for w in range(c.n_qubits)]
    terms: list[int] = []
    for name, wires in c.gate_list():
        if name == "CNOT":
            a, b = wires
            rows[b] ^= rows[a]
        elif name == "T":
            terms.append(rows[wires[0]])
        else:
            raise ValueError(f"phase-polynomial extraction allows CNOT and T only, got {name}")
    return PhasePolynomial(c.n_qubits, terms, rows)


def gf2_rank(masks) -> int:
    basis: list[int] = []
    for v in masks:
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
    return len(basis)


def _reduce(v: int, basis: list[int]) -> int:
    for b in basis:
        v = min(v, v ^ b)
    return v


def partition(terms, m: int, n: int) -> list[list[int]]:
    """Greedy stage partition under |stage| <= m + rank(stage).

    Insertion order: descending multiplicity, then ascending mask.  Every
    stage closed by a failed insertion has size >= m + 1, so the stage
    count respects ceil(k / (m + 1)); minimality is not guaranteed.
    """
    for f in terms:
        if f == 0:
            raise ValueError("zero functional cannot receive a T gate")
        if f >> n:
            raise ValueError("functional references inputs beyond width n")
    counts = Counter(terms)
    sequence: list[int] = []
    for mask, cnt in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])):
        sequence.extend([mask] * cnt)
    parts: list[list[int]] = []
    cur: list[int] = []
    basis: list[int] = []
    for f in sequence:
        r = _reduce(f, basis)
        if len(cur) + 1 <= m + len(basis) + (1 if r else 0):
            cur.append(f)
            if r:
                basis.append(r)
        else:
            parts.append(cur)
            cur = [f]
            basis = [_reduce(f, [])]
    if cur:
        parts.append(cur)
    return parts


def cnot_synth(rows: list[int], width: int | None = None) -> Circuit:
    """CNOT circuit whose basis action is |x> -> |Lx> for invertible L.

    `rows` are the row masks of L; Gauss-Jordan elimination is emitted in
    reverse as CNOT(a, b) = row_b ^= row_a operations.
    """
    width = width or len(rows)
    if len(rows) != width:
        raise ValueError("matrix must be square over the circuit width")
    work = list(rows)
    ops: list[tuple[int, int]] = []
    for col in range(width):
        pivot = next((r for r in range(col, width) if (work[r] >> col) & 1), None)
        if pivot is None:
            raise ValueError("matrix is singular over GF(2)")
        if pivot != col:
            # Swap via three row additions.
            for a, b in ((pivot, col), (col, pivot), (pivot, col)):
                work[b] ^= work[a]
                ops.append((a, b))
        for r in range(width):
            if r != col and (work[r] >> col) & 1:
                work[r] ^= work[col]
                ops.append((col, r))
    assert work == [1 << w for w in range(width)]
    gates = [("CNOT", (a, b)) for a, b in reversed(ops)]
    return schedule(width, gates)


def _complete_to_invertible(cols_rows: list[int], width: int) -> list[int]:
    """Extend a full-column-rank row set with unit columns to invertibility.

    `cols_rows` holds the matrix as row masks over `ncols` columns; returns
    row masks of a square invertible matrix whose leading columns are the
    input.
    """
    ncols = 0
    for r in cols_rows:
        ncols = max(ncols, r.bit_length())
    rows = list(cols_rows)
    col_vecs = []
    for c in range(ncols):
        col_vecs.append(sum(((rows[w] >> c) & 1) << w for w in range(width)))
    basis: list[int] = []
    rank = 0
    for v in col_vecs:
        red = _reduce(v, basis)
        if red:
            basis.append(red)
            rank += 1
    next_col = ncols
    for j in range(width):
        if rank == width:
            break
        cand = 1 << j
        red = _reduce(cand, basis)
        if red:
            basis.append(red)
            rank += 1
            for w in range(width):
                if (cand >> w) & 1:
                    rows[w] |= 1 << next_col
            next_col += 1
    if rank != width or next_col != width:
        raise AssertionError("column completion failed")
    return rows


def synthesize(pp: PhasePolynomial, m: int, merge_phases: bool = False) -> Circuit:
    """Circuit on n + m wires realizing the phase polynomial.

    Ancillas (the last m wires) start and end at |0>; with merge_phases,
    repeated functionals collapse to powers of T emitted as P/Z/T
    combinations on one wire, changing the output gate set.
    """
    n = pp.n
    width = n + m
    if merge_phases:
        counts = Counter(pp.terms)
        stage_terms = [t for t, c in counts.items() if c % 8]
        powers = {t: c % 8 for t, c in counts.items() if c % 8}
        parts = partition(stage_terms, m, n) if stage_terms else []
    else:
        powers = None
        parts = partition(pp.terms, m, n) if pp.terms else []

    layers: list[bytes] = []
    for part in parts:
        basis: list[int] = []
        basis_members: list[int] = []
        dependents: list[int] = []
        for f in part:
            r = _reduce(f, basis)
            if r:
                basis.append(r)
                basis_members.append(f)
            else:
                dependents.append(f)
        if len(dependents) > m:
            raise AssertionError("stage violates the ancilla bound")
        rows = [0] * width
        for w, f in enumerate(basis_members):
            rows[w] = f
        fill_basis = list(basis)
        w = len(basis_members)
        for j in range(n):
            if w >= n:
                break
            red = _reduce(1 << j, fill_basis)
            if red:
                fill_basis.append(red)
                rows[w] = 1 << j
                w += 1
        if w != n:
            raise AssertionError("data-wire completion failed")
        for i, f in enumerate(dependents):
            rows[n + i] = f
        t_matrix = _complete_to_invertible(rows, width)
        network = cnot_synth(t_matrix, width)
        t_wires = list(range(len(basis_members))) + [n + i for i in range(len(dependents))]
        wire_fn = basis_members + dependents
        wire_power = {
            wq: (powers[f] if merge_phases else 1) for wq, f in zip(t_wires, wire_fn)
        }
        layers.extend(network.layers)
        layers.extend(_phase_stage_layers(width, wire_power))
        layers.extend(network.inverse().layers)
    final = [0] * width
    for wq in range(n):
        final[wq] = pp.g[wq]
    for i in range(m):
        final[n + i] = 1 << (n + i)
    layers.extend(cnot_synth(final, width).layers)
    return Circuit(width, tuple(layers), n_ancillas=m)


def _phase_stage_layers(width: int, wire_power: dict[int, int]) -> list[bytes]:
    """Explicit layers for one parallel phase stage; all T gates share the
    final layer so the stage contributes T-depth at most 1."""
    per_wire: dict[int, list[int]] = {}
    for wq, power in wire_power.items():
        p = power % 8
        seq: list[int] = []
        if p >= 4:
            seq += [P_CODE, P_CODE]
            p -= 4
        if p >= 2:
            seq.append(P_CODE)
            p -= 2
        if p:
            seq.append(T_CODE)
        if seq:
            per_wire[wq] = seq
    if not per_wire:
        return []
    depth = max(len(s) for s in per_wire.values())
    out = []
    for d in range(depth):
        layer = bytearray(width)
        for wq, seq in per_wire.items():
            pos = d - (depth - len(seq))  # right-aligned so the T layer is shared
            if pos >= 0:
                layer[wq] = seq[pos]
        out.append(bytes(layer))
    return out


def parallelize(c: Circuit, m: int, merge_phases: bool = False) -> Circuit:
    """Rewrite a {CNOT, T} circuit with m ancillas to few parallel T stages."""
    return synthesize(extract(c), m, merge_phases=merge_phases)


def theorem_stage_bound(k: int, m: int) -> int:
    return -(-k // (m + 1)) if k else 0


_MONOMIAL_PHASE = {T_CODE: 1, TDG_CODE: 7, P_CODE: 2, PDG_CODE: 6}


def monomial_action(c: Circuit) -> tuple[np.ndarray, np.ndarray]:
    """Basis permutation and w-exponents of a CNOT/T/P-family circuit.

    Independent of matrix evaluation; used as the cross-check oracle.
    """
    dim = 1 << c.n_qubits
    state = np.arange(dim)
    phase = np.zeros(dim, dtype=np.int64)
    for layer in c.layers:
        for w, byte in enumerate(layer):
            code = byte & 0x0F
            if code == I_CODE or code == TGT_CODE:
                continue
            bit = (state >> w) & 1
            if code == CTRL_CODE:
                t = (byte >> 4) - 1
                state = state ^ (bit << t)
            elif code in _MONOMIAL_PHASE:
                phase = (phase + _MONOMIAL_PHASE[code] * bit) % 8
            else:
                raise ValueError("circuit is not monomial (H present)")
    return state, phase
