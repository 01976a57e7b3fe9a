"""Instruction sets, depth-1 layers, and the layered circuit representation.

A layer is encoded as `n` bytes, one per qubit: low nibble holds the gate
code (0 I, 1 H, 2 P, 3 Pdg, 4 T, 5 Tdg, 6 CNOT-control, 7 CNOT-target) and
the high nibble holds partner index + 1 for the CNOT roles.  A circuit is a
list of layers applied in list order (index 0 first), so its unitary is
the reversed matrix product of the layer matrices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from .matrix import RingMatrix

I_CODE, H_CODE, P_CODE, PDG_CODE, T_CODE, TDG_CODE, CTRL_CODE, TGT_CODE = range(8)

GATE_NAMES = {
    I_CODE: "I",
    H_CODE: "H",
    P_CODE: "P",
    PDG_CODE: "PDG",
    T_CODE: "T",
    TDG_CODE: "TDG",
}
NAME_CODES = {v: k for k, v in GATE_NAMES.items()}

_INVERSE_CODE = {
    I_CODE: I_CODE,
    H_CODE: H_CODE,
    P_CODE: PDG_CODE,
    PDG_CODE: P_CODE,
    T_CODE: TDG_CODE,
    TDG_CODE: T_CODE,
}

# Single-qubit gate component tables: (plane, row, col) -> coefficient, with
# a per-gate sqrt2 denominator exponent.
_GATE_COMPS = {
    I_CODE: ({(0, 0, 0): 1, (0, 1, 1): 1}, 0),
    H_CODE: ({(0, 0, 0): 1, (0, 0, 1): 1, (0, 1, 0): 1, (0, 1, 1): -1}, 1),
    P_CODE: ({(0, 0, 0): 1, (2, 1, 1): 1}, 0),
    PDG_CODE: ({(0, 0, 0): 1, (2, 1, 1): -1}, 0),
    T_CODE: ({(0, 0, 0): 1, (1, 1, 1): 1}, 0),
    TDG_CODE: ({(0, 0, 0): 1, (3, 1, 1): -1}, 0),
}


def gate_matrix(code: int) -> RingMatrix:
    comps = np.zeros((4, 2, 2), dtype=np.int64)
    table, k = _GATE_COMPS[code]
    for (plane, r, c), v in table.items():
        comps[plane, r, c] = v
    return RingMatrix(1, comps, k, reduce=False)


@dataclass(frozen=True)
class GateSet:
    id: str
    single_codes: tuple[int, ...]
    has_cnot: bool = True

    @property
    def wire_id(self) -> int:
        return {"clifford_t": 0, "clifford": 1}[self.id]


CLIFFORD_T = GateSet("clifford_t", (I_CODE, H_CODE, P_CODE, PDG_CODE, T_CODE, TDG_CODE))
CLIFFORD_ONLY = GateSet("clifford", (I_CODE, H_CODE, P_CODE, PDG_CODE))

GATE_SETS = {gs.id: gs for gs in (CLIFFORD_T, CLIFFORD_ONLY)}
GATE_SETS_BY_WIRE_ID = {gs.wire_id: gs for gs in GATE_SETS.values()}


def layer_byte(code: int, partner: int | None = None) -> int:
    if code in (CTRL_CODE, TGT_CODE):
        return code | ((partner + 1) << 4)
    return code


def validate_layer(layer: bytes, n: int) -> None:
    if len(layer) != n:
        raise ValueError("layer width mismatch")
    for w, b in enumerate(layer):
        code, hi = b & 0x0F, b >> 4
        if code in (CTRL_CODE, TGT_CODE):
            partner = hi - 1
            if not 0 <= partner < n or partner == w:
                raise ValueError(f"bad CNOT partner on wire {w}")
            pb = layer[partner]
            if (pb & 0x0F) != (CTRL_CODE if code == TGT_CODE else TGT_CODE) or (pb >> 4) - 1 != w:
                raise ValueError(f"inconsistent CNOT pairing on wire {w}")
        elif hi != 0 or code > TDG_CODE:
            raise ValueError(f"bad gate byte {b:#x} on wire {w}")


def enumerate_layers(n: int, gs: GateSet = CLIFFORD_T) -> list[bytes]:
    """All depth-1 layers on n qubits, identity included, in canonical order.

    For the lowest unassigned wire: single-qubit gates in code order first,
    then CNOT pairings with each higher unassigned wire (as control, then
    as target).  Disjoint CNOT pairs may share a layer.
    """
    if n < 1:
        raise ValueError("need at least one qubit")
    if n > 14:
        raise ValueError("layer byte encoding supports at most 14 qubits")
    out: list[bytes] = []
    assign = bytearray(n)

    def rec(done: int):
        free = [w for w in range(n) if not (done >> w) & 1]
        if not free:
            out.append(bytes(assign))
            return
        w = free[0]
        for code in gs.single_codes:
            assign[w] = code
            rec(done | (1 << w))
        if gs.has_cnot:
            for u in free[1:]:
                for cw, tw in ((w, u), (u, w)):
                    assign[cw] = layer_byte(CTRL_CODE, tw)
                    assign[tw] = layer_byte(TGT_CODE, cw)
                    rec(done | (1 << w) | (1 << u))
                assign[u] = 0
        assign[w] = 0

    rec(0)
    return out


def layer_gates(layer: bytes) -> list[tuple[str, tuple[int, ...]]]:
    """Non-identity gates of a layer as (name, wires) pairs."""
    gates = []
    for w, b in enumerate(layer):
        code = b & 0x0F
        if code == I_CODE:
            continue
        if code == CTRL_CODE:
            gates.append(("CNOT", (w, (b >> 4) - 1)))
        elif code == TGT_CODE:
            continue  # reported from the control side
        else:
            gates.append((GATE_NAMES[code], (w,)))
    return gates


def layer_matrix(layer: bytes) -> RingMatrix:
    """Exact unitary of one layer under the qubit-0-is-LSB convention."""
    n = len(layer)
    dim = 1 << n
    comps = np.zeros((4, dim, dim), dtype=np.int64)
    comps[0] = np.eye(dim, dtype=np.int64)
    k = 0
    idx = np.arange(dim)
    for w, b in enumerate(layer):
        code = b & 0x0F
        if code == I_CODE or code == TGT_CODE:
            continue
        if code == CTRL_CODE:
            t = (b >> 4) - 1
            dest = np.where((idx >> w) & 1 == 1, idx ^ (1 << t), idx)
            comps = comps[:, :, :][:, dest, :]  # permute rows: new[dest[b]] = old[b]
            # Row permutation: out[r] = in[perm^-1[r]]; dest is an involution here.
            continue
        table, gk = _GATE_COMPS[code]
        g = np.zeros((4, 2, 2), dtype=np.int64)
        for (plane, r, c), v in table.items():
            g[plane, r, c] = v
        bit = (idx >> w) & 1
        new = np.zeros_like(comps)
        # embedded multiply: rows touching wire w combine per the 2x2 gate
        for rb in range(2):
            rows = idx[bit == rb]
            for cb in range(2):
                src = rows ^ ((rb ^ cb) << w)
                for gi in range(4):
                    if g[gi, rb, cb] == 0:
                        continue
                    for mi in range(4):
                        s = 1 if gi + mi < 4 else -1
                        new[(gi + mi) % 4][rows] += s * g[gi, rb, cb] * comps[mi][src]
        comps = new
        k += gk
    return RingMatrix(n, comps, k, reduce=False)


@dataclass(frozen=True)
class Circuit:
    """Layered circuit; layer 0 is applied first."""

    n_qubits: int
    layers: tuple[bytes, ...] = ()
    n_ancillas: int = 0

    def __post_init__(self):
        for layer in self.layers:
            validate_layer(layer, self.n_qubits)
        if not 0 <= self.n_ancillas <= self.n_qubits:
            raise ValueError("ancilla count out of range")

    @property
    def depth(self) -> int:
        return len(self.layers)

    def gate_list(self) -> list[tuple[str, tuple[int, ...]]]:
        out = []
        for layer in self.layers:
            out.extend(layer_gates(layer))
        return out

    def gate_count(self) -> int:
        return sum(len(layer_gates(layer)) for layer in self.layers)

    def evaluate(self) -> RingMatrix:
        out = RingMatrix.identity(self.n_qubits)
        for layer in self.layers:
            out = layer_matrix(layer) @ out
        return out

    def inverse(self) -> "Circuit":
        inv_layers = tuple(invert_layer(layer) for layer in reversed(self.layers))
        return replace(self, layers=inv_layers)

    def relabel(self, perm) -> "Circuit":
        perm = list(perm)
        return replace(self, layers=tuple(relabel_layer(layer, perm) for layer in self.layers))

    def concat(self, other: "Circuit") -> "Circuit":
        if other.n_qubits != self.n_qubits:
            raise ValueError("width mismatch")
        return replace(self, layers=self.layers + other.layers)

    def t_depth(self) -> int:
        return sum(
            1
            for layer in self.layers
            if any((b & 0x0F) in (T_CODE, TDG_CODE) for b in layer)
        )

    def cost_vector(self) -> tuple[int, int, int, int]:
        """Gate counts (H, P or Pdg, CNOT, T or Tdg)."""
        h = p = c = t = 0
        for layer in self.layers:
            for b in layer:
                code = b & 0x0F
                if code == H_CODE:
                    h += 1
                elif code in (P_CODE, PDG_CODE):
                    p += 1
                elif code in (T_CODE, TDG_CODE):
                    t += 1
                elif code == CTRL_CODE:
                    c += 1
        return (h, p, c, t)

    def scheduled(self) -> "Circuit":
        """Re-layer gate by gate with ASAP scheduling (depth-canonical form)."""
        return schedule(self.n_qubits, self.gate_list(), n_ancillas=self.n_ancillas)


def invert_layer(layer: bytes) -> bytes:
    return bytes(
        b if (b & 0x0F) in (CTRL_CODE, TGT_CODE) else _INVERSE_CODE[b & 0x0F] for b in layer
    )


def relabel_layer(layer: bytes, perm: list[int]) -> bytes:
    out = bytearray(len(layer))
    for w, b in enumerate(layer):
        code = b & 0x0F
        if code in (CTRL_CODE, TGT_CODE):
            out[perm[w]] = layer_byte(code, perm[(b >> 4) - 1])
        else:
            out[perm[w]] = code
    return bytes(out)


def schedule(n_qubits: int, gate_list, n_ancillas: int = 0) -> Circuit:
    """Greedy earliest-layer scheduling of a gate list.

    The resulting layer count equals the critical-path length of the
    gate-list dependency DAG.
    """
    groups = [[g] for g in gate_list]
    return schedule_grouped(n_qubits, groups, n_ancillas=n_ancillas)


def schedule_grouped(n_qubits: int, groups, n_ancillas: int = 0) -> Circuit:
    """ASAP scheduling where each group of gates must share one layer.

    Groups act on disjoint wires internally; a group is placed at the
    maximum frontier over all its wires.  Singleton groups reduce to plain
    ASAP; multi-gate groups keep parallel T stages aligned.
    """
    frontier = [0] * n_qubits
    layers: list[bytearray] = []
    for group in groups:
        seen: set[int] = set()
        for name, wires in group:
            for w in wires:
                if not 0 <= w < n_qubits:
                    raise ValueError(f"gate {name} references wire {w} out of range")
                if w in seen:
                    raise ValueError(f"gate {name} overlaps another gate in its group")
                seen.add(w)
        if not seen:
            continue
        at = max(frontier[w] for w in seen)
        while len(layers) <= at:
            layers.append(bytearray(n_qubits))
        for name, wires in group:
            if name == "CNOT":
                c, t = wires
                layers[at][c] = layer_byte(CTRL_CODE, t)
                layers[at][t] = layer_byte(TGT_CODE, c)
            elif name in NAME_CODES and len(wires) == 1:
                layers[at][wires[0]] = NAME_CODES[name]
            else:
                raise ValueError(f"unknown gate {name}")
        for w in seen:
            frontier[w] = at + 1
    return Circuit(n_qubits, tuple(bytes(l) for l in layers), n_ancillas=n_ancillas)


def t_stage_groups(c: Circuit) -> list[list[tuple[str, tuple[int, ...]]]]:
    """Gate groups for rescheduling that keep each layer's T gates together."""
    groups: list[list[tuple[str, tuple[int, ...]]]] = []
    for layer in c.layers:
        t_group: list[tuple[str, tuple[int, ...]]] = []
        for name, wires in layer_gates(layer):
            if name in ("T", "TDG"):
                t_group.append((name, wires))
            else:
                groups.append([(name, wires)])
        if t_group:
            groups.append(t_group)
    return groups


class LayerTable:
    """Precomputed layer data for one (n, gate set): matrices and id maps."""

    def __init__(self, n: int, gs: GateSet = CLIFFORD_T):
        self.n = n
        self.gs = gs
        self.layers = enumerate_layers(n, gs)
        self.id_of = {layer: i for i, layer in enumerate(self.layers)}
        self.identity_id = self.id_of[bytes(n)]
        dim = 1 << n
        L = len(self.layers)
        self.comps = np.zeros((L, 4, dim, dim), dtype=np.int64)
        self.k = np.zeros(L, dtype=np.int64)
        self.gate_counts = np.zeros(L, dtype=np.int64)
        for i, layer in enumerate(self.layers):
            m = layer_matrix(layer)
            self.comps[i] = m.comps
            self.k[i] = m.k
            self.gate_counts[i] = len(layer_gates(layer))
        self.bytes_arr = np.frombuffer(b"".join(self.layers), dtype=np.uint8).reshape(L, n)
        self.perms = list(itertools.permutations(range(n)))
        self.relabel_ids = np.zeros((len(self.perms), L), dtype=np.int64)
        self.invert_ids = np.zeros(L, dtype=np.int64)
        for i, layer in enumerate(self.layers):
            self.invert_ids[i] = self.id_of[invert_layer(layer)]
            for pi, perm in enumerate(self.perms):
                self.relabel_ids[pi, i] = self.id_of[relabel_layer(layer, list(perm))]

    def circuit_from_ids(self, ids) -> Circuit:
        return Circuit(self.n, tuple(self.layers[int(i)] for i in ids))


_TABLE_CACHE: dict[tuple[int, str], LayerTable] = {}


def layer_table(n: int, gs: GateSet = CLIFFORD_T) -> LayerTable:
    key = (n, gs.id)
    if key not in _TABLE_CACHE:
        _TABLE_CACHE[key] = LayerTable(n, gs)
    return _TABLE_CACHE[key]
