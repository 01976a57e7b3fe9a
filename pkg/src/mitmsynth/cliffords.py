"""Clifford-group enumeration and T-stage sets for the T-depth engine.

Elements are stored up to global phase (phase-normalized keys) with one
minimal-layer-depth witness circuit each.  The T-depth search sets are
S_0 = the Clifford group and S_i = Clifford * (one parallel T stage) *
S_{i-1}, also pruned to phase classes; S_1 enumerates each double coset
Clifford*t*Clifford without redundancy by fixing right-coset
representatives of the stabilizer {c : t c inv(t) is Clifford}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .canon import CanonContext
from .gates import CLIFFORD_ONLY, CLIFFORD_T, Circuit, T_CODE, layer_table


class ResourceBudgetError(RuntimeError):
    """Requested enumeration exceeds the supported memory/time budget."""


@dataclass
class CliffordSet:
    n: int
    keys: np.ndarray  # phase-class keys, sorted
    order: np.ndarray  # sorted position -> element index in generation order
    key_by_index: np.ndarray  # element index -> phase-class key
    comps: np.ndarray  # (R, 4, N, N) witness unitaries (arbitrary phase)
    k: np.ndarray
    witness_ids: list[tuple[int, ...]]  # layer ids into the Clifford layer table

    def __len__(self) -> int:
        return len(self.keys)

    def witness_circuit(self, index: int) -> Circuit:
        table = layer_table(self.n, CLIFFORD_ONLY)
        return table.circuit_from_ids(self.witness_ids[index])

    def lookup(self, key) -> int:
        """Element index for a phase-class key, or -1."""
        pos = kernels.lookup_sorted(self.keys, np.atleast_1d(key))[0]
        if pos < 0:
            return -1
        return int(self.order[pos])


_CLIFFORD_ORDER_UP_TO_PHASE = {1: 24, 2: 11_520, 3: 92_897_280}


def clifford_generate(n: int, allow_large: bool = False) -> CliffordSet:
    """BFS closure of the Clifford layer set, up to global phase.

    n = 3 enumerates ~93M elements and is refused without `allow_large`.
    """
    if n > 3 or (n == 3 and not allow_large):
        raise ResourceBudgetError(
            "Clifford enumeration beyond 2 qubits needs the explicit long-run flag"
        )
    table = layer_table(n, CLIFFORD_ONLY)
    ctx = CanonContext(n, classed=False)
    dim = 1 << n
    ident = np.zeros((1, 4, dim, dim), dtype=np.int64)
    ident[0, 0] = np.eye(dim, dtype=np.int64)

    all_comps = [ident[0]]
    all_k = [0]
    witness_ids: list[tuple[int, ...]] = [()]
    keys0, _ = ctx.keys(ident, np.zeros(1, dtype=np.int64))
    seen = {bytes(keys0[0].tobytes()): 0}

    frontier = [0]
    ext_ids = [i for i in range(len(table.layers)) if i != table.identity_id]
    lm = table.comps[ext_ids]
    lk = table.k[ext_ids]
    while frontier:
        base = np.stack([all_comps[i] for i in frontier])
        base_k = np.array([all_k[i] for i in frontier], dtype=np.int64)
        prod = kernels.matmul_comps(lm[None, :], base[:, None]).reshape(-1, 4, dim, dim)
        pk = (base_k[:, None] + lk[None, :]).reshape(-1)
        prod, pk = kernels.reduce_global(prod, pk)
        keys, _ = ctx.keys(prod, pk)
        new_frontier = []
        for row in range(len(keys)):
            kb = bytes(keys[row].tobytes())
            if kb in seen:
                continue
            src = frontier[row // len(ext_ids)]
            layer = ext_ids[row % len(ext_ids)]
            idx = len(all_comps)
            seen[kb] = idx
            all_comps.append(prod[row])
            all_k.append(int(pk[row]))
            witness_ids.append(witness_ids[src] + (layer,))
            new_frontier.append(idx)
        frontier = new_frontier

    count = len(all_comps)
    expected = _CLIFFORD_ORDER_UP_TO_PHASE.get(n)
    if expected is not None and count != expected:
        raise AssertionError(f"Clifford closure produced {count}, expected {expected}")
    key_by_index = np.empty(count, dtype=kernels.KEY_DTYPE)
    for kb, idx in seen.items():
        key_by_index[idx] = np.frombuffer(kb, dtype=kernels.KEY_DTYPE)[0]
    order = np.argsort(key_by_index)
    return CliffordSet(
        n=n,
        keys=key_by_index[order],
        order=order.astype(np.int64),
        key_by_index=key_by_index,
        comps=np.stack(all_comps),
        k=np.array(all_k, dtype=np.int64),
        witness_ids=witness_ids,
    )


def t_stage_layers(n: int) -> list[bytes]:
    """Parallel T stages: T on every nonempty subset of qubits."""
    return [
        bytes(T_CODE if (mask >> w) & 1 else 0 for w in range(n)) for mask in range(1, 1 << n)
    ]


@dataclass
class TStageLevel:
    """Phase classes of one minimal T-depth with back-chained witnesses."""

    keys: np.ndarray  # sorted phase-class keys
    c1: np.ndarray  # left Clifford element index, aligned with keys
    t_stage: np.ndarray  # T-stage index, aligned with keys
    prev: np.ndarray  # previous-level record (level 1: Clifford element index)


class TDepthSets:
    """S_0 (Cliffords) plus incremental S_i levels for the T-depth search."""

    def __init__(self, cliffords: CliffordSet, candidate_budget: int = 60_000_000):
        self.cs = cliffords
        self.n = cliffords.n
        dim = 1 << self.n
        self.dim = dim
        self.ctx = CanonContext(self.n, classed=False)
        self.stages = t_stage_layers(self.n)
        from .gates import layer_matrix

        mats = [layer_matrix(s) for s in self.stages]
        self.stage_comps = np.stack([m.comps for m in mats])
        self.stage_k = np.array([m.k for m in mats], dtype=np.int64)
        self.levels: list[TStageLevel] = []
        self.candidate_budget = candidate_budget

    def level_matrices(self, level: int, rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Witness unitaries of records `rows` of S_level (level >= 1)."""
        lv = self.levels[level - 1]
        if level == 1:
            base = self.cs.comps[lv.prev[rows]]
            base_k = self.cs.k[lv.prev[rows]]
        else:
            base, base_k = self.level_matrices(level - 1, lv.prev[rows])
        mid = kernels.matmul_comps(self.stage_comps[lv.t_stage[rows]], base)
        comps = kernels.matmul_comps(self.cs.comps[lv.c1[rows]], mid)
        k = base_k + self.stage_k[lv.t_stage[rows]] + self.cs.k[lv.c1[rows]]
        return comps, k

    def witness_circuit(self, level: int, row: int) -> Circuit:
        """Layer list: tail Clifford, then T stage + Clifford per chained level."""
        cl_table = layer_table(self.n, CLIFFORD_ONLY)
        suffix: list[bytes] = []
        while level >= 1:
            lv = self.levels[level - 1]
            c1_layers = [cl_table.layers[i] for i in self.cs.witness_ids[int(lv.c1[row])]]
            suffix = [self.stages[int(lv.t_stage[row])]] + c1_layers + suffix
            row = int(lv.prev[row])
            level -= 1
        head = [cl_table.layers[i] for i in self.cs.witness_ids[int(row)]]
        return Circuit(self.n, tuple(head + suffix))

    def ensure_level(self, level: int) -> None:
        while len(self.levels) < level:
            self._build_next_level()

    def _known_keys(self) -> np.ndarray:
        parts = [self.cs.keys] + [lv.keys for lv in self.levels]
        return np.sort(np.concatenate(parts))

    def _build_next_level(self) -> None:
        i = len(self.levels) + 1
        cs = self.cs
        if i == 1:
            seeds = self._seed_pairs()
            if len(seeds) * len(cs) > self.candidate_budget:
                raise ResourceBudgetError(
                    f"building T-stage level 1 needs ~{len(seeds) * len(cs):,} "
                    "products; over budget"
                )
            seed_mats = kernels.matmul_comps(
                self.stage_comps[[t for t, _ in seeds]], cs.comps[[c for _, c in seeds]]
            )
            seed_k = self.stage_k[[t for t, _ in seeds]] + cs.k[[c for _, c in seeds]]
            t_refs = np.array([t for t, _ in seeds], dtype=np.int64)
            prev_refs = np.array([c for _, c in seeds], dtype=np.int64)
        else:
            prev_rows = np.arange(len(self.levels[-1].keys))
            S = len(self.stages)
            est = S * len(prev_rows) * len(cs)
            if est > self.candidate_budget:
                raise ResourceBudgetError(
                    f"building T-stage level {i} needs ~{est:,} products; over budget"
                )
            base, base_k = self.level_matrices(i - 1, prev_rows)
            seed_mats = kernels.matmul_comps(
                self.stage_comps[:, None], base[None, :]
            ).reshape(-1, 4, self.dim, self.dim)
            seed_k = (self.stage_k[:, None] + base_k[None, :]).reshape(-1)
            t_refs = np.repeat(np.arange(S), len(prev_rows))
            prev_refs = np.tile(prev_rows, S)
        known = self._known_keys()
        chunk = max(1, 1_000_000 // max(len(cs), 1))
        kept = []
        for s in range(0, len(seed_mats), chunk):
            mats = seed_mats[s : s + chunk]
            prod = kernels.matmul_comps(cs.comps[None, :], mats[:, None])
            prod = prod.reshape(-1, 4, self.dim, self.dim)
            pk = (seed_k[s : s + chunk, None] + cs.k[None, :]).reshape(-1)
            keys, _ = self.ctx.keys(prod, pk)
            fresh = kernels.lookup_sorted(known, keys) < 0
            rows = np.nonzero(fresh)[0]
            seed_idx = s + rows // len(cs)
            c1 = rows % len(cs)
            kept.append((keys[rows], c1, t_refs[seed_idx], prev_refs[seed_idx]))
        keys = np.concatenate([k[0] for k in kept]) if kept else np.empty(0, kernels.KEY_DTYPE)
        c1 = np.concatenate([k[1] for k in kept]) if kept else np.empty(0, np.int64)
        ts = np.concatenate([k[2] for k in kept]) if kept else np.empty(0, np.int64)
        pv = np.concatenate([k[3] for k in kept]) if kept else np.empty(0, np.int64)
        uniq, first = np.unique(keys, return_index=True)
        self.levels.append(TStageLevel(uniq, c1[first], ts[first], pv[first]))

    def _seed_pairs(self) -> list[tuple[int, int]]:
        """(t stage, right-coset representative) pairs covering each C t C."""
        cs = self.cs
        pairs: list[tuple[int, int]] = []
        for t_idx in range(len(self.stages)):
            t = self.stage_comps[t_idx]
            t_adj = kernels.adjoint_comps(t)
            conj = kernels.matmul_comps(kernels.matmul_comps(t[None], cs.comps), t_adj[None])
            conj_k = cs.k + 2 * self.stage_k[t_idx]
            keys, _ = self.ctx.keys(conj, conj_k)
            in_c = kernels.lookup_sorted(cs.keys, keys) >= 0
            stab = np.nonzero(in_c)[0]
            stab_mats = cs.comps[stab]
            stab_k = cs.k[stab]
            visited = np.zeros(len(cs), dtype=bool)
            for c_idx in range(len(cs)):
                if visited[c_idx]:
                    continue
                pairs.append((t_idx, c_idx))
                coset = kernels.matmul_comps(stab_mats, cs.comps[c_idx][None])
                coset_k = stab_k + cs.k[c_idx]
                kk, _ = self.ctx.keys(coset, coset_k)
                pos = kernels.lookup_sorted(cs.keys, kk)
                members = cs.order[pos[pos >= 0]]
                visited[members] = True
                visited[c_idx] = True
        return pairs
