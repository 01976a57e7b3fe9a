"""Generation, storage, and serialization of minimal-depth circuit databases.

Level i holds one stored circuit per equivalence class whose minimal
circuit depth is i (level 1 additionally holds the identity class, keeping
reported level sizes aligned with the reference counts).  Records carry
only the canonical circuit, its class key, and a gate count; unitaries are
recomputed on demand.

Modes: "classed" prunes by qubit relabeling, inversion, and global phase;
"full" prunes by global phase only (required for ancilla searches).
"""

from __future__ import annotations

import os
import struct
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .canon import CanonContext
from .gates import CLIFFORD_T, Circuit, GATE_SETS_BY_WIRE_ID, GateSet, LayerTable, layer_table
from .matrix import RingMatrix

MAGIC = b"QCDB1\x00"
FORMAT_VERSION = 1

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def fnv1a64(data: bytes, h: int = _FNV_OFFSET) -> int:
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _MASK64
    return h


class DbFormatError(Exception):
    """Database file problem; `kind` is magic|version|truncation|checksum."""

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


@dataclass
class CircuitRecord:
    key: bytes
    circuit: Circuit
    gate_count: int
    level: int


class LevelStore:
    """Records of one depth level, sorted by key."""

    def __init__(self, keys: np.ndarray, layer_ids: np.ndarray, gate_counts: np.ndarray):
        self.keys = keys  # structured KEY_DTYPE, ascending
        self.layer_ids = layer_ids  # (R, depth) int32
        self.gate_counts = gate_counts  # (R,) uint16

    def __len__(self) -> int:
        return len(self.keys)

    @property
    def depth(self) -> int:
        return self.layer_ids.shape[1]


class CircuitDatabase:
    def __init__(self, n_qubits: int, gate_set: GateSet, mode: str, levels: list[LevelStore],
                 generation_seconds: list[float] | None = None):
        if mode not in ("classed", "full"):
            raise ValueError("mode must be 'classed' or 'full'")
        self.n_qubits = n_qubits
        self.gate_set = gate_set
        self.mode = mode
        self.levels = levels
        self.generation_seconds = generation_seconds or []
        self.table = layer_table(n_qubits, gate_set)

    @property
    def max_depth(self) -> int:
        return len(self.levels)

    def counts(self) -> list[int]:
        return [len(lv) for lv in self.levels]

    def record(self, level: int, pos: int) -> CircuitRecord:
        lv = self.levels[level - 1]
        key = bytes(lv.keys[pos].tobytes())
        circuit = self.table.circuit_from_ids(lv.layer_ids[pos])
        return CircuitRecord(key, circuit, int(lv.gate_counts[pos]), level)

    def lookup(self, key: bytes) -> tuple[int, CircuitRecord] | None:
        """Exact key match across levels; collisions must be re-verified."""
        q = np.frombuffer(key, dtype=kernels.KEY_DTYPE)
        for level, lv in enumerate(self.levels, start=1):
            pos = kernels.lookup_sorted(lv.keys, q)[0]
            if pos >= 0:
                return level, self.record(level, int(pos))
        return None

    # -- serialization --------------------------------------------------

    def save(self, path: str) -> None:
        mode_flags = 1 if self.mode == "full" else 0
        blob = bytearray()
        blob += MAGIC
        blob += struct.pack("<BBBB", FORMAT_VERSION, self.n_qubits,
                            self.gate_set.wire_id, mode_flags)
        blob += struct.pack("<I", len(self.levels))
        layer_bytes = self.table.bytes_arr
        for lv in self.levels:
            blob += struct.pack("<Q", len(lv))
            depth = lv.depth
            rec = np.zeros(len(lv), dtype=np.dtype([
                ("key", "V16"), ("depth", "<u2"),
                ("layers", f"V{max(depth * self.n_qubits, 1)}"), ("gc", "<u2"),
            ]))
            rec["key"] = lv.keys.view("V16")
            rec["depth"] = depth
            if depth:
                rec["layers"] = np.ascontiguousarray(
                    layer_bytes[lv.layer_ids].reshape(len(lv), depth * self.n_qubits)
                ).view(f"V{depth * self.n_qubits}").reshape(-1)
            rec["gc"] = lv.gate_counts
            blob += rec.tobytes()
        blob += struct.pack("<Q", fnv1a64(bytes(blob)))
        tmp = path + ".tmp"
        with open(tmp, "wb") as f:
            f.write(blob)
        os.replace(tmp, path)

    @staticmethod
    def load(path: str) -> "CircuitDatabase":
        with open(path, "rb") as f:
            blob = f.read()
        if len(blob) < len(MAGIC) + 4 + 4 + 8:
            raise DbFormatError("truncation", "file too short for header")
        if blob[: len(MAGIC)] != MAGIC:
            raise DbFormatError("magic", "bad magic; not a circuit database")
        version, n_qubits, gs_id, mode_flags = struct.unpack_from("<BBBB", blob, len(MAGIC))
        if version != FORMAT_VERSION:
            raise DbFormatError("version", f"unsupported format version {version}")
        body, tail = blob[:-8], blob[-8:]
        if struct.unpack("<Q", tail)[0] != fnv1a64(body):
            raise DbFormatError("checksum", "checksum mismatch")
        gs = GATE_SETS_BY_WIRE_ID.get(gs_id)
        if gs is None:
            raise DbFormatError("version", f"unknown gate set id {gs_id}")
        mode = "full" if mode_flags & 1 else "classed"
        off = len(MAGIC) + 4
        (level_count,) = struct.unpack_from("<I", body, off)
        off += 4
        table = layer_table(n_qubits, gs)
        enc_sorted, enc_ids = _layer_byte_index(table)
        levels = []
        for level in range(1, level_count + 1):
            if off + 8 > len(body):
                raise DbFormatError("truncation", "level header past end of file")
            (count,) = struct.unpack_from("<Q", body, off)
            off += 8
            depth = level
            rec_dt = np.dtype([
                ("key", "V16"), ("depth", "<u2"),
                ("layers", f"V{max(depth * n_qubits, 1)}"), ("gc", "<u2"),
            ])
            nbytes = rec_dt.itemsize * count
            if off + nbytes > len(body):
                raise DbFormatError("truncation", "records past end of file")
            rec = np.frombuffer(body, dtype=rec_dt, count=count, offset=off)
            off += nbytes
            if count and not (rec["depth"] == depth).all():
                raise DbFormatError("truncation", "record depth does not match level")
            keys = rec["key"].view(kernels.KEY_DTYPE).reshape(-1)
            raw = np.frombuffer(rec["layers"].tobytes(), dtype=np.uint8)
            raw = raw.reshape(count, depth, n_qubits) if count else raw.reshape(0, depth, n_qubits)
            layer_ids = _ids_from_bytes(raw, enc_sorted, enc_ids)
            levels.append(LevelStore(keys.copy(), layer_ids, rec["gc"].astype(np.uint16)))
        if off != len(body):
            raise DbFormatError("truncation", "trailing bytes after last level")
        return CircuitDatabase(n_qubits, gs, mode, levels)


def _layer_byte_index(table: LayerTable):
    enc = _encode_layer_bytes(table.bytes_arr)
    order = np.argsort(enc)
    return enc[order], order.astype(np.int32)


def _encode_layer_bytes(arr: np.ndarray) -> np.ndarray:
    pad = np.zeros((arr.shape[0], 8), dtype=np.uint8)
    pad[:, : arr.shape[1]] = arr
    return pad.view("<u8").reshape(-1)


def _ids_from_bytes(raw: np.ndarray, enc_sorted: np.ndarray, enc_ids: np.ndarray) -> np.ndarray:
    count, depth, n = raw.shape
    flat = raw.reshape(-1, n)
    enc = _encode_layer_bytes(flat)
    pos = np.searchsorted(enc_sorted, enc)
    pos = np.minimum(pos, len(enc_sorted) - 1)
    if not (enc_sorted[pos] == enc).all():
        raise DbFormatError("truncation", "record contains an unknown layer encoding")
    return enc_ids[pos].reshape(count, depth).astype(np.int32)


# -- generation ----------------------------------------------------------


@dataclass
class _GenContext:
    table: LayerTable
    canon: CanonContext
    classed: bool
    ext_ids: np.ndarray  # non-identity layer ids used for extension


def _canonical_circuit_ids(ctx: _GenContext, ids: np.ndarray, winners: np.ndarray) -> np.ndarray:
    """Apply winning class transforms (relabel, then invert) to id rows."""
    n_perms = len(ctx.table.perms)
    out = ctx.table.relabel_ids[winners % n_perms][
        np.arange(len(ids))[:, None], ids
    ]
    inverted = winners >= n_perms
    if inverted.any():
        inv_rows = ctx.table.invert_ids[out[inverted]][:, ::-1]
        out[inverted] = inv_rows
    return out.astype(np.int32)


def _encoding_lanes(ctx: _GenContext, ids: np.ndarray) -> np.ndarray:
    """Circuit byte encoding packed into two big-endian uint64 lanes."""
    count, depth = ids.shape
    n = ctx.table.n
    width = depth * n
    if width > 16:
        raise ValueError("encoding tie-break supports at most 16 layer bytes")
    pad = np.zeros((count, 16), dtype=np.uint8)
    pad[:, :width] = ctx.table.bytes_arr[ids].reshape(count, width)
    return pad.view(">u8").astype(np.uint64).reshape(count, 2)


def _batch_evaluate_ids(table: LayerTable, ids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unitaries of id rows as shared-exponent component batches."""
    count, depth = ids.shape
    dim = 1 << table.n
    comps = np.zeros((count, 4, dim, dim), dtype=np.int64)
    comps[:, 0] = np.eye(dim, dtype=np.int64)
    k = np.zeros(count, dtype=np.int64)
    for pos in range(depth):
        comps = kernels.matmul_comps(table.comps[ids[:, pos]], comps)
        k += table.k[ids[:, pos]]
    return comps, k


def _extend_chunk(ctx: _GenContext, prev_ids: np.ndarray):
    """Candidates from one- layer left/right extension of stored circuits.

    Returns (keys, gate counts, encoding lanes, canonical layer-id rows).
    """
    table = ctx.table
    U, kU = _batch_evaluate_ids(table, prev_ids)
    L = len(ctx.ext_ids)
    C = len(prev_ids)
    lm = table.comps[ctx.ext_ids]
    lk = table.k[ctx.ext_ids]
    left = kernels.matmul_comps(lm[None, :], U[:, None])  # layer after circuit
    right = kernels.matmul_comps(U[:, None], lm[None, :])  # layer before circuit
    depth = prev_ids.shape[1] + 1
    cand = np.concatenate([left, right]).reshape(2 * C * L, 4, U.shape[-1], U.shape[-1])
    kc = np.concatenate([(kU[:, None] + lk[None, :]) for _ in range(2)]).reshape(-1)
    ids = np.zeros((2 * C * L, depth), dtype=np.int64)
    rep_block = np.repeat(prev_ids, L, axis=0)
    ext_block = np.tile(ctx.ext_ids, C)
    ids[: C * L, :-1] = rep_block
    ids[: C * L, -1] = ext_block
    ids[C * L :, 0] = ext_block
    ids[C * L :, 1:] = rep_block
    keys, winners = ctx.canon.keys(cand, kc)
    canon_ids = _canonical_circuit_ids(ctx, ids, winners)
    gc = table.gate_counts[canon_ids].sum(axis=1).astype(np.int64)
    enc = _encoding_lanes(ctx, canon_ids)
    return keys, gc, enc, canon_ids


def _dedup_best(keys, gc, enc, ids):
    """Keep, per key, the record minimizing (gate count, encoding)."""
    order = np.lexsort((enc[:, 1], enc[:, 0], gc, keys["lo"], keys["hi"]))
    keys, gc, enc, ids = keys[order], gc[order], enc[order], ids[order]
    lead = np.ones(len(keys), dtype=bool)
    lead[1:] = keys[1:] != keys[:-1]
    return keys[lead], gc[lead], enc[lead], ids[lead]


class _Accumulator:
    def __init__(self, compact_at: int = 4_000_000):
        self.parts = []
        self.size = 0
        self.compact_at = compact_at

    def add(self, batch):
        self.parts.append(batch)
        self.size += len(batch[0])
        if self.size > self.compact_at:
            self._compact()

    def _compact(self):
        merged = tuple(np.concatenate([p[i] for p in self.parts]) for i in range(4))
        merged = _dedup_best(*merged)
        self.parts = [merged]
        self.size = len(merged[0])

    def result(self):
        if not self.parts:
            empty_keys = np.empty(0, dtype=kernels.KEY_DTYPE)
            return empty_keys, np.empty(0, np.int64), np.empty((0, 2), np.uint64), None
        self._compact()
        return self.parts[0]


_POOL_CTX: dict = {}


def _pool_init(n_qubits: int, gs_id: str, classed: bool):
    from .gates import GATE_SETS

    table = layer_table(n_qubits, GATE_SETS[gs_id])
    _POOL_CTX["ctx"] = _make_gen_context(table, classed)


def _make_gen_context(table: LayerTable, classed: bool) -> _GenContext:
    ext = np.array(
        [i for i in range(len(table.layers)) if i != table.identity_id], dtype=np.int64
    )
    return _GenContext(table, CanonContext(table.n, classed), classed, ext)


def _pool_extend(prev_ids: np.ndarray):
    return _extend_chunk(_POOL_CTX["ctx"], prev_ids)


def generate(
    n: int,
    gs: GateSet = CLIFFORD_T,
    max_depth: int = 1,
    mode: str = "classed",
    jobs: int = 1,
    chunk_reps: int = 64,
    progress=None,
) -> CircuitDatabase:
    """Build per-depth canonical-representative stores up to max_depth.

    Level 1 canonicalizes every depth-1 layer (identity included); level i
    extends each stored level-(i-1) circuit by every non-identity layer on
    both sides, keeping only keys unseen at any level <= i.  Ties within a
    level resolve to minimal (gate count, encoding).  Deterministic for any
    jobs/chunking choice.
    """
    if max_depth < 1:
        raise ValueError("max_depth must be at least 1")
    if mode not in ("classed", "full"):
        raise ValueError("mode must be 'classed' or 'full'")
    table = layer_table(n, gs)
    ctx = _make_gen_context(table, mode == "classed")
    levels: list[LevelStore] = []
    timings: list[float] = []

    t0 = time.perf_counter()
    all_ids = np.arange(len(table.layers), dtype=np.int64)[:, None]
    keys, winners = ctx.canon.keys(table.comps.copy(), table.k.copy())
    canon_ids = _canonical_circuit_ids(ctx, all_ids, winners)
    gc = table.gate_counts[canon_ids].sum(axis=1).astype(np.int64)
    enc = _encoding_lanes(ctx, canon_ids)
    keys, gc, enc, canon_ids = _dedup_best(keys, gc, enc, canon_ids)
    levels.append(LevelStore(keys, canon_ids, gc.astype(np.uint16)))
    known = keys.copy()
    timings.append(time.perf_counter() - t0)
    if progress:
        progress(1, len(keys), timings[-1])

    pool = None
    if jobs > 1:
        pool = ProcessPoolExecutor(
            max_workers=jobs, initializer=_pool_init, initargs=(n, gs.id, mode == "classed")
        )
    try:
        for level in range(2, max_depth + 1):
            t0 = time.perf_counter()
            prev = levels[-1]
            acc = _Accumulator()
            chunks = [
                prev.layer_ids[s : s + chunk_reps].astype(np.int64)
                for s in range(0, len(prev), chunk_reps)
            ]
            if pool is not None:
                results = pool.map(_pool_extend, chunks, chunksize=1)
            else:
                results = (_extend_chunk(ctx, c) for c in chunks)
            for keys, gc, enc, ids in results:
                # The identity class sits in level 1, so `known` already
                # filters extensions that collapse back to it.
                fresh = kernels.lookup_sorted(known, keys) < 0
                if fresh.any():
                    acc.add((keys[fresh], gc[fresh], enc[fresh], ids[fresh]))
            keys, gc, enc, ids = acc.result()
            if ids is None:
                ids = np.zeros((0, level), dtype=np.int32)
            levels.append(LevelStore(keys, ids, gc.astype(np.uint16)))
            known = np.sort(np.concatenate([known, keys]))
            timings.append(time.perf_counter() - t0)
            if progress:
                progress(level, len(keys), timings[-1])
    finally:
        if pool is not None:
            pool.shutdown()
    return CircuitDatabase(n, gs, mode, levels, timings)


def identity_class_key(n: int, classed: bool = True) -> np.ndarray:
    from .canon import matrix_key

    return matrix_key(RingMatrix.identity(n), classed)
