"""Meet-in-the-middle synthesis engines.

Depth search: a depth-d factorization U = V W is found by probing, for
ascending d, every stored class representative V' at level floor(d/2):
each relabel/inversion variant of V' is inverted against the target and
the canonical key of the product is looked up at level ceil(d/2).  Because
class minimal depths are exact, any collision at the first successful d
reconstructs to a depth-d witness; the returned witness minimizes
(gate count, circuit encoding) among all collisions at that depth.

T-depth search: the same bidirectional probing over sets S_i built from
the Clifford group and parallel T stages, pruned to phase classes.

Ancilla search: probes full-mode (phase-pruned) databases and matches on
the ancilla-zero column block only, collecting every collision up to the
depth bound and returning the best witness by (T-depth, depth, gate
count, encoding).
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .canon import (
    CanonContext,
    ClassTransform,
    apply_transform,
    canonical_rep,
    phase_between,
    phase_normalize,
)
from .cliffords import CliffordSet, ResourceBudgetError, TDepthSets
from .db import CircuitDatabase, _batch_evaluate_ids
from .gates import Circuit, layer_table, schedule_grouped, t_stage_groups
from .matrix import RingMatrix


def _finalize(candidate: Circuit) -> Circuit:
    """Compact a witness without letting ASAP split its parallel T stages."""
    return schedule_grouped(
        candidate.n_qubits, t_stage_groups(candidate), n_ancillas=candidate.n_ancillas
    )


class DatabaseTooShallowError(ValueError):
    """The database does not cover ceil(max_depth / 2)."""


@dataclass
class SearchResult:
    found: bool
    circuit: Circuit | None = None
    depth: int | None = None
    t_depth: int | None = None
    phase_exponent: int | None = None
    proof_bound: int = 0
    probe_seconds: dict[int, float] = field(default_factory=dict)

    def verify_against(self, target: RingMatrix) -> bool:
        if not self.found:
            return False
        return self.circuit.evaluate() == target.scale_phase(self.phase_exponent)


def _check_target(target: RingMatrix, n: int) -> None:
    if target.n_qubits != n:
        raise ValueError(f"target acts on {target.n_qubits} qubits, database on {n}")
    if not target.is_unitary():
        raise ValueError("target matrix is not unitary")


def _encoding_bytes(c: Circuit) -> bytes:
    return b"".join(c.layers)


def _variant_batch(ctx: CanonContext, comps: np.ndarray) -> np.ndarray:
    """All (B, V, 4, N, N) relabel/inversion variants of a batch."""
    B = comps.shape[0]
    dim = ctx.dim
    nsq = dim * dim
    flat = comps.reshape(B, 4, nsq)
    cc = np.stack([flat, kernels.conj_comps(flat, axis=1)], axis=1)
    cc = np.moveaxis(cc, 2, 3)  # (B, 2, nsq, 4)
    V = ctx.n_variants
    out = cc[np.arange(B)[:, None, None], ctx.inv_flags[None, :, None], ctx.idx[None, :, :]]
    return np.moveaxis(out, 3, 2).reshape(B, V, 4, dim, dim)


@dataclass
class _Hit:
    rep_pos: int  # V-side record position (-1 when V is the identity)
    variant: int
    w_pos: int
    gc_bound: int


def _probe_depth(db: CircuitDatabase, ctx: CanonContext, target: RingMatrix,
                 a: int, b: int, chunk: int = 1024) -> list[_Hit]:
    wlevel = db.levels[b - 1]
    hits: list[_Hit] = []
    if a == 0:
        keys, _ = ctx.keys(target.comps[None].copy(), np.array([target.k], dtype=np.int64))
        pos = kernels.lookup_sorted(wlevel.keys, keys)[0]
        if pos >= 0:
            hits.append(_Hit(-1, 0, int(pos), int(wlevel.gate_counts[pos])))
        return hits
    vlevel = db.levels[a - 1]
    table = db.table
    V = ctx.n_variants
    for start in range(0, len(vlevel), chunk):
        ids = vlevel.layer_ids[start : start + chunk].astype(np.int64)
        comps, k = _batch_evaluate_ids(table, ids)
        var = _variant_batch(ctx, comps)  # (C, V, 4, N, N)
        C = var.shape[0]
        prod = kernels.matmul_comps(var.reshape(C * V, 4, ctx.dim, ctx.dim), target.comps[None])
        pk = np.repeat(k, V) + target.k
        keys, _ = ctx.keys(prod, pk)
        pos = kernels.lookup_sorted(wlevel.keys, keys)
        for row in np.nonzero(pos >= 0)[0]:
            rep = start + row // V
            hits.append(
                _Hit(
                    int(rep),
                    int(row % V),
                    int(pos[row]),
                    int(vlevel.gate_counts[rep] + wlevel.gate_counts[pos[row]]),
                )
            )
    return hits


_PROBE_STATE: dict = {}


def _probe_worker(args):
    start, stop = args
    db = _PROBE_STATE["db"]
    ctx = _PROBE_STATE["ctx"]
    target = _PROBE_STATE["target"]
    a, b = _PROBE_STATE["ab"]
    vlevel = db.levels[a - 1]
    sub = vlevel.layer_ids[start:stop].astype(np.int64)
    wlevel = db.levels[b - 1]
    table = db.table
    V = ctx.n_variants
    comps, k = _batch_evaluate_ids(table, sub)
    var = _variant_batch(ctx, comps)
    C = var.shape[0]
    prod = kernels.matmul_comps(var.reshape(C * V, 4, ctx.dim, ctx.dim), target.comps[None])
    pk = np.repeat(k, V) + target.k
    keys, _ = ctx.keys(prod, pk)
    pos = kernels.lookup_sorted(wlevel.keys, keys)
    rows = np.nonzero(pos >= 0)[0]
    return [(start + int(r) // V, int(r) % V, int(pos[r])) for r in rows]


def _probe_depth_parallel(db, ctx, target, a, b, jobs, chunk=1024) -> list[_Hit]:
    vlevel = db.levels[a - 1]
    if a == 0 or len(vlevel) < 4 * chunk or jobs <= 1:
        return _probe_depth(db, ctx, target, a, b, chunk)
    # Fork-inherited state keeps the worker payload small.
    _PROBE_STATE.update({"db": db, "ctx": ctx, "target": target, "ab": (a, b)})
    spans = [(s, min(s + chunk, len(vlevel))) for s in range(0, len(vlevel), chunk)]
    wlevel = db.levels[b - 1]
    hits: list[_Hit] = []
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        for part in pool.map(_probe_worker, spans, chunksize=4):
            for rep, v, pos in part:
                hits.append(
                    _Hit(rep, v, pos,
                         int(vlevel.gate_counts[rep] + wlevel.gate_counts[pos]))
                )
    _PROBE_STATE.clear()
    return hits


def _reconstruct(db: CircuitDatabase, ctx: CanonContext, target: RingMatrix,
                 a: int, b: int, hit: _Hit):
    """Rebuild and exactly verify one collision; None on key false-positive."""
    n = db.n_qubits
    if hit.rep_pos < 0:
        c_vt = Circuit(n)
        v_tilde = RingMatrix.identity(n)
    else:
        rec_v = db.record(a, hit.rep_pos)
        perm, inv = ctx.variants[hit.variant]
        c_vt = apply_transform(rec_v.circuit, ClassTransform(perm, not inv))
        v_tilde = c_vt.evaluate()
    w_mat = v_tilde.adjoint() @ target
    wc, t_w = canonical_rep(w_mat)
    rec_w = db.record(b, hit.w_pos)
    ws = rec_w.circuit.evaluate()
    wsc, t_s = canonical_rep(ws)
    if wc != wsc:
        return None  # 128-bit key collision between distinct classes
    c_b = apply_transform(rec_w.circuit, t_s)
    bmat = c_b.evaluate()
    amat = _variant_of(w_mat, t_w)
    p = phase_between(amat, bmat)
    if p is None:
        raise AssertionError("equal canonical forms but no phase relation")
    inv_perm = tuple(int(x) for x in np.argsort(t_w.perm))
    c_x = apply_transform(c_b, ClassTransform(inv_perm, t_w.inverted))
    p_eff = p if not t_w.inverted else (-p) % 8
    candidate = Circuit(n, c_x.layers + c_vt.layers)
    phase = (-p_eff) % 8
    if candidate.evaluate() != target.scale_phase(phase):
        raise AssertionError("reconstructed witness failed exact verification")
    return _finalize(candidate), phase


def _variant_of(m: RingMatrix, t: ClassTransform) -> RingMatrix:
    from .canon import variant_matrix

    return variant_matrix(m, t.perm, t.inverted)


def _pick_witness(db, ctx, target, a, b, hits):
    """Min (gate count, encoding) among verified collisions, by gc tiers."""
    hits = sorted(hits, key=lambda h: h.gc_bound)
    best = None
    i = 0
    while i < len(hits):
        tier = hits[i].gc_bound
        tier_hits = [h for h in hits if h.gc_bound == tier]
        i += len(tier_hits)
        results = []
        for h in tier_hits:
            got = _reconstruct(db, ctx, target, a, b, h)
            if got is not None:
                results.append(got)
        if results:
            best = min(results, key=lambda r: (r[0].gate_count(), _encoding_bytes(r[0])))
            break
    return best


def mitm_search(target: RingMatrix, db: CircuitDatabase, max_depth: int,
                jobs: int = 1) -> SearchResult:
    """Minimal-depth synthesis of `target` over the database's gate set.

    Returns a verified witness (up to a recorded global phase) or a
    nonexistence certificate for all depths <= max_depth.
    """
    if db.mode != "classed":
        raise ValueError("depth search needs a classed-mode database")
    _check_target(target, db.n_qubits)
    if max_depth > 2 * db.max_depth:
        raise DatabaseTooShallowError(
            f"max_depth {max_depth} needs database depth "
            f">= {(max_depth + 1) // 2}, have {db.max_depth}"
        )
    p = phase_between(target, RingMatrix.identity(db.n_qubits))
    if p is not None:
        return SearchResult(True, Circuit(db.n_qubits), 0, 0, (-p) % 8, 0)
    ctx = CanonContext(db.n_qubits, classed=True)
    timings: dict[int, float] = {}
    for d in range(1, max_depth + 1):
        t0 = time.perf_counter()
        a, b = d // 2, (d + 1) // 2
        hits = _probe_depth_parallel(db, ctx, target, a, b, jobs)
        got = _pick_witness(db, ctx, target, a, b, hits) if hits else None
        timings[d] = time.perf_counter() - t0
        if got is not None:
            circuit, phase = got
            if circuit.depth != d:
                raise AssertionError("witness depth disagrees with probe depth")
            return SearchResult(True, circuit, circuit.depth, circuit.t_depth(), phase,
                                d, timings)
    return SearchResult(False, None, None, None, None, max_depth, timings)


# -- T-depth search -------------------------------------------------------


def mitm_search_tdepth(target: RingMatrix, cs: CliffordSet, max_tdepth: int,
                       sets: TDepthSets | None = None) -> SearchResult:
    """Minimal-T-depth synthesis over Clifford stages and parallel T stages."""
    _check_target(target, cs.n)
    sets = sets or TDepthSets(cs)
    ctx = sets.ctx
    timings: dict[int, float] = {}

    t0 = time.perf_counter()
    tkey, _ = ctx.keys(target.comps[None].copy(), np.array([target.k], dtype=np.int64))
    idx = cs.lookup(tkey[0])
    timings[0] = time.perf_counter() - t0
    if idx >= 0:
        circ = _finalize(cs.witness_circuit(idx))
        p = phase_between(circ.evaluate(), target)
        if p is None:
            raise AssertionError("Clifford witness failed phase alignment")
        return SearchResult(True, circ, circ.depth, 0, p, 0, timings)

    for q in range(1, max_tdepth + 1):
        t0 = time.perf_counter()
        a, b = q // 2, (q + 1) // 2
        sets.ensure_level(b)
        hits = _tdepth_probe(sets, target, a, b)
        got = _tdepth_pick(sets, target, a, b, hits) if hits else None
        timings[q] = time.perf_counter() - t0
        if got is not None:
            circuit, phase = got
            if circuit.t_depth() != q:
                raise AssertionError("witness T-depth disagrees with probe level")
            return SearchResult(True, circuit, circuit.depth, q, phase, q, timings)
    return SearchResult(False, None, None, None, None, max_tdepth, timings)


def _tdepth_probe(sets: TDepthSets, target: RingMatrix, a: int, b: int,
                  chunk: int = 8192) -> list[tuple]:
    """Collisions for T-depth a + b, tagged by how to rebuild the V side.

    For a == 1 the left Clifford stage and T stage of V are peeled off:
    since every S_i is closed under left Clifford multiplication,
    V'U = (c t w)'U in S_b holds iff (t' c') U itself lands in S_b, so
    probing |Cliffords| x |T stages| products suffices.
    """
    blevel = sets.levels[b - 1]
    hits: list[tuple] = []
    if a == 0:
        for s in range(0, len(sets.cs), chunk):
            rows = np.arange(s, min(s + chunk, len(sets.cs)))
            comps, k = sets.cs.comps[rows], sets.cs.k[rows]
            prod = kernels.matmul_comps(kernels.adjoint_comps(comps), target.comps[None])
            keys, _ = sets.ctx.keys(prod, k + target.k)
            pos = kernels.lookup_sorted(blevel.keys, keys)
            for r in np.nonzero(pos >= 0)[0]:
                hits.append(("clifford", int(rows[r]), int(pos[r])))
        return hits
    if a == 1:
        n_stages = len(sets.stages)
        for t_idx in range(n_stages):
            t_adj = kernels.adjoint_comps(sets.stage_comps[t_idx])
            for s in range(0, len(sets.cs), chunk):
                rows = np.arange(s, min(s + chunk, len(sets.cs)))
                c_adj = kernels.adjoint_comps(sets.cs.comps[rows])
                prod = kernels.matmul_comps(
                    t_adj[None], kernels.matmul_comps(c_adj, target.comps[None])
                )
                k = sets.cs.k[rows] + sets.stage_k[t_idx] + target.k
                keys, _ = sets.ctx.keys(prod, k)
                pos = kernels.lookup_sorted(blevel.keys, keys)
                for r in np.nonzero(pos >= 0)[0]:
                    hits.append(("peel", int(rows[r]), t_idx, int(pos[r])))
        return hits
    for s in range(0, len(sets.levels[a - 1].keys), chunk):
        rows = np.arange(s, min(s + chunk, len(sets.levels[a - 1].keys)))
        comps, k = sets.level_matrices(a, rows)
        prod = kernels.matmul_comps(kernels.adjoint_comps(comps), target.comps[None])
        keys, _ = sets.ctx.keys(prod, k + target.k)
        pos = kernels.lookup_sorted(blevel.keys, keys)
        for r in np.nonzero(pos >= 0)[0]:
            hits.append(("chain", int(rows[r]), int(pos[r])))
    return hits


def _tdepth_pick(sets: TDepthSets, target: RingMatrix, a: int, b: int, hits,
                 shortlist: int = 2000):
    def candidate_layers(hit) -> tuple[bytes, ...]:
        kind = hit[0]
        if kind == "clifford":
            cv = sets.cs.witness_circuit(hit[1])
            cw = sets.witness_circuit(b, hit[2])
        elif kind == "peel":
            cv = Circuit(
                sets.n,
                (sets.stages[hit[2]],)
                + sets.cs.witness_circuit(hit[1]).layers,
            )
            cw = sets.witness_circuit(b, hit[3])
        else:
            cv = sets.witness_circuit(a, hit[1])
            cw = sets.witness_circuit(b, hit[2])
        return cw.layers + cv.layers

    # Shortlist by raw layer counts before exact reconstruction.
    if len(hits) > shortlist:
        hits = sorted(hits, key=lambda h: (len(candidate_layers(h)), h))[:shortlist]
    results = []
    for hit in hits:
        cand = Circuit(sets.n, candidate_layers(hit))
        p = phase_between(cand.evaluate(), target)
        if p is None:
            continue
        results.append((_finalize(cand), p))
    if not results:
        return None
    return min(
        results,
        key=lambda r: (r[0].depth, r[0].gate_count(), _encoding_bytes(r[0])),
    )


# -- ancilla search -------------------------------------------------------


def _subcolumn_keys(n_total: int, ncols: int, comps: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Phase-normalized digests of the leading-column block of a batch."""
    B = comps.shape[0]
    sub = np.ascontiguousarray(comps[:, :, :, :ncols])
    dim = comps.shape[-1]
    flat = np.moveaxis(sub.reshape(B, 4, dim * ncols), 1, 2)  # (B, E, 4)
    nz = (flat != 0).any(axis=2)
    if not nz.any(axis=1).all():
        raise ValueError("all-zero column block")
    first = np.argmax(nz, axis=1)
    m0 = flat[np.arange(B), first]
    vals = kernels.scalar_mul(kernels.conj_comps(m0, axis=-1)[:, None, :], flat)
    sde, norm = kernels.normalize_entries(vals, (2 * np.asarray(k, dtype=np.int64))[:, None])
    fields = np.concatenate([sde[:, :, None], norm], axis=2).reshape(B, -1)
    header = np.tile(np.array([[n_total, ncols]], dtype=np.int64), (B, 1))
    h1, h2 = kernels.digest_rows(np.concatenate([header, fields], axis=1))
    return kernels.make_keys(h1, h2)


def _subblock_canonical(m: RingMatrix, ncols: int) -> tuple[np.ndarray, int]:
    """Reduced (comps, k) of the leading columns, canonical per value."""
    sub = np.ascontiguousarray(m.comps[:, :, :ncols])
    comps, k = kernels.reduce_global(sub[None], np.array([m.k], dtype=np.int64))
    return comps[0], int(k[0])


def _subcols_equal_up_to_phase(a: RingMatrix, b: RingMatrix, ncols: int) -> int | None:
    ca, ka = _subblock_canonical(a, ncols)
    for p in range(8):
        cb, kb = _subblock_canonical(b.scale_phase(p), ncols)
        if ka == kb and np.array_equal(ca, cb):
            return p
    return None


def ancilla_search(target: RingMatrix, m: int, db: CircuitDatabase, max_depth: int,
                   chunk: int = 4096) -> SearchResult:
    """Synthesis with m zero-initialized, zero-returned ancilla wires.

    Collects every collision up to max_depth on the ancilla-zero column
    block of a full-mode database and returns the best witness by
    (T-depth, total depth, gate count, encoding); matching is exact up to
    one global power of w on the column block.
    """
    if db.mode != "full":
        raise ValueError("ancilla search needs a full-mode (phase-pruned) database")
    n = target.n_qubits
    if db.n_qubits != n + m:
        raise ValueError(f"database has {db.n_qubits} wires, need {n + m}")
    if not target.is_unitary():
        raise ValueError("target matrix is not unitary")
    if max_depth > 2 * db.max_depth:
        raise DatabaseTooShallowError(
            f"max_depth {max_depth} needs database depth "
            f">= {(max_depth + 1) // 2}, have {db.max_depth}"
        )
    big = RingMatrix.identity(m).tensor(target) if m else target
    total = n + m
    ncols = 1 << n
    table = db.table
    timings: dict[int, float] = {}
    t0 = time.perf_counter()

    # Secondary per-level multimap index on the ancilla-zero column block.
    level_sub: list[tuple[np.ndarray, np.ndarray]] = []
    level_mats: list[tuple[np.ndarray, np.ndarray]] = []
    for lv in db.levels[: max_depth]:
        keys_parts, comps_parts, k_parts = [], [], []
        for s in range(0, len(lv), chunk):
            ids = lv.layer_ids[s : s + chunk].astype(np.int64)
            comps, k = _batch_evaluate_ids(table, ids)
            keys_parts.append(_subcolumn_keys(total, ncols, comps, k))
            comps_parts.append(comps)
            k_parts.append(k)
        keys = np.concatenate(keys_parts) if keys_parts else np.empty(0, kernels.KEY_DTYPE)
        order = np.argsort(keys, kind="stable")
        level_sub.append((keys[order], order.astype(np.int64)))
        level_mats.append(
            (np.concatenate(comps_parts) if comps_parts else None,
             np.concatenate(k_parts) if k_parts else None)
        )

    best = None  # (sort key, circuit, phase)

    def consider(circuit: Circuit, phase: int):
        nonlocal best
        sched = _finalize(circuit)
        key = (sched.t_depth(), sched.depth, sched.gate_count(), _encoding_bytes(sched))
        if best is None or key < best[0]:
            best = (key, sched, phase)

    ident = RingMatrix.identity(total)
    p0 = _subcols_equal_up_to_phase(big, ident, ncols)
    if p0 is not None:
        consider(Circuit(total, n_ancillas=m), (-p0) % 8)

    D = min(db.max_depth, max_depth)
    for a in range(0, D + 1):
        if a == 0:
            v_comps = ident.comps[None].copy()
            v_k = np.zeros(1, dtype=np.int64)
            v_positions = np.array([-1])
        else:
            v_comps, v_k = level_mats[a - 1]
            if v_comps is None:
                continue
            v_positions = np.arange(len(v_k))
        for s in range(0, len(v_positions), chunk):
            rows = slice(s, min(s + chunk, len(v_positions)))
            vc = v_comps[rows]
            vk = v_k[rows]
            prod = kernels.matmul_comps(kernels.adjoint_comps(vc), big.comps[None])
            pkeys = _subcolumn_keys(total, ncols, prod, vk + big.k)
            for b in range(0, D + 1):
                if a + b > max_depth or a + b == 0:
                    continue
                if b == 0:
                    wkeys = _subcolumn_keys(total, ncols, ident.comps[None].copy(),
                                            np.zeros(1, dtype=np.int64))
                    skeys, sorder = wkeys, np.array([-1])
                else:
                    skeys, sorder = level_sub[b - 1]
                left = np.searchsorted(skeys, pkeys, side="left")
                right = np.searchsorted(skeys, pkeys, side="right")
                for r in np.nonzero(right > left)[0]:
                    v_pos = int(v_positions[s + r])
                    c_v = Circuit(total) if v_pos < 0 else db.record(a, v_pos).circuit
                    for w_sorted in range(int(left[r]), int(right[r])):
                        w_pos = int(sorder[w_sorted])
                        c_w = Circuit(total) if w_pos < 0 else db.record(b, w_pos).circuit
                        cand = Circuit(total, c_w.layers + c_v.layers, n_ancillas=m)
                        p = _subcols_equal_up_to_phase(cand.evaluate(), big, ncols)
                        if p is None:
                            continue
                        consider(cand, (-p) % 8)
    timings[max_depth] = time.perf_counter() - t0
    if best is None:
        return SearchResult(False, None, None, None, None, max_depth, timings)
    key, circuit, phase = best
    return SearchResult(True, circuit, circuit.depth, circuit.t_depth(), phase,
                        max_depth, timings)


# -- peephole and cost accounting ----------------------------------------


def peephole(circuit: Circuit, dbs: dict[int, CircuitDatabase], window: int = 4,
             max_width: int = 2, max_passes: int = 20) -> tuple[Circuit, int]:
    """Left-to-right window re-synthesis; strictly decreasing (depth, gates).

    Only windows whose non-identity gates fit inside <= max_width wires are
    rewritten, so splices are exact.  Returns the optimized circuit and the
    accumulated global-phase exponent (fix with exact_phase_fix).
    """
    cur = circuit.scheduled()
    total_phase = 0
    for _ in range(max_passes):
        changed = False
        i = 0
        while i < cur.depth:
            replaced = False
            for w in range(min(window, cur.depth - i), 0, -1):
                span = cur.layers[i : i + w]
                wires = sorted(
                    {q for layer in span for q, byte in enumerate(layer) if byte & 0x0F}
                )
                if not wires or len(wires) > max_width or len(wires) not in dbs:
                    continue
                sub = _extract_window(cur.n_qubits, span, wires)
                sub_target = sub.evaluate()
                db = dbs[len(wires)]
                bound = min(w, 2 * db.max_depth)
                res = mitm_search(sub_target, db, bound)
                if not res.found:
                    continue
                old_gc = sum(len(_nonid(layer)) for layer in span)
                if (res.depth, res.circuit.gate_count()) >= (w, old_gc):
                    continue
                patched = _splice_window(cur, i, w, res.circuit, wires)
                cur = patched.scheduled()
                total_phase = (total_phase + res.phase_exponent) % 8
                changed = True
                replaced = True
                break
            if not replaced:
                i += 1
        if not changed:
            return cur, total_phase
    return cur, total_phase


def _nonid(layer: bytes):
    return [q for q, b in enumerate(layer) if b & 0x0F]


def _extract_window(n: int, span, wires) -> Circuit:
    pos = {w: i for i, w in enumerate(wires)}
    gate_list = []
    for layer in span:
        from .gates import layer_gates

        for name, gw in layer_gates(layer):
            gate_list.append((name, tuple(pos[x] for x in gw)))
    from .gates import schedule

    return schedule(len(wires), gate_list)


def _splice_window(cur: Circuit, i: int, w: int, replacement: Circuit, wires) -> Circuit:
    from .gates import layer_gates, schedule

    gate_list = []
    for layer in cur.layers[:i]:
        gate_list.extend(layer_gates(layer))
    for layer in replacement.layers:
        for name, gw in layer_gates(layer):
            gate_list.append((name, tuple(wires[x] for x in gw)))
    for layer in cur.layers[i + w :]:
        gate_list.extend(layer_gates(layer))
    return schedule(cur.n_qubits, gate_list, n_ancillas=cur.n_ancillas)


CONTROLLED_COST_MATRIX = np.array(
    [[2, 0, 2, 4], [2, 0, 0, 2], [1, 2, 6, 12], [2, 3, 7, 9]], dtype=np.int64
)
CONTROLLED_TDEPTH_WEIGHTS = np.array([1, 2, 3, 5], dtype=np.int64)


def controlled_cost(x) -> tuple[tuple[int, int, int, int], int]:
    """Gate cost of the controlled version of a circuit with cost vector x.

    Returns (A x, T-depth bound) for the fixed per-gate controlled
    substitution costs.
    """
    v = np.asarray(x, dtype=np.int64)
    if v.shape != (4,):
        raise ValueError("cost vector must have 4 entries (H, P, CNOT, T)")
    out = CONTROLLED_COST_MATRIX @ v
    bound = int(CONTROLLED_TDEPTH_WEIGHTS @ v)
    return (int(out[0]), int(out[1]), int(out[2]), int(out[3])), bound
