import numpy as np
import pytest

from mitmsynth import kernels
from mitmsynth.canon import CanonContext, canonical_rep
from mitmsynth.db import CircuitDatabase, DbFormatError, generate
from mitmsynth.gates import CLIFFORD_T, enumerate_layers, gate_matrix, layer_table, schedule
from mitmsynth.matrix import RingMatrix


def brute_force_level_keys(n: int, max_depth: int, classed: bool = True) -> list[set[bytes]]:
    """Minimal depth per canonical key by exhaustive layer-sequence search.

    Extends every exact unitary reachable in d-1 layers by every layer
    (identity included, so depth sets are cumulative) with no equivalence
    pruning; a class's minimal depth is the first depth its key appears.
    """
    table = layer_table(n, CLIFFORD_T)
    ctx = CanonContext(n, classed)
    dim = 1 << n
    seen_mats = set()
    seen_keys = set()
    per_level: list[set[bytes]] = []
    frontier = [(np.stack([np.eye(dim, dtype=np.int64)] + [np.zeros((dim, dim), np.int64)] * 3), 0)]
    for _ in range(max_depth):
        products = []
        ks = []
        for comps, k in frontier:
            prod = kernels.matmul_comps(table.comps, comps[None])
            products.append(prod)
            ks.append(table.k + k)
        comps = np.concatenate(products)
        k = np.concatenate(ks)
        comps, k = kernels.reduce_global(comps, k)
        new_frontier = []
        new_keys = set()
        keys, _ = ctx.keys(comps, k)
        for i in range(len(comps)):
            sig = (int(k[i]), comps[i].tobytes())
            if sig in seen_mats:
                continue
            seen_mats.add(sig)
            new_frontier.append((comps[i], int(k[i])))
            kb = bytes(keys[i].tobytes())
            if kb not in seen_keys:
                seen_keys.add(kb)
                new_keys.add(kb)
        per_level.append(new_keys)
        frontier = new_frontier
    return per_level


def db_level_keys(db: CircuitDatabase) -> list[set[bytes]]:
    return [set(bytes(x.tobytes()) for x in lv.keys) for lv in db.levels]


def test_single_qubit_level1_classes():
    db = generate(1, CLIFFORD_T, max_depth=1)
    # Independent enumeration: canonical keys of the six depth-1 layers.
    expected = set()
    for layer in enumerate_layers(1, CLIFFORD_T):
        from mitmsynth.gates import layer_matrix

        expected.add(canonical_rep(layer_matrix(layer))[0].fingerprint())
    assert db.counts() == [len(expected)]
    # H is self-inverse, P pairs with Pdg, T with Tdg; plus the identity.
    assert db.counts() == [4]


def test_two_qubit_level_counts_shallow():
    db = generate(2, CLIFFORD_T, max_depth=3)
    assert db.counts() == [14, 104, 901]


def test_oracle_equivalence_depth3():
    db = generate(2, CLIFFORD_T, max_depth=3)
    oracle = brute_force_level_keys(2, 3, classed=True)
    got = db_level_keys(db)
    for lvl, (a, b) in enumerate(zip(oracle, got), start=1):
        assert a == b, f"level {lvl} key sets differ"


def test_oracle_equivalence_full_mode_depth2():
    db = generate(2, CLIFFORD_T, max_depth=2, mode="full")
    oracle = brute_force_level_keys(2, 2, classed=False)
    assert db_level_keys(db) == oracle


def test_record_circuits_reproduce_keys():
    db = generate(2, CLIFFORD_T, max_depth=3)
    rng = np.random.default_rng(9)
    for level in (1, 2, 3):
        lv = db.levels[level - 1]
        for pos in rng.integers(0, len(lv), size=min(10, len(lv))):
            rec = db.record(level, int(pos))
            assert rec.circuit.depth == level
            rep, _ = canonical_rep(rec.circuit.evaluate())
            assert rep.fingerprint() == rec.key
            assert rec.gate_count == rec.circuit.gate_count()


def test_minimal_depth_storage_unique_keys():
    db = generate(2, CLIFFORD_T, max_depth=3)
    seen = set()
    for lv in db.levels:
        for key in lv.keys:
            kb = bytes(key.tobytes())
            assert kb not in seen
            seen.add(kb)


def test_lookup():
    db = generate(2, CLIFFORD_T, max_depth=3)
    cnot = schedule(2, [("CNOT", (0, 1))]).evaluate()
    key = canonical_rep(cnot)[0].fingerprint()
    hit = db.lookup(key)
    assert hit is not None and hit[0] == 1
    assert db.lookup(b"\x13" * 16) is None


def test_determinism_and_roundtrip(tmp_path):
    a = generate(2, CLIFFORD_T, max_depth=3)
    b = generate(2, CLIFFORD_T, max_depth=3, chunk_reps=7)
    pa, pb, pc = (str(tmp_path / f"{x}.qcdb") for x in "abc")
    a.save(pa)
    b.save(pb)
    assert open(pa, "rb").read() == open(pb, "rb").read()
    loaded = CircuitDatabase.load(pa)
    assert loaded.counts() == a.counts()
    loaded.save(pc)
    assert open(pc, "rb").read() == open(pa, "rb").read()


def test_parallel_generation_matches(tmp_path):
    a = generate(2, CLIFFORD_T, max_depth=3)
    b = generate(2, CLIFFORD_T, max_depth=3, jobs=2, chunk_reps=17)
    pa, pb = str(tmp_path / "a.qcdb"), str(tmp_path / "b.qcdb")
    a.save(pa)
    b.save(pb)
    assert open(pa, "rb").read() == open(pb, "rb").read()


def test_format_errors(tmp_path):
    db = generate(1, CLIFFORD_T, max_depth=2)
    p = str(tmp_path / "x.qcdb")
    db.save(p)
    blob = open(p, "rb").read()

    bad = b"NOPE!!" + blob[6:]
    open(p, "wb").write(bad)
    with pytest.raises(DbFormatError) as e:
        CircuitDatabase.load(p)
    assert e.value.kind == "magic"

    bad = blob[:6] + bytes([99]) + blob[7:]
    open(p, "wb").write(bad)
    with pytest.raises(DbFormatError) as e:
        CircuitDatabase.load(p)
    assert e.value.kind == "version"

    flipped = bytearray(blob)
    flipped[20] ^= 0xFF
    open(p, "wb").write(bytes(flipped))
    with pytest.raises(DbFormatError) as e:
        CircuitDatabase.load(p)
    assert e.value.kind == "checksum"

    open(p, "wb").write(blob[:-12])
    with pytest.raises(DbFormatError) as e:
        CircuitDatabase.load(p)
    assert e.value.kind in ("truncation", "checksum")


def test_stored_circuit_gate_counts_are_minimal_choice():
    # The identity class record at level 1 must be the all-identity layer.
    db = generate(2, CLIFFORD_T, max_depth=1)
    ident_key = canonical_rep(RingMatrix.identity(2))[0].fingerprint()
    hit = db.lookup(ident_key)
    assert hit is not None
    level, rec = hit
    assert level == 1 and rec.gate_count == 0
