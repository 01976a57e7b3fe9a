import numpy as np
import pytest

from mitmsynth.cliffords import (
    CliffordSet,
    ResourceBudgetError,
    TDepthSets,
    clifford_generate,
    t_stage_layers,
)
from mitmsynth.gates import CLIFFORD_ONLY, layer_table, schedule
from mitmsynth.matrix import RingMatrix
from mitmsynth.search import mitm_search_tdepth
from mitmsynth.targets import build_target

rng = np.random.default_rng(4242)


@pytest.fixture(scope="module")
def cs1():
    return clifford_generate(1)


@pytest.fixture(scope="module")
def cs2():
    return clifford_generate(2)


@pytest.fixture(scope="module")
def sets2(cs2):
    return TDepthSets(cs2)


def test_clifford_counts(cs1, cs2):
    assert len(cs1) == 24
    assert len(cs2) == 11_520


def test_clifford_refuses_three_qubits_without_flag():
    with pytest.raises(ResourceBudgetError):
        clifford_generate(3)


def test_clifford_witnesses_evaluate_into_set(cs2):
    table = layer_table(2, CLIFFORD_ONLY)
    for idx in rng.integers(0, len(cs2), size=10):
        c = cs2.witness_circuit(int(idx))
        u = c.evaluate()
        assert np.array_equal(u.comps, cs2.comps[int(idx)]) and u.k == cs2.k[int(idx)]


def test_t_stage_layers():
    assert t_stage_layers(1) == [bytes([4])]
    assert len(t_stage_layers(2)) == 3
    assert len(t_stage_layers(3)) == 7


def test_random_clifford_has_tdepth_zero(cs2, sets2):
    table = layer_table(2, CLIFFORD_ONLY)
    for _ in range(5):
        ids = rng.integers(0, len(table.layers), size=4)
        u = table.circuit_from_ids(ids).evaluate()
        res = mitm_search_tdepth(u, cs2, 1, sets=sets2)
        assert res.found and res.t_depth == 0
        assert res.verify_against(u)


def test_single_t_target(cs1):
    t = schedule(1, [("T", (0,))]).evaluate()
    res = mitm_search_tdepth(t, cs1, 2)
    assert res.found and res.t_depth == 1
    assert res.verify_against(t)


def test_inserted_t_layers_bound(cs2, sets2):
    # k interleaved T stages give targets of T-depth at most k.
    table = layer_table(2, CLIFFORD_ONLY)
    for k in (1, 2):
        for _ in range(3):
            gates = []
            for _ in range(k):
                ids = rng.integers(0, len(table.layers), size=2)
                for i in ids:
                    gates.extend(
                        [(n, w) for n, w in _layer_gates(table.layers[int(i)])]
                    )
                gates.append(("T", (int(rng.integers(0, 2)),)))
            c = schedule(2, gates)
            u = c.evaluate()
            res = mitm_search_tdepth(u, cs2, 2, sets=sets2)
            assert res.found and res.t_depth <= k
            assert res.verify_against(u)


def _layer_gates(layer):
    from mitmsynth.gates import layer_gates

    return layer_gates(layer)


def test_controlled_z_tdepth_zero(cs2, sets2):
    res = mitm_search_tdepth(build_target("cz"), cs2, 1, sets=sets2)
    assert res.found and res.t_depth == 0
    assert res.verify_against(build_target("cz"))


def test_controlled_h_tdepth_one(cs2, sets2):
    u = build_target("ch")
    res = mitm_search_tdepth(u, cs2, 1, sets=sets2)
    assert res.found and res.t_depth == 1
    assert res.verify_against(u)
    assert res.circuit.t_depth() == 1


def test_budget_error_on_deep_levels(cs2, sets2):
    u = schedule(2, [("T", (0,)), ("H", (0,)), ("T", (0,)), ("H", (0,)), ("T", (0,))])
    with pytest.raises(ResourceBudgetError):
        # T-depth 3 search needs S_2, which is over budget on 2 qubits.
        mitm_search_tdepth(u.evaluate(), cs2, 3, sets=sets2)


def test_single_qubit_deeper_levels(cs1):
    # On one qubit S_2 is tiny, so deeper probes are allowed.
    c = schedule(1, [("T", (0,)), ("H", (0,)), ("T", (0,)), ("H", (0,)), ("T", (0,))])
    u = c.evaluate()
    res = mitm_search_tdepth(u, cs1, 4)
    assert res.found and res.t_depth <= 3
    assert res.verify_against(u)
