import numpy as np
import pytest

from mitmsynth.gates import (
    CLIFFORD_ONLY,
    CLIFFORD_T,
    Circuit,
    enumerate_layers,
    layer_matrix,
    layer_table,
    schedule,
)
from mitmsynth.matrix import RingMatrix

rng = np.random.default_rng(77)


def count_formula(n, singles=6):
    """Sum over matchings: ways to pick j disjoint ordered CNOT pairs."""
    import math

    total = 0
    for j in range(n // 2 + 1):
        ways = 1
        remaining = n
        for _ in range(j):
            ways *= remaining * (remaining - 1)
            remaining -= 2
        ways //= math.factorial(j)
        total += ways * singles ** (n - 2 * j)
    return total


def test_layer_counts():
    assert len(enumerate_layers(1, CLIFFORD_T)) == 6
    assert len(enumerate_layers(2, CLIFFORD_T)) == 38
    assert len(enumerate_layers(3, CLIFFORD_T)) == 252
    assert len(enumerate_layers(4, CLIFFORD_T)) == 1740


def test_layer_counts_match_matching_formula():
    for n in (1, 2, 3, 4):
        assert len(enumerate_layers(n, CLIFFORD_T)) == count_formula(n, 6)
        assert len(enumerate_layers(n, CLIFFORD_ONLY)) == count_formula(n, 4)


def test_layers_include_identity_and_are_unique():
    layers = enumerate_layers(2, CLIFFORD_T)
    assert bytes(2) in layers
    assert len(set(layers)) == len(layers)


def test_too_many_qubits_rejected():
    with pytest.raises(ValueError):
        enumerate_layers(15, CLIFFORD_T)


def test_all_layers_unitary():
    for layer in enumerate_layers(2, CLIFFORD_T):
        assert layer_matrix(layer).is_unitary()


def test_evaluate_examples():
    assert Circuit(2).evaluate() == RingMatrix.identity(2)
    cnot = schedule(2, [("CNOT", (0, 1))])
    assert cnot.evaluate() == layer_matrix(cnot.layers[0])
    # Alternating H, Pdg on one qubit three times gives a pure phase.
    c = schedule(1, [("PDG", (0,)), ("H", (0,))] * 3)
    assert c.evaluate() == RingMatrix.identity(1).scale_phase(7)


def test_invert():
    t = schedule(1, [("T", (0,))])
    assert t.inverse().gate_list() == [("TDG", (0,))]
    c = schedule(2, [("H", (0,)), ("CNOT", (0, 1))])
    inv = c.inverse()
    assert inv.gate_list() == [("CNOT", (0, 1)), ("H", (0,))]
    assert inv.inverse() == c
    for _ in range(10):
        table = layer_table(2)
        ids = rng.integers(0, len(table.layers), size=4)
        c = table.circuit_from_ids(ids)
        assert c.inverse().evaluate() == c.evaluate().adjoint()


def test_relabel():
    c = schedule(2, [("CNOT", (0, 1))])
    assert c.relabel([0, 1]) == c
    swapped = c.relabel([1, 0])
    assert swapped.gate_list() == [("CNOT", (1, 0))]
    assert swapped.depth == c.depth
    for _ in range(10):
        table = layer_table(3)
        ids = rng.integers(0, len(table.layers), size=3)
        c = table.circuit_from_ids(ids)
        perm = list(rng.permutation(3))
        assert c.relabel(perm).evaluate() == c.evaluate().permute_qubits(perm)


def test_schedule_examples():
    c = schedule(2, [("H", (0,)), ("H", (1,))])
    assert c.depth == 1
    c = schedule(2, [("H", (0,)), ("CNOT", (0, 1)), ("H", (1,))])
    assert c.depth == 3
    # Fourier-style dependency chain on 3 wires has critical path 5.
    c = schedule(
        3,
        [
            ("H", (0,)),
            ("CNOT", (0, 1)),
            ("H", (1,)),
            ("CNOT", (0, 2)),
            ("CNOT", (1, 2)),
            ("H", (2,)),
        ],
    )
    assert c.depth == 5


def test_schedule_idempotent():
    for _ in range(10):
        table = layer_table(3)
        ids = rng.integers(0, len(table.layers), size=4)
        c = table.circuit_from_ids(ids)
        s = c.scheduled()
        assert s.scheduled() == s
        assert s.evaluate() == c.evaluate()


def test_schedule_rejects_bad_wires():
    with pytest.raises(ValueError):
        schedule(2, [("H", (9,))])
    with pytest.raises(ValueError):
        schedule(2, [("CNOT", (1, 1))])
    with pytest.raises(ValueError):
        schedule(2, [("FOO", (0,))])


def test_t_depth():
    c = schedule(2, [("H", (0,)), ("CNOT", (0, 1)), ("P", (1,))])
    assert c.t_depth() == 0
    c = schedule(2, [("T", (0,)), ("T", (1,))])
    assert c.depth == 1 and c.t_depth() == 1
    c = schedule(1, [("T", (0,)), ("H", (0,)), ("T", (0,))])
    assert c.t_depth() == 2


def test_cost_vector():
    assert Circuit(2).cost_vector() == (0, 0, 0, 0)
    c = schedule(
        2, [("H", (0,)), ("PDG", (1,)), ("CNOT", (0, 1)), ("T", (0,)), ("TDG", (1,))]
    )
    assert c.cost_vector() == (1, 1, 1, 2)
    assert c.inverse().cost_vector() == c.cost_vector()
