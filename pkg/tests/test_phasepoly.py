import numpy as np
import pytest

from mitmsynth.gates import Circuit, schedule
from mitmsynth.phasepoly import (
    PhasePolynomial,
    cnot_synth,
    extract,
    gf2_rank,
    monomial_action,
    parallelize,
    partition,
    synthesize,
    theorem_stage_bound,
)

rng = np.random.default_rng(2024)


def random_cnot_t(n, n_gates, rng):
    gates = []
    for _ in range(n_gates):
        if n >= 2 and rng.random() < 0.5:
            a, b = rng.choice(n, size=2, replace=False)
            gates.append(("CNOT", (int(a), int(b))))
        else:
            gates.append(("T", (int(rng.integers(0, n)),)))
    return schedule(n, gates)


def pp_action(pp: PhasePolynomial, x: int) -> tuple[int, int]:
    out = 0
    for w, row in enumerate(pp.g):
        out |= (bin(row & x).count("1") & 1) << w
    t = sum(bin(f & x).count("1") & 1 for f in pp.terms) % 8
    return out, t


def test_extract_examples():
    pp = extract(schedule(1, [("T", (0,))]))
    assert pp.terms == [0b1] and pp.g == [0b1]
    pp = extract(schedule(2, [("CNOT", (0, 1)), ("T", (1,)), ("CNOT", (0, 1))]))
    assert pp.terms == [0b11] and pp.g == [0b01, 0b10]
    pp = extract(schedule(2, [("CNOT", (0, 1)), ("CNOT", (1, 0))]))
    assert pp.terms == [] and gf2_rank(pp.g) == 2


def test_extract_rejects_other_gates():
    with pytest.raises(ValueError):
        extract(schedule(1, [("H", (0,))]))
    with pytest.raises(ValueError):
        extract(schedule(1, [("TDG", (0,))]))


def test_extract_matches_monomial_action():
    # The phase-polynomial semantics reproduce basis-state simulation.
    for _ in range(30):
        n = int(rng.integers(1, 5))
        c = random_cnot_t(n, int(rng.integers(1, 26)), rng)
        pp = extract(c)
        state, phase = monomial_action(c)
        for x in range(1 << n):
            out, t = pp_action(pp, x)
            assert state[x] == out
            assert phase[x] == t


def test_extract_matches_exact_unitary_small():
    # Full matrix evaluation aligns with the monomial oracle.
    for _ in range(5):
        c = random_cnot_t(3, 12, rng)
        u = c.evaluate()
        state, phase = monomial_action(c)
        arr = u.to_numpy()
        for x in range(8):
            col = arr[:, x]
            nz = np.nonzero(np.abs(col) > 1e-9)[0]
            assert len(nz) == 1 and nz[0] == state[x]
            assert abs(col[state[x]] - np.exp(1j * np.pi / 4 * phase[x])) < 1e-9


def test_partition_examples():
    terms = [0b001, 0b010, 0b100, 0b011, 0b101, 0b110, 0b111]
    assert len(partition(terms, 4, 3)) == 1
    assert len(partition([0b1] * 7, 0, 1)) == 7
    assert partition([], 3, 2) == []


def test_partition_guarantees():
    for _ in range(50):
        n = int(rng.integers(1, 5))
        m = int(rng.integers(0, 4))
        k = int(rng.integers(1, 20))
        terms = [int(rng.integers(1, 1 << n)) for _ in range(k)]
        parts = partition(terms, m, n)
        flat = sorted(f for p in parts for f in p)
        assert flat == sorted(terms)
        for p in parts:
            assert len(p) <= m + gf2_rank(p)
        for p in parts[:-1]:
            assert len(p) >= m + 1
        assert len(parts) <= theorem_stage_bound(k, m)


def test_partition_rejects_zero():
    with pytest.raises(ValueError):
        partition([0], 1, 2)


def test_cnot_synth_examples():
    assert cnot_synth([0b01, 0b10]).depth == 0
    c = cnot_synth([0b01, 0b11])
    assert c.gate_list() == [("CNOT", (0, 1))]
    for _ in range(20):
        n = 6
        rows = _random_invertible(n, rng)
        c = cnot_synth(rows)
        got = [1 << w for w in range(n)]
        for name, (a, b) in c.gate_list():
            assert name == "CNOT"
            got[b] ^= got[a]
        assert got == rows


def _random_invertible(n, rng):
    while True:
        rows = [int(rng.integers(1, 1 << n)) for _ in range(n)]
        if gf2_rank(rows) == n:
            return rows


def test_cnot_synth_rejects_singular():
    with pytest.raises(ValueError):
        cnot_synth([0b01, 0b01])


def test_cnot_synth_basis_action():
    rows = [0b110, 0b010, 0b101]
    assert gf2_rank(rows) == 3
    c = cnot_synth(rows)
    state, phase = monomial_action(c)
    assert (phase == 0).all()
    for x in range(8):
        want = 0
        for w in range(3):
            want |= (bin(rows[w] & x).count("1") & 1) << w
        assert state[x] == want


def _check_parallelized(c: Circuit, m: int, merged: bool = False):
    n = c.n_qubits
    out = parallelize(c, m, merge_phases=merged)
    assert out.n_qubits == n + m and out.n_ancillas == m
    state0, phase0 = monomial_action(c)
    state1, phase1 = monomial_action(out)
    for x in range(1 << n):
        assert state1[x] == state0[x], "data action changed"
        assert (state1[x] >> n) == 0, "ancillas not restored"
        assert phase1[x] == phase0[x], "phases changed"
    # Ancilla wires act as identity on the rest of the space.
    for x in range(1 << (n + m)):
        assert (state1[x] >> n) == (x >> n)
    return out


def test_parallelize_single_t():
    out = _check_parallelized(schedule(1, [("T", (0,))]), 0)
    assert out.t_depth() == 1


def test_parallelize_seven_distinct_with_four_ancillas():
    gates = []
    # One T on each nonzero functional of three inputs.
    gates.append(("T", (0,)))
    gates.append(("T", (1,)))
    gates.append(("T", (2,)))
    for a, b in ((0, 1), (0, 2), (1, 2)):
        gates.append(("CNOT", (a, b)))
        gates.append(("T", (b,)))
        gates.append(("CNOT", (a, b)))
    gates.append(("CNOT", (0, 2)))
    gates.append(("CNOT", (1, 2)))
    gates.append(("T", (2,)))
    gates.append(("CNOT", (1, 2)))
    gates.append(("CNOT", (0, 2)))
    c = schedule(3, gates)
    pp = extract(c)
    assert sorted(pp.terms) == [1, 2, 3, 4, 5, 6, 7]
    out = _check_parallelized(c, 4)
    assert out.t_depth() == 1


def test_parallelize_adder_style_eight_terms():
    # Eight distinct rank-4 functionals parallelize to one T stage with
    # four ancillas, the carry-adder pattern.
    pp = PhasePolynomial(4, [0b0001, 0b0010, 0b0100, 0b1000, 0b0011, 0b0101, 0b0110, 0b0111], list((1 << w) for w in range(4)))
    out = synthesize(pp, 4)
    assert out.t_depth() == 1
    state, phase = monomial_action(out)
    for x in range(16):
        _, t = pp_action(pp, x)
        assert phase[x] == t and state[x] == x


def test_parallelize_theorem_bound_and_roundtrip():
    for _ in range(60):
        n = int(rng.integers(1, 5))
        m = int(rng.integers(0, 4))
        c = random_cnot_t(n, int(rng.integers(1, 26)), rng)
        out = _check_parallelized(c, m)
        k = extract(c).t_count
        assert out.t_depth() <= theorem_stage_bound(k, m)


def test_parallelize_exact_unitary_small():
    # On ancilla-zero columns the exact matrix equals the original unitary.
    c = random_cnot_t(2, 10, rng)
    out = parallelize(c, 1)
    big = out.evaluate()
    small = c.evaluate()
    for x in range(4):
        for r in range(4):
            assert big.entry(r, x) == small.entry(r, x)
        for r in range(4, 8):
            assert big.entry(r, x).is_zero


def test_merge_phases_mode():
    c = schedule(1, [("T", (0,)), ("T", (0,))])
    out = parallelize(c, 0, merge_phases=True)
    state0, phase0 = monomial_action(c)
    state1, phase1 = monomial_action(out)
    assert (state0 == state1[: 2]).all() and (phase0 == phase1[: 2]).all()
    assert out.t_depth() == 0  # two T gates merged into one P
    assert out.cost_vector()[3] == 0
