import cmath

import pytest
from hypothesis import given, strategies as st

from mitmsynth.kernels import RingOverflowError
from mitmsynth.ring import OmegaInt, RingScalar, cmp, normalize

W = cmath.exp(1j * cmath.pi / 4)

small = st.integers(-40, 40)
scalars = st.builds(RingScalar.make, small, small, small, small, st.integers(0, 6))


def close(x: complex, y: complex, tol=1e-12) -> bool:
    return abs(x - y) <= tol * max(1.0, abs(x), abs(y))


def test_add_examples():
    one = RingScalar.make(1, 0, 0, 0)
    assert (one + RingScalar.make(-1, 0, 0, 0)).is_zero
    # 1/sqrt2 + 1/sqrt2 = sqrt2 = w - w^3
    half = RingScalar.make(1, 0, 0, 0, 1)
    assert (half + half) == RingScalar.make(0, 1, 0, -1)
    assert RingScalar.make(0, 1, 0, 0) + RingScalar.make(0, 0, 0, 1) == RingScalar.make(0, 1, 0, 1)


def test_mul_examples():
    sqrt2 = RingScalar.make(0, 1, 0, -1)
    assert sqrt2 * sqrt2 == RingScalar.make(2, 0, 0, 0)
    assert RingScalar.omega(1) * RingScalar.omega(3) == RingScalar.make(-1, 0, 0, 0)
    half = RingScalar.make(1, 0, 0, 0, 1)
    prod = half * half
    assert prod.to_list() == [1, 0, 0, 0, 2]
    assert close(prod.to_complex(), 0.5)


def test_conj_examples():
    w = RingScalar.omega(1)
    assert w.conj() == RingScalar.make(0, 0, 0, -1)
    real = RingScalar.make(5, 0, 0, 0, 3)
    assert real.conj() == real


@given(scalars)
def test_conj_involution(x):
    assert x.conj().conj() == x


def test_normalize_examples():
    assert normalize(OmegaInt(2, 0, 2, 0), 2) == RingScalar.make(1, 0, 1, 0)
    assert normalize(OmegaInt(0, 1, 0, -1), 1) == RingScalar.one()
    assert normalize(OmegaInt(1, 0, 0, 0), 1).to_list() == [1, 0, 0, 0, 1]
    # zero collapses to sde 0 regardless of the starting exponent
    assert normalize(OmegaInt(0, 0, 0, 0), 5) == RingScalar.zero()


@given(scalars)
def test_normalize_idempotent_and_value_preserving(x):
    renorm = normalize(x.num, x.sde)
    assert renorm == x
    assert close(renorm.to_complex(), x.to_complex())


def test_cmp_total_order():
    zero = RingScalar.zero()
    one = RingScalar.one()
    assert cmp(zero, one) == -1
    assert cmp(one, one) == 0
    assert cmp(one, RingScalar.make(1, 0, 0, 0, 1)) == -1  # smaller sde first


@given(scalars, scalars)
def test_cmp_antisymmetric(x, y):
    assert cmp(x, y) == -cmp(y, x)
    if cmp(x, y) == 0:
        assert x == y


@given(scalars, scalars)
def test_homomorphism_add_mul(x, y):
    assert close((x + y).to_complex(), x.to_complex() + y.to_complex(), 1e-9)
    assert close((x * y).to_complex(), x.to_complex() * y.to_complex(), 1e-9)


@given(scalars)
def test_abs_square_nonnegative(x):
    v = (x * x.conj()).to_complex()
    assert abs(v.imag) < 1e-9
    assert v.real >= -1e-9
    assert close(v.real, abs(x.to_complex()) ** 2, 1e-9)


def test_omega_powers():
    w = RingScalar.omega(1)
    p = RingScalar.one()
    for _ in range(4):
        p = p * w
    assert p == RingScalar.make(-1, 0, 0, 0)
    for _ in range(4):
        p = p * w
    assert p == RingScalar.one()


def test_overflow_is_hard_error():
    big = RingScalar.make(2**40, 0, 0, 0)
    with pytest.raises(RingOverflowError):
        _ = big * big
    with pytest.raises(RingOverflowError):
        OmegaInt(2**63, 0, 0, 0)
