"""Exact matrices for the named synthesis targets.

Wire conventions (qubit 0 is the least significant basis-index bit):
controlled gates put the control on wire 0 and act on wire 1; 3-qubit
classical gates read inputs (a, b, c) off wires (0, 1, 2); the negative
control of toffoli-neg sits on the second control wire; the 1-bit adder
maps wires (a, b, carry-in, 0) to (a, a xor b, sum, carry-out).  Depth
results are relabel-invariant, so the convention never affects reported
optima.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .matrix import RingMatrix
from .ring import RingScalar

_ZERO = RingScalar.zero()
_ONE = RingScalar.one()
_I = RingScalar.make(0, 0, 1, 0)  # w^2
_NEG_I = RingScalar.make(0, 0, -1, 0)
_W = RingScalar.omega(1)
_H = RingScalar.make(1, 0, 0, 0, 1)  # 1/sqrt2
_HALF_1PI = RingScalar.make(0, 1, 0, 0, 1)  # (1+i)/2 = w/sqrt2
_HALF_1MI = RingScalar.make(0, 0, 0, -1, 1)  # (1-i)/2 = -w^3/sqrt2


def _from_entries(n: int, fn: Callable[[int, int], RingScalar]) -> RingMatrix:
    dim = 1 << n
    return RingMatrix.from_scalars(
        n, [fn(r, c) for r in range(dim) for c in range(dim)]
    )


def _permutation(n: int, out_of: Callable[[int], int]) -> RingMatrix:
    dim = 1 << n
    images = [out_of(b) for b in range(dim)]
    if sorted(images) != list(range(dim)):
        raise ValueError("map is not a basis permutation")
    return _from_entries(n, lambda r, c: _ONE if r == images[c] else _ZERO)


def _diagonal(n: int, phase_of: Callable[[int], RingScalar]) -> RingMatrix:
    return _from_entries(n, lambda r, c: phase_of(c) if r == c else _ZERO)


def _bit(b: int, w: int) -> int:
    return (b >> w) & 1


def _controlled_block(n: int, block: list[list[RingScalar]]) -> RingMatrix:
    """Control on wire 0 applying a single-qubit block to wire 1."""

    def fn(r, c):
        if _bit(c, 0) == 0:
            return _ONE if r == c else _ZERO
        if _bit(r, 0) == 0 or (r ^ c) & ~0b10:
            return _ZERO
        return block[_bit(r, 1)][_bit(c, 1)]

    return _from_entries(n, fn)


def build_cx() -> RingMatrix:
    return _permutation(2, lambda b: b ^ ((b & 1) << 1))


def build_cz() -> RingMatrix:
    return _diagonal(2, lambda b: -_ONE if b == 0b11 else _ONE)


def build_cy() -> RingMatrix:
    y = [[_ZERO, _NEG_I], [_I, _ZERO]]
    return _controlled_block(2, y)


def build_ch() -> RingMatrix:
    h = [[_H, _H], [_H, -_H]]
    return _controlled_block(2, h)


def build_cp() -> RingMatrix:
    return _diagonal(2, lambda b: _I if b == 0b11 else _ONE)


def build_cpdg() -> RingMatrix:
    return _diagonal(2, lambda b: _NEG_I if b == 0b11 else _ONE)


def build_cv() -> RingMatrix:
    v = [[_HALF_1PI, _HALF_1MI], [_HALF_1MI, _HALF_1PI]]
    return _controlled_block(2, v)


def build_ct() -> RingMatrix:
    return _diagonal(2, lambda b: _W if b == 0b11 else _ONE)


def build_w() -> RingMatrix:
    rows = [
        [_ONE, _ZERO, _ZERO, _ZERO],
        [_ZERO, _H, _H, _ZERO],
        [_ZERO, _H, -_H, _ZERO],
        [_ZERO, _ZERO, _ZERO, _ONE],
    ]
    return _from_entries(2, lambda r, c: rows[r][c])


def build_toffoli() -> RingMatrix:
    return _permutation(3, lambda b: b ^ ((_bit(b, 0) & _bit(b, 1)) << 2))


def build_toffoli_neg() -> RingMatrix:
    return _permutation(3, lambda b: b ^ ((_bit(b, 0) & (1 - _bit(b, 1))) << 2))


def build_fredkin() -> RingMatrix:
    def fn(b):
        if _bit(b, 0) == 0:
            return b
        x, y = _bit(b, 1), _bit(b, 2)
        return (b & 0b001) | (y << 1) | (x << 2)

    return _permutation(3, fn)


def build_peres() -> RingMatrix:
    def fn(b):
        a, x = _bit(b, 0), _bit(b, 1)
        out = b ^ ((a & x) << 2)
        return out ^ (a << 1)

    return _permutation(3, fn)


def build_qor() -> RingMatrix:
    return _permutation(3, lambda b: b ^ ((_bit(b, 0) | _bit(b, 1)) << 2))


def build_qft3() -> RingMatrix:
    return _from_entries(
        3, lambda r, c: RingScalar.omega(r * c) * RingScalar.make(1, 0, 0, 0, 3)
    )


def build_adder() -> RingMatrix:
    def fn(b):
        a, x, cin, d = (_bit(b, w) for w in range(4))
        s = a ^ x ^ cin
        carry = (a & x) ^ (a & cin) ^ (x & cin)
        return a | ((a ^ x) << 1) | (s << 2) | ((d ^ carry) << 3)

    return _permutation(4, fn)


CATALOG: dict[str, Callable[[], RingMatrix]] = {
    "cx": build_cx,
    "cz": build_cz,
    "cy": build_cy,
    "ch": build_ch,
    "cp": build_cp,
    "cpdg": build_cpdg,
    "cv": build_cv,
    "ct": build_ct,
    "w": build_w,
    "toffoli": build_toffoli,
    "toffoli-neg": build_toffoli_neg,
    "fredkin": build_fredkin,
    "peres": build_peres,
    "qor": build_qor,
    "qft3": build_qft3,
    "adder": build_adder,
}


def build_target(name: str) -> RingMatrix:
    """Exact unitary for a catalog name; raises KeyError for unknown names."""
    try:
        builder = CATALOG[name]
    except KeyError:
        raise KeyError(
            f"unknown target {name!r}; known: {', '.join(sorted(CATALOG))}"
        ) from None
    m = builder()
    return m
