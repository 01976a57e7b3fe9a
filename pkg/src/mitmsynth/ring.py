"""Exact scalars of the ring Z[1/sqrt2, i].

A value is (a + b*w + c*w^2 + d*w^3) / sqrt(2)^k with w = exp(i*pi/4),
integer coefficients and k >= 0.  The only reduction rule in the numerator
basis is w^4 = -1, so the 4-tuple is unique; uniqueness of the whole scalar
additionally requires the normal form enforced by `RingScalar`: k = 0 or
the numerator is not divisible by sqrt2 (and zero always has k = 0).

Coefficients are kept inside checked 64-bit range; exceeding it raises
`RingOverflowError` rather than wrapping.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from functools import total_ordering

from .kernels import RingOverflowError

_INT64_MIN = -(2**63)
_INT64_MAX = 2**63 - 1

OMEGA = cmath.exp(1j * cmath.pi / 4)


def _checked(v: int) -> int:
    if not _INT64_MIN <= v <= _INT64_MAX:
        raise RingOverflowError(f"coefficient {v} exceeds checked 64-bit range")
    return v


@dataclass(frozen=True)
class OmegaInt:
    """Element of Z[w]: a + b*w + c*w^2 + d*w^3."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        for v in (self.a, self.b, self.c, self.d):
            _checked(v)

    def __add__(self, other: "OmegaInt") -> "OmegaInt":
        return OmegaInt(
            _checked(self.a + other.a),
            _checked(self.b + other.b),
            _checked(self.c + other.c),
            _checked(self.d + other.d),
        )

    def __neg__(self) -> "OmegaInt":
        return OmegaInt(-self.a, -self.b, -self.c, -self.d)

    def __sub__(self, other: "OmegaInt") -> "OmegaInt":
        return self + (-other)

    def __mul__(self, other: "OmegaInt") -> "OmegaInt":
        x = (self.a, self.b, self.c, self.d)
        y = (other.a, other.b, other.c, other.d)
        z = [0, 0, 0, 0]
        for i in range(4):
            for j in range(4):
                s = 1 if i + j < 4 else -1
                z[(i + j) % 4] += s * x[i] * y[j]
        return OmegaInt(*(_checked(v) for v in z))

    def conj(self) -> "OmegaInt":
        return OmegaInt(self.a, -self.d, -self.c, -self.b)

    @property
    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0 and self.c == 0 and self.d == 0

    def divisible_sqrt2(self) -> bool:
        return (self.a - self.c) % 2 == 0 and (self.b - self.d) % 2 == 0

    def div_sqrt2(self) -> "OmegaInt":
        # From sqrt2 = w - w^3: x*(w - w^3) = (b-d) + (a+c)w + (b+d)w^2 + (c-a)w^3.
        a, b, c, d = self.a, self.b, self.c, self.d
        return OmegaInt((b - d) // 2, (a + c) // 2, (b + d) // 2, (c - a) // 2)

    def mul_sqrt2(self) -> "OmegaInt":
        a, b, c, d = self.a, self.b, self.c, self.d
        return OmegaInt(_checked(b - d), _checked(a + c), _checked(b + d), _checked(c - a))

    def to_complex(self) -> complex:
        return self.a + self.b * OMEGA + self.c * OMEGA**2 + self.d * OMEGA**3


@total_ordering
@dataclass(frozen=True)
class RingScalar:
    """Normalized element num / sqrt(2)^sde of Z[1/sqrt2, i]."""

    num: OmegaInt
    sde: int = 0

    def __post_init__(self):
        if self.sde < 0:
            raise ValueError("sde must be non-negative")
        if self.num.is_zero and self.sde != 0:
            raise ValueError("zero must carry sde 0")
        if self.sde > 0 and self.num.divisible_sqrt2():
            raise ValueError("numerator still divisible by sqrt2; not normalized")

    @staticmethod
    def make(a: int, b: int, c: int, d: int, sde: int = 0) -> "RingScalar":
        """Build and normalize from raw components."""
        return normalize(OmegaInt(a, b, c, d), sde)

    @staticmethod
    def zero() -> "RingScalar":
        return RingScalar(OmegaInt(0, 0, 0, 0), 0)

    @staticmethod
    def one() -> "RingScalar":
        return RingScalar(OmegaInt(1, 0, 0, 0), 0)

    @staticmethod
    def omega(j: int = 1) -> "RingScalar":
        comps = [0, 0, 0, 0]
        comps[j % 4] = -1 if j % 8 >= 4 else 1
        return RingScalar(OmegaInt(*comps), 0)

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    def __add__(self, other: "RingScalar") -> "RingScalar":
        k = max(self.sde, other.sde)
        x, y = self.num, other.num
        for _ in range(k - self.sde):
            x = x.mul_sqrt2()
        for _ in range(k - other.sde):
            y = y.mul_sqrt2()
        return normalize(x + y, k)

    def __neg__(self) -> "RingScalar":
        return RingScalar(-self.num, self.sde)

    def __sub__(self, other: "RingScalar") -> "RingScalar":
        return self + (-other)

    def __mul__(self, other: "RingScalar") -> "RingScalar":
        return normalize(self.num * other.num, self.sde + other.sde)

    def conj(self) -> "RingScalar":
        return RingScalar(self.num.conj(), self.sde)

    def cmp_key(self) -> tuple[int, int, int, int, int]:
        n = self.num
        return (self.sde, n.a, n.b, n.c, n.d)

    def __lt__(self, other: "RingScalar") -> bool:
        return self.cmp_key() < other.cmp_key()

    def to_complex(self) -> complex:
        return self.num.to_complex() / (2 ** (self.sde / 2))

    def to_list(self) -> list[int]:
        """JSON text form: [a, b, c, d, k]."""
        n = self.num
        return [n.a, n.b, n.c, n.d, self.sde]

    @staticmethod
    def from_list(v) -> "RingScalar":
        if len(v) != 5:
            raise ValueError("ring scalar text form needs 5 integers")
        return RingScalar.make(*(int(x) for x in v))

    def __repr__(self) -> str:
        n = self.num
        return f"RingScalar({n.a},{n.b},{n.c},{n.d}; k={self.sde})"


def normalize(num: OmegaInt, sde: int) -> RingScalar:
    """Reduce num / sqrt2^sde to the unique normal form."""
    if num.is_zero:
        return RingScalar(num, 0)
    while sde > 0 and num.divisible_sqrt2():
        num = num.div_sqrt2()
        sde -= 1
    return RingScalar(num, sde)


def cmp(x: RingScalar, y: RingScalar) -> int:
    """Total order by (sde, a, b, c, d); -1, 0, or 1."""
    kx, ky = x.cmp_key(), y.cmp_key()
    return (kx > ky) - (kx < ky)
