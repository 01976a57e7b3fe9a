"""Exact 2^n x 2^n matrices over Z[1/sqrt2, i].

A `RingMatrix` stores integer component planes for 1, w, w^2, w^3 plus one
shared denominator exponent, kept globally reduced so equal values have
identical representations.  Individual entries surface as normalized
`RingScalar`s.

Basis convention: qubit i is bit i of the basis-state index (qubit 0 is
the least significant bit), so ancillas appended as the highest-numbered
wires occupy the leading 2^n columns when zeroed.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .ring import RingScalar

_W = np.exp(1j * np.pi / 4)
_POWERS = np.array([1, _W, _W**2, _W**3])


class RingMatrix:
    __slots__ = ("n_qubits", "comps", "k")

    def __init__(self, n_qubits: int, comps: np.ndarray, k: int, reduce: bool = True):
        dim = 1 << n_qubits
        comps = np.asarray(comps, dtype=np.int64)
        if comps.shape != (4, dim, dim):
            raise ValueError(f"expected component shape (4, {dim}, {dim}), got {comps.shape}")
        if k < 0:
            raise ValueError("denominator exponent must be non-negative")
        if reduce:
            comps, kk = kernels.reduce_global(comps[None], np.array([k]))
            comps, k = comps[0], int(kk[0])
        self.n_qubits = n_qubits
        self.comps = comps
        self.comps.setflags(write=False)
        self.k = k

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    # -- constructors -------------------------------------------------

    @staticmethod
    def identity(n_qubits: int) -> "RingMatrix":
        dim = 1 << n_qubits
        comps = np.zeros((4, dim, dim), dtype=np.int64)
        comps[0] = np.eye(dim, dtype=np.int64)
        return RingMatrix(n_qubits, comps, 0, reduce=False)

    @staticmethod
    def zero(n_qubits: int) -> "RingMatrix":
        dim = 1 << n_qubits
        return RingMatrix(n_qubits, np.zeros((4, dim, dim), dtype=np.int64), 0, reduce=False)

    @staticmethod
    def from_scalars(n_qubits: int, entries: Sequence[RingScalar]) -> "RingMatrix":
        dim = 1 << n_qubits
        if len(entries) != dim * dim:
            raise ValueError("entry count does not match dimension")
        kmax = max((e.sde for e in entries), default=0)
        comps = np.zeros((4, dim, dim), dtype=np.int64)
        for pos, e in enumerate(entries):
            num = e.num
            for _ in range(kmax - e.sde):
                num = num.mul_sqrt2()
            r, c = divmod(pos, dim)
            comps[:, r, c] = (num.a, num.b, num.c, num.d)
        return RingMatrix(n_qubits, comps, kmax)

    # -- entry access --------------------------------------------------

    def entry(self, row: int, col: int) -> RingScalar:
        a, b, c, d = (int(v) for v in self.comps[:, row, col])
        return RingScalar.make(a, b, c, d, self.k)

    def entries(self) -> list[RingScalar]:
        dim = self.dim
        return [self.entry(r, c) for r in range(dim) for c in range(dim)]

    def normalized_fields(self) -> np.ndarray:
        """Row-major (dim*dim, 5) array of per-entry (sde, a, b, c, d)."""
        flat = self.comps.reshape(4, -1).T  # (dim*dim, 4)
        sde, norm = kernels.normalize_entries(flat, self.k)
        return np.concatenate([sde[:, None], norm], axis=1)

    def to_numpy(self) -> np.ndarray:
        """Double-precision complex image (for cross-checks only)."""
        return np.tensordot(_POWERS, self.comps, axes=(0, 0)) / np.sqrt(2.0) ** self.k

    # -- algebra -------------------------------------------------------

    def __matmul__(self, other: "RingMatrix") -> "RingMatrix":
        if self.n_qubits != other.n_qubits:
            raise ValueError("dimension mismatch")
        comps = kernels.matmul_comps(self.comps, other.comps)
        return RingMatrix(self.n_qubits, comps, self.k + other.k)

    def adjoint(self) -> "RingMatrix":
        return RingMatrix(self.n_qubits, kernels.adjoint_comps(self.comps), self.k, reduce=False)

    def tensor(self, other: "RingMatrix") -> "RingMatrix":
        """Kronecker product; self occupies the high-order wires."""
        comps = np.einsum("iab,jcd->ijacbd", self.comps, other.comps)
        # Combine component planes with w^4 = -1.
        n = self.n_qubits + other.n_qubits
        dim = 1 << n
        out = np.zeros((4, dim, dim), dtype=np.int64)
        for i in range(4):
            for j in range(4):
                s = 1 if i + j < 4 else -1
                out[(i + j) % 4] += s * comps[i, j].reshape(dim, dim)
        return RingMatrix(n, out, self.k + other.k)

    def permute_qubits(self, perm: Sequence[int]) -> "RingMatrix":
        """Relabel qubits: wire i of the input becomes wire perm[i]."""
        idx = permutation_indices(self.n_qubits, perm)
        comps = self.comps[:, idx][:, :, idx]
        return RingMatrix(self.n_qubits, comps, self.k, reduce=False)

    def scale_phase(self, j: int) -> "RingMatrix":
        return RingMatrix(
            self.n_qubits, kernels.omega_shift(self.comps, j, axis=0), self.k, reduce=False
        )

    # -- comparison and keys -------------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RingMatrix)
            and self.n_qubits == other.n_qubits
            and self.k == other.k
            and np.array_equal(self.comps, other.comps)
        )

    def __hash__(self):
        return hash((self.n_qubits, self.k, self.comps.tobytes()))

    def lex_cmp(self, other: "RingMatrix") -> int:
        """Row-major first-difference order on normalized entries."""
        if self.n_qubits != other.n_qubits:
            raise ValueError("dimension mismatch")
        a = self.normalized_fields()
        b = other.normalized_fields()
        diff = a != b
        rows = np.nonzero(diff.any(axis=1))[0]
        if len(rows) == 0:
            return 0
        r = rows[0]
        c = np.nonzero(diff[r])[0][0]
        return 1 if a[r, c] > b[r, c] else -1

    def fingerprint(self) -> bytes:
        """Deterministic 128-bit digest of the normalized entries."""
        fields = self.normalized_fields().reshape(-1)
        row = np.concatenate([np.array([self.n_qubits], dtype=np.int64), fields])
        h1, h2 = kernels.digest_rows(row)
        return int(h1).to_bytes(8, "little") + int(h2).to_bytes(8, "little")

    # -- serialization ---------------------------------------------------

    def to_json_dict(self) -> dict:
        fields = self.normalized_fields()
        entries = [[int(a), int(b), int(c), int(d), int(s)] for s, a, b, c, d in fields]
        return {"n": self.n_qubits, "entries": entries}

    @staticmethod
    def from_json_dict(data: dict) -> "RingMatrix":
        n = int(data["n"])
        entries = [RingScalar.from_list(e) for e in data["entries"]]
        return RingMatrix.from_scalars(n, entries)

    def is_unitary(self) -> bool:
        return (self @ self.adjoint()) == RingMatrix.identity(self.n_qubits)

    def __repr__(self):
        return f"RingMatrix(n={self.n_qubits}, k={self.k})"


def permutation_indices(n_qubits: int, perm: Sequence[int]) -> np.ndarray:
    """Basis-index permutation induced by relabeling wire i to perm[i]."""
    perm = list(perm)
    if sorted(perm) != list(range(n_qubits)):
        raise ValueError("not a qubit permutation")
    dim = 1 << n_qubits
    src = np.arange(dim)
    dest = np.zeros(dim, dtype=np.int64)
    for i, p in enumerate(perm):
        dest |= ((src >> i) & 1) << p
    # Row r of the permuted matrix corresponds to row dest^-1(r) of the input:
    # build gather indices such that out[idx] semantics match new[b'] = old[b].
    inv = np.zeros(dim, dtype=np.int64)
    inv[dest] = src
    return inv


def tensor_many(mats: Iterable[RingMatrix]) -> RingMatrix:
    mats = list(mats)
    out = mats[0]
    for m in mats[1:]:
        out = out.tensor(m)
    return out
