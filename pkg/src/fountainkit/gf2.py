"""Dense GF(2) linear algebra on int bitsets.

Vectors live in F_2^k and are stored as Python ints: bit ``i`` of the mask
is coordinate ``i + 1``, so the bitstring ``"110"`` (coordinates 1 and 2
set) is the mask ``0b011``.  Matrices are ordered tuples of column masks;
column order is the transmission order and is significant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence


def mask_from_bits(bits: str) -> int:
    """Parse a bitstring (leftmost char = coordinate 1) into an int mask."""
    mask = 0
    for i, ch in enumerate(bits):
        if ch == "1":
            mask |= 1 << i
        elif ch != "0":
            raise ValueError(f"invalid bit character {ch!r} in {bits!r}")
    return mask


def mask_to_bits(mask: int, k: int) -> str:
    """Render a mask as a bitstring of length k, coordinate 1 first."""
    if mask < 0 or mask >> k:
        raise ValueError(f"mask {mask} does not fit in {k} bits")
    return "".join("1" if (mask >> i) & 1 else "0" for i in range(k))


def span_basis(masks: Iterable[int]) -> tuple[int, ...]:
    """Canonical (reduced row-echelon) basis of the span of the given masks.

    Each basis vector's pivot is its lowest set bit, pivots are unique, and
    no basis vector has a 1 at another's pivot.  The result is the sorted
    tuple of basis masks, which is identical for any generating set of the
    same subspace.
    """
    pivots: dict[int, int] = {}
    for v in masks:
        # clear every existing pivot bit from v (one pass suffices: each
        # stored row is zero at all pivots but its own)
        for pb, pv in pivots.items():
            if (v >> pb) & 1:
                v ^= pv
        if v == 0:
            continue
        b = (v & -v).bit_length() - 1
        # back-eliminate the new pivot bit from existing rows
        for pb, pv in pivots.items():
            if (pv >> b) & 1:
                pivots[pb] = pv ^ v
        pivots[b] = v
    return tuple(sorted(pivots.values()))


def reduce_mask(basis: Sequence[int], v: int) -> int:
    """Reduce v by a canonical span basis; returns 0 iff v is in the span."""
    by_pivot = {(b & -b).bit_length() - 1: b for b in basis}
    while v:
        p = (v & -v).bit_length() - 1
        if p not in by_pivot:
            return v
        v ^= by_pivot[p]
    return 0


@dataclass(frozen=True)
class Gf2Vector:
    """A vector in F_2^k backed by an int mask."""

    k: int
    mask: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("vector length must be >= 1")
        if self.mask < 0 or self.mask >> self.k:
            raise ValueError(f"mask {self.mask} does not fit in {self.k} bits")

    @classmethod
    def from_bits(cls, bits: str) -> "Gf2Vector":
        return cls(len(bits), mask_from_bits(bits))

    def to_bits(self) -> str:
        return mask_to_bits(self.mask, self.k)

    @property
    def weight(self) -> int:
        return bin(self.mask).count("1")

    def __xor__(self, other: "Gf2Vector") -> "Gf2Vector":
        return vec_add(self, other)

    def __repr__(self):
        return f"Gf2Vector({self.to_bits()!r})"


@dataclass(frozen=True)
class Gf2Matrix:
    """A k x t matrix over F_2 stored as an ordered tuple of column masks."""

    k: int
    columns: tuple[int, ...]

    def __post_init__(self):
        for c in self.columns:
            if c < 0 or c >> self.k:
                raise ValueError(f"column {c} does not fit in {self.k} rows")

    @classmethod
    def from_vectors(cls, vectors: Sequence[Gf2Vector]) -> "Gf2Matrix":
        if not vectors:
            raise ValueError("cannot infer k from an empty vector list")
        k = vectors[0].k
        for v in vectors:
            if v.k != k:
                raise ValueError(f"mixed vector lengths {k} and {v.k}")
        return cls(k, tuple(v.mask for v in vectors))

    @classmethod
    def from_bits(cls, k: int, columns: Sequence[str]) -> "Gf2Matrix":
        return cls(k, tuple(mask_from_bits(c) for c in columns))

    @property
    def n_cols(self) -> int:
        return len(self.columns)

    def column(self, j: int) -> Gf2Vector:
        return Gf2Vector(self.k, self.columns[j])

    def __repr__(self):
        cols = ", ".join(mask_to_bits(c, self.k) for c in self.columns)
        return f"Gf2Matrix(k={self.k}, cols=[{cols}])"


def vec_add(a: Gf2Vector, b: Gf2Vector) -> Gf2Vector:
    """Componentwise XOR of two vectors of equal length."""
    if a.k != b.k:
        raise ValueError(f"length mismatch: {a.k} != {b.k}")
    return Gf2Vector(a.k, a.mask ^ b.mask)


def rref(m: Gf2Matrix) -> tuple[Gf2Matrix, list[int]]:
    """Reduced row-echelon form of a matrix over F_2.

    Returns (R, pivots) where R has the same row space as m and pivots
    lists the pivot column indices in increasing order.
    """
    k, t = m.k, m.n_cols
    # rows as masks over the t columns: bit j of row i = entry (i, j)
    rows = [0] * k
    for j, col in enumerate(m.columns):
        for i in range(k):
            if (col >> i) & 1:
                rows[i] |= 1 << j
    pivots: list[int] = []
    pr = 0
    for j in range(t):
        found = -1
        for i in range(pr, k):
            if (rows[i] >> j) & 1:
                found = i
                break
        if found < 0:
            continue
        rows[pr], rows[found] = rows[found], rows[pr]
        for i in range(k):
            if i != pr and (rows[i] >> j) & 1:
                rows[i] ^= rows[pr]
        pivots.append(j)
        pr += 1
    out_cols = [0] * t
    for i in range(k):
        for j in range(t):
            if (rows[i] >> j) & 1:
                out_cols[j] |= 1 << i
    return Gf2Matrix(k, tuple(out_cols)), pivots


def rank(m: Gf2Matrix) -> int:
    """GF(2) rank of a matrix (number of RREF pivots)."""
    return len(span_basis(m.columns))


def column_space_key(m: Gf2Matrix) -> tuple[int, ...]:
    """Canonical key for the column space u(M).

    The key is the sorted tuple of the RREF basis masks of the span of the
    columns; equal subspaces produce identical keys regardless of the
    generating columns.  The empty matrix maps to the key of {0}: ().
    """
    return span_basis(m.columns)


def in_span(basis: Gf2Matrix, v: Gf2Vector) -> bool:
    """True iff v lies in the column space of basis."""
    if basis.k != v.k:
        raise ValueError(f"length mismatch: {basis.k} != {v.k}")
    return reduce_mask(span_basis(basis.columns), v.mask) == 0
