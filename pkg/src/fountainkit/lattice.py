"""The lattice of subspaces of F_2^k.

Enumerates every subspace via its unique reduced-echelon basis, builds the
cover relation (U is covered by U' iff U < U' and dim U' = dim U + 1), and
fixes a total order compatible with inclusion so subspaces can index the
rows and columns of transition matrices.  Strata (all subspaces of one
dimension) occupy contiguous index ranges.

Subspace counts grow as Galois numbers (29212 at k=7), so enumeration is
capped; the codec path never needs the lattice.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations, product

import numpy as np

from .gf2 import mask_to_bits, span_basis

DEFAULT_CAP = 7

REFINEMENT_RULES = ("key_asc", "key_desc")


class LatticeCapError(Exception):
    """Raised when a requested k exceeds the subspace-enumeration cap."""


@dataclass(frozen=True)
class Subspace:
    """One subspace: canonical basis key, dimension, cached member masks."""

    key: tuple[int, ...]
    dim: int
    members: tuple[int, ...]

    def contains(self, mask: int) -> bool:
        return mask in self.member_set

    @cached_property
    def member_set(self) -> frozenset:
        return frozenset(self.members)


def _echelon_bases(k: int, r: int):
    """Yield the canonical basis of every r-dimensional subspace of F_2^k."""
    if r == 0:
        yield ()
        return
    for pivots in combinations(range(k), r):
        pivset = set(pivots)
        free = [[b for b in range(p + 1, k) if b not in pivset] for p in pivots]
        for assign in product(*(range(1 << len(f)) for f in free)):
            basis = []
            for i, p in enumerate(pivots):
                v = 1 << p
                bits = assign[i]
                for j, b in enumerate(free[i]):
                    if (bits >> j) & 1:
                        v |= 1 << b
                basis.append(v)
            yield tuple(sorted(basis))


def _expand_members(basis: tuple[int, ...]) -> tuple[int, ...]:
    members = [0]
    for b in basis:
        members.extend([m ^ b for m in members])
    return tuple(sorted(members))


class SubspaceLattice:
    """All subspaces of F_2^k with covers, strata, and a total refinement.

    Positions are 0-based everywhere internally; ``phi`` exposes the 1-based
    order used in reports, with phi({0}) = 1.
    """

    def __init__(self, k: int, refinement: str = "key_asc", cap: int = DEFAULT_CAP):
        if k < 1:
            raise ValueError("k must be >= 1")
        if k > cap:
            raise LatticeCapError(
                f"k={k} exceeds the subspace-enumeration cap {cap} "
                f"(the lattice has too many subspaces to hold dense matrices)"
            )
        if refinement not in REFINEMENT_RULES:
            raise ValueError(f"unknown refinement rule {refinement!r}")
        self.k = k
        self.refinement = refinement

        subspaces: list[Subspace] = []
        for r in range(k + 1):
            keys = sorted(_echelon_bases(k, r), reverse=(refinement == "key_desc"))
            for key in keys:
                subspaces.append(Subspace(key, r, _expand_members(key)))
        self.subspaces = subspaces
        self.index = {s.key: i for i, s in enumerate(subspaces)}
        self.K = len(subspaces)

        self.J = [0] * (k + 1)
        for s in subspaces:
            self.J[s.dim] += 1
        self.stratum_start = [0] * (k + 2)
        for r in range(k + 1):
            self.stratum_start[r + 1] = self.stratum_start[r] + self.J[r]
        self.Kcounts = [sum(self.J[r:]) for r in range(k + 1)]

        self.covers = self._build_covers()
        self._member_matrix = None

    # -- order maps ---------------------------------------------------

    def phi(self, key: tuple[int, ...]) -> int:
        """1-based total-refinement index of a subspace."""
        return self.index[key] + 1

    def phi_r(self, key: tuple[int, ...]) -> int:
        """1-based index within the subspace's own stratum."""
        i = self.index[key]
        return i - self.stratum_start[self.subspaces[i].dim] + 1

    def stratum_slice(self, r: int) -> slice:
        if r < 0 or r > self.k:
            raise ValueError(f"stratum {r} out of range 0..{self.k}")
        return slice(self.stratum_start[r], self.stratum_start[r + 1])

    def stratum(self, r: int) -> list[Subspace]:
        return self.subspaces[self.stratum_slice(r)]

    # -- structure ----------------------------------------------------

    def _build_covers(self) -> list[list[int]]:
        covers: list[list[int]] = [[] for _ in range(self.K)]
        full = 1 << self.k
        for i, s in enumerate(self.subspaces):
            if s.dim == self.k:
                continue
            seen = set(s.members)
            ups = covers[i]
            for v in range(full):
                if v in seen:
                    continue
                key = span_basis(s.key + (v,))
                j = self.index[key]
                ups.append(j)
                seen.update(self.subspaces[j].members)
        return covers

    def covers_of(self, subspace: Subspace) -> list[Subspace]:
        """All subspaces covering the given one (dimension exactly +1)."""
        i = self.index.get(subspace.key)
        if i is None:
            raise KeyError(f"subspace {subspace.key!r} not in this lattice")
        return [self.subspaces[j] for j in self.covers[i]]

    def meet(self, a: Subspace, b: Subspace) -> Subspace:
        common = a.member_set & b.member_set
        return self.subspaces[self.index[span_basis(common)]]

    def join(self, a: Subspace, b: Subspace) -> Subspace:
        return self.subspaces[self.index[span_basis(a.key + b.key)]]

    def member_matrix(self) -> np.ndarray:
        """Boolean (K, 2^k) matrix: row i marks the member masks of subspace i."""
        if self._member_matrix is None:
            m = np.zeros((self.K, 1 << self.k), dtype=bool)
            for i, s in enumerate(self.subspaces):
                m[i, list(s.members)] = True
            m.setflags(write=False)
            self._member_matrix = m
        return self._member_matrix

    # -- export ---------------------------------------------------------

    def to_json_dict(self) -> dict:
        """JSON-friendly dump of keys, dims, covers, and the total order."""
        k = self.k
        return {
            "k": k,
            "refinement": self.refinement,
            "subspace_count": self.K,
            "J": list(self.J),
            "K_at_least": list(self.Kcounts),
            "subspaces": [
                {
                    "phi": i + 1,
                    "dim": s.dim,
                    "basis": [mask_to_bits(b, k) for b in s.key],
                    "covers": [j + 1 for j in self.covers[i]],
                }
                for i, s in enumerate(self.subspaces)
            ],
        }


def enumerate_subspaces(
    k: int, refinement: str = "key_asc", cap: int = DEFAULT_CAP
) -> SubspaceLattice:
    """Build the subspace lattice of F_2^k (k capped, default 7)."""
    return SubspaceLattice(k, refinement=refinement, cap=cap)


def build_refinement(lattice: SubspaceLattice):
    """Return (phi, phi_r) lookup callables for a built lattice."""
    return lattice.phi, lattice.phi_r
