"""Exact rank-evolution analysis over the subspace lattice.

The received generator subspace performs a Markov walk on the subspace
lattice: one received selector either leaves the current subspace fixed
(the selector already lies inside it) or lifts it to the unique covering
subspace containing the selector.  Indexing subspaces by the lattice's
total order turns one step into a K x K row-stochastic matrix T with

    T(i, j) = beta_D(U_i, U_j),

    beta_D(U, U') = sum of D over U' \\ U   if U' covers U,
                    sum of D over U         if U' = U,
                    0                       otherwise,

and n steps into the left-to-right product F_n = T_1 ... T_n whose first
row holds the marginal law of the subspace after n transmissions.  From
F_n the module derives:

* alpha(F, r): probability the received selectors have rank >= r,
* gamma(F, r): per-vector mass of rank-r subspaces containing the vector,
  whose argmin set is exactly the support an optimal next distribution
  must use,
* the closed-form increment alpha_{r,n+1} - alpha_{r,n} for a candidate
  next distribution, and its distribution-free upper bound,
* a greedy step-by-step designer built on the argmin criterion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import (
    ExplicitDistribution,
    PdsSpec,
    PointMass,
    VectorDistribution,
)
from .gf2 import mask_to_bits
from .lattice import Subspace, SubspaceLattice, enumerate_subspaces

GAMMA_TIE_ATOL = 1e-10
TIE_RULES = ("uniform_over_argmin", "lexicographic_first")
MAX_DESIGN_STEPS = 4096


@dataclass(frozen=True)
class FountainMatrix:
    """Single-step rank-evolution operator for one distribution."""

    lattice: SubspaceLattice
    entries: np.ndarray
    source: VectorDistribution

    @property
    def K(self) -> int:
        return self.lattice.K


@dataclass(frozen=True)
class FountainProduct:
    """Left-to-right product of step matrices; depth = number of steps."""

    lattice: SubspaceLattice
    entries: np.ndarray
    depth: int
    history: tuple[str, ...] = ()

    def extend(self, step: FountainMatrix) -> "FountainProduct":
        if step.lattice is not self.lattice:
            raise ValueError("step matrix built over a different lattice")
        return FountainProduct(
            self.lattice,
            self.entries @ step.entries,
            self.depth + 1,
            self.history + (step.source.kind,),
        )

    def max_row_sum_error(self) -> float:
        return float(np.abs(self.entries.sum(axis=1) - 1.0).max())


@dataclass(frozen=True)
class GammaProfile:
    """gamma values per nonzero mask, their minimum, and the full tie set."""

    r: int
    values: np.ndarray  # indexed by mask; entry 0 is unused
    min_value: float
    argmin: frozenset


def beta(dist: VectorDistribution, u: Subspace, up: Subspace) -> float:
    """Transition weight from subspace u to up under one draw from dist."""
    k = dist.k
    if (u.members and max(u.members) >> k) or (up.members and max(up.members) >> k):
        raise ValueError(f"subspace masks do not fit in F_2^{k}")
    expl = dist.to_explicit()
    if up.key == u.key:
        return sum(expl.mass_of(v) for v in u.members)
    if up.dim == u.dim + 1 and u.member_set <= up.member_set:
        return sum(expl.mass_of(v) for v in up.members if v not in u.member_set)
    return 0.0


def fountain_matrix(lattice: SubspaceLattice, dist: VectorDistribution) -> FountainMatrix:
    """Build the K x K one-step matrix for one distribution.

    Diagonal entries are computed by direct summation over subspace members
    (in canonical member order); cover entries use the mass difference of
    the two nested subspaces, which is exact up to float rounding.
    """
    if dist.k != lattice.k:
        raise ValueError(f"distribution over F_2^{dist.k}, lattice over F_2^{lattice.k}")
    expl = dist.to_explicit()
    d_vec = np.zeros(1 << lattice.k)
    for m, p in expl.probs.items():
        d_vec[m] = p
    mass = lattice.member_matrix() @ d_vec
    t = np.zeros((lattice.K, lattice.K))
    for i, s in enumerate(lattice.subspaces):
        t[i, i] = sum(expl.mass_of(v) for v in s.members)
        mi = mass[i]
        for j in lattice.covers[i]:
            t[i, j] = max(mass[j] - mi, 0.0)
    t.setflags(write=False)
    return FountainMatrix(lattice, t, dist)


def identity_product(lattice: SubspaceLattice) -> FountainProduct:
    """Depth-0 product: the walk starts at {0} with probability 1."""
    e = np.eye(lattice.K)
    e.setflags(write=False)
    return FountainProduct(lattice, e, 0)


def fountain_product(
    lattice: SubspaceLattice, dists: list[VectorDistribution] | tuple
) -> FountainProduct:
    """Product of the step matrices of the given distributions, in order."""
    if not dists:
        raise ValueError("need at least one distribution")
    f = identity_product(lattice)
    for d in dists:
        f = f.extend(fountain_matrix(lattice, d))
    return f


def fountain_block(f, r: int, rp: int) -> np.ndarray:
    """Submatrix between the dimension-r rows and dimension-rp columns."""
    lat = f.lattice
    return f.entries[lat.stratum_slice(r), lat.stratum_slice(rp)]


def block_norm(f, r: int, rp: int) -> float:
    """Entrywise 1-norm of the (r, rp) block (entries are nonnegative)."""
    return float(np.abs(fountain_block(f, r, rp)).sum())


def alpha(f, r: int) -> float:
    """Probability that the received selectors have rank >= r."""
    lat = f.lattice
    if r < 0 or r > lat.k:
        raise ValueError(f"rank {r} out of range 0..{lat.k}")
    return float(f.entries[0, lat.stratum_start[r]:].sum())


def gamma_profile(f, r: int, atol: float = GAMMA_TIE_ATOL) -> GammaProfile:
    """Per-vector mass of rank-r subspaces containing each nonzero vector.

    r = 0 is the empty sum: all values 0 and every nonzero vector ties.
    """
    lat = f.lattice
    if r < 0 or r > lat.k:
        raise ValueError(f"rank {r} out of range 0..{lat.k}")
    n_masks = 1 << lat.k
    if r == 0:
        values = np.zeros(n_masks)
        return GammaProfile(0, values, 0.0, frozenset(range(1, n_masks)))
    sl = lat.stratum_slice(r)
    values = f.entries[0, sl] @ lat.member_matrix()[sl]
    gmin = float(values[1:].min())
    argmin = frozenset(
        int(v) for v in range(1, n_masks) if values[v] <= gmin + atol
    )
    return GammaProfile(r, values, gmin, argmin)


def next_increment(f, r: int, dist: VectorDistribution) -> float:
    """Exact increase of alpha(., r) when dist generates the next selector:

    C = (1 - D(0)) * ||A_{0,r-1}||_1 - sum_{v != 0} gamma_{r-1}(v) D(v).
    """
    if r < 1 or r > f.lattice.k:
        raise ValueError(f"rank {r} out of range 1..{f.lattice.k}")
    expl = dist.to_explicit()
    prof = gamma_profile(f, r - 1)
    norm_prev = block_norm(f, 0, r - 1)
    cross = sum(prof.values[v] * p for v, p in sorted(expl.probs.items()) if v != 0)
    return float((1.0 - expl.mass_of(0)) * norm_prev - cross)


def bound_increment(f, r: int, eps_prime: float) -> float:
    """Upper bound on the increment over all distributions with mass
    eps_prime on the zero vector:

    C' = (1 - eps') * (||A_{0,r-1}||_1 - gamma_min_{r-1}).

    Attained exactly by any distribution supported on the gamma argmin set.
    """
    if not 0 <= eps_prime <= 1:
        raise ValueError(f"eps_prime {eps_prime} must be in [0, 1]")
    prof = gamma_profile(f, r - 1)
    return (1.0 - eps_prime) * (block_norm(f, 0, r - 1) - prof.min_value)


def optimal_support(f, r: int) -> frozenset:
    """Masks an optimal next distribution may weight: the gamma argmin set."""
    if r < 1 or r > f.lattice.k:
        raise ValueError(f"rank {r} out of range 1..{f.lattice.k}")
    return gamma_profile(f, r - 1).argmin


@dataclass(frozen=True)
class DesignResult:
    """Greedy designer output: the sequence plus per-step tie-set provenance."""

    spec: PdsSpec
    r_target: int
    tie_rule: str
    steps: tuple[dict, ...]


def _tie_break(k: int, support: frozenset, tie_rule: str) -> VectorDistribution:
    masks = sorted(support)
    if tie_rule == "uniform_over_argmin":
        return ExplicitDistribution(k, {m: 1.0 / len(masks) for m in masks})
    if tie_rule == "lexicographic_first":
        return PointMass(k, min(masks, key=lambda m: mask_to_bits(m, k)))
    raise ValueError(f"unknown tie rule {tie_rule!r} (choose from {TIE_RULES})")


def greedy_design(
    k: int,
    r_target: int,
    steps: int,
    tie_rule: str = "uniform_over_argmin",
    lattice: SubspaceLattice | None = None,
) -> DesignResult:
    """Design a sequence step by step: each next distribution is supported
    on the current gamma argmin set for the target rank, split per the tie
    rule.  Step 1 starts from the empty product, whose argmin set is every
    nonzero vector.  The construction does not depend on the channel
    erasure probability."""
    if tie_rule not in TIE_RULES:
        raise ValueError(f"unknown tie rule {tie_rule!r} (choose from {TIE_RULES})")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if steps > MAX_DESIGN_STEPS:
        raise ValueError(f"steps {steps} exceeds the tractable depth {MAX_DESIGN_STEPS}")
    lat = lattice if lattice is not None else enumerate_subspaces(k)
    if r_target < 1 or r_target > k:
        raise ValueError(f"target rank {r_target} out of range 1..{k}")
    f = identity_product(lat)
    prefix = []
    provenance = []
    for step in range(1, steps + 1):
        prof = gamma_profile(f, r_target - 1)
        dist = _tie_break(k, prof.argmin, tie_rule)
        prefix.append(dist)
        provenance.append(
            {
                "step": step,
                "gamma_min": prof.min_value,
                "argmin": sorted(mask_to_bits(m, k) for m in prof.argmin),
            }
        )
        f = f.extend(fountain_matrix(lat, dist))
    return DesignResult(PdsSpec(k, tuple(prefix)), r_target, tie_rule, tuple(provenance))


def verify_block_identities(f: FountainProduct, step: FountainMatrix, r: int) -> dict:
    """Cross-check the block-partition identities behind the increment formula.

    With B_r = A_{0,r-1} A'_{r-1,>=r} and B'_r = A_{0,>=r} A'_{>=r,>=r}
    (unprimed blocks from f, primed from the next step matrix):

        ||B'_r||_1 = alpha(f, r)
        ||B_r||_1  = (1 - D(0)) ||A_{0,r-1}||_1 - sum_v gamma_{r-1}(v) D(v)

    Raises ArithmeticError if either side disagrees beyond 1e-12; returns
    both sides of both identities.
    """
    lat = f.lattice
    if step.lattice is not lat:
        raise ValueError("step matrix built over a different lattice")
    if r < 1 or r > lat.k:
        raise ValueError(f"rank {r} out of range 1..{lat.k}")
    sl_prev = lat.stratum_slice(r - 1)
    start = lat.stratum_start[r]
    b = f.entries[0:1, sl_prev] @ step.entries[sl_prev, start:]
    bp = f.entries[0:1, start:] @ step.entries[start:, start:]
    report = {
        "r": r,
        "b_norm": float(np.abs(b).sum()),
        "b_expected": next_increment(f, r, step.source),
        "bprime_norm": float(np.abs(bp).sum()),
        "alpha_rn": alpha(f, r),
    }
    if abs(report["bprime_norm"] - report["alpha_rn"]) > 1e-12:
        raise ArithmeticError(f"||B'_r||_1 != alpha_r: {report}")
    if abs(report["b_norm"] - report["b_expected"]) > 1e-12:
        raise ArithmeticError(f"||B_r||_1 != increment expression: {report}")
    return report
