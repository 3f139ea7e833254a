"""Probability distributions on selector vectors in F_2^k.

Four concrete kinds cover everything the toolkit needs:

* explicit sparse maps (small k, exact analysis),
* degree-induced distributions (sample a degree, then a uniform support of
  that weight) for arbitrary k,
* point masses,
* staircase columns: the structured per-step distributions whose first k
  draws always stack into a full-rank triangular generator matrix.

An erasure channel folds into the distribution itself: with erasure
probability eps the receiver effectively sees D*(v) = (1-eps) D(v) for
v != 0 and D*(0) = eps + (1-eps) D(0), so analysis never needs a separate
channel model.

Degree-induced kinds are never materialized: sampling and point masses stay
O(k) in memory regardless of k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .gf2 import mask_from_bits, mask_to_bits

MASS_ATOL = 1e-12
EXPLICIT_LIMIT = 12


def _mask_bits(mask: int, k: int) -> np.ndarray:
    return np.array([i for i in range(k) if (mask >> i) & 1], dtype=np.int64)


# ---------------------------------------------------------------------------
# degree distributions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DegreeDistribution:
    """Probability weights on symbol degrees 1..k (index d-1)."""

    k: int
    weights: np.ndarray
    meta: tuple | None = None

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)  # private copy
        if w.shape != (self.k,):
            raise ValueError(f"need {self.k} degree weights, got shape {w.shape}")
        if (w < 0).any():
            raise ValueError("degree weights must be nonnegative")
        if abs(float(w.sum()) - 1.0) > MASS_ATOL:
            raise ValueError(f"degree weights sum to {w.sum()}, not 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def cum(self) -> np.ndarray:
        c = self.__dict__.get("_cum")
        if c is None:
            c = np.cumsum(self.weights)
            c[-1] = 1.0
            c.setflags(write=False)
            self.__dict__["_cum"] = c
        return c

    def prob(self, d: int) -> float:
        if d < 1 or d > self.k:
            return 0.0
        return float(self.weights[d - 1])

    def sample_degrees(self, rng: np.random.Generator, m: int) -> np.ndarray:
        """Draw m degrees in 1..k."""
        return np.searchsorted(self.cum, rng.random(m), side="right") + 1


def ideal_soliton(k: int) -> DegreeDistribution:
    """rho(1) = 1/k, rho(d) = 1/(d(d-1)) for d = 2..k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    w = np.zeros(k)
    w[0] = 1.0 / k
    for d in range(2, k + 1):
        w[d - 1] = 1.0 / (d * (d - 1))
    return DegreeDistribution(k, w, meta=("ideal",))


@lru_cache(maxsize=4096)
def robust_soliton(k: int, c: float, delta: float) -> DegreeDistribution:
    """Robust soliton degree distribution with parameters (k, c, delta).

    R = c ln(k/delta) sqrt(k); the extra component tau(d) = R/(dk) runs up
    to the spike at d = ceil(k/R), which carries R ln(R/delta)/k; the sum
    rho + tau is normalized.  The spike index is taken as the ceiling of
    k/R (k/R is generally non-integral); when the spike lands beyond k the
    tau series is truncated at k, which only happens for degenerate small-k
    parameter choices.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if c <= 0:
        raise ValueError("c must be > 0")
    if not 0 < delta < 1:
        raise ValueError("delta must be in (0, 1)")
    rho = ideal_soliton(k).weights.copy()
    r_const = c * math.log(k / delta) * math.sqrt(k)
    spike = math.ceil(k / r_const)
    tau = np.zeros(k)
    for d in range(1, min(spike, k + 1)):
        tau[d - 1] = r_const / (d * k)
    if spike <= k:
        tau[spike - 1] = r_const * math.log(r_const / delta) / k
    w = rho + tau
    w /= w.sum()
    return DegreeDistribution(k, w, meta=("robust", float(c), float(delta)))


def robust_soliton_spike(k: int, c: float, delta: float) -> int:
    """Index of the robust-soliton spike degree, ceil(k/R)."""
    return math.ceil(k / (c * math.log(k / delta) * math.sqrt(k)))


# ---------------------------------------------------------------------------
# vector distributions
# ---------------------------------------------------------------------------


class VectorDistribution:
    """A probability distribution on masks in F_2^k (abstract base)."""

    kind = "abstract"
    k: int

    def mass_of(self, mask: int) -> float:
        raise NotImplementedError

    def sample_mask(self, rng: np.random.Generator) -> int:
        raise NotImplementedError

    def sample_masks(self, rng: np.random.Generator, m: int) -> np.ndarray:
        """Draw m masks as an int64 array (requires k <= 62)."""
        if self.k > 62:
            raise ValueError("batched mask sampling requires k <= 62")
        return np.array([self.sample_mask(rng) for _ in range(m)], dtype=np.int64)

    def sample_supports(self, rng: np.random.Generator, m: int) -> list[np.ndarray]:
        """Draw m selectors as arrays of set-bit indices."""
        return [_mask_bits(self.sample_mask(rng), self.k) for _ in range(m)]

    def to_explicit(self, limit: int = EXPLICIT_LIMIT) -> "ExplicitDistribution":
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} k={self.k}>"


class ExplicitDistribution(VectorDistribution):
    """Sparse map mask -> probability; zero-probability entries are dropped."""

    kind = "explicit"

    def __init__(self, k: int, probs: dict[int, float]):
        self.k = k
        clean: dict[int, float] = {}
        total = 0.0
        for mask, p in probs.items():
            if p < 0:
                raise ValueError(f"negative probability {p} for mask {mask}")
            if mask < 0 or mask >> k:
                raise ValueError(f"mask {mask} does not fit in {k} bits")
            total += p
            if p > 0.0:
                clean[int(mask)] = float(p)
        if abs(total - 1.0) > MASS_ATOL:
            raise ValueError(f"total mass {total} differs from 1 beyond {MASS_ATOL}")
        self.probs = clean
        self._atoms = np.array(sorted(clean), dtype=np.int64)
        p = np.array([clean[int(a)] for a in self._atoms])
        self._cum = np.cumsum(p)
        self._cum[-1] = 1.0
        self._support_bits: list[np.ndarray] | None = None

    def mass_of(self, mask: int) -> float:
        return self.probs.get(mask, 0.0)

    @property
    def support(self) -> np.ndarray:
        return self._atoms

    def sample_mask(self, rng):
        i = int(np.searchsorted(self._cum, rng.random(), side="right"))
        return int(self._atoms[i])

    def sample_masks(self, rng, m):
        idx = np.searchsorted(self._cum, rng.random(m), side="right")
        return self._atoms[idx]

    def sample_supports(self, rng, m):
        if self._support_bits is None:
            self._support_bits = [_mask_bits(int(a), self.k) for a in self._atoms]
        idx = np.searchsorted(self._cum, rng.random(m), side="right")
        return [self._support_bits[i] for i in idx]

    def to_explicit(self, limit: int = EXPLICIT_LIMIT):
        return self

    def to_json(self):
        return {
            "kind": "explicit",
            "probs": {mask_to_bits(m, self.k): p for m, p in sorted(self.probs.items())},
        }


class PointMass(VectorDistribution):
    """All mass on a single selector."""

    kind = "point_mass"

    def __init__(self, k: int, mask: int):
        if mask < 0 or mask >> k:
            raise ValueError(f"mask {mask} does not fit in {k} bits")
        self.k = k
        self.mask = int(mask)

    def mass_of(self, mask):
        return 1.0 if mask == self.mask else 0.0

    def sample_mask(self, rng):
        return self.mask

    def sample_masks(self, rng, m):
        return np.full(m, self.mask, dtype=np.int64)

    def sample_supports(self, rng, m):
        bits = _mask_bits(self.mask, self.k)
        return [bits] * m

    def to_explicit(self, limit: int = EXPLICIT_LIMIT):
        return ExplicitDistribution(self.k, {self.mask: 1.0})

    def to_json(self):
        return {"kind": "point_mass", "vector": mask_to_bits(self.mask, self.k)}


class DegreeInduced(VectorDistribution):
    """D(v) = mu(wt(v)) / C(k, wt(v)): a degree draw then a uniform support."""

    kind = "degree_induced"

    def __init__(self, k: int, degree: DegreeDistribution):
        if degree.k != k:
            raise ValueError(f"degree distribution is over 1..{degree.k}, not 1..{k}")
        self.k = k
        self.degree = degree

    def mass_of(self, mask):
        if mask == 0:
            return 0.0
        w = bin(mask).count("1")
        return self.degree.prob(w) / math.comb(self.k, w)

    def sample_mask(self, rng):
        d = int(self.degree.sample_degrees(rng, 1)[0])
        support = rng.choice(self.k, size=d, replace=False)
        mask = 0
        for i in support:
            mask |= 1 << int(i)
        return mask

    def sample_masks(self, rng, m):
        if self.k > 62:
            raise ValueError("batched mask sampling requires k <= 62")
        d = self.degree.sample_degrees(rng, m)
        ranks = np.argsort(rng.random((m, self.k)), axis=1).argsort(axis=1)
        sel = ranks < d[:, None]
        return (sel * (np.int64(1) << np.arange(self.k, dtype=np.int64))).sum(axis=1)

    def sample_supports(self, rng, m):
        d = self.degree.sample_degrees(rng, m)
        order = np.argsort(rng.random((m, self.k)), axis=1)
        return [order[i, : d[i]].astype(np.int64) for i in range(m)]

    def to_explicit(self, limit: int = EXPLICIT_LIMIT):
        if self.k > limit:
            raise ValueError(f"refusing to expand 2^{self.k} masks (limit k <= {limit})")
        probs = {}
        for mask in range(1, 1 << self.k):
            p = self.mass_of(mask)
            if p:
                probs[mask] = p
        return ExplicitDistribution(self.k, probs)

    def to_json(self):
        meta = self.degree.meta
        if meta and meta[0] == "robust":
            return {"kind": "degree_induced", "soliton": "robust", "c": meta[1], "delta": meta[2]}
        if meta and meta[0] == "ideal":
            return {"kind": "degree_induced", "soliton": "ideal"}
        return {"kind": "degree_induced", "weights": [float(x) for x in self.degree.weights]}


class StaircaseColumn(VectorDistribution):
    """Step-t distribution of the triangular staircase construction.

    For step t in 1..k-1 the selector always has a 1 at coordinate k-t+1
    and zeros above it (toward coordinate k); the j = k-t coordinates below
    carry a uniformly random pattern of weight d-1 where d follows the
    robust soliton distribution on 1..j.  Step k is the plain unit vector
    at coordinate 1 (use PointMass for it).
    """

    kind = "staircase"

    def __init__(self, k: int, t: int, c: float, delta: float):
        if not 1 <= t <= k - 1:
            raise ValueError(f"staircase step t={t} must be in 1..{k - 1}")
        self.k = k
        self.t = t
        self.c = float(c)
        self.delta = float(delta)
        self.free = k - t  # coordinates 1..k-t are free, bit k-t is the pivot
        self.degree = robust_soliton(self.free, c, delta)

    def mass_of(self, mask):
        pivot = 1 << self.free
        if not mask & pivot or mask >> (self.free + 1):
            return 0.0
        u = mask & (pivot - 1)
        d = bin(u).count("1") + 1
        if d > self.free:
            return 0.0
        return self.degree.prob(d) / math.comb(self.free, d - 1)

    def sample_mask(self, rng):
        d = int(self.degree.sample_degrees(rng, 1)[0])
        mask = 1 << self.free
        if d > 1:
            for i in rng.choice(self.free, size=d - 1, replace=False):
                mask |= 1 << int(i)
        return mask

    def sample_supports(self, rng, m):
        out = []
        for _ in range(m):
            d = int(self.degree.sample_degrees(rng, 1)[0])
            if d > 1:
                below = np.sort(rng.choice(self.free, size=d - 1, replace=False))
                out.append(np.append(below, self.free).astype(np.int64))
            else:
                out.append(np.array([self.free], dtype=np.int64))
        return out

    def to_explicit(self, limit: int = EXPLICIT_LIMIT):
        if self.k > limit:
            raise ValueError(f"refusing to expand 2^{self.k} masks (limit k <= {limit})")
        probs = {}
        pivot = 1 << self.free
        for u in range(1 << self.free):
            mask = pivot | u
            p = self.mass_of(mask)
            if p:
                probs[mask] = p
        return ExplicitDistribution(self.k, probs)

    def to_json(self):
        return {"kind": "staircase", "t": self.t, "c": self.c, "delta": self.delta}


class ErasedDistribution(VectorDistribution):
    """A base distribution seen through an erasure channel."""

    kind = "erased"

    def __init__(self, base: VectorDistribution, eps: float):
        if not 0 <= eps < 1:
            raise ValueError(f"erasure probability {eps} must be in [0, 1)")
        if isinstance(base, ErasedDistribution):
            # erasures compose multiplicatively on the survival probability
            eps = 1.0 - (1.0 - base.eps) * (1.0 - eps)
            base = base.base
        self.base = base
        self.eps = float(eps)
        self.k = base.k

    def mass_of(self, mask):
        p = (1.0 - self.eps) * self.base.mass_of(mask)
        if mask == 0:
            p += self.eps
        return p

    def sample_mask(self, rng):
        if rng.random() < self.eps:
            return 0
        return self.base.sample_mask(rng)

    def sample_masks(self, rng, m):
        erased = rng.random(m) < self.eps
        masks = self.base.sample_masks(rng, m)
        masks[erased] = 0
        return masks

    def to_explicit(self, limit: int = EXPLICIT_LIMIT):
        return erasure_transform(self.base.to_explicit(limit), self.eps)

    def to_json(self):
        return {"kind": "erased", "eps": self.eps, "base": self.base.to_json()}


def erasure_transform(dist: VectorDistribution, eps: float) -> VectorDistribution:
    """Fold an erasure channel into a distribution.

    D*(v) = (1-eps) D(v) for v != 0 and D*(0) = eps + (1-eps) D(0).
    Explicit and point-mass inputs produce an explicit result; other kinds
    are wrapped (erasures compose: transforming twice with eps1, eps2 equals
    transforming once with 1-(1-eps1)(1-eps2)).
    """
    if not 0 <= eps < 1:
        raise ValueError(f"erasure probability {eps} must be in [0, 1)")
    if eps == 0:
        return dist
    if isinstance(dist, PointMass):
        dist = dist.to_explicit()
    if isinstance(dist, ExplicitDistribution):
        probs = {m: (1.0 - eps) * p for m, p in dist.probs.items() if m != 0}
        probs[0] = eps + (1.0 - eps) * dist.mass_of(0)
        return ExplicitDistribution(dist.k, probs)
    return ErasedDistribution(dist, eps)


# ---------------------------------------------------------------------------
# distribution sequences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PdsSpec:
    """A (possibly periodic) sequence of selector distributions.

    Step t uses prefix[t-1] while t <= len(prefix); beyond the prefix the
    sequence repeats with the given period (prefix must cover one period).
    """

    k: int
    prefix: tuple[VectorDistribution, ...]
    period: int | None = None

    def __post_init__(self):
        if not self.prefix:
            raise ValueError("prefix must contain at least one distribution")
        for d in self.prefix:
            if d.k != self.k:
                raise ValueError(f"distribution over F_2^{d.k} in a k={self.k} sequence")
        if self.period is not None:
            if self.period < 1:
                raise ValueError("period must be >= 1")
            if len(self.prefix) < self.period:
                raise ValueError(
                    f"prefix length {len(self.prefix)} shorter than period {self.period}"
                )

    def at(self, t: int) -> VectorDistribution:
        """Distribution for transmission step t (1-based)."""
        if t < 1:
            raise ValueError(f"step t={t} must be >= 1")
        if t <= len(self.prefix):
            return self.prefix[t - 1]
        if self.period is None:
            raise ValueError(f"step t={t} is beyond the prefix and no period is set")
        return self.prefix[(t - 1) % self.period]

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "period": self.period,
            "prefix": [d.to_json() for d in self.prefix],
        }


def pds_at(spec: PdsSpec, t: int) -> VectorDistribution:
    return spec.at(t)


def dist_from_json(k: int, doc: dict) -> VectorDistribution:
    kind = doc.get("kind")
    if kind == "explicit":
        probs = {mask_from_bits(bits): float(p) for bits, p in doc["probs"].items()}
        return ExplicitDistribution(k, probs)
    if kind == "point_mass":
        return PointMass(k, mask_from_bits(doc["vector"]))
    if kind == "degree_induced":
        if doc.get("soliton") == "robust":
            return DegreeInduced(k, robust_soliton(k, float(doc["c"]), float(doc["delta"])))
        if doc.get("soliton") == "ideal":
            return DegreeInduced(k, ideal_soliton(k))
        return DegreeInduced(k, DegreeDistribution(k, np.asarray(doc["weights"])))
    if kind == "staircase":
        return StaircaseColumn(k, int(doc["t"]), float(doc["c"]), float(doc["delta"]))
    if kind == "erased":
        return erasure_transform(dist_from_json(k, doc["base"]), float(doc["eps"]))
    raise ValueError(f"unknown distribution kind {kind!r}")


def pds_from_json(doc: dict) -> PdsSpec:
    k = int(doc["k"])
    prefix = tuple(dist_from_json(k, d) for d in doc["prefix"])
    period = doc.get("period")
    return PdsSpec(k, prefix, None if period is None else int(period))


# ---------------------------------------------------------------------------
# ready-made sequences
# ---------------------------------------------------------------------------


def uniform_distribution(k: int, include_zero: bool = True) -> ExplicitDistribution:
    """Uniform distribution on F_2^k (optionally excluding the zero vector)."""
    n = 1 << k
    if include_zero:
        return ExplicitDistribution(k, {m: 1.0 / n for m in range(n)})
    return ExplicitDistribution(k, {m: 1.0 / (n - 1) for m in range(1, n)})


def degree_to_vector_distribution(k: int, mu: DegreeDistribution) -> DegreeInduced:
    """The vector distribution induced by a degree distribution."""
    return DegreeInduced(k, mu)


def lt_pds(k: int, c: float, delta: float) -> PdsSpec:
    """Constant sequence: every step draws from the robust-soliton-induced
    distribution (the classic rateless baseline)."""
    return PdsSpec(k, (DegreeInduced(k, robust_soliton(k, c, delta)),), period=1)


def cprime_pds(k: int, c: float, delta: float) -> PdsSpec:
    """The varying sequence: k staircase steps (step k is the unit vector at
    coordinate 1), then floor(k/2) robust-soliton steps, repeating with
    period floor(3k/2).  At k=1 this degenerates to the unit column."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        return PdsSpec(1, (PointMass(1, 1),), period=1)
    stairs: list[VectorDistribution] = [
        StaircaseColumn(k, t, c, delta) for t in range(1, k)
    ]
    stairs.append(PointMass(k, 1))
    tail = DegreeInduced(k, robust_soliton(k, c, delta))
    prefix = tuple(stairs) + (tail,) * (k // 2)
    return PdsSpec(k, prefix, period=(3 * k) // 2)
