"""Shared test helpers: random distributions and brute-force oracles."""

import numpy as np
import pytest

from fountainkit.distributions import ExplicitDistribution
from fountainkit.gf2 import span_basis


def random_explicit(k, rng, sparse=False):
    """A random explicit distribution on F_2^k (optionally on a random
    support subset)."""
    n = 1 << k
    w = rng.random(n)
    if sparse:
        keep = rng.random(n) < 0.6
        keep[int(rng.integers(1, n))] = True  # at least one nonzero atom
        w = w * keep
    w = w / w.sum()
    return ExplicitDistribution(k, {m: float(w[m]) for m in range(n) if w[m] > 0})


def exhaustive_subspace_marginals(dists):
    """Exact Pr(span of n sampled columns = U) by enumerating all column
    tuples; independent of the matrix machinery.  Only feasible for tiny k
    and n."""
    marg = {(): 1.0}
    for d in dists:
        nxt = {}
        for key, p in marg.items():
            for v, pv in d.probs.items():
                k2 = span_basis(key + (v,))
                nxt[k2] = nxt.get(k2, 0.0) + p * pv
        marg = nxt
    return marg


def brute_force_subspaces(k):
    """All subspaces of F_2^k as frozensets, found by filtering every subset
    of F_2^k for closure under XOR (contains 0 by closure with itself)."""
    n = 1 << k
    vectors = list(range(n))
    out = []
    # iterate over subsets containing 0 via bitmask over the nonzero vectors
    nz = vectors[1:]
    for pick in range(1 << len(nz)):
        s = {0}
        for i, v in enumerate(nz):
            if (pick >> i) & 1:
                s.add(v)
        closed = all((a ^ b) in s for a in s for b in s)
        if closed:
            out.append(frozenset(s))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(0xF0147)
